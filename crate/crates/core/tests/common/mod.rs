//! Random instance families and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use lticontract::{Assumptions, Contract, Guarantees, InitialSet, Matrix, System};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.gen_range(-scale..scale)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Random unimodular-ish matrix as a product of shears, with its inverse.
pub fn shear_pair(rng: &mut ChaCha8Rng, n: usize) -> (Matrix<f64>, Matrix<f64>) {
    let mut t = Matrix::identity(n);
    let mut t_inv = Matrix::identity(n);
    if n < 2 {
        return (t, t_inv);
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let s = rng.gen_range(-1.0..1.0);
        let mut e = Matrix::identity(n);
        e[(i, j)] = s;
        let mut e_inv = Matrix::identity(n);
        e_inv[(i, j)] = -s;
        t = e.matmul(&t).unwrap();
        t_inv = t_inv.matmul(&e_inv).unwrap();
    }
    (t, t_inv)
}

/// Box-and-rate assumptions in transformed coordinates `z = T d`:
/// `lo <= z(k), z(k+1) <= hi` and `|z(k+1) - z(k)| <= rate` with
/// `rate < hi - lo`. The triple is extendable (hold `z` constant) and every
/// row is attained.
#[derive(Debug, Clone)]
pub struct BoxRate {
    pub t: Matrix<f64>,
    pub t_inv: Matrix<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rate: Vec<f64>,
}

impl BoxRate {
    pub fn random(rng: &mut ChaCha8Rng, n_d: usize) -> Self {
        let (t, t_inv) = shear_pair(rng, n_d);
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut rate = Vec::new();
        for _ in 0..n_d {
            let l = rng.gen_range(-3.0..0.0);
            let h = l + rng.gen_range(0.5..3.0);
            lo.push(l);
            hi.push(h);
            rate.push((h - l) * rng.gen_range(0.1..0.9));
        }
        Self { t, t_inv, lo, hi, rate }
    }

    pub fn n_d(&self) -> usize {
        self.lo.len()
    }

    pub fn assumptions(&self) -> Assumptions<f64> {
        let n = self.n_d();
        let z = Matrix::zeros(n, n);
        let neg = self.t.scale(&-1.0);
        let a1 = Matrix::zeros(2 * n, n)
            .vstack(&self.t.vstack(&neg).unwrap())
            .unwrap()
            .vstack(&self.t.vstack(&neg).unwrap())
            .unwrap();
        let a0 = self
            .t
            .vstack(&neg)
            .unwrap()
            .vstack(&z.vstack(&z).unwrap())
            .unwrap()
            .vstack(&neg.vstack(&self.t).unwrap())
            .unwrap();
        let mut rhs = Vec::new();
        rhs.extend(self.hi.iter().copied());
        rhs.extend(self.lo.iter().map(|x| -x));
        rhs.extend(self.hi.iter().copied());
        rhs.extend(self.lo.iter().map(|x| -x));
        rhs.extend(self.rate.iter().copied());
        rhs.extend(self.rate.iter().copied());
        Assumptions::new(a1, a0, rhs).unwrap()
    }

    /// Random admissible input sequence of `len` samples.
    pub fn sample_inputs(&self, rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
        let n = self.n_d();
        let mut z: Vec<f64> = (0..n).map(|i| rng.gen_range(self.lo[i]..=self.hi[i])).collect();
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(self.t_inv.matvec(&z).unwrap());
            for i in 0..n {
                let a = f64::max(self.lo[i], z[i] - self.rate[i]);
                let b = f64::min(self.hi[i], z[i] + self.rate[i]);
                // Hit the extremes now and then.
                z[i] = match rng.gen_range(0..6) {
                    0 => a,
                    1 => b,
                    _ => rng.gen_range(a..=b),
                };
            }
        }
        out
    }
}

/// Random system with an initial set `|x(0) - M d(0)| <= r` that is
/// nonempty for every `d(0)`.
pub fn random_system(rng: &mut ChaCha8Rng, n_x: usize, n_d: usize, n_y: usize) -> System<f64> {
    let a = random_matrix(rng, n_x, n_x, 1.0);
    let b = random_matrix(rng, n_x, n_d, 1.0);
    let c = random_matrix(rng, n_y, n_x, 1.0);
    let d = random_matrix(rng, n_y, n_d, 1.0);
    let w = (0..n_x).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let v = (0..n_y).map(|_| rng.gen_range(-0.5..0.5)).collect();
    System::new(a, b, c, d, Some(w), Some(v), coupled_initial_set(rng, n_x, n_d)).unwrap()
}

pub fn coupled_initial_set(rng: &mut ChaCha8Rng, n_x: usize, n_d: usize) -> InitialSet<f64> {
    let m = random_matrix(rng, n_x, n_d, 1.0);
    let eye = Matrix::identity(n_x);
    let fx = eye.vstack(&eye.scale(&-1.0)).unwrap();
    let fd = m.scale(&-1.0).vstack(&m).unwrap();
    let r: Vec<f64> = (0..n_x).map(|_| rng.gen_range(0.1..2.0)).collect();
    let mut f = r.clone();
    f.extend(r);
    InitialSet::new(fx, fd, f).unwrap()
}

/// Guarantee acting on the input part only: `[A1 0] u1 + [A0 0] u0 <= a0 + slack`.
pub fn input_guarantee(asm: &Assumptions<f64>, n_y: usize, slack: &[f64]) -> Guarantees<f64> {
    let m = asm.n_rows();
    let g1 = asm.a1().hstack(&Matrix::zeros(m, n_y)).unwrap();
    let g0 = asm.a0().hstack(&Matrix::zeros(m, n_y)).unwrap();
    let rhs = asm.rhs().iter().zip(slack).map(|(a, s)| a + s).collect();
    Guarantees::new(g1, g0, rhs).unwrap()
}

/// Guarantee acting on the output part only: `[0 A1] u1 + [0 A0] u0 <= a0`.
pub fn output_guarantee(asm: &Assumptions<f64>, n_d: usize) -> Guarantees<f64> {
    let m = asm.n_rows();
    let g1 = Matrix::zeros(m, n_d).hstack(asm.a1()).unwrap();
    let g0 = Matrix::zeros(m, n_d).hstack(asm.a0()).unwrap();
    Guarantees::new(g1, g0, asm.rhs().to_vec()).unwrap()
}

/// Stable system with a per-channel output bound that the system provably
/// keeps: `y = z`, `z(k+1) = L z(k) + Bz d(k)` in hidden coordinates
/// `x = S z`. Returned with `|y_i| <= c_i`, `c_i = margin * sum_j |Bz_ij|
/// sup|d_j| / (1 - |l_i|)`; `margin >= 1` makes the bound inductive.
pub struct BoundedOutput {
    pub sys: System<f64>,
    pub inputs: BoxRate,
    pub contract: Contract<f64>,
    pub bound: Vec<f64>,
    /// Hidden-to-state change of basis, `x = S z`.
    pub s: Matrix<f64>,
}

pub fn bounded_output(rng: &mut ChaCha8Rng, n_x: usize, n_d: usize, margin: f64) -> BoundedOutput {
    let (s, s_inv) = shear_pair(rng, n_x);
    let lambda: Vec<f64> = (0..n_x).map(|_| rng.gen_range(-0.9..0.9)).collect();
    let mut l = Matrix::zeros(n_x, n_x);
    for i in 0..n_x {
        l[(i, i)] = lambda[i];
    }
    let bz = random_matrix(rng, n_x, n_d, 1.0);
    let a = s.matmul(&l).unwrap().matmul(&s_inv).unwrap();
    let b = s.matmul(&bz).unwrap();
    let inputs = BoxRate {
        t: Matrix::identity(n_d),
        t_inv: Matrix::identity(n_d),
        lo: vec![-1.0; n_d],
        hi: vec![1.0; n_d],
        rate: vec![1.5; n_d],
    };
    let bound: Vec<f64> = (0..n_x)
        .map(|i| margin * bz.row(i).iter().map(|x| x.abs()).sum::<f64>() / (1.0 - lambda[i].abs()))
        .collect();
    let c = s_inv.clone();
    let fx = c.vstack(&c.scale(&-1.0)).unwrap();
    let mut f = bound.clone();
    f.extend(bound.iter().copied());
    let initial = InitialSet::new(fx, Matrix::zeros(2 * n_x, n_d), f).unwrap();
    let sys = System::new(a, b, c, Matrix::zeros(n_x, n_d), None, None, initial).unwrap();
    let contract = Contract::new(inputs.assumptions(), output_box(n_d, &bound)).unwrap();
    BoundedOutput {
        sys,
        inputs,
        contract,
        bound,
        s,
    }
}

/// `|y_i(k)| <= bound_i` on `[d; y]`.
pub fn output_box(n_d: usize, bound: &[f64]) -> Guarantees<f64> {
    let n_y = bound.len();
    let eye = Matrix::identity(n_y);
    let g0 = Matrix::zeros(2 * n_y, n_d)
        .hstack(&eye.vstack(&eye.scale(&-1.0)).unwrap())
        .unwrap();
    let mut rhs = bound.to_vec();
    rhs.extend(bound.iter().copied());
    Guarantees::new(Matrix::zeros(2 * n_y, n_d + n_y), g0, rhs).unwrap()
}

/// Initial state inside `|C x| <= bound` for [`bounded_output`] systems.
pub fn admissible_state(rng: &mut ChaCha8Rng, case: &BoundedOutput) -> Vec<f64> {
    let z: Vec<f64> = case.bound.iter().map(|&c| rng.gen_range(-c..=c)).collect();
    case.s.matvec(&z).unwrap()
}

// ---------------------------------------------------------------------------
// Dense f64 linear algebra used only by the oracles.

/// Solves `m x = b` by Gaussian elimination; `None` when (nearly) singular.
pub fn solve_square(m: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    let scale = m.data().iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Maximum of `c . x` over `{A x <= b}` by enumerating every vertex. The
/// polytope must be bounded and nonempty.
pub fn vertex_enumeration_max(c: &[f64], a: &Matrix<f64>, b: &[f64]) -> Option<f64> {
    let n = a.cols();
    let m = a.rows();
    assert!(m >= n, "need at least as many rows as variables");
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| a.row(i).to_vec()).collect();
        let sq = Matrix::from_rows(n, &rows).unwrap();
        let rhs: Vec<f64> = subset.iter().map(|&i| b[i]).collect();
        if let Some(x) = solve_square(&sq, &rhs) {
            let feasible = (0..m).all(|i| dot(a.row(i), &x) <= b[i] + 1e-9);
            if feasible {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |bv: f64| bv.max(v)));
            }
        }
        // next n-subset of 0..m in lexicographic order
        let mut i = n;
        while i > 0 && subset[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        subset[i - 1] += 1;
        for j in i..n {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rank by fraction-free elimination over `i128` after scaling integer
/// entries; intended for small integer matrices.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..m {
            if a[r][col] != 0 {
                let (x, y) = (a[rank][col], a[r][col]);
                for c in col..n {
                    a[r][c] = a[r][c] * x - a[rank][c] * y;
                }
                let g = a[r].iter().fold(0i128, |g, &v| gcd(g, v.abs()));
                if g > 1 {
                    a[r].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// [`random_system`] with `A` rescaled to infinity-norm `rho`, so long
/// rollouts stay bounded.
pub fn stable_random_system(rng: &mut ChaCha8Rng, n_x: usize, n_d: usize, n_y: usize, rho: f64) -> System<f64> {
    let base = random_system(rng, n_x, n_d, n_y);
    let norm = (0..n_x)
        .map(|i| base.a().row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let a = if norm > 0.0 { base.a().scale(&(rho / norm)) } else { base.a().clone() };
    System::new(
        a,
        base.b().clone(),
        base.c().clone(),
        base.d().clone(),
        Some(base.w().to_vec()),
        Some(base.v().to_vec()),
        base.initial_set().clone(),
    )
    .unwrap()
}

/// Writes a result line that is shown even when the test harness captures
/// output.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    use std::io::Write;
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[criterion {criterion}] {status}: {detail}");
}
