mod common;

use common::*;
use lticontract::lp::{self, LpBuilder, LpStatus};
use lticontract::{Matrix, Rational, Scalar};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn q(x: f64) -> Rational {
    Rational::from_float(x).unwrap()
}

/// Random bounded LP over `x_i >= -1, sum x <= n` plus extra rows through
/// an interior point.
fn bounded_lp(seed: u64) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let mut g = rng(seed);
    let n = g.gen_range(1..=5);
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut r = vec![0.0; n];
        r[i] = -1.0;
        rows.push(r);
        b.push(1.0);
    }
    rows.push(vec![1.0; n]);
    b.push(n as f64);
    for _ in 0..g.gen_range(0..4) {
        rows.push((0..n).map(|_| g.gen_range(-2.0..2.0)).collect());
        b.push(g.gen_range(0.1..2.0));
    }
    let c = (0..n).map(|_| g.gen_range(-3.0..3.0)).collect();
    (c, rows, b)
}

#[test]
fn exact_and_float_solvers_agree() {
    for seed in 0..40 {
        let (c, rows, b) = bounded_lp(seed);
        let n = c.len();
        let mut fb = LpBuilder::new(n);
        fb.objective(c.clone(), 0.0);
        let mut qb = LpBuilder::new(n);
        qb.objective(c.iter().map(|&x| q(x)).collect(), Rational::zero());
        for (r, rhs) in rows.iter().zip(&b) {
            fb.le(r.clone(), *rhs);
            qb.le(r.iter().map(|&x| q(x)).collect(), q(*rhs));
        }
        let vf = lp::solve(&fb.build().unwrap()).unwrap().value.unwrap();
        let qlp = qb.build().unwrap();
        let out = lp::solve(&qlp).unwrap();
        let vq = out.value.clone().unwrap();
        // The exact witness is exactly feasible and attains the value.
        let z = out.witness.unwrap();
        assert_eq!(qlp.max_violation(&z), Rational::zero());
        assert_eq!(qlp.evaluate(&z), vq);
        assert!((vf - vq.to_f64_lossy()).abs() < 1e-9, "seed {seed}: {vf} vs {vq}");
    }
}

#[test]
fn equality_rows_match_oracle() {
    // Equalities are handed to the oracle as pairs of inequalities.
    for seed in 100..160 {
        let (c, mut rows, mut b) = bounded_lp(seed);
        let n = c.len();
        let mut g = rng(seed);
        let e: Vec<f64> = (0..n).map(|_| g.gen_range(-1.0..1.0)).collect();
        let rhs = g.gen_range(-0.2..0.2);
        let mut bld = LpBuilder::new(n);
        bld.objective(c.clone(), 0.0);
        for (r, v) in rows.iter().zip(&b) {
            bld.le(r.clone(), *v);
        }
        bld.eq(e.clone(), rhs);
        let out = lp::solve(&bld.build().unwrap()).unwrap();
        rows.push(e.clone());
        b.push(rhs);
        rows.push(e.iter().map(|x| -x).collect());
        b.push(-rhs);
        let a = Matrix::from_rows(n, &rows).unwrap();
        match vertex_enumeration_max(&c, &a, &b) {
            Some(expected) => {
                assert_eq!(out.status, LpStatus::Optimal, "seed {seed}");
                assert!((out.value.unwrap() - expected).abs() < 1e-8, "seed {seed}");
            }
            None => assert_eq!(out.status, LpStatus::Infeasible, "seed {seed}"),
        }
    }
}

#[test]
fn witness_is_feasible_and_optimal_value_matches() {
    for seed in 200..260 {
        let (c, rows, b) = bounded_lp(seed);
        let mut bld = LpBuilder::new(c.len());
        bld.objective(c.clone(), 1.5);
        for (r, v) in rows.iter().zip(&b) {
            bld.le(r.clone(), *v);
        }
        let prog = bld.build().unwrap();
        let out = lp::solve(&prog).unwrap();
        let z = out.witness.unwrap();
        assert!(prog.max_violation(&z) < 1e-9);
        assert!((prog.evaluate(&z) - out.value.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn f32_solver_tracks_f64() {
    for seed in 300..330 {
        let (c, rows, b) = bounded_lp(seed);
        let mut b32 = LpBuilder::new(c.len());
        b32.objective(c.iter().map(|&x| x as f32).collect(), 0.0f32);
        let mut b64 = LpBuilder::new(c.len());
        b64.objective(c.clone(), 0.0);
        for (r, v) in rows.iter().zip(&b) {
            b32.le(r.iter().map(|&x| x as f32).collect(), *v as f32);
            b64.le(r.clone(), *v);
        }
        let v32 = lp::solve(&b32.build().unwrap()).unwrap().value.unwrap();
        let v64 = lp::solve(&b64.build().unwrap()).unwrap().value.unwrap();
        assert!((v32 as f64 - v64).abs() < 1e-3 * (1.0 + v64.abs()), "seed {seed}: {v32} vs {v64}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // No sampled feasible point beats the reported optimum.
    #[test]
    fn optimum_dominates_samples(seed in 0u64..10_000, samples in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 20)) {
        let (c, rows, b) = bounded_lp(seed);
        let n = c.len();
        let mut bld = LpBuilder::new(n);
        bld.objective(c.clone(), 0.0);
        for (r, v) in rows.iter().zip(&b) {
            bld.le(r.clone(), *v);
        }
        let value = lp::solve(&bld.build().unwrap()).unwrap().value.unwrap();
        for s in samples {
            let x = &s[..n];
            if rows.iter().zip(&b).all(|(r, v)| dot(r, x) <= *v) {
                prop_assert!(dot(&c, x) <= value + 1e-9);
            }
        }
    }
}
