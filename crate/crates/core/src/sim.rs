//! Rollouts, the leader/follower scenario, and guarantee audits on traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Shape};
use crate::model::{Guarantees, System};
use crate::scalar::Scalar;
use crate::scenario::two_vehicle;

/// Audit threshold for guarantee violations on simulated traces.
pub const AUDIT_TOLERANCE: f64 = 1e-7;

/// Sampled run of a system: `inputs[k]`, `states[k]` and `outputs[k]` are
/// `d(k)`, `x(k)` and `y(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub dt: f64,
    pub inputs: Vec<Vec<T>>,
    pub states: Vec<Vec<T>>,
    pub outputs: Vec<Vec<T>>,
}

impl<T> Trace<T> {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Runs `sys` from `x_init` on the given input sequence. The trace has one
/// sample per input.
pub fn simulate<T: Scalar>(sys: &System<T>, inputs: &[Vec<T>], x_init: &[T], dt: f64) -> Result<Trace<T>> {
    if x_init.len() != sys.n_x() {
        return Err(Error::dim("initial state", Shape(sys.n_x(), 1), Shape(x_init.len(), 1)));
    }
    if let Some((k, d)) = inputs.iter().enumerate().find(|(_, d)| d.len() != sys.n_d()) {
        return Err(Error::dim(format!("input sample {k}"), Shape(sys.n_d(), 1), Shape(d.len(), 1)));
    }
    let mut states = Vec::with_capacity(inputs.len());
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut x = x_init.to_vec();
    for (k, d) in inputs.iter().enumerate() {
        outputs.push(sys.output(&x, d)?);
        let next = if k + 1 < inputs.len() { Some(sys.step(&x, d)?) } else { None };
        states.push(std::mem::replace(&mut x, next.unwrap_or_default()));
    }
    Ok(Trace {
        dt,
        inputs: inputs.to_vec(),
        states,
        outputs,
    })
}

/// A guarantee row exceeded at the pair `(k, k + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub k: usize,
    pub row: usize,
    pub amount: T,
}

/// Evaluates every guarantee row on consecutive samples and reports those
/// exceeding [`AUDIT_TOLERANCE`].
pub fn audit_guarantees<T: Scalar>(trace: &Trace<T>, g: &Guarantees<T>) -> Result<Vec<Violation<T>>> {
    let tol = T::lit(AUDIT_TOLERANCE);
    let stacked = |k: usize| {
        let mut u = trace.inputs[k].clone();
        u.extend_from_slice(&trace.outputs[k]);
        u
    };
    let mut out = Vec::new();
    for k in 0..trace.len().saturating_sub(1) {
        let r = g.residual(&stacked(k), &stacked(k + 1))?;
        for (row, amount) in r.into_iter().enumerate() {
            if amount > tol {
                out.push(Violation { k, row, amount });
            }
        }
    }
    Ok(out)
}

/// Leader speed profile: hold, bang-bang sway, cruise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderProfileParams {
    pub dt: f64,
    pub hold_s: f64,
    pub sway_s: f64,
    pub cruise_s: f64,
    pub p_init: f64,
    pub v_init: f64,
    pub v_low: f64,
    pub v_high: f64,
    /// Magnitude of the sway acceleration. Zero gives constant speed.
    pub a_mag: f64,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn kmh(v: f64) -> f64 {
    v / 3.6
}

impl Default for LeaderProfileParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            hold_s: 10.0,
            sway_s: 10.0,
            cruise_s: 10.0,
            p_init: 45.0,
            v_init: kmh(110.0),
            v_low: kmh(80.0),
            v_high: kmh(110.0),
            a_mag: 9.8,
            seed: DEFAULT_SEED,
        }
    }
}

fn steps(seconds: f64, dt: f64) -> usize {
    (seconds / dt).round() as usize
}

impl LeaderProfileParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.dt,
            self.hold_s,
            self.sway_s,
            self.cruise_s,
            self.p_init,
            self.v_init,
            self.v_low,
            self.v_high,
            self.a_mag,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "leader profile parameters".into(),
            });
        }
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.dt <= 0.0 {
            return bad("dt must be positive");
        }
        if self.hold_s < 0.0 || self.sway_s < 0.0 || self.cruise_s < 0.0 {
            return bad("phase lengths must be non-negative");
        }
        if self.v_low >= self.v_high {
            return bad("v_low must be below v_high");
        }
        if self.a_mag < 0.0 {
            return bad("a_mag must be non-negative");
        }
        Ok(())
    }

    /// Number of steps; the profile has one more sample than this.
    pub fn n_steps(&self) -> usize {
        steps(self.hold_s, self.dt) + steps(self.sway_s, self.dt) + steps(self.cruise_s, self.dt)
    }
}

/// Leader samples `d(k) = [p2(k), v2(k)]` and the acceleration `a2(k)`
/// applied between `k` and `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderProfile {
    pub inputs: Vec<Vec<f64>>,
    pub accel: Vec<f64>,
}

/// Generates `n_steps + 1 + extra` leader samples. During the sway phase
/// the leader brakes or accelerates at full `a_mag`, reversing when the
/// speed would leave `[v_low, v_high]` and after a random dwell of 3 to 12
/// steps. Integration is forward Euler, so the output satisfies the
/// kinematic assumptions with `|a2| <= a_mag`.
pub fn leader_profile_extended(params: &LeaderProfileParams, extra: usize) -> Result<LeaderProfile> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let dt = params.dt;
    let hold = steps(params.hold_s, dt);
    let sway_end = hold + steps(params.sway_s, dt);
    let total = params.n_steps() + extra;
    let (mut p, mut v) = (params.p_init, params.v_init);
    let mut dir = -1.0;
    let mut dwell: u32 = rng.gen_range(3..=12);
    let mut inputs = Vec::with_capacity(total + 1);
    let mut accel = Vec::with_capacity(total + 1);
    for k in 0..=total {
        let a = if (hold..sway_end).contains(&k) && params.a_mag > 0.0 {
            if dwell == 0 {
                dir = -dir;
                dwell = rng.gen_range(3..=12);
            }
            let exits = |d: f64| {
                let next = v + dt * d * params.a_mag;
                (d < 0.0 && next < params.v_low) || (d > 0.0 && next > params.v_high)
            };
            if exits(dir) {
                dir = -dir;
                dwell = rng.gen_range(3..=12);
            }
            dwell -= 1;
            if exits(dir) {
                0.0
            } else {
                dir * params.a_mag
            }
        } else {
            0.0
        };
        inputs.push(vec![p, v]);
        accel.push(a);
        p += dt * v;
        v += dt * a;
    }
    let check = two_vehicle::leader_assumptions(&two_vehicle::Params {
        dt,
        h: 1.0,
        a_min: params.a_mag,
        a_max: params.a_mag,
    });
    for k in 0..total {
        let r = check.residual(&inputs[k], &inputs[k + 1])?;
        let worst = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Relative slack for the position rows.
        if worst > 1e-9 * (1.0 + inputs[k][0].abs()) {
            return Err(Error::InvalidParameter(format!(
                "generated leader profile violates its assumptions at step {k} by {worst:e}"
            )));
        }
    }
    Ok(LeaderProfile { inputs, accel })
}

pub fn leader_profile(params: &LeaderProfileParams) -> Result<LeaderProfile> {
    leader_profile_extended(params, 0)
}

/// One row of the two-vehicle rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoVehicleSample {
    pub k: usize,
    pub t: f64,
    pub p2: f64,
    pub v2: f64,
    pub a2: f64,
    pub p1: f64,
    pub v1: f64,
    pub a1: f64,
    pub gap: f64,
    /// `gap / v1`; infinite when the follower is at rest.
    pub headway: f64,
    /// `p2 - p1 - h v1`; negative means the guarantee is violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoVehicleRun {
    pub trace: Trace<f64>,
    pub samples: Vec<TwoVehicleSample>,
}

impl TwoVehicleRun {
    pub fn min_slack(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.slack).reduce(f64::min)
    }

    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|s| s.slack < -AUDIT_TOLERANCE).count()
    }
}

/// Closed-loop run of the follower behind the generated leader. The
/// follower starts at `p1 = 0` with `v1 = p2(0) / h`, so the headway holds
/// with equality at time zero. The trace has `n_steps + 1` samples; the
/// dynamics are advanced one step further to report the last follower
/// acceleration.
pub fn two_vehicle_rollout(p: &two_vehicle::Params<f64>, leader: &LeaderProfileParams) -> Result<TwoVehicleRun> {
    if (p.dt - leader.dt).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "leader dt {} differs from model dt {}",
            leader.dt, p.dt
        )));
    }
    follower_rollout(&two_vehicle::follower_system(p), p.h, leader)
}

/// Rollout of an arbitrary follower model against the leader profile.
///
/// The system must take `d = [p2; v2]`, start from state `[p1; v1]` and
/// report `y = [p1; v1, ...]`. The follower starts at `p1 = 0` with
/// `v1 = p_init / h`, so the headway requirement holds with equality at
/// time zero.
pub fn follower_rollout(sys: &System<f64>, h: f64, leader: &LeaderProfileParams) -> Result<TwoVehicleRun> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter("headway must be positive".into()));
    }
    if sys.n_d() != 2 || sys.n_x() != 2 || sys.n_y() < 2 {
        return Err(Error::InvalidParameter(format!(
            "follower model needs 2 inputs, 2 states and at least 2 outputs, got {}, {}, {}",
            sys.n_d(),
            sys.n_x(),
            sys.n_y()
        )));
    }
    let dt = leader.dt;
    let profile = leader_profile_extended(leader, 1)?;
    let x0 = vec![0.0, leader.p_init / h];
    let long = simulate(sys, &profile.inputs, &x0, dt)?;
    let n = profile.inputs.len() - 1;
    let samples = (0..n)
        .map(|k| {
            let (d, y) = (&long.inputs[k], &long.outputs[k]);
            let gap = d[0] - y[0];
            TwoVehicleSample {
                k,
                t: k as f64 * dt,
                p2: d[0],
                v2: d[1],
                a2: profile.accel[k],
                p1: y[0],
                v1: y[1],
                a1: (long.outputs[k + 1][1] - y[1]) / dt,
                gap,
                headway: gap / y[1],
                slack: gap - h * y[1],
            }
        })
        .collect();
    let trace = Trace {
        dt,
        inputs: long.inputs[..n].to_vec(),
        states: long.states[..n].to_vec(),
        outputs: long.outputs[..n].to_vec(),
    };
    Ok(TwoVehicleRun { trace, samples })
}
