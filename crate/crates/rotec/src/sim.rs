//! Closed-loop simulation of one scenario run.
//!
//! Each sample follows the LET convention baked into the augmented
//! model: the governor reads the current augmented state, produces a
//! command within its compute budget, and the resulting control input
//! takes effect one sample later through the held-input component of
//! the state. Budgets come from the task set (EDF leftover) or a
//! fixed override; in deterministic mode they are converted to exact
//! flow-step counts so a scenario plus a seed reproduces bit for bit.
//!
//! The trace records every sample and the run-level comparison
//! metrics: the performance index
//! `PI = sum_k ||v(k) - r(k)||^2 * dt` (exact for the ZOH-held
//! command) and the count of samples with any constrained output
//! above its bound.

use crate::error::Result;
use crate::flow::{self, Budget, FlowParams};
use crate::governor::{self, GovernorProblem};
use crate::rng::SplitMix64;
use crate::scenario::{BuiltScenario, GovernorMode, ReferenceProfile, Scenario};
use crate::sched::{self, BudgetPolicy};
use nalgebra::DVector;
use std::time::Duration;

/// RNG stream id for execution-time sampling within a run.
const STREAM_BUDGET: u64 = 1;

/// One governor sample in a closed-loop run.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub k: u64,
    /// Sample time `k * dt`, seconds.
    pub t: f64,
    /// Augmented state at the sample.
    pub z: DVector<f64>,
    /// Reference presented to the governor.
    pub r: DVector<f64>,
    /// Command applied over `[t, t + dt)`.
    pub v: DVector<f64>,
    /// Control input from the nominal law at `(z, v)`.
    pub u: DVector<f64>,
    /// Constrained outputs at `(z, v)`.
    pub y: DVector<f64>,
    pub accepted: bool,
    /// Compute budget granted, seconds (infinite for the oracle).
    pub budget: f64,
    pub flow_steps: u64,
    pub rejected_steps: u64,
    pub stalls: u64,
}

/// Complete run: per-sample records plus run-level metrics.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub seed: u64,
    pub records: Vec<SampleRecord>,
    /// Samples with any constrained output strictly above its bound.
    pub violation_count: u64,
    /// `sum_k ||v(k) - r(k)||^2 * dt`.
    pub pi: f64,
    /// Sample at which a fishhook profile switched, if it did.
    pub switched_at: Option<u64>,
}

impl SimTrace {
    pub fn total_rejected(&self) -> u64 {
        self.records.iter().map(|rec| rec.rejected_steps).sum()
    }

    pub fn total_flow_steps(&self) -> u64 {
        self.records.iter().map(|rec| rec.flow_steps).sum()
    }
}

/// Rectangle-rule tracking error integral; exact under ZOH because
/// the command is constant over each sample interval.
pub fn performance_index(records: &[SampleRecord], dt: f64) -> f64 {
    records.iter().map(|rec| (&rec.v - &rec.r).norm_squared() * dt).sum()
}

/// Stateful fishhook reference: arm on rate magnitude, switch on the
/// first zero crossing after arming, latch forever.
#[derive(Debug, Clone)]
pub struct FishhookTracker {
    steer: DVector<f64>,
    counter: DVector<f64>,
    rate_index: usize,
    arm_threshold: f64,
    armed_sign: Option<f64>,
    pub switched: bool,
}

impl FishhookTracker {
    pub fn new(
        steer: DVector<f64>,
        counter: DVector<f64>,
        rate_index: usize,
        arm_threshold: f64,
    ) -> Self {
        FishhookTracker { steer, counter, rate_index, arm_threshold, armed_sign: None, switched: false }
    }

    /// Reference for the sample observing augmented state `z`.
    pub fn reference(&mut self, z: &DVector<f64>) -> DVector<f64> {
        if !self.switched {
            let rate = z[self.rate_index];
            match self.armed_sign {
                None => {
                    if rate.abs() > self.arm_threshold {
                        self.armed_sign = Some(rate.signum());
                    }
                }
                Some(sign) => {
                    if rate * sign <= 0.0 {
                        self.switched = true;
                    }
                }
            }
        }
        if self.switched { self.counter.clone() } else { self.steer.clone() }
    }
}

/// Per-run options the CLI exposes.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub seed: u64,
    /// Convert budgets to exact step counts via the scenario's
    /// step_cost instead of racing the wall clock.
    pub deterministic: bool,
    /// Replace the scenario's budget policy with a fixed budget in
    /// seconds.
    pub budget_override: Option<f64>,
}

enum ReferenceState {
    Constant(DVector<f64>),
    Piecewise(Vec<(f64, DVector<f64>)>),
    Fishhook(FishhookTracker),
}

impl ReferenceState {
    fn from_profile(profile: &ReferenceProfile) -> ReferenceState {
        match profile {
            ReferenceProfile::Constant(v) => ReferenceState::Constant(v.clone()),
            ReferenceProfile::Piecewise(knots) => ReferenceState::Piecewise(knots.clone()),
            ReferenceProfile::Fishhook { steer, counter, rate_index, arm_threshold } => {
                ReferenceState::Fishhook(FishhookTracker::new(
                    steer.clone(),
                    counter.clone(),
                    *rate_index,
                    *arm_threshold,
                ))
            }
        }
    }

    fn reference(&mut self, t: f64, z: &DVector<f64>) -> DVector<f64> {
        match self {
            ReferenceState::Constant(v) => v.clone(),
            ReferenceState::Piecewise(knots) => {
                // Last knot at or before t; times are validated
                // increasing with the first at 0. The tiny slack
                // absorbs k*dt rounding.
                let mut val = &knots[0].1;
                for (tk, vk) in knots.iter() {
                    if *tk <= t + 1e-9 {
                        val = vk;
                    }
                }
                val.clone()
            }
            ReferenceState::Fishhook(tracker) => tracker.reference(z),
        }
    }

    fn switched_at(&self) -> Option<bool> {
        match self {
            ReferenceState::Fishhook(t) => Some(t.switched),
            _ => None,
        }
    }
}

/// Run one closed-loop experiment.
pub fn simulate(sc: &Scenario, built: &BuiltScenario, opts: &SimOptions) -> Result<SimTrace> {
    let mut prob: GovernorProblem = built.prob.clone();
    let sys = &built.sys;
    let set = &built.set;
    let dt = sc.dt;
    let flow_params: &FlowParams = &built.flow;

    let mut rng_budget = SplitMix64::stream(opts.seed, STREAM_BUDGET);
    let policy = match opts.budget_override {
        Some(b) => BudgetPolicy::Fixed(b),
        None => sc.budget,
    };

    let mut reference = ReferenceState::from_profile(&sc.reference);
    let mut z = sc.x0.clone();
    let mut v_prev = sc.v0.clone();
    let mut lambda = DVector::zeros(set.n_rows());

    let mut records = Vec::with_capacity(sc.samples);
    let mut violation_count = 0u64;
    let mut switched_at: Option<u64> = None;

    // The governor task may run slower than the base sampling rate; its
    // command is held between executions. Holding an admissible command
    // keeps the pair (z, v) inside the invariant set, so the skipped
    // samples stay certified.
    let gov_period = built.tasks.governor_task().period;
    let every = (gov_period / dt).round().max(1.0) as u64;

    for k in 0..sc.samples as u64 {
        let t = k as f64 * dt;
        let r_k = reference.reference(t, &z);
        if switched_at.is_none() && reference.switched_at() == Some(true) {
            switched_at = Some(k);
        }
        prob.set_reference(r_k.clone())?;
        let released = k % every == 0;

        let (v, accepted, budget_s, flow_steps, rejected_steps, stalls) = if !released {
            (v_prev.clone(), false, 0.0, 0, 0, 0)
        } else {
            match sc.mode {
                GovernorMode::Oracle => {
                    let (v_dag, lambda_dag) = governor::solve_tightened_oracle(&prob, &z, &r_k)?;
                    lambda = lambda_dag;
                    (v_dag, true, f64::INFINITY, 0, 0, 0)
                }
                GovernorMode::Rotec => {
                    let job = k / every;
                    let budget_s =
                        sched::governor_budget(&built.tasks, policy, job, &mut rng_budget)?;
                    let budget = if opts.deterministic {
                        let step_cost = sc.step_cost.expect("validated at build");
                        Budget::Steps(sched::deterministic_steps(budget_s, step_cost)?)
                    } else {
                        Budget::WallClock(Duration::from_secs_f64(budget_s))
                    };
                    let res = flow::rotec_step(&prob, &z, &v_prev, &lambda, budget, flow_params)?;
                    lambda = res.lambda_out;
                    (
                        res.v_applied,
                        res.accepted,
                        budget_s,
                        res.flow_steps,
                        res.rejected_steps,
                        res.stalls,
                    )
                }
            }
        };

        let u = sys.control(&z, &v);
        let y = sys.output(&z, &v);
        let violated = y.iter().zip(set.y_bar.iter()).any(|(yi, bi)| yi > bi);
        if violated {
            violation_count += 1;
        }

        records.push(SampleRecord {
            k,
            t,
            z: z.clone(),
            r: r_k,
            v: v.clone(),
            u: u.clone(),
            y,
            accepted,
            budget: budget_s,
            flow_steps,
            rejected_steps,
            stalls,
        });

        z = sys.step(&z, &u);
        v_prev = v;
    }

    let pi = performance_index(&records, dt);
    Ok(SimTrace { seed: opts.seed, records, violation_count, pi, switched_at })
}
