//! Real-time task-set modeling and the governor's compute budget.
//!
//! The governor runs as one periodic task among several under EDF
//! (deadlines equal to periods). A task set is schedulable iff its
//! total utilization is at most one; whatever processor time the
//! other tasks leave inside the governor's period is the budget the
//! flow may spend at that sample.
//!
//! Execution times of the non-governor tasks are either fixed at the
//! worst case or drawn from a truncated Weibull model, so Monte Carlo
//! campaigns exercise the governor under varying budgets. Budgets can
//! also be overridden to a constant for stress runs.
//!
//! Unit conventions: task timing (`wcet`, `period`, budgets) is in
//! seconds; the Weibull model is parameterized in milliseconds, the
//! scale the distribution is usually quoted in.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Stochastic model of one task's per-job execution time.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecTimeModel {
    /// Every job takes exactly the task's worst-case execution time.
    Fixed,
    /// Three-parameter Weibull, truncated by rejection at
    /// `truncation_ms`. All parameters in milliseconds.
    Weibull { shape: f64, location_ms: f64, scale_ms: f64, truncation_ms: f64 },
}

/// One periodic task, deadline equal to period.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: String,
    /// Worst-case execution time, seconds.
    pub wcet: f64,
    /// Release period (and relative deadline), seconds.
    pub period: f64,
    pub exec: ExecTimeModel,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(Error::InvalidInput(format!(
                "task {}: period must be positive, got {}",
                self.id, self.period
            )));
        }
        if !(self.wcet > 0.0 && self.wcet <= self.period) {
            return Err(Error::InvalidInput(format!(
                "task {}: wcet must lie in (0, period], got {} with period {}",
                self.id, self.wcet, self.period
            )));
        }
        if let ExecTimeModel::Weibull { shape, location_ms, scale_ms, truncation_ms } = self.exec {
            if !(shape > 0.0 && scale_ms > 0.0 && location_ms >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "task {}: weibull parameters must be positive",
                    self.id
                )));
            }
            if !(truncation_ms > location_ms) {
                return Err(Error::InvalidInput(format!(
                    "task {}: truncation {truncation_ms} ms must exceed location \
                     {location_ms} ms or rejection sampling cannot terminate",
                    self.id
                )));
            }
            if truncation_ms * 1e-3 > self.wcet + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "task {}: truncation {truncation_ms} ms exceeds wcet {} s",
                    self.id, self.wcet
                )));
            }
        }
        Ok(())
    }
}

/// Periodic task set with one designated governor task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pub tasks: Vec<TaskSpec>,
    /// Index into `tasks` of the governor task.
    pub governor: usize,
}

impl TaskSet {
    pub fn new(tasks: Vec<TaskSpec>, governor: usize) -> Result<Self> {
        if governor >= tasks.len() {
            return Err(Error::InvalidInput(format!(
                "governor index {governor} out of range ({} tasks)",
                tasks.len()
            )));
        }
        for t in &tasks {
            t.validate()?;
        }
        Ok(TaskSet { tasks, governor })
    }

    pub fn governor_task(&self) -> &TaskSpec {
        &self.tasks[self.governor]
    }
}

/// Total utilization `U = sum wcet_i / period_i` and the EDF
/// schedulability verdict `U <= 1` (non-strict).
pub fn utilization(ts: &TaskSet) -> Result<(f64, bool)> {
    let mut u = 0.0;
    for t in &ts.tasks {
        if !(t.period > 0.0) {
            return Err(Error::InvalidInput(format!(
                "task {}: period must be positive, got {}",
                t.id, t.period
            )));
        }
        u += t.wcet / t.period;
    }
    Ok((u, u <= 1.0))
}

/// Smallest period at which a task with worst case `wcet` still fits
/// next to existing load `other_utilization`: `wcet / (1 - U_rest)`.
pub fn min_governor_period(wcet: f64, other_utilization: f64) -> Result<f64> {
    if !(wcet > 0.0) {
        return Err(Error::InvalidInput(format!("wcet must be positive, got {wcet}")));
    }
    if !(other_utilization >= 0.0 && other_utilization < 1.0) {
        return Err(Error::InvalidInput(format!(
            "existing utilization must lie in [0, 1), got {other_utilization}"
        )));
    }
    Ok(wcet / (1.0 - other_utilization))
}

/// Inverse-CDF map of the untruncated three-parameter Weibull:
/// `location + scale * (-ln(1 - u))^(1/shape)`, milliseconds.
/// `u = 0` maps exactly to the location (the distribution's lower
/// bound).
pub fn weibull_quantile_ms(shape: f64, location_ms: f64, scale_ms: f64, u: f64) -> f64 {
    location_ms + scale_ms * (-(1.0 - u).ln()).powf(1.0 / shape)
}

/// One execution-time draw for a task, in seconds. Weibull draws above
/// the truncation point are rejected and redrawn, so the result never
/// exceeds the truncation (and hence the wcet). Deterministic given
/// the generator state.
pub fn sample_exec_time(spec: &TaskSpec, rng: &mut SplitMix64) -> f64 {
    match spec.exec {
        ExecTimeModel::Fixed => spec.wcet,
        ExecTimeModel::Weibull { shape, location_ms, scale_ms, truncation_ms } => loop {
            let ms = weibull_quantile_ms(shape, location_ms, scale_ms, rng.next_f64());
            if ms <= truncation_ms {
                return ms * 1e-3;
            }
        },
    }
}

/// How the per-sample budget is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetPolicy {
    /// EDF leftover inside the governor's period window.
    Edf,
    /// Constant budget in seconds, ignoring the task set (stress
    /// mode).
    Fixed(f64),
}

/// Processor time available to the governor job released at sample
/// `k`, in seconds.
///
/// Non-governor jobs whose deadlines fall at or before the governor's
/// (deadline ties resolved against the governor) preempt it under
/// EDF; the budget is the window length minus the time those jobs
/// execute inside the window. With every period equal to the
/// governor's this is computed exactly in seconds; otherwise jobs are
/// dispatched event by event on a 1 microsecond grid. All tasks are
/// released in phase at time zero and jobs of earlier windows are
/// taken as finished (carry-in is not modeled). A window fully
/// consumed by interference yields budget 0, never an error.
pub fn governor_budget(
    ts: &TaskSet,
    policy: BudgetPolicy,
    k: u64,
    rng: &mut SplitMix64,
) -> Result<f64> {
    match policy {
        BudgetPolicy::Fixed(b) => {
            if !(b >= 0.0) {
                return Err(Error::InvalidInput(format!("fixed budget must be >= 0, got {b}")));
            }
            Ok(b)
        }
        BudgetPolicy::Edf => edf_budget(ts, k, rng),
    }
}

fn edf_budget(ts: &TaskSet, k: u64, rng: &mut SplitMix64) -> Result<f64> {
    let gov = ts.governor_task();
    let period = gov.period;
    let others: Vec<&TaskSpec> =
        ts.tasks.iter().enumerate().filter(|&(i, _)| i != ts.governor).map(|(_, t)| t).collect();

    if others.iter().all(|t| t.period == period) {
        // Equal periods: every interfering job shares the governor's
        // release and deadline, so interference is one job per task.
        let mut interference = 0.0;
        for t in &others {
            interference += sample_exec_time(t, rng);
        }
        return Ok((period - interference).max(0.0));
    }

    // General case: event sweep on a 1 microsecond grid. Interfering
    // jobs all outrank the governor, so only their total pending work
    // matters, not their mutual order.
    let to_us = |s: f64| -> u64 { (s * 1e6).round() as u64 };
    let win_start = k * to_us(period);
    let win_end = win_start + to_us(period);

    // (release_us, exec_us) of jobs with release inside the window and
    // deadline at or before the governor's.
    let mut jobs: Vec<(u64, u64)> = Vec::new();
    for t in &others {
        let p_us = to_us(t.period);
        if p_us == 0 {
            return Err(Error::InvalidInput(format!(
                "task {}: period {} s is below the 1 microsecond dispatch grid",
                t.id, t.period
            )));
        }
        let mut rel = win_start.div_ceil(p_us) * p_us;
        while rel < win_end {
            if rel + p_us <= win_end {
                let exec = sample_exec_time(t, rng);
                jobs.push((rel, to_us(exec)));
            }
            rel += p_us;
        }
    }
    jobs.sort_unstable();

    let mut t_now = win_start;
    let mut pending: u64 = 0;
    let mut budget: u64 = 0;
    let mut idx = 0;
    while t_now < win_end {
        let next_event = if idx < jobs.len() { jobs[idx].0.min(win_end) } else { win_end };
        let span = next_event - t_now;
        let work = pending.min(span);
        pending -= work;
        budget += span - work;
        t_now = next_event;
        while idx < jobs.len() && jobs[idx].0 == t_now {
            pending += jobs[idx].1;
            idx += 1;
        }
    }
    Ok(budget as f64 * 1e-6)
}

/// Deterministic replacement for a wall-clock budget: the number of
/// flow steps a budget buys at a calibrated per-step cost. Any
/// positive budget buys at least one step, mirroring the wall-clock
/// rule that a step in progress at the deadline is completed; a zero
/// budget buys none.
pub fn deterministic_steps(budget: f64, step_cost: f64) -> Result<u64> {
    if !(step_cost > 0.0) {
        return Err(Error::InvalidInput(format!("step cost must be positive, got {step_cost}")));
    }
    if !(budget >= 0.0) {
        return Err(Error::InvalidInput(format!("budget must be >= 0, got {budget}")));
    }
    if budget == 0.0 {
        return Ok(0);
    }
    Ok(((budget / step_cost).floor() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weibull_sensor() -> TaskSpec {
        TaskSpec {
            id: "sensor".into(),
            wcet: 0.030,
            period: 0.100,
            exec: ExecTimeModel::Weibull {
                shape: 2.0,
                location_ms: 20.0,
                scale_ms: 4.0,
                truncation_ms: 30.0,
            },
        }
    }

    fn governor_spec(period: f64) -> TaskSpec {
        TaskSpec { id: "governor".into(), wcet: period, period, exec: ExecTimeModel::Fixed }
    }

    #[test]
    fn utilization_examples() {
        let empty = TaskSet { tasks: vec![], governor: 0 };
        // Construction rejects the bad governor index, but utilization
        // itself treats an empty list as zero load.
        assert!(TaskSet::new(vec![], 0).is_err());
        assert_eq!(utilization(&empty).unwrap(), (0.0, true));

        let two = TaskSet::new(
            vec![
                TaskSpec { id: "a".into(), wcet: 1.0, period: 2.0, exec: ExecTimeModel::Fixed },
                TaskSpec { id: "b".into(), wcet: 1.0, period: 2.0, exec: ExecTimeModel::Fixed },
            ],
            0,
        )
        .unwrap();
        // Boundary: U = 1 exactly is schedulable (the bound is
        // non-strict).
        assert_eq!(utilization(&two).unwrap(), (1.0, true));

        let mut bad = two.clone();
        bad.tasks[0].period = -1.0;
        assert!(utilization(&bad).is_err());
    }

    #[test]
    fn minimum_period_is_exact() {
        // Load 0.2 next to a 2 s worst case: 2 / (1 - 0.2) must be
        // exactly 2.5 in floating point.
        let p = min_governor_period(2.0, 0.2).unwrap();
        assert_eq!(p, 2.5);
        assert!(min_governor_period(2.0, 1.0).is_err());
        assert!(min_governor_period(0.0, 0.2).is_err());
    }

    #[test]
    fn weibull_quantile_bounds() {
        // u = 0 is exactly the location parameter.
        assert_eq!(weibull_quantile_ms(2.0, 20.0, 4.0, 0.0), 20.0);
        let med = weibull_quantile_ms(2.0, 20.0, 4.0, 0.5);
        assert!((med - (20.0 + 4.0 * (2.0f64.ln()).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn samples_respect_truncation() {
        let spec = weibull_sensor();
        let mut rng = SplitMix64::stream(11, 0);
        let mut sum = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let s = sample_exec_time(&spec, &mut rng);
            assert!((0.020..=0.030).contains(&s), "sample {s}");
            sum += s;
        }
        // Loose mean check; the precise truncated-moment comparison
        // lives in the oracle suite.
        let mean_ms = sum / n as f64 * 1e3;
        assert!((mean_ms - 23.54).abs() < 0.15, "mean {mean_ms} ms");
    }

    #[test]
    fn fixed_model_returns_wcet() {
        let spec = TaskSpec { id: "t".into(), wcet: 0.007, period: 0.1, exec: ExecTimeModel::Fixed };
        let mut rng = SplitMix64::new(0);
        assert_eq!(sample_exec_time(&spec, &mut rng), 0.007);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = weibull_sensor();
        let mut a = SplitMix64::stream(1234, 7);
        let mut b = SplitMix64::stream(1234, 7);
        for _ in 0..100 {
            assert_eq!(
                sample_exec_time(&spec, &mut a).to_bits(),
                sample_exec_time(&spec, &mut b).to_bits()
            );
        }
    }

    #[test]
    fn lone_governor_gets_whole_period() {
        let ts = TaskSet::new(vec![governor_spec(0.1)], 0).unwrap();
        let mut rng = SplitMix64::new(5);
        let b = governor_budget(&ts, BudgetPolicy::Edf, 0, &mut rng).unwrap();
        assert_eq!(b, 0.1);
    }

    #[test]
    fn sensor_pair_budget_band() {
        // Sensor task with Weibull support [20, 30] ms next to the
        // governor at the same 100 ms period: budget is always the
        // complement, in [70, 80] ms.
        let ts = TaskSet::new(vec![weibull_sensor(), governor_spec(0.1)], 1).unwrap();
        let mut rng = SplitMix64::stream(99, 3);
        for k in 0..1000 {
            let b = governor_budget(&ts, BudgetPolicy::Edf, k, &mut rng).unwrap();
            assert!((0.070..=0.080).contains(&b), "budget {b} at sample {k}");
        }
    }

    #[test]
    fn fixed_override_ignores_task_set() {
        let ts = TaskSet::new(vec![weibull_sensor(), governor_spec(0.1)], 1).unwrap();
        let mut rng = SplitMix64::new(1);
        let b = governor_budget(&ts, BudgetPolicy::Fixed(1e-5), 42, &mut rng).unwrap();
        assert_eq!(b, 1e-5);
        assert!(governor_budget(&ts, BudgetPolicy::Fixed(-1.0), 0, &mut rng).is_err());
    }

    #[test]
    fn mixed_period_event_sweep() {
        // Governor period 10 ms; task a: period 5 ms, 1 ms fixed;
        // task b: period 10 ms, 2 ms fixed. Window [10k, 10k+10) ms
        // contains two a-jobs and one b-job, all with deadlines at or
        // before the governor's: budget = 10 - (1 + 1 + 2) = 6 ms.
        let ts = TaskSet::new(
            vec![
                TaskSpec { id: "a".into(), wcet: 0.001, period: 0.005, exec: ExecTimeModel::Fixed },
                TaskSpec { id: "b".into(), wcet: 0.002, period: 0.010, exec: ExecTimeModel::Fixed },
                governor_spec(0.010),
            ],
            2,
        )
        .unwrap();
        let mut rng = SplitMix64::new(0);
        for k in [0, 1, 7] {
            let b = governor_budget(&ts, BudgetPolicy::Edf, k, &mut rng).unwrap();
            assert!((b - 0.006).abs() < 1e-12, "budget {b} at sample {k}");
        }
    }

    #[test]
    fn misaligned_job_with_late_deadline_does_not_interfere() {
        // Task period 7 ms against a 10 ms governor. Window [10, 20):
        // the release at 14 ms has deadline 21 ms, after the
        // governor's, so EDF leaves the governor ahead of it.
        let ts = TaskSet::new(
            vec![
                TaskSpec { id: "a".into(), wcet: 0.003, period: 0.007, exec: ExecTimeModel::Fixed },
                governor_spec(0.010),
            ],
            1,
        )
        .unwrap();
        let mut rng = SplitMix64::new(0);
        let b = governor_budget(&ts, BudgetPolicy::Edf, 1, &mut rng).unwrap();
        assert!((b - 0.010).abs() < 1e-12, "budget {b}");
        // Window [0, 10): releases at 0 (deadline 7) interferes; the
        // one at 7 (deadline 14) does not.
        let b0 = governor_budget(&ts, BudgetPolicy::Edf, 0, &mut rng).unwrap();
        assert!((b0 - 0.007).abs() < 1e-12, "budget {b0}");
    }

    #[test]
    fn saturated_window_yields_zero_budget() {
        // Interference fills the whole window: budget clamps to zero
        // without error.
        let ts = TaskSet::new(
            vec![
                TaskSpec { id: "hog".into(), wcet: 0.1, period: 0.1, exec: ExecTimeModel::Fixed },
                governor_spec(0.1),
            ],
            1,
        )
        .unwrap();
        let mut rng = SplitMix64::new(0);
        let b = governor_budget(&ts, BudgetPolicy::Edf, 0, &mut rng).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn step_conversion_rounds_down_but_never_to_zero() {
        assert_eq!(deterministic_steps(0.0, 0.0035).unwrap(), 0);
        // Ten microseconds at a 3.5 ms step cost still buys one step:
        // a started step runs to completion.
        assert_eq!(deterministic_steps(1e-5, 0.0035).unwrap(), 1);
        assert_eq!(deterministic_steps(0.080, 0.0035).unwrap(), 22);
        assert!(deterministic_steps(0.1, 0.0).is_err());
        assert!(deterministic_steps(-0.1, 0.0035).is_err());
    }

    #[test]
    fn task_validation_rejects_bad_specs() {
        let mut t = weibull_sensor();
        t.wcet = 0.2;
        assert!(t.validate().is_err(), "wcet above period");
        let mut t = weibull_sensor();
        t.wcet = 0.025;
        assert!(t.validate().is_err(), "truncation above wcet");
        let mut t = weibull_sensor();
        if let ExecTimeModel::Weibull { ref mut truncation_ms, .. } = t.exec {
            *truncation_ms = 10.0;
        }
        assert!(t.validate().is_err(), "truncation below location");
    }
}
