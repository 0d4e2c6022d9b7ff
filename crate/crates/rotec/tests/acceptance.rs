//! Acceptance gate: eleven end-to-end criteria, one test each, at
//! fixed tolerances. Every test prints a `criterion NN` line with the
//! measured numbers (visible under `--nocapture`); the asserts carry
//! the same numbers so a failure is self-describing.

mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use rotec::admissible;
use rotec::flow::{self, FlowState};
use rotec::governor::{self, GovernorProblem};
use rotec::rng::SplitMix64;
use rotec::sched;
use rotec::scenario::{BuiltScenario, Scenario};
use rotec::sim::{simulate, SimOptions, SimTrace};
use rotec::Error;

use common::{command_interval, load, load_patched, sample_member};

/// Per-run aggregates kept instead of whole traces so thousand-seed
/// campaigns stay small.
#[derive(Debug, Clone, Copy)]
struct RunStats {
    pi: f64,
    violations: u64,
    rejected: u64,
    max_y: f64,
    switched: bool,
}

fn summarize(trace: &SimTrace) -> RunStats {
    let max_y = trace
        .records
        .iter()
        .flat_map(|rec| rec.y.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    RunStats {
        pi: trace.pi,
        violations: trace.violation_count,
        rejected: trace.total_rejected(),
        max_y,
        switched: trace.switched_at.is_some(),
    }
}

fn run_one(sc: &Scenario, built: &BuiltScenario, seed: u64) -> RunStats {
    let opts = SimOptions { seed, deterministic: true, budget_override: None };
    summarize(&simulate(sc, built, &opts).unwrap())
}

/// Deterministic multi-seed campaign fanned out over threads; results
/// come back in seed order regardless of scheduling.
fn campaign(sc: &Scenario, built: &BuiltScenario, seeds: std::ops::Range<u64>) -> Vec<RunStats> {
    let seeds: Vec<u64> = seeds.collect();
    let n = seeds.len();
    let workers =
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(4).min(n.max(1));
    let next = AtomicUsize::new(0);
    let out = Mutex::new(vec![None::<RunStats>; n]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let stats = run_one(sc, built, seeds[i]);
                out.lock().unwrap()[i] = Some(stats);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(Option::unwrap).collect()
}

fn mean<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for x in xs {
        sum += x;
        n += 1;
    }
    assert!(n > 0);
    sum / n as f64
}

/// 1. Normalized tracking costs of the three vehicle cases order as
/// published: the exact solve at the fast rate is best, the exact
/// solve at the 3x slower schedulable rate is worst, and early
/// termination at the fast rate lands strictly between.
#[test]
fn criterion_01_normalized_costs_land_between_the_published_bands() {
    let (sc1, b1) = load("vehicle_case1.scn");
    let (sc2, b2) = load("vehicle_case2.scn");
    let (sc3, b3) = load("vehicle_case3.scn");
    let pi_exact = run_one(&sc1, &b1, 0).pi;
    let pi_slow = run_one(&sc2, &b2, 0).pi;
    let runs = campaign(&sc3, &b3, 0..2000);
    let pi_early = mean(runs.iter().map(|s| s.pi));
    let ratio_slow = pi_slow / pi_exact;
    let ratio_early = pi_early / pi_exact;
    println!(
        "criterion 01: ratio_II = {ratio_slow:.4}, mean ratio_III = {ratio_early:.4} \
         over 2000 seeds (PI_I = {pi_exact:.2}): need 1 < ratio_III < ratio_II, \
         ratio_II in [1.4, 2.3], ratio_III in [1.1, 1.7]"
    );
    assert!(
        ratio_early > 1.0,
        "early termination should cost more than the exact fast solve: {ratio_early}"
    );
    assert!(
        ratio_early < ratio_slow,
        "early termination at the fast rate should beat the slowed exact solve: \
         {ratio_early} vs {ratio_slow}"
    );
    assert!((1.4..=2.3).contains(&ratio_slow), "slowed-solve ratio out of band: {ratio_slow}");
    assert!((1.1..=1.7).contains(&ratio_early), "early-termination ratio out of band: {ratio_early}");
}

/// 2. Steer/countersteer stress: across 2000 seeds of randomized
/// compute budgets, the load-transfer ratio never crosses 1 at any
/// sample of any run.
#[test]
fn criterion_02_fishhook_runs_never_cross_the_rollover_limit() {
    let (sc, built) = load("vehicle_fishhook.scn");
    let runs = campaign(&sc, &built, 0..2000);
    let total_violations: u64 = runs.iter().map(|s| s.violations).sum();
    let worst = runs.iter().map(|s| s.max_y).fold(f64::NEG_INFINITY, f64::max);
    let switched = runs.iter().filter(|s| s.switched).count();
    println!(
        "criterion 02: worst load-transfer ratio = {worst:.6} over 2000 seeds, \
         violations = {total_violations}, countersteer fired in {switched}/2000 runs"
    );
    assert_eq!(total_violations, 0, "no sample may exceed the limit");
    assert!(worst <= 1.0, "worst load-transfer ratio {worst} crossed 1");
    assert_eq!(switched, runs.len(), "every run should reach the countersteer phase");
}

/// 3. Anytime safety: across more than a million flow steps from
/// randomized feasible starts, every iterate the flow could expose as
/// a command satisfies the original (untightened) constraints.
#[test]
fn criterion_03_a_million_flow_iterates_satisfy_the_original_constraints() {
    let (_, built) = load("double_integrator.scn");
    let set = &built.set;
    let center = set.feasible_point().unwrap();
    let mut rng = SplitMix64::new(0x03a1);
    let spreads = [0.02, 0.05, 0.1, 0.3];
    let mut steps_total: u64 = 0;
    let mut worst_slack = f64::INFINITY;
    for inst in 0..200 {
        let spread = spreads[inst % spreads.len()];
        let (z, v0) = sample_member(set, &center, spread, &mut rng);
        let r = DVector::from_element(1, rng.uniform(-0.3, 0.3));
        let prob =
            GovernorProblem::new(built.prob.q().clone(), r, set.clone(), built.sys.clone())
                .unwrap();
        let mut state = FlowState::cold(v0, set.n_rows());
        for _ in 0..5000 {
            let (next, _) = flow::flow_step(&prob, &z, &state, &built.flow).unwrap();
            state = next;
            steps_total += 1;
            assert!(
                set.untightened_ok(&z, &state.v_hat),
                "iterate left the original constraint set at instance {inst}"
            );
            let slack = set.inv_beta() - set.residuals(&z, &state.v_hat).max();
            worst_slack = worst_slack.min(slack);
        }
    }
    println!(
        "criterion 03: {steps_total} flow steps exposed, 0 constraint violations, \
         narrowest original-constraint slack = {worst_slack:.3e}"
    );
    assert!(steps_total >= 1_000_000, "need at least a million aggregate steps");
}

/// 4. Certified convergence: from feasible cold starts the Lyapunov
/// distance to the exact saddle never increases, its log-slope beats
/// half the certified `2 sigma mu` rate, and the command lands within
/// 1e-4 of the oracle.
#[test]
fn criterion_04_flow_converges_at_the_certified_rate() {
    let (_, built) = load("double_integrator.scn");
    let set = &built.set;
    let sigma = built.flow.sigma;
    let center = set.feasible_point().unwrap();
    let mut rng = SplitMix64::new(0x04b2);
    let mut worst_gap = 0.0f64;
    let mut steepest = 0.0f64;
    for inst in 0..50 {
        let (z, _) = sample_member(set, &center, 0.1, &mut rng);
        let r = DVector::from_element(1, rng.uniform(-0.3, 0.3));
        let prob = GovernorProblem::new(
            built.prob.q().clone(),
            r.clone(),
            set.clone(),
            built.sys.clone(),
        )
        .unwrap();
        let (v_dag, l_dag) = governor::solve_tightened_oracle(&prob, &z, &r).unwrap();
        let (lo, hi) = command_interval(set, &z, set.inv_beta()).unwrap();
        let mut state =
            FlowState::cold(DVector::from_element(1, 0.5 * (lo + hi)), set.n_rows());
        let mut v_prev = flow::lyapunov(&state, &v_dag, &l_dag, sigma);
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(4096);
        if v_prev > 0.0 {
            pts.push((state.eta, v_prev.ln()));
        }
        let mut mu_hat = f64::INFINITY;
        for _ in 0..60_000 {
            if let Some(q) = governor::monotonicity_quotient(
                &prob,
                &z,
                &state.v_hat,
                &state.lambda_hat,
                &v_dag,
                &l_dag,
            )
            .unwrap()
            {
                mu_hat = mu_hat.min(q);
            }
            let (next, _) = flow::flow_step(&prob, &z, &state, &built.flow).unwrap();
            state = next;
            let v_now = flow::lyapunov(&state, &v_dag, &l_dag, sigma);
            assert!(
                v_now <= v_prev * (1.0 + 1e-6),
                "Lyapunov value rose at instance {inst}: {v_prev} -> {v_now}"
            );
            if v_now > 0.0 {
                pts.push((state.eta, v_now.ln()));
            }
            v_prev = v_now;
            if (&state.v_hat - &v_dag).norm() <= 1e-5 || v_now < 1e-26 {
                break;
            }
        }
        let gap = (&state.v_hat - &v_dag).norm();
        assert!(gap <= 1e-4, "instance {inst} stopped {gap} away from the oracle command");
        worst_gap = worst_gap.max(gap);
        if pts.len() >= 2 && mu_hat.is_finite() {
            let ex = mean(pts.iter().map(|p| p.0));
            let ey = mean(pts.iter().map(|p| p.1));
            let mut sxy = 0.0;
            let mut sxx = 0.0;
            for (x, y) in &pts {
                sxy += (x - ex) * (y - ey);
                sxx += (x - ex) * (x - ex);
            }
            let slope = sxy / sxx;
            let bound = -0.5 * (2.0 * sigma * mu_hat.max(0.0));
            assert!(
                slope <= bound + 1e-9,
                "instance {inst}: log-Lyapunov slope {slope} above certified {bound}"
            );
            steepest = steepest.min(slope);
        }
    }
    println!(
        "criterion 04: 50 instances converged, worst final command gap = {worst_gap:.2e}, \
         steepest fitted log-slope = {steepest:.1}"
    );
}

/// 5. The tightened optimum approaches the plain constrained optimum
/// as the barrier parameter grows: gaps shrink monotonically over
/// beta in {1e2, 1e3, 1e4, 1e5} and end below 1e-3 of the constraint
/// scale.
#[test]
fn criterion_05_barrier_tightening_vanishes_as_beta_grows() {
    let (sc, built) = load("vehicle_case1.scn");
    let set = &built.set;
    let base = admissible::build(&built.sys, &set.y_bar, set.epsilon, sc.horizon_cap).unwrap();
    let betas = [1e2, 1e3, 1e4, 1e5];
    let probs: Vec<GovernorProblem> = betas
        .iter()
        .map(|&b| {
            let tight = admissible::tighten(&base, b, 1e-6).unwrap();
            GovernorProblem::new(
                built.prob.q().clone(),
                DVector::zeros(1),
                Arc::new(tight),
                built.sys.clone(),
            )
            .unwrap()
        })
        .collect();
    // Sample from the most tightened set so every instance is feasible
    // across the whole ladder.
    let narrow = probs[0].set.clone();
    let center = narrow.feasible_point().unwrap();
    let scale = set.y_bar.min();
    let mut rng = SplitMix64::new(0x05c3);
    let mut worst_final = 0.0f64;
    for inst in 0..20 {
        let (z, _) = sample_member(&narrow, &center, 2.0, &mut rng);
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let r = DVector::from_element(1, sign * rng.uniform(100.0, 300.0));
        let v_star = governor::solve_cg_oracle(&probs[3], &z, &r).unwrap();
        let mut prev_gap = f64::INFINITY;
        for (prob, &beta) in probs.iter().zip(&betas) {
            let (v_dag, _) = governor::solve_tightened_oracle(prob, &z, &r).unwrap();
            let gap = (&v_dag - &v_star).norm();
            assert!(
                gap <= prev_gap * (1.0 + 1e-9) + 1e-15,
                "instance {inst}: gap grew to {gap} at beta {beta} from {prev_gap}"
            );
            prev_gap = gap;
            if beta == 1e5 {
                worst_final = worst_final.max(gap);
            }
        }
    }
    println!(
        "criterion 05: worst tightened-vs-plain command gap at beta 1e5 = {worst_final:.2e} \
         (limit {:.1e})",
        1e-3 * scale
    );
    assert!(
        worst_final <= 1e-3 * scale,
        "gap {worst_final} above 1e-3 of the constraint scale {scale}"
    );
}

/// 6. The acceptance test never rejects the exact optimizer: it
/// improves on any feasible previous command by at least its own
/// weighted distance from it.
#[test]
fn criterion_06_the_exact_optimum_is_never_rejected() {
    let (_, built) = load("vehicle_case1.scn");
    let set = &built.set;
    let center = set.feasible_point().unwrap();
    let mut rng = SplitMix64::new(0x06d4);
    let mut rejections = 0u32;
    for _ in 0..1000 {
        let (z, v_prev) = sample_member(set, &center, 2.0, &mut rng);
        let r = DVector::from_element(1, rng.uniform(-300.0, 300.0));
        let (v_dag, _) = governor::solve_tightened_oracle(&built.prob, &z, &r).unwrap();
        if !flow::acceptance(&v_dag, &v_prev, &r, built.prob.q()) {
            rejections += 1;
        }
    }
    println!("criterion 06: {rejections} rejections of the exact optimizer across 1000 draws");
    assert_eq!(rejections, 0, "the exact optimizer must always be accepted");
}

/// 7. Schedulability arithmetic: a 2 s worst case next to 20%
/// existing utilization needs a period of exactly 2.5 s.
#[test]
fn criterion_07_minimum_schedulable_period_is_exact() {
    let period = sched::min_governor_period(2.0, 0.2).unwrap();
    println!("criterion 07: min period for wcet 2.0 s against utilization 0.2 = {period}");
    assert_eq!(period, 2.5, "2.0 / (1 - 0.2) must equal 2.5 exactly");
    assert!(
        sched::min_governor_period(2.0, 1.0).is_err(),
        "full existing utilization leaves no room"
    );
}

/// 8. Starvation stress: one flow step per sample still keeps every
/// constraint, still converges to a constant demand, and costs
/// strictly more than the same seed with the full per-period budget.
#[test]
fn criterion_08_starved_governor_stays_safe_and_converges() {
    let (sc, built) = load("vehicle_stress.scn");
    let opts = SimOptions { seed: 11, deterministic: true, budget_override: None };
    let starved = simulate(&sc, &built, &opts).unwrap();
    assert_eq!(starved.violation_count, 0, "starved run violated a constraint");
    let max_steps = starved.records.iter().map(|r| r.flow_steps).max().unwrap();
    assert_eq!(max_steps, 1, "the 10 us budget must yield exactly one flow step per sample");
    let last = starved.records.last().unwrap();
    let gap = (&last.v - &last.r).norm();
    assert!(gap <= 1e-2, "command ended {gap} away from the constant demand");

    let (sc_full, b_full) = load_patched("vehicle_stress.scn", "budget = edf");
    let full = simulate(&sc_full, &b_full, &opts).unwrap();
    assert_eq!(full.violation_count, 0, "full-budget run violated a constraint");
    println!(
        "criterion 08: starved PI = {:.4}, full-budget PI = {:.4}, final demand gap = {gap:.2e}",
        starved.pi, full.pi
    );
    assert!(
        starved.pi > full.pi,
        "starved run must cost strictly more: {} vs {}",
        starved.pi,
        full.pi
    );
}

/// 9. Sensitivity directions: mean cost falls as the flow gain rises
/// over {50, 100, 150}, never falls as the governor period grows over
/// {0.1, 0.2, 0.3} s at constant 70% task utilization, and a higher
/// gain does not get more candidates rejected.
#[test]
fn criterion_09_sensitivity_runs_in_the_right_directions() {
    let mut pi_by_sigma = Vec::new();
    let mut rej_by_sigma = Vec::new();
    for sigma in [50, 100, 150] {
        let (sc, built) = load_patched("vehicle_case3.scn", &format!("sigma = {sigma}"));
        let runs = campaign(&sc, &built, 0..500);
        pi_by_sigma.push(mean(runs.iter().map(|s| s.pi)));
        rej_by_sigma.push(mean(runs.iter().map(|s| s.rejected as f64)));
    }
    let mut pi_by_period = Vec::new();
    for (wcet, period) in [(0.07, 0.1), (0.14, 0.2), (0.21, 0.3)] {
        let (sc, built) =
            load_patched("vehicle_case3.scn", &format!("task = governor {wcet} {period} fixed"));
        let runs = campaign(&sc, &built, 0..500);
        pi_by_period.push(mean(runs.iter().map(|s| s.pi)));
    }
    println!(
        "criterion 09: mean PI by gain {{50, 100, 150}} = {:.2} / {:.2} / {:.2}, \
         by period {{0.1, 0.2, 0.3}} = {:.2} / {:.2} / {:.2}, \
         mean rejected at gain 150 vs 50 = {:.4} vs {:.4}",
        pi_by_sigma[0],
        pi_by_sigma[1],
        pi_by_sigma[2],
        pi_by_period[0],
        pi_by_period[1],
        pi_by_period[2],
        rej_by_sigma[2],
        rej_by_sigma[0]
    );
    assert!(
        pi_by_sigma[0] > pi_by_sigma[1] && pi_by_sigma[1] > pi_by_sigma[2],
        "mean cost must fall as the flow gain rises: {pi_by_sigma:?}"
    );
    assert!(
        pi_by_period[1] >= pi_by_period[0] && pi_by_period[2] >= pi_by_period[1],
        "mean cost must not fall as the governor period grows: {pi_by_period:?}"
    );
    assert!(
        rej_by_sigma[2] <= rej_by_sigma[0],
        "higher gain should not reject more: {rej_by_sigma:?}"
    );
}

/// 10. Interference-bound certificate: on 500 randomized weighted
/// vector families meeting the cone condition, the squared norm of
/// the weighted sum dominates the certified floor.
#[test]
fn criterion_10_weighted_sums_respect_the_cone_bound() {
    let mut rng = SplitMix64::new(0x0af6);
    let mut done = 0u32;
    let mut attempts = 0u32;
    let mut min_ratio = f64::INFINITY;
    while done < 500 {
        attempts += 1;
        assert!(attempts < 200_000, "cone condition rejected too many draws");
        let dim = 2 + (rng.next_u64() % 3) as usize;
        let k = 2 + (rng.next_u64() % 5) as usize;
        let vectors: Vec<DVector<f64>> =
            (0..k).map(|_| DVector::from_fn(dim, |_, _| rng.uniform(-1.0, 1.0))).collect();
        if vectors.iter().any(|m| m.norm() < 1e-3) {
            continue;
        }
        let weights: Vec<f64> = (0..k).map(|_| rng.uniform(0.1, 2.0)).collect();
        let m_lower = 0.9 * weights.iter().fold(0.0f64, |a, &b| a.max(b));
        match governor::appendix_bound_check(&vectors, &weights, m_lower) {
            Ok((j, bound)) => {
                assert!(
                    j + 1e-12 >= bound,
                    "weighted-sum energy {j} fell below the certified floor {bound}"
                );
                if bound > 0.0 {
                    min_ratio = min_ratio.min(j / bound);
                }
                done += 1;
            }
            Err(Error::InvalidInput(msg)) if msg.contains("cone condition") => continue,
            Err(e) => panic!("unexpected error from the bound check: {e}"),
        }
    }
    println!(
        "criterion 10: 500 certified instances out of {attempts} draws, \
         min energy/floor ratio = {min_ratio:.3}"
    );
}

/// 11. With the processor to itself the anytime governor reproduces
/// the exact active-set solve at every one of 200 samples.
#[test]
fn criterion_11_generous_budget_matches_the_oracle_pointwise() {
    let (sc, built) = load("double_integrator.scn");
    let opts = SimOptions { seed: 0, deterministic: true, budget_override: None };
    let trace = simulate(&sc, &built, &opts).unwrap();
    assert_eq!(trace.records.len(), 200);
    assert_eq!(trace.violation_count, 0);
    let mut worst = 0.0f64;
    for rec in &trace.records {
        let (v_dag, _) = governor::solve_tightened_oracle(&built.prob, &rec.z, &rec.r).unwrap();
        worst = worst.max((&rec.v - &v_dag).norm());
    }
    println!("criterion 11: worst command gap to the exact solve = {worst:.2e} over 200 samples");
    assert!(worst <= 1e-3, "applied commands drifted {worst} from the exact solve");
}
