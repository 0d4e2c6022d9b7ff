//! Seed campaign worker pool.
//!
//! Seeds are independent: each run owns its plant state, flow state and
//! RNG streams, and workers share only the immutable scenario. Results
//! are collected in seed order so output files do not depend on thread
//! scheduling.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use rotec::error::{Error, Result};
use rotec::scenario::{BuiltScenario, Scenario};
use rotec::sim::{simulate, SimOptions, SimTrace};

/// Worker count for `n_jobs` independent jobs: the ROTEC_THREADS
/// environment variable if set, otherwise the machine parallelism,
/// never more threads than jobs.
pub fn pool_size(n_jobs: usize) -> Result<usize> {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = match std::env::var("ROTEC_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Config(format!("ROTEC_THREADS must be a positive integer, got {v:?}"))
        })?,
        Err(_) => default,
    };
    Ok(cap.min(n_jobs).max(1))
}

/// Simulate every seed in `seeds`, in parallel, returning traces in
/// seed order. The first failing seed aborts the remaining work.
pub fn run_campaign(
    sc: &Scenario,
    built: &BuiltScenario,
    seeds: &[u64],
    deterministic: bool,
    budget_override: Option<f64>,
) -> Result<Vec<SimTrace>> {
    let threads = pool_size(seeds.len())?;
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<SimTrace>>> = Mutex::new(vec![None; seeds.len()]);
    let first_err: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() || failed.load(Ordering::Relaxed) {
                    return;
                }
                let opts =
                    SimOptions { seed: seeds[i], deterministic, budget_override };
                match simulate(sc, built, &opts) {
                    Ok(trace) => slots.lock().unwrap()[i] = Some(trace),
                    Err(e) => {
                        let mut guard = first_err.lock().unwrap();
                        if guard.is_none() {
                            *guard = Some(e);
                        }
                        failed.store(true, Ordering::Relaxed);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }
    let traces = slots.into_inner().unwrap();
    Ok(traces.into_iter().map(|t| t.expect("every seed simulated")).collect())
}
