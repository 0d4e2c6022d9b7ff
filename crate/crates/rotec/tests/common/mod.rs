//! Shared fixtures for the integration suites: loaders for the
//! scenario library on disk plus sampling helpers for randomized
//! checks over scalar-command admissible sets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rotec::admissible::AdmissibleSet;
use rotec::rng::SplitMix64;
use rotec::scenario::{BuiltScenario, RawConfig, Scenario};

pub fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load(name: &str) -> (Scenario, BuiltScenario) {
    let cfg = RawConfig::from_file(&scenario_dir().join(name))
        .unwrap_or_else(|e| panic!("loading {name}: {e}"));
    let sc = Scenario::from_config(&cfg).unwrap_or_else(|e| panic!("parsing {name}: {e}"));
    let built = sc.build().unwrap_or_else(|e| panic!("building {name}: {e}"));
    (sc, built)
}

/// Load a scenario file with extra lines appended; scalar keys are
/// last-wins, so the patch overrides the file.
pub fn load_patched(name: &str, patch: &str) -> (Scenario, BuiltScenario) {
    let base = std::fs::read_to_string(scenario_dir().join(name)).unwrap();
    let text = format!("{base}\n{patch}\n");
    let cfg = RawConfig::from_str(&text, &scenario_dir()).unwrap();
    let sc = Scenario::from_config(&cfg).unwrap_or_else(|e| panic!("parsing {name}+patch: {e}"));
    let built = sc.build().unwrap_or_else(|e| panic!("building {name}+patch: {e}"));
    (sc, built)
}

/// Feasible command interval of a single-command set at state `z`,
/// computed row by row: each row reads `c·z + h·v ≤ b - shift`
/// (`shift` 0 for the original constraints, `1/beta` for the
/// tightened ones). Returns `None` when a state-only row already
/// fails or the interval is empty.
pub fn command_interval(set: &AdmissibleSet, z: &DVector<f64>, shift: f64) -> Option<(f64, f64)> {
    assert_eq!(set.cmd_dim(), 1, "interval helper is for scalar commands");
    let (c, h, b) = (set.mat_c(), set.mat_h(), set.vec_b());
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..set.n_rows() {
        let rhs = b[i] - shift - (c.row(i) * z)[0];
        let hv = h[(i, 0)];
        if hv.abs() <= 1e-14 {
            if rhs < 0.0 {
                return None;
            }
        } else if hv > 0.0 {
            hi = hi.min(rhs / hv);
        } else {
            lo = lo.max(rhs / hv);
        }
    }
    if lo <= hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// One random member (z, v) of a single-command tightened set: the
/// state is the interior point perturbed by `spread`, the command is
/// drawn uniformly from the feasible interval at that state. `None`
/// when the perturbed state has left the set's shadow.
pub fn random_member(
    set: &AdmissibleSet,
    center: &(DVector<f64>, DVector<f64>),
    spread: f64,
    rng: &mut SplitMix64,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let z = DVector::from_fn(center.0.len(), |i, _| {
        center.0[i] + rng.uniform(-spread, spread)
    });
    let (lo, hi) = command_interval(set, &z, set.inv_beta())?;
    // The scenario sets are bounded in v, but clip so a hypothetical
    // unbounded direction cannot poison the uniform draw.
    let v = DVector::from_element(1, rng.uniform(lo.max(-1e6), hi.min(1e6)));
    Some((z, v))
}

/// Like [`random_member`] but rejection-samples until it finds one.
pub fn sample_member(
    set: &AdmissibleSet,
    center: &(DVector<f64>, DVector<f64>),
    spread: f64,
    rng: &mut SplitMix64,
) -> (DVector<f64>, DVector<f64>) {
    for _ in 0..10_000 {
        if let Some(zv) = random_member(set, center, spread, rng) {
            return zv;
        }
    }
    panic!("no feasible sample found at spread {spread}");
}
