//! The three CLI operations: admissible-set construction, Monte Carlo
//! runs, and parameter sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use rotec::error::{Error, Result};
use rotec::scenario::{BuiltScenario, RawConfig, Scenario};
use rotec::sched::{BudgetPolicy, ExecTimeModel, TaskSpec};
use rotec::sim::SimTrace;
use rotec::trace::{write_summary_csv, write_sweep_csv, write_trace_csv, SweepRow, TraceMeta};

use crate::pool;

#[derive(Args)]
pub struct SstarManifest {
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for the set cache (default: the scenario's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunManifest {
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Seed range `A..B` (B exclusive) or a single seed `N`.
    #[arg(long, default_value = "0..1")]
    pub seeds: String,
    /// Output directory for trace.csv and summary.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Convert each budget to a whole number of flow steps instead of
    /// running against the wall clock.
    #[arg(long)]
    pub deterministic: bool,
    /// Replace every per-sample budget with this many microseconds.
    #[arg(long, value_name = "MICROS")]
    pub budget_override: Option<f64>,
    /// Previous run to normalize PI against: its output directory or
    /// summary.csv path. The baseline is the mean PI of that run.
    #[arg(long, value_name = "RUN_ID")]
    pub baseline: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepManifest {
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Seed range `A..B` (B exclusive) or a single seed `N`.
    #[arg(long, default_value = "0..1")]
    pub seeds: String,
    /// Output directory for sweep.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Convert each budget to a whole number of flow steps instead of
    /// running against the wall clock.
    #[arg(long)]
    pub deterministic: bool,
    /// Swept parameter.
    #[arg(long, value_name = "PARAM", value_parser = ["sigma", "period", "budget"])]
    pub sweep: String,
    /// Comma-separated grid values: sigma is unitless, period and
    /// budget are in seconds.
    #[arg(long, value_name = "V1,V2,...")]
    pub grid: String,
}

fn load_scenario(path: &Path) -> Result<(Scenario, BuiltScenario)> {
    let cfg = RawConfig::from_file(path)?;
    let sc = Scenario::from_config(&cfg)?;
    let built = sc.build()?;
    Ok((sc, built))
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("seed range must be A..B or a single seed, got {text:?}"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            (a, b)
        }
        None => {
            let a: u64 = text.trim().parse().map_err(|_| bad())?;
            (a, a + 1)
        }
    };
    if a >= b {
        return Err(Error::Config(format!("seed range {text} is empty")));
    }
    Ok((a..b).collect())
}

fn write_file(path: &Path, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    body(&mut buf)?;
    fs::write(path, &buf)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Mean of the `pi` column of a previous run's summary.csv.
fn read_baseline_pi(run_id: &Path) -> Result<f64> {
    let path = if run_id.is_dir() { run_id.join("summary.csv") } else { run_id.to_path_buf() };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read baseline {}: {e}", path.display())))?;
    let bad = |msg: String| Error::Config(format!("baseline {}: {msg}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| bad("empty summary".into()))?;
    let pi_col = header
        .split(',')
        .position(|h| h == "pi")
        .ok_or_else(|| bad("no pi column".into()))?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for line in lines {
        let field = line
            .split(',')
            .nth(pi_col)
            .ok_or_else(|| bad(format!("short row {line:?}")))?;
        let pi: f64 =
            field.parse().map_err(|_| bad(format!("bad pi value {field:?}")))?;
        sum += pi;
        n += 1;
    }
    if n == 0 {
        return Err(bad("no data rows".into()));
    }
    Ok(sum / n as f64)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Build the admissible set, print its shape, and cache it next to the
/// scenario (or under --out) for bit-exact reload.
pub fn cmd_sstar(m: &SstarManifest) -> Result<()> {
    let (sc, built) = load_scenario(&m.scenario)?;
    let dir = match &m.out {
        Some(d) => d.clone(),
        None => m.scenario.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    ensure_dir(&dir)?;
    let path = dir.join(format!("{}_set.txt", sc.name));
    fs::write(&path, built.set.save())
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    println!("s_star = {}", built.set.s_star);
    println!("rows = {}", built.set.n_rows());
    println!("cache = {}", path.display());
    Ok(())
}

fn campaign_stats(traces: &[SimTrace]) -> (f64, u64) {
    let mean = traces.iter().map(|t| t.pi).sum::<f64>() / traces.len() as f64;
    let violations = traces.iter().map(|t| t.violation_count).sum();
    (mean, violations)
}

/// Simulate a seed campaign and write trace.csv plus summary.csv.
pub fn cmd_run(m: &RunManifest) -> Result<()> {
    let (sc, built) = load_scenario(&m.scenario)?;
    let seeds = parse_seeds(&m.seeds)?;
    let budget_override = validate_override(m.budget_override)?;
    let baseline = m.baseline.as_deref().map(read_baseline_pi).transpose()?;

    let traces = pool::run_campaign(&sc, &built, &seeds, m.deterministic, budget_override)?;

    ensure_dir(&m.out)?;
    let meta = TraceMeta { scenario: sc.name.clone() };
    let trace_path = m.out.join("trace.csv");
    write_file(&trace_path, |buf| write_trace_csv(buf, &meta, &traces))?;
    let summary_path = m.out.join("summary.csv");
    write_file(&summary_path, |buf| write_summary_csv(buf, &meta, &traces, baseline))?;

    let (pi_mean, violations) = campaign_stats(&traces);
    println!("seeds = {}", traces.len());
    println!("pi_mean = {pi_mean}");
    if let Some(base) = baseline {
        println!("normalized_pi_mean = {}", pi_mean / base);
    }
    println!("violations = {violations}");
    println!("trace = {}", trace_path.display());
    println!("summary = {}", summary_path.display());
    Ok(())
}

fn validate_override(micros: Option<f64>) -> Result<Option<f64>> {
    match micros {
        Some(us) if !(us >= 0.0) || !us.is_finite() => Err(Error::Config(format!(
            "budget override must be a finite number of microseconds >= 0, got {us}"
        ))),
        Some(us) => Ok(Some(us * 1e-6)),
        None => Ok(None),
    }
}

fn apply_parameter(sc: &mut Scenario, parameter: &str, value: f64) -> Result<()> {
    match parameter {
        "sigma" => sc.sigma = value,
        "period" => {
            // Pin the governor at 70% utilization so every grid point
            // sits at the same schedulability boundary.
            let task = TaskSpec {
                id: "governor".into(),
                wcet: 0.7 * value,
                period: value,
                exec: ExecTimeModel::Fixed,
            };
            match sc.interferers.iter_mut().find(|t| t.id == "governor") {
                Some(existing) => *existing = task,
                None => sc.interferers.push(task),
            }
        }
        "budget" => {
            if !(value >= 0.0) {
                return Err(Error::Config(format!(
                    "budget grid values must be >= 0 seconds, got {value}"
                )));
            }
            sc.budget = BudgetPolicy::Fixed(value);
        }
        other => {
            return Err(Error::Config(format!(
                "unknown sweep parameter {other}; expected sigma, period, or budget"
            )))
        }
    }
    Ok(())
}

/// Re-run the scenario across a parameter grid and write per-point PI
/// distribution statistics.
pub fn cmd_sweep(m: &SweepManifest) -> Result<()> {
    let (sc, _) = load_scenario(&m.scenario)?;
    let seeds = parse_seeds(&m.seeds)?;
    let grid: Vec<f64> = m
        .grid
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                Error::Config(format!("grid value {s:?} is not a number"))
            })
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &value in &grid {
        let mut point = sc.clone();
        apply_parameter(&mut point, &m.sweep, value)?;
        let built = point.build()?;
        let traces = pool::run_campaign(&point, &built, &seeds, m.deterministic, None)?;
        let (pi_mean, violations_total) = campaign_stats(&traces);
        let rejected_mean = traces.iter().map(|t| t.total_rejected()).sum::<u64>() as f64
            / traces.len() as f64;
        println!("{} = {value}: pi_mean = {pi_mean}, violations = {violations_total}", m.sweep);
        rows.push(SweepRow {
            value,
            pis: traces.iter().map(|t| t.pi).collect(),
            violations_total,
            rejected_mean,
        });
    }

    ensure_dir(&m.out)?;
    let meta = TraceMeta { scenario: sc.name.clone() };
    let sweep_path = m.out.join("sweep.csv");
    write_file(&sweep_path, |buf| write_sweep_csv(buf, &meta, &m.sweep, &rows))?;
    println!("sweep = {}", sweep_path.display());
    Ok(())
}
