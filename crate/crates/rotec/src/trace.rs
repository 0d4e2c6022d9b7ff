//! CSV output: per-sample traces, per-seed summaries, sweep tables.
//!
//! CSV is the tool's output contract; plotting is left to external
//! tooling. Every file starts with one `#`-prefixed metadata line
//! (ignored by gnuplot and most readers) naming the schema version,
//! the RNG algorithm and the scenario, followed by the fixed header
//! row. The schema version is also the first column of every data
//! row so concatenated or split files stay self-describing.
//!
//! Schema, version 1:
//!
//! ```text
//! trace:   schema_version,seed,k,t,budget_s,flow_steps,rejected_steps,
//!          stalls,accepted,r_<i>...,v_<i>...,u_<i>...,y_<i>...,z_<i>...
//! summary: schema_version,seed,pi,normalized_pi,violations,
//!          rejected_steps,flow_steps,switched_at
//! sweep:   schema_version,parameter,value,seeds,pi_mean,pi_q1,
//!          pi_median,pi_q3,violations_total,rejected_mean
//! ```
//!
//! Vector-valued quantities expand into one column per component.
//! Booleans are 0/1. `normalized_pi` is `pi / baseline_pi`, or `nan`
//! when no baseline was declared; `switched_at` is -1 for runs whose
//! reference never switched. Floats print in shortest round-trip
//! form, so reading a file back reproduces the exact bits.

use crate::error::{Error, Result};
use crate::rng;
use crate::sim::SimTrace;
use std::io::Write;

/// Version stamped into every row; bump on any header change.
pub const SCHEMA_VERSION: u32 = 1;

/// Run-level metadata carried into file headers.
#[derive(Debug, Clone)]
pub struct TraceMeta {
    pub scenario: String,
}

fn meta_line(meta: &TraceMeta, kind: &str) -> String {
    format!(
        "# rotec-{kind} schema_version={} rng={} scenario={}",
        SCHEMA_VERSION,
        rng::ALGORITHM,
        meta.scenario
    )
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn vector_header(prefix: &str, dim: usize) -> String {
    (0..dim).map(|i| format!("{prefix}_{i}")).collect::<Vec<_>>().join(",")
}

fn vector_cells(v: &nalgebra::DVector<f64>) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

/// Long-format per-sample trace, one row per sample per seed.
pub fn write_trace_csv<W: Write>(w: &mut W, meta: &TraceMeta, traces: &[SimTrace]) -> Result<()> {
    let first = traces
        .iter()
        .find_map(|t| t.records.first())
        .ok_or_else(|| Error::InvalidInput("no records to write".into()))?;
    let (mr, mv, mu, my, mz) =
        (first.r.len(), first.v.len(), first.u.len(), first.y.len(), first.z.len());
    writeln!(w, "{}", meta_line(meta, "trace")).map_err(io_err)?;
    writeln!(
        w,
        "schema_version,seed,k,t,budget_s,flow_steps,rejected_steps,stalls,accepted,{},{},{},{},{}",
        vector_header("r", mr),
        vector_header("v", mv),
        vector_header("u", mu),
        vector_header("y", my),
        vector_header("z", mz),
    )
    .map_err(io_err)?;
    for trace in traces {
        for rec in &trace.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                SCHEMA_VERSION,
                trace.seed,
                rec.k,
                rec.t,
                rec.budget,
                rec.flow_steps,
                rec.rejected_steps,
                rec.stalls,
                rec.accepted as u8,
                vector_cells(&rec.r),
                vector_cells(&rec.v),
                vector_cells(&rec.u),
                vector_cells(&rec.y),
                vector_cells(&rec.z),
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// One row per seed: the metrics the experiment tables report.
pub fn write_summary_csv<W: Write>(
    w: &mut W,
    meta: &TraceMeta,
    traces: &[SimTrace],
    baseline_pi: Option<f64>,
) -> Result<()> {
    writeln!(w, "{}", meta_line(meta, "summary")).map_err(io_err)?;
    writeln!(
        w,
        "schema_version,seed,pi,normalized_pi,violations,rejected_steps,flow_steps,switched_at"
    )
    .map_err(io_err)?;
    for trace in traces {
        let normalized = match baseline_pi {
            Some(base) => trace.pi / base,
            None => f64::NAN,
        };
        let switched = trace.switched_at.map(|k| k as i64).unwrap_or(-1);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            SCHEMA_VERSION,
            trace.seed,
            trace.pi,
            normalized,
            trace.violation_count,
            trace.total_rejected(),
            trace.total_flow_steps(),
            switched,
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Distribution of PI over seeds at one sweep grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub pis: Vec<f64>,
    pub violations_total: u64,
    pub rejected_mean: f64,
}

/// Linear-interpolation quartiles (the common "type 7" convention) of
/// an unsorted sample.
pub fn quartiles(samples: &[f64]) -> Result<(f64, f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("quartiles of an empty sample".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quartile input"));
    let at = |p: f64| -> f64 {
        let pos = p * (s.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
    };
    Ok((at(0.25), at(0.5), at(0.75)))
}

/// One row per grid point, box-plot ready.
pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    meta: &TraceMeta,
    parameter: &str,
    rows: &[SweepRow],
) -> Result<()> {
    writeln!(w, "{}", meta_line(meta, "sweep")).map_err(io_err)?;
    writeln!(
        w,
        "schema_version,parameter,value,seeds,pi_mean,pi_q1,pi_median,pi_q3,violations_total,rejected_mean"
    )
    .map_err(io_err)?;
    for row in rows {
        let n = row.pis.len();
        if n == 0 {
            return Err(Error::InvalidInput(format!(
                "sweep point {} has no seed results",
                row.value
            )));
        }
        let mean: f64 = row.pis.iter().sum::<f64>() / n as f64;
        let (q1, med, q3) = quartiles(&row.pis)?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            SCHEMA_VERSION,
            parameter,
            row.value,
            n,
            mean,
            q1,
            med,
            q3,
            row.violations_total,
            row.rejected_mean,
        )
        .map_err(io_err)?;
    }
    Ok(())
}
