//! Scenario configuration: a flat, typed key=value text format.
//!
//! A scenario file bundles everything one closed-loop experiment
//! needs: plant matrices, gain design, constraint rows, admissible-set
//! and flow parameters, the task set and the reference profile. The
//! format is line-oriented and diff-friendly:
//!
//! ```text
//! # comment
//! name = double_integrator
//! plant_a = [0 1; 0 0]          # matrices in brackets, rows split by ;
//! plant_b = [0; 1]
//! include gains_common.scn       # spliced in place, relative path
//! x0 = -0.5 0 0                  # bare vectors are whitespace lists
//! task = sensor 0.03 0.1 weibull 2 20 4 30
//! ```
//!
//! Later assignments override earlier ones (so an including file can
//! patch a base file), except `task`, which accumulates. A bracketed
//! value may span lines until its closing bracket. Keys are
//! lower_snake_case; unknown keys are rejected to catch typos.
//!
//! [`Scenario::build`] turns the parsed description into live objects:
//! discretized plant, tracking gains, tightened admissible set,
//! governor problem, flow parameters and task set.

use crate::admissible::{self, AdmissibleSet};
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::governor::GovernorProblem;
use crate::plant::{self, AugmentedSystem, ContinuousPlant, PoleSpec};
use crate::sched::{BudgetPolicy, ExecTimeModel, TaskSet, TaskSpec};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

const MAX_INCLUDE_DEPTH: usize = 16;

const KNOWN_KEYS: &[&str] = &[
    "name",
    "plant_a",
    "plant_b",
    "discretize",
    "dt",
    "track_c",
    "track_d",
    "poles",
    "lqr_state",
    "lqr_input",
    "con_c",
    "con_d",
    "y_bar",
    "limit_u",
    "epsilon",
    "horizon_cap",
    "beta",
    "vartheta",
    "sigma",
    "delta_eta",
    "q",
    "x0",
    "v0",
    "reference",
    "samples",
    "governor",
    "budget",
    "step_cost",
    "task",
];

/// Parsed key=value table, include directives already spliced.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: HashMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<RawConfig> {
        let mut cfg = RawConfig::default();
        cfg.load(path, 0)?;
        Ok(cfg)
    }

    pub fn from_str(text: &str, base_dir: &Path) -> Result<RawConfig> {
        let mut cfg = RawConfig::default();
        cfg.absorb(text, base_dir, 0)?;
        Ok(cfg)
    }

    fn load(&mut self, path: &Path, depth: usize) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        self.absorb(&text, &base, depth)
    }

    fn absorb(&mut self, text: &str, base_dir: &Path, depth: usize) -> Result<()> {
        if depth > MAX_INCLUDE_DEPTH {
            return Err(Error::Config(format!(
                "include nesting deeper than {MAX_INCLUDE_DEPTH} (cycle?)"
            )));
        }
        let mut lines = text.lines();
        while let Some(raw) = lines.next() {
            let line = strip_comment(raw).trim().to_string();
            if line.is_empty() {
                continue;
            }
            if let Some(inc) = line.strip_prefix("include ") {
                self.load(&base_dir.join(inc.trim()), depth + 1)?;
                continue;
            }
            let (key, mut value) = match line.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
                None => {
                    return Err(Error::Config(format!("expected key = value, got: {line}")));
                }
            };
            if key.is_empty() {
                return Err(Error::Config(format!("empty key in line: {line}")));
            }
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key: {key}")));
            }
            // Bracketed values may continue over following lines.
            while value.starts_with('[') && !value.contains(']') {
                match lines.next() {
                    Some(cont) => {
                        value.push(' ');
                        value.push_str(strip_comment(cont).trim());
                    }
                    None => {
                        return Err(Error::Config(format!("unterminated matrix for key {key}")));
                    }
                }
            }
            if value.is_empty() {
                return Err(Error::Config(format!("key {key} has no value")));
            }
            self.entries.entry(key).or_default().push(value);
        }
        Ok(())
    }

    /// Last assignment wins for scalar keys.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing required key: {key}")))
    }

    /// Every assignment, in file order (for accumulating keys).
    pub fn get_all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.require(key)?, key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(v) => parse_f64(v, key),
            None => Ok(default),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.require(key)?;
        v.parse::<usize>()
            .map_err(|_| Error::Config(format!("key {key}: expected an integer, got {v}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("key {key}: expected an integer, got {v}"))),
            None => Ok(default),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<DMatrix<f64>> {
        parse_matrix(self.require(key)?, key)
    }

    pub fn vector(&self, key: &str) -> Result<DVector<f64>> {
        parse_vector(self.require(key)?, key)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("key {key}: expected a number, got {v}")))
}

/// `[a b; c d]` rows split by `;`, entries by whitespace.
fn parse_matrix(v: &str, key: &str) -> Result<DMatrix<f64>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Config(format!("key {key}: matrix must be bracketed, got {v}")))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for row in inner.split(';') {
        let entries: Vec<f64> = row
            .split_whitespace()
            .map(|e| parse_f64(e, key))
            .collect::<Result<_>>()?;
        if entries.is_empty() {
            return Err(Error::Config(format!("key {key}: empty matrix row")));
        }
        rows.push(entries);
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("key {key}: ragged matrix rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Bare whitespace list, or a bracketed single row / single column.
fn parse_vector(v: &str, key: &str) -> Result<DVector<f64>> {
    if v.starts_with('[') {
        let m = parse_matrix(v, key)?;
        if m.nrows() != 1 && m.ncols() != 1 {
            return Err(Error::Config(format!(
                "key {key}: expected a vector, got a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        let flat: Vec<f64> = m.iter().cloned().collect();
        return Ok(DVector::from_vec(flat));
    }
    let entries: Vec<f64> =
        v.split_whitespace().map(|e| parse_f64(e, key)).collect::<Result<_>>()?;
    if entries.is_empty() {
        return Err(Error::Config(format!("key {key}: empty vector")));
    }
    Ok(DVector::from_vec(entries))
}

/// Comma-separated number list (vector values inside compound keys).
fn parse_comma_vector(v: &str, key: &str) -> Result<DVector<f64>> {
    let entries: Vec<f64> =
        v.split(',').map(|e| parse_f64(e.trim(), key)).collect::<Result<_>>()?;
    Ok(DVector::from_vec(entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizeMethod {
    /// Exact zero-order hold via the matrix exponential.
    Zoh,
    /// Forward Euler (used by the didactic double-integrator setup).
    Euler,
}

/// Reference signal over the run.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceProfile {
    Constant(DVector<f64>),
    /// `(time_s, value)` knots, first at 0; each holds until the next.
    Piecewise(Vec<(f64, DVector<f64>)>),
    /// Steer/countersteer maneuver: hold `steer` until the monitored
    /// rate component, once armed by exceeding `arm_threshold` in
    /// magnitude, first crosses zero; then hold `counter` forever.
    Fishhook {
        steer: DVector<f64>,
        counter: DVector<f64>,
        /// Index of the monitored rate in the augmented state.
        rate_index: usize,
        arm_threshold: f64,
    },
}

impl ReferenceProfile {
    pub fn cmd_dim(&self) -> usize {
        match self {
            ReferenceProfile::Constant(v) => v.len(),
            ReferenceProfile::Piecewise(knots) => knots[0].1.len(),
            ReferenceProfile::Fishhook { steer, .. } => steer.len(),
        }
    }

    /// Value at the start of a run.
    pub fn initial(&self) -> DVector<f64> {
        match self {
            ReferenceProfile::Constant(v) => v.clone(),
            ReferenceProfile::Piecewise(knots) => knots[0].1.clone(),
            ReferenceProfile::Fishhook { steer, .. } => steer.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GovernorMode {
    /// Exact constrained optimum every sample (no budget).
    Oracle,
    /// Budgeted primal-dual flow.
    Rotec,
}

/// Typed scenario description, still unassembled.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub plant_a: DMatrix<f64>,
    pub plant_b: DMatrix<f64>,
    pub method: DiscretizeMethod,
    /// Sampling period of both the discretization and the governor.
    pub dt: f64,
    pub track_c: DMatrix<f64>,
    pub track_d: DMatrix<f64>,
    pub gains: PoleSpec,
    /// Explicit constraint rows over the augmented state, if any.
    pub con_c: Option<DMatrix<f64>>,
    pub con_d: Option<DMatrix<f64>>,
    pub y_bar: Option<DVector<f64>>,
    /// If set, appends two-sided bound rows on the control input.
    pub limit_u: Option<f64>,
    pub epsilon: f64,
    pub horizon_cap: usize,
    pub beta: f64,
    pub vartheta: f64,
    pub sigma: f64,
    pub delta_eta: f64,
    pub q: DMatrix<f64>,
    /// Augmented initial state (plant state then held input).
    pub x0: DVector<f64>,
    pub v0: DVector<f64>,
    pub reference: ReferenceProfile,
    pub samples: usize,
    pub mode: GovernorMode,
    pub budget: BudgetPolicy,
    /// Per-flow-step cost for deterministic budget conversion.
    pub step_cost: Option<f64>,
    /// Declared tasks. A task with id "governor" overrides the
    /// synthesized governor task; its period sets how often the
    /// governor executes (must be an integer multiple of `dt`, the
    /// command is held between executions). All others interfere.
    pub interferers: Vec<TaskSpec>,
}

/// Scenario assembled into live control objects.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub sys: Arc<AugmentedSystem>,
    pub set: Arc<AdmissibleSet>,
    pub prob: GovernorProblem,
    pub flow: FlowParams,
    pub tasks: TaskSet,
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Scenario> {
        Scenario::from_config(&RawConfig::from_file(path)?)
    }

    pub fn from_config(cfg: &RawConfig) -> Result<Scenario> {
        let name = cfg.require("name")?.to_string();
        let plant_a = cfg.matrix("plant_a")?;
        let plant_b = cfg.matrix("plant_b")?;
        let method = match cfg.get("discretize").unwrap_or("zoh") {
            "zoh" => DiscretizeMethod::Zoh,
            "euler" => DiscretizeMethod::Euler,
            other => {
                return Err(Error::Config(format!(
                    "discretize must be zoh or euler, got {other}"
                )));
            }
        };
        let dt = cfg.f64("dt")?;
        let track_c = cfg.matrix("track_c")?;
        let track_d = cfg.matrix("track_d")?;

        let gains = match (cfg.get("poles"), cfg.get("lqr_state")) {
            (Some(p), None) => PoleSpec::Poles(
                p.split_whitespace().map(|e| parse_f64(e, "poles")).collect::<Result<_>>()?,
            ),
            (None, Some(_)) => PoleSpec::Lqr {
                state_weights: cfg.vector("lqr_state")?,
                input_weights: cfg.vector("lqr_input")?,
            },
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either poles or lqr_state, not both".into()));
            }
            (None, None) => {
                return Err(Error::Config("gain design needs poles or lqr_state".into()));
            }
        };

        let con_c = cfg.get("con_c").map(|v| parse_matrix(v, "con_c")).transpose()?;
        let con_d = cfg.get("con_d").map(|v| parse_matrix(v, "con_d")).transpose()?;
        let y_bar = cfg.get("y_bar").map(|v| parse_vector(v, "y_bar")).transpose()?;
        let limit_u = cfg.get("limit_u").map(|v| parse_f64(v, "limit_u")).transpose()?;
        if con_c.is_some() != con_d.is_some() || con_c.is_some() != y_bar.is_some() {
            return Err(Error::Config(
                "con_c, con_d and y_bar must be given together".into(),
            ));
        }
        if con_c.is_none() && limit_u.is_none() {
            return Err(Error::Config("no constraints: give con_c/con_d/y_bar or limit_u".into()));
        }

        let reference = parse_reference(cfg.require("reference")?)?;
        let budget = match cfg.get("budget").unwrap_or("edf") {
            "edf" => BudgetPolicy::Edf,
            fixed if fixed.starts_with("fixed") => {
                let arg = fixed.strip_prefix("fixed").unwrap().trim();
                BudgetPolicy::Fixed(parse_f64(arg, "budget")?)
            }
            other => {
                return Err(Error::Config(format!(
                    "budget must be edf or fixed <seconds>, got {other}"
                )));
            }
        };
        let mode = match cfg.require("governor")? {
            "oracle" => GovernorMode::Oracle,
            "rotec" => GovernorMode::Rotec,
            other => {
                return Err(Error::Config(format!(
                    "governor must be oracle or rotec, got {other}"
                )));
            }
        };

        let mut interferers = Vec::new();
        for line in cfg.get_all("task") {
            interferers.push(parse_task(line)?);
        }

        Ok(Scenario {
            name,
            plant_a,
            plant_b,
            method,
            dt,
            track_c,
            track_d,
            gains,
            con_c,
            con_d,
            y_bar,
            limit_u,
            epsilon: cfg.f64("epsilon")?,
            horizon_cap: cfg.usize_or("horizon_cap", admissible::DEFAULT_HORIZON_CAP)?,
            beta: cfg.f64("beta")?,
            vartheta: cfg.f64_or("vartheta", 1e-6)?,
            sigma: cfg.f64("sigma")?,
            delta_eta: cfg.f64("delta_eta")?,
            q: cfg.matrix("q")?,
            x0: cfg.vector("x0")?,
            v0: cfg.vector("v0")?,
            reference,
            samples: cfg.usize("samples")?,
            mode,
            budget,
            step_cost: cfg.get("step_cost").map(|v| parse_f64(v, "step_cost")).transpose()?,
            interferers,
        })
    }

    /// Assemble plant, gains, admissible set, governor problem, flow
    /// parameters and task set.
    pub fn build(&self) -> Result<BuiltScenario> {
        let cp = ContinuousPlant::new(self.plant_a.clone(), self.plant_b.clone())?;
        let dp = match self.method {
            DiscretizeMethod::Zoh => plant::discretize(&cp, self.dt)?,
            DiscretizeMethod::Euler => plant::euler_discretize(&cp, self.dt)?,
        };
        let (k, g) = plant::design_tracking_gains(&dp, &self.track_c, &self.track_d, &self.gains)?;

        let n_aug = dp.a.nrows() + dp.b.ncols();
        let m_cmd = g.ncols();
        let mut c_rows: Vec<nalgebra::RowDVector<f64>> = Vec::new();
        let mut d_rows: Vec<nalgebra::RowDVector<f64>> = Vec::new();
        let mut bounds: Vec<f64> = Vec::new();
        if let (Some(cc), Some(cd), Some(yb)) = (&self.con_c, &self.con_d, &self.y_bar) {
            if cc.ncols() != n_aug {
                return Err(Error::Config(format!(
                    "con_c has {} columns for augmented dimension {n_aug}",
                    cc.ncols()
                )));
            }
            if cd.nrows() != cc.nrows() || cd.ncols() != m_cmd {
                return Err(Error::Config(format!(
                    "con_d must be {}x{m_cmd}, got {}x{}",
                    cc.nrows(),
                    cd.nrows(),
                    cd.ncols()
                )));
            }
            if yb.len() != cc.nrows() {
                return Err(Error::Config(format!(
                    "y_bar has {} entries for {} constraint rows",
                    yb.len(),
                    cc.nrows()
                )));
            }
            for i in 0..cc.nrows() {
                c_rows.push(cc.row(i).into_owned());
                d_rows.push(cd.row(i).into_owned());
                bounds.push(yb[i]);
            }
        }
        if let Some(bound) = self.limit_u {
            if !(bound > 0.0) {
                return Err(Error::Config(format!("limit_u must be positive, got {bound}")));
            }
            for j in 0..k.nrows() {
                c_rows.push(k.row(j).into_owned());
                d_rows.push(g.row(j).into_owned());
                bounds.push(bound);
                c_rows.push((-k.row(j)).into_owned());
                d_rows.push((-g.row(j)).into_owned());
                bounds.push(bound);
            }
        }
        let c_all = DMatrix::from_rows(&c_rows);
        let d_all = DMatrix::from_rows(&d_rows);
        let y_bar_all = DVector::from_vec(bounds);

        let sys = plant::augment(&dp, &k, &g, &c_all, &d_all)?;
        let nominal = admissible::build(&sys, &y_bar_all, self.epsilon, self.horizon_cap)?;
        let tight = admissible::tighten(&nominal, self.beta, self.vartheta)?;

        if self.x0.len() != n_aug {
            return Err(Error::Config(format!(
                "x0 has {} entries for augmented dimension {n_aug} \
                 (plant state then held input)",
                self.x0.len()
            )));
        }
        if self.v0.len() != m_cmd || self.reference.cmd_dim() != m_cmd {
            return Err(Error::Config(format!(
                "v0 and reference must have the command dimension {m_cmd}"
            )));
        }
        if let ReferenceProfile::Fishhook { rate_index, .. } = self.reference {
            if rate_index >= n_aug {
                return Err(Error::Config(format!(
                    "fishhook rate index {rate_index} out of range ({n_aug} states)"
                )));
            }
        }
        if self.mode == GovernorMode::Rotec && self.step_cost.is_none() {
            return Err(Error::Config(
                "rotec mode needs step_cost for deterministic budgets".into(),
            ));
        }

        let set = Arc::new(tight);
        let sys = Arc::new(sys);
        let prob = GovernorProblem::new(
            self.q.clone(),
            self.reference.initial(),
            Arc::clone(&set),
            Arc::clone(&sys),
        )?;
        let flow = FlowParams::new(self.sigma, self.delta_eta, &set)?;

        let mut tasks = self.interferers.clone();
        let governor = match tasks.iter().position(|t| t.id == "governor") {
            Some(i) => {
                let ratio = tasks[i].period / self.dt;
                if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio < 0.5 {
                    return Err(Error::Config(format!(
                        "governor task period {} must be a positive integer multiple of dt {}",
                        tasks[i].period, self.dt
                    )));
                }
                i
            }
            None => {
                tasks.push(TaskSpec {
                    id: "governor".into(),
                    wcet: self.dt,
                    period: self.dt,
                    exec: ExecTimeModel::Fixed,
                });
                tasks.len() - 1
            }
        };
        let tasks = TaskSet::new(tasks, governor)?;

        Ok(BuiltScenario { sys, set, prob, flow, tasks })
    }
}

fn parse_reference(v: &str) -> Result<ReferenceProfile> {
    let mut parts = v.split_whitespace();
    let kind = parts.next().unwrap_or("");
    match kind {
        "constant" => {
            let rest: Vec<&str> = parts.collect();
            if rest.is_empty() {
                return Err(Error::Config("constant reference needs a value".into()));
            }
            let vals: Vec<f64> =
                rest.iter().map(|e| parse_f64(e, "reference")).collect::<Result<_>>()?;
            Ok(ReferenceProfile::Constant(DVector::from_vec(vals)))
        }
        "piecewise" => {
            let mut knots = Vec::new();
            for knot in parts {
                let (t, val) = knot.split_once(':').ok_or_else(|| {
                    Error::Config(format!("piecewise knot must be time:value, got {knot}"))
                })?;
                knots.push((parse_f64(t, "reference")?, parse_comma_vector(val, "reference")?));
            }
            if knots.is_empty() {
                return Err(Error::Config("piecewise reference needs knots".into()));
            }
            if knots[0].0 != 0.0 {
                return Err(Error::Config("first piecewise knot must be at time 0".into()));
            }
            if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Config("piecewise knot times must increase".into()));
            }
            let d = knots[0].1.len();
            if knots.iter().any(|(_, v)| v.len() != d) {
                return Err(Error::Config("piecewise knot values must share a dimension".into()));
            }
            Ok(ReferenceProfile::Piecewise(knots))
        }
        "fishhook" => {
            let args: Vec<&str> = parts.collect();
            if args.len() != 4 {
                return Err(Error::Config(
                    "fishhook reference takes: steer counter rate_index arm_threshold".into(),
                ));
            }
            let steer = parse_comma_vector(args[0], "reference")?;
            let counter = parse_comma_vector(args[1], "reference")?;
            if counter.len() != steer.len() {
                return Err(Error::Config("fishhook amplitudes must share a dimension".into()));
            }
            let rate_index = args[2]
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad fishhook rate index: {}", args[2])))?;
            let arm_threshold = parse_f64(args[3], "reference")?;
            if !(arm_threshold > 0.0) {
                return Err(Error::Config("fishhook arm threshold must be positive".into()));
            }
            Ok(ReferenceProfile::Fishhook { steer, counter, rate_index, arm_threshold })
        }
        other => Err(Error::Config(format!(
            "reference must be constant, piecewise or fishhook, got {other}"
        ))),
    }
}

/// `task = <id> <wcet_s> <period_s> fixed`
/// `task = <id> <wcet_s> <period_s> weibull <shape> <loc_ms> <scale_ms> <trunc_ms>`
fn parse_task(v: &str) -> Result<TaskSpec> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    if parts.len() < 4 {
        return Err(Error::Config(format!(
            "task needs at least: id wcet period model, got {v}"
        )));
    }
    let id = parts[0].to_string();
    let wcet = parse_f64(parts[1], "task")?;
    let period = parse_f64(parts[2], "task")?;
    let exec = match parts[3] {
        "fixed" => {
            if parts.len() != 4 {
                return Err(Error::Config(format!("fixed task takes no extra arguments: {v}")));
            }
            ExecTimeModel::Fixed
        }
        "weibull" => {
            if parts.len() != 8 {
                return Err(Error::Config(format!(
                    "weibull task takes shape loc_ms scale_ms trunc_ms: {v}"
                )));
            }
            ExecTimeModel::Weibull {
                shape: parse_f64(parts[4], "task")?,
                location_ms: parse_f64(parts[5], "task")?,
                scale_ms: parse_f64(parts[6], "task")?,
                truncation_ms: parse_f64(parts[7], "task")?,
            }
        }
        other => {
            return Err(Error::Config(format!(
                "task model must be fixed or weibull, got {other}"
            )));
        }
    };
    let spec = TaskSpec { id, wcet, period, exec };
    spec.validate()?;
    Ok(spec)
}
