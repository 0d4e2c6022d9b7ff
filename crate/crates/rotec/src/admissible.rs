//! Maximal output-admissible sets and their tightened form.
//!
//! For the closed loop `z+ = A_c z + B G v` under a constant command
//! `v`, the constrained outputs evolve as
//!
//! ```text
//!     y_i(s | z, v) = C_i A_c^s z + H_is v,
//!     H_is = C_i (I - A_c)^{-1} (I - A_c^s) B G + D_i,
//! ```
//!
//! so "`y_i(s) ≤ ybar_i` for all s" is an infinite family of linear
//! inequalities in `(z, v)`. Because `A_c` is Schur the family is
//! finitely determined once the limit constraint is tightened by a
//! factor `(1 - epsilon)`: there is a horizon `s*` past which every
//! further row is implied. [`compute_s_star`] finds the smallest such
//! horizon by certifying redundancy of the `s*+1` rows with one LP per
//! output, and [`build`] materializes the resulting
//! `out_dim * (s* + 2)` rows (horizons `0..=s*` plus the limit row per
//! output, in per-output blocks).
//!
//! [`tighten`] produces the governor's working copy: every row gains a
//! `1/beta` slack, membership is tested in log form
//! `log(-beta f + 1) ≥ margin`, and construction fails if the slack
//! eats the whole interior.
//!
//! # Cache format
//!
//! Sets serialize to a plain-text format (see [`AdmissibleSet::save`])
//! that round-trips bit-exactly:
//!
//! ```text
//! rotec-admissible-set v1
//! out_dim 4
//! state_dim 3
//! cmd_dim 1
//! s_star 11
//! epsilon 0.01
//! beta inf
//! vartheta 0
//! y_bar 0.1 0.1 0.1 0.1
//! rows 52
//! row <output_index> <horizon|inf> <b> <c entries> <h entries>
//! ...
//! ```
//!
//! `output_index` is 0-based. Floats are written in Rust's shortest
//! round-trip decimal form, so parsing reproduces the exact bits.

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::plant::AugmentedSystem;
use nalgebra::{DMatrix, DVector, RowDVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(s) => write!(f, "{s}"),
            Horizon::Infinite => write!(f, "inf"),
        }
    }
}

/// One linear constraint `c·z + h·v ≤ b` of the admissible set.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub output_index: usize,
    pub horizon: Horizon,
    pub c: RowDVector<f64>,
    pub h: RowDVector<f64>,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct AdmissibleSet {
    mat_c: DMatrix<f64>,
    mat_h: DMatrix<f64>,
    vec_b: DVector<f64>,
    meta: Vec<(usize, Horizon)>,
    pub s_star: usize,
    pub epsilon: f64,
    /// `+inf` for the nominal set; finite after [`tighten`].
    pub beta: f64,
    pub vartheta: f64,
    pub y_bar: DVector<f64>,
}

/// Default cap on the finite-determination search.
pub const DEFAULT_HORIZON_CAP: usize = 1000;

fn check_row_inputs(sys: &AugmentedSystem, y_bar: &DVector<f64>, i: usize) -> Result<()> {
    let m_out = sys.out_dim();
    if i >= m_out {
        return Err(Error::InvalidInput(format!(
            "output index {i} out of range ({m_out} outputs)"
        )));
    }
    if y_bar.len() != m_out {
        return Err(Error::InvalidInput(format!(
            "y_bar has {} entries for {m_out} outputs",
            y_bar.len()
        )));
    }
    Ok(())
}

/// Prediction row for output `i` at finite horizon `s`:
/// `C_i A_c^s z + H_is v ≤ y_bar_i`.
pub fn prediction_row(
    sys: &AugmentedSystem,
    y_bar: &DVector<f64>,
    i: usize,
    s: usize,
) -> Result<ConstraintRow> {
    check_row_inputs(sys, y_bar, i)?;
    let dim = sys.state_dim();
    let bg = &sys.b * &sys.g;
    let ci = sys.c.row(i);
    let mut power = DMatrix::identity(dim, dim);
    let mut msum = DMatrix::zeros(dim, dim);
    for _ in 0..s {
        msum += &power;
        power = &power * &sys.a_c;
    }
    let c = ci * &power;
    let h = ci * (&msum * &bg) + sys.d.row(i);
    Ok(ConstraintRow { output_index: i, horizon: Horizon::Finite(s), c, h, b: y_bar[i] })
}

/// Limit row for output `i`: steady-state response tightened by
/// `epsilon`, i.e. `H_i∞ v ≤ (1 - epsilon) y_bar_i` with no `z` term.
pub fn limit_row(
    sys: &AugmentedSystem,
    y_bar: &DVector<f64>,
    epsilon: f64,
    i: usize,
) -> Result<ConstraintRow> {
    check_row_inputs(sys, y_bar, i)?;
    let dim = sys.state_dim();
    let bg = &sys.b * &sys.g;
    let inv_bg = (DMatrix::identity(dim, dim) - &sys.a_c)
        .lu()
        .solve(&bg)
        .ok_or_else(|| Error::Design("(I - A_c) singular in limit row".into()))?;
    let c = RowDVector::zeros(dim);
    let h = sys.c.row(i) * &inv_bg + sys.d.row(i);
    Ok(ConstraintRow {
        output_index: i,
        horizon: Horizon::Infinite,
        c,
        h,
        b: (1.0 - epsilon) * y_bar[i],
    })
}

/// Incremental row generator shared by the search and the builder.
struct RowGen<'a> {
    sys: &'a AugmentedSystem,
    y_bar: &'a DVector<f64>,
    bg: DMatrix<f64>,
    power: DMatrix<f64>,
    msum: DMatrix<f64>,
    h_inf: DMatrix<f64>,
}

impl<'a> RowGen<'a> {
    fn new(sys: &'a AugmentedSystem, y_bar: &'a DVector<f64>) -> Result<Self> {
        let dim = sys.state_dim();
        let bg = &sys.b * &sys.g;
        let inv_bg = (DMatrix::identity(dim, dim) - &sys.a_c)
            .lu()
            .solve(&bg)
            .ok_or_else(|| Error::Design("(I - A_c) singular in limit row".into()))?;
        let h_inf = &sys.c * &inv_bg + &sys.d;
        Ok(RowGen {
            sys,
            y_bar,
            bg,
            power: DMatrix::identity(dim, dim),
            msum: DMatrix::zeros(dim, dim),
            h_inf,
        })
    }

    /// Rows `(c, h, b)` for every output at the current horizon, then
    /// advance to the next horizon.
    fn take_stage(&mut self) -> Vec<(RowDVector<f64>, RowDVector<f64>, f64)> {
        let hmat = &self.sys.c * (&self.msum * &self.bg) + &self.sys.d;
        let cmat = &self.sys.c * &self.power;
        let rows = (0..self.sys.out_dim())
            .map(|i| (cmat.row(i).into_owned(), hmat.row(i).into_owned(), self.y_bar[i]))
            .collect();
        self.msum += &self.power;
        self.power = &self.power * &self.sys.a_c;
        rows
    }

    fn limit_rows(&self, epsilon: f64) -> Vec<(RowDVector<f64>, RowDVector<f64>, f64)> {
        (0..self.sys.out_dim())
            .map(|i| {
                (
                    RowDVector::zeros(self.sys.state_dim()),
                    self.h_inf.row(i).into_owned(),
                    (1.0 - epsilon) * self.y_bar[i],
                )
            })
            .collect()
    }
}

fn validate_build_inputs(sys: &AugmentedSystem, y_bar: &DVector<f64>, epsilon: f64) -> Result<()> {
    if y_bar.len() != sys.out_dim() {
        return Err(Error::InvalidInput(format!(
            "y_bar has {} entries for {} outputs",
            y_bar.len(),
            sys.out_dim()
        )));
    }
    if y_bar.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidInput("output bounds must be strictly positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

type RawRow = (RowDVector<f64>, RowDVector<f64>, f64);

/// Search for the finite-determination horizon. Returns the per-stage
/// finite rows (`stages[s]` = all outputs at horizon `s`, for
/// `s = 0..=s_star`) plus the limit rows.
fn search(
    sys: &AugmentedSystem,
    y_bar: &DVector<f64>,
    epsilon: f64,
    cap: usize,
) -> Result<(Vec<Vec<RawRow>>, Vec<RawRow>)> {
    validate_build_inputs(sys, y_bar, epsilon)?;
    let dim = sys.state_dim();
    let m_cmd = sys.cmd_dim();
    let nvar = dim + m_cmd;
    let mut gen = RowGen::new(sys, y_bar)?;
    let limit = gen.limit_rows(epsilon);
    let mut stages: Vec<Vec<RawRow>> = Vec::new();
    // The LP may legitimately be unbounded while too few horizons are
    // retained to pin the prediction; past `dim + 1` stages an unbounded
    // value means the observability assumption failed.
    let unbounded_grace = dim + 1;

    let mut candidate = gen.take_stage();
    for t in 0..=cap {
        stages.push(candidate);
        candidate = gen.take_stage();
        // Assemble retained rows: all stages so far plus limit rows.
        let nrows = stages.len() * sys.out_dim() + limit.len();
        let mut a = DMatrix::zeros(nrows, nvar);
        let mut b = DVector::zeros(nrows);
        let mut r = 0;
        for stage in stages.iter().chain(std::iter::once(&limit)) {
            for (c, h, bb) in stage {
                for j in 0..dim {
                    a[(r, j)] = c[j];
                }
                for j in 0..m_cmd {
                    a[(r, dim + j)] = h[j];
                }
                b[r] = *bb;
                r += 1;
            }
        }
        let mut all_redundant = true;
        for (i, (c, h, bb)) in candidate.iter().enumerate() {
            let mut obj = DVector::zeros(nvar);
            for j in 0..dim {
                obj[j] = c[j];
            }
            for j in 0..m_cmd {
                obj[dim + j] = h[j];
            }
            let tol = 1e-9 * bb.abs().max(1.0);
            match lp::maximize(&obj, &a, &b)? {
                LpOutcome::Optimal { value, .. } => {
                    if value > bb + tol {
                        all_redundant = false;
                        break;
                    }
                }
                LpOutcome::Unbounded => {
                    if t + 1 > unbounded_grace {
                        return Err(Error::Design(format!(
                            "prediction of output {i} unbounded over the retained rows; \
                             (A, C) observability assumption violated"
                        )));
                    }
                    all_redundant = false;
                    break;
                }
                LpOutcome::Infeasible => {
                    return Err(Error::Design("retained admissible rows are infeasible".into()))
                }
            }
        }
        if all_redundant {
            return Ok((stages, limit));
        }
    }
    Err(Error::HorizonOverflow {
        cap,
        detail: format!("still adding non-redundant rows at horizon {}", cap + 1),
    })
}

/// Smallest `s*` such that every output's `s*+1` row is redundant given
/// horizons `0..=s*` plus the limit rows.
pub fn compute_s_star(
    sys: &AugmentedSystem,
    y_bar: &DVector<f64>,
    epsilon: f64,
    cap: usize,
) -> Result<usize> {
    let (stages, _) = search(sys, y_bar, epsilon, cap)?;
    Ok(stages.len() - 1)
}

/// Build the nominal admissible set (no tightening: `beta = inf`).
pub fn build(
    sys: &AugmentedSystem,
    y_bar: &DVector<f64>,
    epsilon: f64,
    cap: usize,
) -> Result<AdmissibleSet> {
    let (stages, limit) = search(sys, y_bar, epsilon, cap)?;
    let s_star = stages.len() - 1;
    let m_out = sys.out_dim();
    let dim = sys.state_dim();
    let m_cmd = sys.cmd_dim();
    let nrows = m_out * (s_star + 2);
    let mut mat_c = DMatrix::zeros(nrows, dim);
    let mut mat_h = DMatrix::zeros(nrows, m_cmd);
    let mut vec_b = DVector::zeros(nrows);
    let mut meta = Vec::with_capacity(nrows);
    let mut r = 0;
    for i in 0..m_out {
        for (s, stage) in stages.iter().enumerate() {
            let (c, h, b) = &stage[i];
            mat_c.row_mut(r).copy_from(c);
            mat_h.row_mut(r).copy_from(h);
            vec_b[r] = *b;
            meta.push((i, Horizon::Finite(s)));
            r += 1;
        }
        let (c, h, b) = &limit[i];
        mat_c.row_mut(r).copy_from(c);
        mat_h.row_mut(r).copy_from(h);
        vec_b[r] = *b;
        meta.push((i, Horizon::Infinite));
        r += 1;
    }
    Ok(AdmissibleSet {
        mat_c,
        mat_h,
        vec_b,
        meta,
        s_star,
        epsilon,
        beta: f64::INFINITY,
        vartheta: 0.0,
        y_bar: y_bar.clone(),
    })
}

/// Tightened copy: every row's effective inequality becomes
/// `f = c·z + h·v - b + 1/beta ≤ 0`, membership is tested as
/// `log(-beta f + 1) ≥ margin`, and the constructor verifies a strictly
/// feasible point exists for margin `vartheta`.
pub fn tighten(set: &AdmissibleSet, beta: f64, vartheta: f64) -> Result<AdmissibleSet> {
    if !set.beta.is_infinite() {
        return Err(Error::InvalidInput("set is already tightened".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
    }
    if !(vartheta >= 0.0) {
        return Err(Error::InvalidInput(format!("vartheta must be nonnegative, got {vartheta}")));
    }
    // Strict interior of the margin-vartheta set exists iff the
    // untightened uniform slack exceeds e^vartheta / beta.
    let (_, slack) = set.interior_slack()?;
    let required = vartheta.exp() / beta;
    if slack <= required {
        return Err(Error::InfeasibleTightening { margin: slack, required });
    }
    let mut out = set.clone();
    out.beta = beta;
    out.vartheta = vartheta;
    Ok(out)
}

/// The per-output block layout: horizons `0..=s_star` then the limit
/// row, repeated for each output index in order.
fn validate_layout(meta: &[(usize, Horizon)], out_dim: usize, s_star: usize) -> Result<()> {
    if meta.len() != out_dim * (s_star + 2) {
        return Err(Error::InvalidInput(format!(
            "expected {} rows (= out_dim * (s_star + 2)), got {}",
            out_dim * (s_star + 2),
            meta.len()
        )));
    }
    let mut idx = 0;
    for i in 0..out_dim {
        for s in 0..=s_star {
            if meta[idx] != (i, Horizon::Finite(s)) {
                return Err(Error::InvalidInput(format!(
                    "row {idx} should be output {i} horizon {s}, found ({}, {})",
                    meta[idx].0, meta[idx].1
                )));
            }
            idx += 1;
        }
        if meta[idx] != (i, Horizon::Infinite) {
            return Err(Error::InvalidInput(format!(
                "row {idx} should be output {i} limit row, found ({}, {})",
                meta[idx].0, meta[idx].1
            )));
        }
        idx += 1;
    }
    Ok(())
}

impl AdmissibleSet {
    /// Assemble a nominal set from explicit rows (mainly for tests and
    /// deserialization); rows must follow the per-output block layout.
    pub fn from_rows(
        rows: Vec<ConstraintRow>,
        s_star: usize,
        epsilon: f64,
        y_bar: DVector<f64>,
    ) -> Result<AdmissibleSet> {
        let out_dim = y_bar.len();
        if rows.is_empty() {
            return Err(Error::InvalidInput("no constraint rows".into()));
        }
        let state_dim = rows[0].c.len();
        let cmd_dim = rows[0].h.len();
        if rows.iter().any(|r| r.c.len() != state_dim || r.h.len() != cmd_dim) {
            return Err(Error::InvalidInput("rows disagree on dimensions".into()));
        }
        let meta: Vec<(usize, Horizon)> =
            rows.iter().map(|r| (r.output_index, r.horizon)).collect();
        validate_layout(&meta, out_dim, s_star)?;
        let nrows = rows.len();
        let mut mat_c = DMatrix::zeros(nrows, state_dim);
        let mut mat_h = DMatrix::zeros(nrows, cmd_dim);
        let mut vec_b = DVector::zeros(nrows);
        for (idx, row) in rows.iter().enumerate() {
            mat_c.row_mut(idx).copy_from(&row.c);
            mat_h.row_mut(idx).copy_from(&row.h);
            vec_b[idx] = row.b;
        }
        Ok(AdmissibleSet {
            mat_c,
            mat_h,
            vec_b,
            meta,
            s_star,
            epsilon,
            beta: f64::INFINITY,
            vartheta: 0.0,
            y_bar,
        })
    }
}

fn log_residual(beta: f64, f: f64) -> f64 {
    if beta.is_finite() {
        let arg = -beta * f + 1.0;
        if arg > 0.0 {
            arg.ln()
        } else {
            f64::NEG_INFINITY
        }
    } else if f < 0.0 {
        f64::INFINITY
    } else if f == 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

impl AdmissibleSet {
    pub fn n_rows(&self) -> usize {
        self.meta.len()
    }

    pub fn state_dim(&self) -> usize {
        self.mat_c.ncols()
    }

    pub fn cmd_dim(&self) -> usize {
        self.mat_h.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.y_bar.len()
    }

    pub fn is_tightened(&self) -> bool {
        self.beta.is_finite()
    }

    /// `1/beta`, zero for the nominal set.
    pub fn inv_beta(&self) -> f64 {
        if self.beta.is_finite() {
            1.0 / self.beta
        } else {
            0.0
        }
    }

    pub fn meta(&self) -> &[(usize, Horizon)] {
        &self.meta
    }

    pub fn row(&self, idx: usize) -> ConstraintRow {
        let (output_index, horizon) = self.meta[idx];
        ConstraintRow {
            output_index,
            horizon,
            c: self.mat_c.row(idx).into_owned(),
            h: self.mat_h.row(idx).into_owned(),
            b: self.vec_b[idx],
        }
    }

    /// Flat row index of `(output i, horizon)` under the per-output
    /// block layout.
    pub fn row_index(&self, i: usize, horizon: Horizon) -> usize {
        let block = self.s_star + 2;
        match horizon {
            Horizon::Finite(s) => i * block + s,
            Horizon::Infinite => i * block + block - 1,
        }
    }

    pub fn mat_c(&self) -> &DMatrix<f64> {
        &self.mat_c
    }

    pub fn mat_h(&self) -> &DMatrix<f64> {
        &self.mat_h
    }

    pub fn vec_b(&self) -> &DVector<f64> {
        &self.vec_b
    }

    /// Residuals `f = C z + H v - b + 1/beta`, one entry per row;
    /// feasible (tightened) points have every entry ≤ 0.
    pub fn residuals(&self, z: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut f = &self.mat_c * z + &self.mat_h * v - &self.vec_b;
        let ib = self.inv_beta();
        if ib != 0.0 {
            f.add_scalar_mut(ib);
        }
        f
    }

    /// `log(-beta f + 1)` per row; `-inf` outside the barrier domain.
    /// For the nominal set this degenerates to a sign test.
    pub fn log_residuals(&self, z: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.residuals(z, v).map(|f| log_residual(self.beta, f))
    }

    pub fn min_log_residual(&self, z: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.log_residuals(z, v).iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Membership with a margin: `log(-beta f + 1) ≥ margin` on every
    /// row. Margin 0 tests plain (tightened) membership; margin
    /// `vartheta` tests the working set the flow is confined to. Points
    /// outside the barrier domain simply return `false`.
    pub fn contains(&self, z: &DVector<f64>, v: &DVector<f64>, margin: f64) -> bool {
        self.min_log_residual(z, v) >= margin
    }

    /// Do `(z, v)` satisfy the original (untightened) constraints?
    pub fn untightened_ok(&self, z: &DVector<f64>, v: &DVector<f64>) -> bool {
        let f = &self.mat_c * z + &self.mat_h * v - &self.vec_b;
        f.iter().all(|&fi| fi <= 0.0)
    }

    /// Uniform-slack interior point of the *untightened* rows:
    /// maximizes `delta` over `C z + H v ≤ b - delta`.
    pub fn interior_slack(&self) -> Result<((DVector<f64>, DVector<f64>), f64)> {
        let dim = self.state_dim();
        let m_cmd = self.cmd_dim();
        let mut a = DMatrix::zeros(self.n_rows(), dim + m_cmd);
        a.view_mut((0, 0), (self.n_rows(), dim)).copy_from(&self.mat_c);
        a.view_mut((0, dim), (self.n_rows(), m_cmd)).copy_from(&self.mat_h);
        let (x, slack) = lp::max_slack(&a, &self.vec_b, 1e9)?;
        let z = x.rows(0, dim).into_owned();
        let v = x.rows(dim, m_cmd).into_owned();
        Ok(((z, v), slack))
    }

    /// A strictly feasible point of the tightened margin-vartheta set.
    pub fn feasible_point(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let ((z, v), slack) = self.interior_slack()?;
        let required = if self.beta.is_finite() {
            self.vartheta.exp() / self.beta
        } else {
            0.0
        };
        if slack <= required {
            return Err(Error::InfeasibleTightening { margin: slack, required });
        }
        Ok((z, v))
    }

    /// Serialize to the documented plain-text cache format.
    pub fn save(&self) -> String {
        let mut s = String::new();
        s.push_str("rotec-admissible-set v1\n");
        s.push_str(&format!("out_dim {}\n", self.out_dim()));
        s.push_str(&format!("state_dim {}\n", self.state_dim()));
        s.push_str(&format!("cmd_dim {}\n", self.cmd_dim()));
        s.push_str(&format!("s_star {}\n", self.s_star));
        s.push_str(&format!("epsilon {}\n", self.epsilon));
        s.push_str(&format!("beta {}\n", self.beta));
        s.push_str(&format!("vartheta {}\n", self.vartheta));
        s.push_str("y_bar");
        for b in self.y_bar.iter() {
            s.push_str(&format!(" {b}"));
        }
        s.push('\n');
        s.push_str(&format!("rows {}\n", self.n_rows()));
        for idx in 0..self.n_rows() {
            let (i, hz) = self.meta[idx];
            s.push_str(&format!("row {i} {hz} {}", self.vec_b[idx]));
            for j in 0..self.state_dim() {
                s.push_str(&format!(" {}", self.mat_c[(idx, j)]));
            }
            for j in 0..self.cmd_dim() {
                s.push_str(&format!(" {}", self.mat_h[(idx, j)]));
            }
            s.push('\n');
        }
        s
    }

    pub fn load(text: &str) -> Result<AdmissibleSet> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let bad = |msg: &str| Error::Config(format!("admissible-set cache: {msg}"));
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if header.trim() != "rotec-admissible-set v1" {
            return Err(bad(&format!("unknown header {header:?}")));
        }
        let mut kv = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing {key}")))?;
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| bad(&format!("expected {key}, got {line:?}")))?;
            Ok(rest.trim().to_string())
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| bad(&format!("bad float {s:?}")))
        };
        let out_dim: usize =
            kv("out_dim")?.parse().map_err(|_| bad("bad out_dim"))?;
        let state_dim: usize =
            kv("state_dim")?.parse().map_err(|_| bad("bad state_dim"))?;
        let cmd_dim: usize = kv("cmd_dim")?.parse().map_err(|_| bad("bad cmd_dim"))?;
        let s_star: usize = kv("s_star")?.parse().map_err(|_| bad("bad s_star"))?;
        let epsilon = parse_f(&kv("epsilon")?)?;
        let beta = parse_f(&kv("beta")?)?;
        let vartheta = parse_f(&kv("vartheta")?)?;
        let yb_line = kv("y_bar")?;
        let yb: Vec<f64> = yb_line
            .split_whitespace()
            .map(parse_f)
            .collect::<Result<_>>()?;
        if yb.len() != out_dim {
            return Err(bad("y_bar length mismatch"));
        }
        let nrows: usize = kv("rows")?.parse().map_err(|_| bad("bad rows"))?;
        if nrows != out_dim * (s_star + 2) {
            return Err(bad(&format!(
                "row count {nrows} does not match out_dim*(s_star+2) = {}",
                out_dim * (s_star + 2)
            )));
        }
        let mut mat_c = DMatrix::zeros(nrows, state_dim);
        let mut mat_h = DMatrix::zeros(nrows, cmd_dim);
        let mut vec_b = DVector::zeros(nrows);
        let mut meta = Vec::with_capacity(nrows);
        for idx in 0..nrows {
            let line = lines.next().ok_or_else(|| bad("missing row line"))?;
            let mut tok = line.split_whitespace();
            if tok.next() != Some("row") {
                return Err(bad(&format!("expected row line, got {line:?}")));
            }
            let i: usize = tok
                .next()
                .ok_or_else(|| bad("row missing output index"))?
                .parse()
                .map_err(|_| bad("bad output index"))?;
            let hz_tok = tok.next().ok_or_else(|| bad("row missing horizon"))?;
            let horizon = if hz_tok == "inf" {
                Horizon::Infinite
            } else {
                Horizon::Finite(hz_tok.parse().map_err(|_| bad("bad horizon"))?)
            };
            vec_b[idx] = parse_f(tok.next().ok_or_else(|| bad("row missing bound"))?)?;
            for j in 0..state_dim {
                mat_c[(idx, j)] =
                    parse_f(tok.next().ok_or_else(|| bad("row missing c entry"))?)?;
            }
            for j in 0..cmd_dim {
                mat_h[(idx, j)] =
                    parse_f(tok.next().ok_or_else(|| bad("row missing h entry"))?)?;
            }
            if tok.next().is_some() {
                return Err(bad("trailing tokens on row line"));
            }
            meta.push((i, horizon));
        }
        validate_layout(&meta, out_dim, s_star)
            .map_err(|e| bad(&format!("bad row layout: {e}")))?;
        let y_bar = DVector::from_vec(yb);
        Ok(AdmissibleSet {
            mat_c,
            mat_h,
            vec_b,
            meta,
            s_star,
            epsilon,
            beta,
            vartheta,
            y_bar,
        })
    }

    pub fn save_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.save())?;
        Ok(())
    }

    pub fn load_file(path: &std::path::Path) -> Result<AdmissibleSet> {
        let text = std::fs::read_to_string(path)?;
        Self::load(&text)
    }
}
