//! Command-governor problems, exact reference oracles, and the
//! modified-barrier calculus the flow integrates.
//!
//! The governor minimizes `½‖v - r‖²_Q` over the admissible rows at
//! the current state. Two exact solvers serve as oracles: one over the
//! plain rows (`c·z + h·v ≤ b`), one over the tightened rows
//! (`f = c·z + h·v - b + 1/beta ≤ 0`). Both enumerate active-row
//! subsets of size at most `cmd_dim`, solve the equality-constrained
//! KKT system for each, and keep the best feasible candidate; this is
//! exact for the small dense problems this crate targets and is
//! guarded against larger command dimensions.
//!
//! The online object is the modified barrier
//!
//! ```text
//!     B(v, lambda) = ½‖v - r‖²_Q - Σ lambda_is log(-beta f_is + 1)
//! ```
//!
//! whose saddle point coincides with the tightened optimum
//! `(v†, lambda†)`. [`barrier`], [`barrier_grad_v`],
//! [`barrier_grad_lambda`] and [`hessian_vv`] evaluate it and its
//! derivatives on the strict interior, erroring on boundary or
//! exterior points rather than returning non-finite values.

use crate::admissible::{AdmissibleSet, Horizon};
use crate::error::{Error, Result};
use crate::lp;
use crate::plant::AugmentedSystem;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Largest command dimension the subset-enumeration oracles accept.
pub const ORACLE_CMD_DIM_CAP: usize = 6;

/// Tolerance for classifying a row as active in KKT reports.
pub const KKT_ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GovernorProblem {
    q: DMatrix<f64>,
    q_inv: DMatrix<f64>,
    q_min_eig: f64,
    /// Current reference; the barrier and its gradients read this.
    pub r: DVector<f64>,
    pub set: Arc<AdmissibleSet>,
    pub sys: Arc<AugmentedSystem>,
}

impl GovernorProblem {
    /// `q` must be symmetric positive-definite, `set` must be a
    /// tightened admissible set matching `sys` in dimensions.
    pub fn new(
        q: DMatrix<f64>,
        r: DVector<f64>,
        set: Arc<AdmissibleSet>,
        sys: Arc<AugmentedSystem>,
    ) -> Result<Self> {
        let m = set.cmd_dim();
        if q.nrows() != m || q.ncols() != m {
            return Err(Error::InvalidInput(format!(
                "Q is {}x{} for command dimension {m}",
                q.nrows(),
                q.ncols()
            )));
        }
        if r.len() != m {
            return Err(Error::InvalidInput(format!(
                "reference has length {} for command dimension {m}",
                r.len()
            )));
        }
        if sys.cmd_dim() != m || sys.state_dim() != set.state_dim() {
            return Err(Error::InvalidInput(
                "admissible set and augmented system dimensions disagree".into(),
            ));
        }
        if !set.is_tightened() {
            return Err(Error::InvalidInput(
                "governor problems require a tightened admissible set".into(),
            ));
        }
        let sym_err = (&q - q.transpose()).amax();
        if sym_err > 1e-10 * q.amax().max(1.0) {
            return Err(Error::InvalidInput("Q must be symmetric".into()));
        }
        let eig = q.clone().symmetric_eigen();
        let q_min_eig = eig.eigenvalues.min();
        if q_min_eig <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Q must be positive definite (min eigenvalue {q_min_eig})"
            )));
        }
        let q_inv = q
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("Q must be positive definite".into()))?
            .inverse();
        Ok(GovernorProblem { q, q_inv, q_min_eig, r, set, sys })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn q_min_eig(&self) -> f64 {
        self.q_min_eig
    }

    pub fn cmd_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn set_reference(&mut self, r: DVector<f64>) -> Result<()> {
        if r.len() != self.cmd_dim() {
            return Err(Error::InvalidInput(format!(
                "reference has length {} for command dimension {}",
                r.len(),
                self.cmd_dim()
            )));
        }
        self.r = r;
        Ok(())
    }

    /// `½‖v - r‖²_Q` for this problem's current reference.
    pub fn tracking_cost(&self, v: &DVector<f64>) -> f64 {
        let d = v - &self.r;
        0.5 * (&self.q * &d).dot(&d)
    }
}

struct QpSolution {
    v: DVector<f64>,
    mu: DVector<f64>,
    objective: f64,
}

/// Exact QP `min ½‖v - r‖²_Q  s.t.  H v ≤ rhs` by enumerating active
/// subsets of at most `cmd_dim` rows. `rhs_shift` moves every row
/// boundary inward (0 for the plain rows, `1/beta` for tightened).
fn solve_qp(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    r: &DVector<f64>,
    rhs_shift: f64,
) -> Result<QpSolution> {
    let set = &prob.set;
    let m = prob.cmd_dim();
    if m > ORACLE_CMD_DIM_CAP {
        return Err(Error::InvalidInput(format!(
            "oracle subset enumeration capped at command dimension {ORACLE_CMD_DIM_CAP}, got {m}"
        )));
    }
    if z.len() != set.state_dim() || r.len() != m {
        return Err(Error::InvalidInput("oracle input dimensions disagree".into()));
    }
    let nrows = set.n_rows();
    let hmat = set.mat_h();
    let rhs = set.vec_b() - set.mat_c() * z - DVector::from_element(nrows, rhs_shift);

    let mut best: Option<QpSolution> = None;
    let consider = |subset: &[usize], best: &mut Option<QpSolution>| {
        let k = subset.len();
        let (v, mu) = if k == 0 {
            (r.clone(), DVector::zeros(0))
        } else {
            let mut hs = DMatrix::zeros(k, m);
            let mut rhs_s = DVector::zeros(k);
            for (row, &idx) in subset.iter().enumerate() {
                hs.row_mut(row).copy_from(&hmat.row(idx));
                rhs_s[row] = rhs[idx];
            }
            // Discard rank-deficient active candidates; an equivalent
            // independent subset is enumerated separately. The R factor
            // is k x m with k <= m, so read its leading diagonal
            // directly rather than through diagonal(), which requires a
            // square matrix.
            let qr = hs.clone().col_piv_qr();
            let rfac = qr.r();
            let mut dmax = 0.0_f64;
            let mut dmin = f64::INFINITY;
            for i in 0..rfac.nrows().min(rfac.ncols()) {
                let d = rfac[(i, i)].abs();
                dmax = dmax.max(d);
                dmin = dmin.min(d);
            }
            if dmax == 0.0 || dmin < 1e-10 * dmax {
                return;
            }
            let hqh = &hs * &prob.q_inv * hs.transpose();
            let kkt_rhs = &hs * r - &rhs_s;
            let mu_s = match hqh.lu().solve(&kkt_rhs) {
                Some(s) => s,
                None => return,
            };
            let mu_tol = 1e-9 * (1.0 + mu_s.amax());
            if mu_s.iter().any(|&mi| mi < -mu_tol) {
                return;
            }
            let v = r - &prob.q_inv * (hs.transpose() * &mu_s);
            (v, mu_s)
        };
        // Every other row must hold at the candidate.
        for j in 0..nrows {
            let slack = rhs[j] - hmat.row(j).dot(&v.transpose());
            if slack < -1e-9 * rhs[j].abs().max(1.0) {
                return;
            }
        }
        let d = &v - r;
        let objective = 0.5 * (&prob.q * &d).dot(&d);
        let better = match best {
            None => true,
            Some(b) => objective < b.objective,
        };
        if better {
            let mut mu_full = DVector::zeros(nrows);
            for (row, &idx) in subset.iter().enumerate() {
                mu_full[idx] = mu[row].max(0.0);
            }
            *best = Some(QpSolution { v, mu: mu_full, objective });
        }
    };

    // Size 0 (unconstrained minimizer) first, then growing subsets in
    // lexicographic order; ties keep the earliest candidate.
    consider(&[], &mut best);
    for k in 1..=m.min(nrows) {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            consider(&subset, &mut best);
            if !next_combination(&mut subset, nrows) {
                break;
            }
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible("no feasible command at the current state; invariance was violated upstream".into())
    })
}

/// Advance `subset` to the next lexicographic k-combination of
/// `0..n`; false once the last combination has been visited.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] != i + n - k {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact minimizer of `½‖v - r‖²_Q` over the plain (untightened) rows
/// at state `z`.
pub fn solve_cg_oracle(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(solve_qp(prob, z, r, 0.0)?.v)
}

/// Exact minimizer over the tightened rows, with the multipliers of
/// the log-form problem.
///
/// The QP multipliers `mu` satisfy `Q(v† - r) + Σ mu_is h_is = 0` on
/// the active rows. The log-form stationarity is
/// `Q(v† - r) + Σ lambda_is beta h_is / (-beta f_is + 1) = 0`, so the
/// multipliers map by `lambda_is = mu_is (-beta f_is + 1) / beta`,
/// which is `mu_is / beta` exactly on active rows (`f_is = 0`) and
/// zero elsewhere by complementarity.
pub fn solve_tightened_oracle(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let set = &prob.set;
    let sol = solve_qp(prob, z, r, set.inv_beta())?;
    let beta = set.beta;
    let f = set.residuals(z, &sol.v);
    let lambda = DVector::from_fn(set.n_rows(), |i, _| {
        if sol.mu[i] == 0.0 {
            0.0
        } else {
            (sol.mu[i] * (-beta * f[i] + 1.0) / beta).max(0.0)
        }
    });
    Ok((sol.v, lambda))
}

/// Residual terms shared by the barrier family: `phi = -beta f + 1`
/// per row, strictly positive on the domain.
fn phi_checked(prob: &GovernorProblem, z: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let set = &prob.set;
    if z.len() != set.state_dim() || v.len() != set.cmd_dim() {
        return Err(Error::InvalidInput("barrier input dimensions disagree".into()));
    }
    let phi = set.residuals(z, v).map(|f| -set.beta * f + 1.0);
    if phi.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Domain(
            "point is on or outside the barrier boundary (-beta f + 1 ≤ 0)".into(),
        ));
    }
    Ok(phi)
}

fn check_lambda(prob: &GovernorProblem, lambda: &DVector<f64>) -> Result<()> {
    if lambda.len() != prob.set.n_rows() {
        return Err(Error::InvalidInput(format!(
            "lambda has length {} for {} rows",
            lambda.len(),
            prob.set.n_rows()
        )));
    }
    if lambda.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidInput("lambda must be elementwise nonnegative".into()));
    }
    Ok(())
}

/// Modified barrier `½‖v-r‖²_Q - Σ lambda_is log(-beta f_is + 1)`.
pub fn barrier(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<f64> {
    check_lambda(prob, lambda)?;
    let phi = phi_checked(prob, z, v)?;
    let mut val = prob.tracking_cost(v);
    for i in 0..phi.len() {
        val -= lambda[i] * phi[i].ln();
    }
    Ok(val)
}

/// `∇_v B = Q(v-r) + Σ beta lambda_is h_isᵀ / (-beta f_is + 1)`.
pub fn barrier_grad_v(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_lambda(prob, lambda)?;
    let phi = phi_checked(prob, z, v)?;
    let set = &prob.set;
    let weights = DVector::from_fn(phi.len(), |i, _| set.beta * lambda[i] / phi[i]);
    Ok(&prob.q * (v - &prob.r) + set.mat_h().transpose() * weights)
}

/// `∂B/∂lambda_is = -log(-beta f_is + 1)`, one entry per row.
pub fn barrier_grad_lambda(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let phi = phi_checked(prob, z, v)?;
    Ok(phi.map(|p| -p.ln()))
}

/// `∇²_vv B = Q + beta² Σ lambda_is h_isᵀ h_is / (-beta f_is + 1)²`.
pub fn hessian_vv(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_lambda(prob, lambda)?;
    let phi = phi_checked(prob, z, v)?;
    let set = &prob.set;
    let mut h = prob.q.clone();
    let b2 = set.beta * set.beta;
    for i in 0..phi.len() {
        if lambda[i] != 0.0 {
            let row = set.mat_h().row(i);
            let w = b2 * lambda[i] / (phi[i] * phi[i]);
            h += w * row.transpose() * row;
        }
    }
    Ok(h)
}

/// KKT diagnostics at a primal-dual candidate.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// Rows with `|log(-beta f + 1)| ≤` [`KKT_ACTIVE_TOL`], as
    /// `(output_index, horizon)`.
    pub active: Vec<(usize, Horizon)>,
    /// `‖∇_v B‖`.
    pub stationarity: f64,
    /// `max_is |lambda_is · log(-beta f_is + 1)|`.
    pub complementarity: f64,
    /// `lambda ≥ 0` elementwise.
    pub dual_feasible: bool,
}

pub fn kkt_report(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<KktReport> {
    if lambda.len() != prob.set.n_rows() {
        return Err(Error::InvalidInput("lambda length mismatch".into()));
    }
    let phi = phi_checked(prob, z, v)?;
    let logs = phi.map(|p| p.ln());
    let mut active = Vec::new();
    let mut complementarity: f64 = 0.0;
    for i in 0..logs.len() {
        if logs[i].abs() <= KKT_ACTIVE_TOL {
            active.push(prob.set.meta()[i]);
        }
        complementarity = complementarity.max((lambda[i] * logs[i]).abs());
    }
    let dual_feasible = lambda.iter().all(|&l| l >= 0.0);
    let stationarity = if dual_feasible {
        barrier_grad_v(prob, z, v, lambda)?.norm()
    } else {
        // Gradient formula is still well-defined; bypass the
        // nonnegativity check to report on bad candidates.
        let set = &prob.set;
        let weights = DVector::from_fn(phi.len(), |i, _| set.beta * lambda[i] / phi[i]);
        (&prob.q * (v - &prob.r) + set.mat_h().transpose() * weights).norm()
    };
    Ok(KktReport { active, stationarity, complementarity, dual_feasible })
}

/// Monotonicity quotient of the saddle operator between a trajectory
/// point and the oracle optimum:
///
/// ```text
///     < F(x) - F(x†), x - x† > / ‖x - x†‖²,
///     F(v, lambda) = [ ∇_v B(v, lambda) ; -∇_lambda B(v) ]
/// ```
///
/// The minimum of this quotient along a trajectory, clamped at zero,
/// is the empirical strong-monotonicity modulus used for convergence
/// diagnostics. Returns `None` when the points coincide to working
/// precision.
pub fn monotonicity_quotient(
    prob: &GovernorProblem,
    z: &DVector<f64>,
    v: &DVector<f64>,
    lambda: &DVector<f64>,
    v_dag: &DVector<f64>,
    lambda_dag: &DVector<f64>,
) -> Result<Option<f64>> {
    let dv = v - v_dag;
    let dl = lambda - lambda_dag;
    let dist2 = dv.norm_squared() + dl.norm_squared();
    if dist2 <= 1e-24 {
        return Ok(None);
    }
    let gv = barrier_grad_v(prob, z, v, lambda)? - barrier_grad_v(prob, z, v_dag, lambda_dag)?;
    let gl = -(barrier_grad_lambda(prob, z, v)? - barrier_grad_lambda(prob, z, v_dag)?);
    Ok(Some((gv.dot(&dv) + gl.dot(&dl)) / dist2))
}

/// Appendix-lemma harness: given vectors `M_i` with weights `m_i ≥ 0`
/// of which some `m_{i*} ≥ m_lower > 0`, returns
/// `(J, epsilon · m_lower²)` where `J = ‖Σ m_i M_i‖²` and `epsilon` is
/// the squared distance from `-M_{i*}` to the cone of the other
/// vectors. The lemma asserts `J ≥ epsilon · m_lower²`; callers check
/// the returned pair.
///
/// Precondition (`InvalidInput` otherwise): for every `i`, `-M_i` lies
/// outside the cone spanned by the other vectors.
pub fn appendix_bound_check(
    vectors: &[DVector<f64>],
    weights: &[f64],
    m_lower: f64,
) -> Result<(f64, f64)> {
    if vectors.is_empty() || vectors.len() != weights.len() {
        return Err(Error::InvalidInput("need equally many vectors and weights".into()));
    }
    if vectors.len() > 16 {
        return Err(Error::InvalidInput(
            "cone-projection enumeration capped at 16 vectors".into(),
        ));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|m| m.len() != dim) {
        return Err(Error::InvalidInput("vectors must share one dimension".into()));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    if !(m_lower > 0.0) {
        return Err(Error::InvalidInput("weight floor must be positive".into()));
    }
    let i_star = weights
        .iter()
        .position(|&w| w >= m_lower)
        .ok_or_else(|| Error::InvalidInput("no weight reaches the floor".into()))?;

    for i in 0..vectors.len() {
        if in_cone_of_others(vectors, i)? {
            return Err(Error::InvalidInput(format!(
                "cone condition violated: -M_{i} lies in the cone of the other vectors"
            )));
        }
    }

    let mut sum = DVector::zeros(dim);
    for (m, &w) in vectors.iter().zip(weights) {
        sum += m * w;
    }
    let j = sum.norm_squared();

    let others: Vec<&DVector<f64>> =
        vectors.iter().enumerate().filter(|(k, _)| *k != i_star).map(|(_, m)| m).collect();
    let target = -&vectors[i_star];
    let epsilon = cone_distance_squared(&others, &target);
    Ok((j, epsilon * m_lower * m_lower))
}

/// Is `-M_i` in the cone of the other vectors? LP feasibility of
/// `Σ_{j≠i} mu_j M_j = -M_i, mu ≥ 0`, with equalities written as
/// inequality pairs.
fn in_cone_of_others(vectors: &[DVector<f64>], i: usize) -> Result<bool> {
    let others: Vec<&DVector<f64>> =
        vectors.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, m)| m).collect();
    let target = -&vectors[i];
    if others.is_empty() {
        return Ok(target.amax() == 0.0);
    }
    let dim = target.len();
    let k = others.len();
    let mut a = DMatrix::zeros(2 * dim + k, k);
    let mut b = DVector::zeros(2 * dim + k);
    for r in 0..dim {
        for c in 0..k {
            a[(r, c)] = others[c][r];
            a[(dim + r, c)] = -others[c][r];
        }
        b[r] = target[r];
        b[dim + r] = -target[r];
    }
    for c in 0..k {
        a[(2 * dim + c, c)] = -1.0;
    }
    lp::is_feasible(&a, &b)
}

/// Squared distance from `target` to `{Σ mu_j others_j : mu ≥ 0}`,
/// exact by enumerating support subsets and solving each least-squares
/// restriction.
fn cone_distance_squared(others: &[&DVector<f64>], target: &DVector<f64>) -> f64 {
    let k = others.len();
    let mut best = target.norm_squared(); // empty support: projection 0
    for mask in 1u32..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
        let cols = support.len();
        let mut n = DMatrix::zeros(target.len(), cols);
        for (c, &j) in support.iter().enumerate() {
            n.column_mut(c).copy_from(others[j]);
        }
        let gram = n.transpose() * &n;
        let rhs = n.transpose() * target;
        let mu = match gram.lu().solve(&rhs) {
            Some(mu) => mu,
            None => continue,
        };
        if mu.iter().any(|&m| m < -1e-12) {
            continue;
        }
        let resid = (&n * &mu - target).norm_squared();
        if resid < best {
            best = resid;
        }
    }
    best
}
