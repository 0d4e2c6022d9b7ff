//! Plant models, discretization, and tracking-gain design.
//!
//! The controlled system starts as a continuous-time LTI model
//! `x' = A_o x + B_o u`. Two discretizations are provided:
//!
//! * [`discretize`] — exact zero-order hold via the matrix exponential
//!   of the Van Loan block matrix `[[A_o, B_o], [0, 0]]·ΔT`;
//! * [`euler_discretize`] — forward Euler, `A_d = I + ΔT·A_o`,
//!   `B_d = ΔT·B_o`, for scenarios specified that way.
//!
//! Under logical-execution-time semantics the input computed at sample
//! `k` is applied from sample `k+1`, so the one-sample delay is made
//! part of the model: the augmented state is `z = [x; u_prev]` with
//!
//! ```text
//!     z+ = [A_d  B_d] z + [0]  u
//!          [ 0    0 ]     [I]
//! ```
//!
//! The nominal loop is `u = K z + G v` for a constant command `v`;
//! [`design_tracking_gains`] places the closed-loop poles (Ackermann for
//! single-input plants, iterated discrete Riccati otherwise) and picks
//! `G` by inverting the closed-loop DC gain so the tracked output
//! settles exactly at `v`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct ContinuousPlant {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl ContinuousPlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.nrows() {
            return Err(Error::InvalidInput(format!(
                "plant dimensions: a is {}x{}, b is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(ContinuousPlant { a, b })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct DiscretePlant {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub dt: f64,
}

/// Closed-loop augmented system: state `z = [x; u_prev]`, command `v`.
/// `c`/`d` are the constrained-output matrices (`y = C z + D v`); the
/// constraint bounds themselves live in the admissible set.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    /// `a + b k`, cached; Schur by construction.
    pub a_c: DMatrix<f64>,
    pub dt: f64,
}

/// How the stabilizing gain is chosen.
#[derive(Debug, Clone)]
pub enum PoleSpec {
    /// Desired closed-loop pole moduli (real), Ackermann placement.
    /// Single-input plants only.
    Poles(Vec<f64>),
    /// Discrete LQR with diagonal weights on the augmented state and
    /// the input.
    Lqr {
        state_weights: DVector<f64>,
        input_weights: DVector<f64>,
    },
}

const SCHUR_MARGIN: f64 = 1e-9;
const RANK_REL_TOL: f64 = 1e-9;

/// Infinity norm (max absolute row sum).
fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6)
/// approximant. Accuracy target well below 1e-12 for the small, mildly
/// scaled matrices produced by Van Loan blocks.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.nrows();
    // Padé(6) coefficients: c_k = 6!(12-k)! / (12! k! (6-k)!).
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let norm = inf_norm(m);
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let a = m / 2f64.powi(s as i32);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let ident = DMatrix::identity(n, n);
    // p(a) = u + v with u the odd part, so the (6,6) approximant is
    // (v - u)^{-1} (v + u).
    let u = &a * (C[1] * &ident + C[3] * &a2 + C[5] * &a4);
    let v = C[0] * &ident + C[2] * &a2 + C[4] * &a4 + C[6] * &a6;
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Design("Pade denominator singular in expm".into()))?;
    for _ in 0..s {
        f = &f * &f;
    }
    Ok(f)
}

/// Exact zero-order-hold discretization via the Van Loan block matrix:
/// `exp([[A, B],[0, 0]]·ΔT) = [[A_d, B_d],[0, I]]`.
pub fn discretize(cp: &ContinuousPlant, dt: f64) -> Result<DiscretePlant> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("sampling period must be positive, got {dt}")));
    }
    let n = cp.state_dim();
    let p = cp.input_dim();
    let mut block = DMatrix::zeros(n + p, n + p);
    for i in 0..n {
        for j in 0..n {
            block[(i, j)] = cp.a[(i, j)] * dt;
        }
        for j in 0..p {
            block[(i, n + j)] = cp.b[(i, j)] * dt;
        }
    }
    let e = expm(&block)?;
    let a = e.view((0, 0), (n, n)).into_owned();
    let b = e.view((0, n), (n, p)).into_owned();
    Ok(DiscretePlant { a, b, dt })
}

/// Forward-Euler discretization: `A_d = I + ΔT·A_o`, `B_d = ΔT·B_o`.
pub fn euler_discretize(cp: &ContinuousPlant, dt: f64) -> Result<DiscretePlant> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("sampling period must be positive, got {dt}")));
    }
    let n = cp.state_dim();
    let a = DMatrix::identity(n, n) + &cp.a * dt;
    let b = &cp.b * dt;
    Ok(DiscretePlant { a, b, dt })
}

/// One-sample-delay augmented matrices `(A, B)` for a discrete plant.
pub fn delay_augmented(dp: &DiscretePlant) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = dp.a.nrows();
    let p = dp.b.ncols();
    let mut a = DMatrix::zeros(n + p, n + p);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = dp.a[(i, j)];
        }
        for j in 0..p {
            a[(i, n + j)] = dp.b[(i, j)];
        }
    }
    let mut b = DMatrix::zeros(n + p, p);
    for j in 0..p {
        b[(n + j, j)] = 1.0;
    }
    (a, b)
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
}

fn rank_by_svd(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_TOL * smax).count()
}

/// Kalman controllability test `rank [B, AB, ..., A^{d-1}B] = d`.
pub fn is_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let d = a.nrows();
    let p = b.ncols();
    let mut kal = DMatrix::zeros(d, d * p);
    let mut blk = b.clone();
    for i in 0..d {
        kal.view_mut((0, i * p), (d, p)).copy_from(&blk);
        blk = a * &blk;
    }
    rank_by_svd(&kal) == d
}

/// Kalman observability test on `(A, C)`.
pub fn is_observable(a: &DMatrix<f64>, c: &DMatrix<f64>) -> bool {
    let d = a.nrows();
    let m = c.nrows();
    let mut kal = DMatrix::zeros(d * m, d);
    let mut blk = c.clone();
    for i in 0..d {
        kal.view_mut((i * m, 0), (m, d)).copy_from(&blk);
        blk = &blk * a;
    }
    rank_by_svd(&kal) == d
}

/// Monic characteristic polynomial coefficients from real roots:
/// returns `[c_0, ..., c_{d-1}, 1]` for `prod (x - r_i)`.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}

/// Ackermann's formula for single-input pole placement; returns the
/// row gain `K` with `u = K z` giving `A + B K` the desired poles.
fn ackermann(a: &DMatrix<f64>, b: &DMatrix<f64>, poles: &[f64]) -> Result<DMatrix<f64>> {
    let d = a.nrows();
    if b.ncols() != 1 {
        return Err(Error::Design(
            "pole placement via Ackermann needs a single-input plant; use LQR weights instead".into(),
        ));
    }
    if poles.len() != d {
        return Err(Error::InvalidInput(format!(
            "need {d} poles for a {d}-state augmented system, got {}",
            poles.len()
        )));
    }
    // Controllability matrix and its last inverse row.
    let mut ctrb = DMatrix::zeros(d, d);
    let mut col = b.column(0).into_owned();
    for j in 0..d {
        ctrb.set_column(j, &col);
        col = a * &col;
    }
    if rank_by_svd(&ctrb) != d {
        return Err(Error::Design("plant is not controllable; cannot place poles".into()));
    }
    let mut e_last = DVector::zeros(d);
    e_last[d - 1] = 1.0;
    let w = ctrb
        .transpose()
        .lu()
        .solve(&e_last)
        .ok_or_else(|| Error::Design("controllability matrix numerically singular".into()))?;
    // phi(A) by Horner on the monic characteristic polynomial.
    let coeff = poly_from_roots(poles);
    let mut phi = DMatrix::identity(d, d);
    for &c in coeff.iter().rev().skip(1) {
        phi = &phi * a + DMatrix::identity(d, d) * c;
    }
    let wt = DMatrix::from_fn(1, d, |_, j| w[j]);
    Ok(-(wt * phi))
}

/// Discrete LQR gain by iterating the Riccati difference equation to a
/// fixed point. `u = K z` with `A + B K` Schur for stabilizable pairs.
fn dlqr(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    qw: &DVector<f64>,
    rw: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let d = a.nrows();
    let p = b.ncols();
    if qw.len() != d || rw.len() != p {
        return Err(Error::InvalidInput(format!(
            "LQR weights: need {d} state and {p} input weights, got {} and {}",
            qw.len(),
            rw.len()
        )));
    }
    if qw.iter().any(|&w| w < 0.0) || rw.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidInput(
            "LQR state weights must be nonnegative and input weights positive".into(),
        ));
    }
    let q = DMatrix::from_diagonal(qw);
    let r = DMatrix::from_diagonal(rw);
    let mut pmat = q.clone();
    for _ in 0..500_000 {
        let btp = b.transpose() * &pmat;
        let gram = &r + &btp * b;
        let rhs = &btp * a;
        let kterm = gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Design("LQR gain solve singular".into()))?;
        let next = &q + a.transpose() * &pmat * a - (a.transpose() * btp.transpose()) * &kterm;
        let diff = inf_norm(&(&next - &pmat));
        let scale = inf_norm(&next).max(1.0);
        pmat = next;
        if diff <= 1e-13 * scale {
            let btp = b.transpose() * &pmat;
            let gram = &r + &btp * b;
            let rhs = &btp * a;
            let k = gram
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Design("LQR gain solve singular".into()))?;
            return Ok(-k);
        }
    }
    Err(Error::Design("Riccati iteration did not converge; pair may not be stabilizable".into()))
}

/// Design `(K, G)` for the delay-augmented system of `dp`.
///
/// `c_track`/`d_track` define the tracked output (dimension = input
/// dimension) whose steady state under constant `v` must equal `v`:
/// `G` solves `(C (I - A_c)^{-1} B) G = I - D`.
pub fn design_tracking_gains(
    dp: &DiscretePlant,
    c_track: &DMatrix<f64>,
    d_track: &DMatrix<f64>,
    spec: &PoleSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (a, b) = delay_augmented(dp);
    let dim = a.nrows();
    let p = b.ncols();
    if c_track.ncols() != dim || c_track.nrows() != p || d_track.nrows() != p || d_track.ncols() != p
    {
        return Err(Error::InvalidInput(format!(
            "tracked output must be {p}x{dim} with {p}x{p} feedthrough, got {}x{} and {}x{}",
            c_track.nrows(),
            c_track.ncols(),
            d_track.nrows(),
            d_track.ncols()
        )));
    }
    if !is_controllable(&a, &b) {
        return Err(Error::Design("delay-augmented pair (A, B) is not controllable".into()));
    }
    let k = match spec {
        PoleSpec::Poles(poles) => ackermann(&a, &b, poles)?,
        PoleSpec::Lqr { state_weights, input_weights } => dlqr(&a, &b, state_weights, input_weights)?,
    };
    let a_c = &a + &b * &k;
    let rho = spectral_radius(&a_c);
    if rho >= 1.0 - SCHUR_MARGIN {
        return Err(Error::Design(format!(
            "designed closed loop is not Schur: spectral radius {rho:.12}"
        )));
    }
    let ident = DMatrix::identity(dim, dim);
    let inv = (&ident - &a_c)
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Design("(I - A_c) singular while computing DC gain".into()))?;
    let dc = c_track * inv; // p x p
    let target = DMatrix::identity(p, p) - d_track;
    let g = dc
        .lu()
        .solve(&target)
        .ok_or_else(|| Error::Design("closed-loop DC gain is singular; tracked output cannot follow v".into()))?;
    Ok((k, g))
}

/// Assemble the closed-loop augmented system and verify its invariants:
/// dimensions, `A_c` Schur with margin, and `(A, C)` observable.
pub fn augment(
    dp: &DiscretePlant,
    k: &DMatrix<f64>,
    g: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<AugmentedSystem> {
    let (a, b) = delay_augmented(dp);
    let dim = a.nrows();
    let p = b.ncols();
    if k.nrows() != p || k.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "gain K must be {p}x{dim}, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let m_cmd = g.ncols();
    if g.nrows() != p {
        return Err(Error::InvalidInput(format!(
            "gain G must have {p} rows, got {}",
            g.nrows()
        )));
    }
    if c.ncols() != dim || d.nrows() != c.nrows() || d.ncols() != m_cmd {
        return Err(Error::InvalidInput(format!(
            "constraint outputs: C is {}x{} (want cols {dim}), D is {}x{} (want {}x{m_cmd})",
            c.nrows(),
            c.ncols(),
            d.nrows(),
            d.ncols(),
            c.nrows()
        )));
    }
    let a_c = &a + &b * k;
    let rho = spectral_radius(&a_c);
    if rho >= 1.0 - SCHUR_MARGIN {
        return Err(Error::Design(format!(
            "closed loop is not Schur: spectral radius {rho:.12}"
        )));
    }
    if !is_observable(&a, c) {
        return Err(Error::Design("(A, C) is not observable".into()));
    }
    Ok(AugmentedSystem {
        a,
        b,
        k: k.clone(),
        g: g.clone(),
        c: c.clone(),
        d: d.clone(),
        a_c,
        dt: dp.dt,
    })
}

impl AugmentedSystem {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// Command dimension (length of `v`).
    pub fn cmd_dim(&self) -> usize {
        self.g.ncols()
    }

    /// Constrained-output dimension (rows of `C`).
    pub fn out_dim(&self) -> usize {
        self.c.nrows()
    }

    /// `z+ = A z + B u`.
    pub fn step(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * z + &self.b * u
    }

    /// Nominal control law `u = K z + G v`.
    pub fn control(&self, z: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.k * z + &self.g * v
    }

    /// Constrained outputs `y = C z + D v`.
    pub fn output(&self, z: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.c * z + &self.d * v
    }
}
