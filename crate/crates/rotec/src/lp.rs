//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `max cᵀx  s.t.  A x ≤ b` over free `x ∈ R^d`. Free variables
//! are split into positive and negative parts, slacks turn rows into
//! equalities, and rows with negative right-hand sides get artificial
//! variables driven out in phase I. Bland's rule (smallest eligible
//! index enters, smallest basic index leaves among the ratio-test ties)
//! guarantees termination even on the degenerate problems the
//! admissible-set construction produces.
//!
//! The problems here are tiny: at most a dozen or so structural
//! variables and a few hundred rows, so a dense tableau is the simplest
//! correct choice. No attempt is made to be fast beyond that.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Outcome of an LP solve.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Unbounded,
    Infeasible,
}

const PIVOT_TOL: f64 = 1e-9;
const ITER_CAP: usize = 200_000;

struct Tableau {
    /// `rows` data rows, then one objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn obj_row(&self) -> usize {
        self.t.len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimize the objective encoded in the last row (reduced costs).
    /// `allowed` marks columns eligible to enter the basis.
    fn run(&mut self, allowed: &[bool]) -> Result<bool> {
        let obj = self.obj_row();
        let rhs = self.ncols - 1;
        for _ in 0..ITER_CAP {
            // Bland: smallest index with a strictly negative reduced cost.
            let mut entering = None;
            for j in 0..rhs {
                if allowed[j] && self.t[obj][j] < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true); // optimal
            };
            // Ratio test; ties resolved by smallest basic variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..obj {
                let a = self.t[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][rhs] / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - PIVOT_TOL
                                || (ratio < lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false); // unbounded in the entering direction
            };
            self.pivot(row, col);
        }
        Err(Error::Design("simplex iteration cap exceeded".into()))
    }
}

/// `max cᵀx  s.t.  a x ≤ b`, `x` free.
pub fn maximize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpOutcome> {
    let (m, d) = (a.nrows(), a.ncols());
    if c.len() != d || b.len() != m {
        return Err(Error::InvalidInput(format!(
            "lp dimension mismatch: c {}, a {}x{}, b {}",
            c.len(),
            m,
            d,
            b.len()
        )));
    }
    // Columns: 2d split vars, m slacks, then artificials, then rhs.
    let n_art = (0..m).filter(|&i| b[i] < 0.0).count();
    let ncols = 2 * d + m + n_art + 1;
    let mut t = vec![vec![0.0; ncols]; m + 1];
    let mut basis = vec![0usize; m];
    let mut art = 2 * d + m;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            t[i][j] = sign * a[(i, j)];
            t[i][d + j] = -sign * a[(i, j)];
        }
        t[i][2 * d + i] = sign;
        t[i][ncols - 1] = sign * b[i];
        if b[i] < 0.0 {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = 2 * d + i;
        }
    }
    let mut tab = Tableau { t, basis, ncols };

    // Phase I: minimize the sum of artificials. Reduced costs at the
    // initial basis: c_j - sum over artificial-basic rows of t[i][j].
    if n_art > 0 {
        let obj = tab.obj_row();
        for j in 0..ncols {
            let mut v = if (2 * d + m..2 * d + m + n_art).contains(&j) {
                1.0
            } else {
                0.0
            };
            for i in 0..m {
                if tab.basis[i] >= 2 * d + m {
                    v -= tab.t[i][j];
                }
            }
            tab.t[obj][j] = v;
        }
        let allowed = vec![true; ncols - 1];
        if !tab.run(&allowed)? {
            return Err(Error::Design("phase-I LP unbounded".into()));
        }
        let phase1 = -tab.t[tab.obj_row()][ncols - 1];
        if phase1.abs() > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive any degenerate basic artificials out where possible.
        for i in 0..m {
            if tab.basis[i] >= 2 * d + m {
                let piv = (0..2 * d + m).find(|&j| tab.t[i][j].abs() > PIVOT_TOL);
                if let Some(j) = piv {
                    tab.pivot(i, j);
                }
            }
        }
    }

    // Phase II: minimize -cᵀx in split variables; artificials barred.
    let obj = tab.obj_row();
    for v in tab.t[obj].iter_mut() {
        *v = 0.0;
    }
    for j in 0..d {
        tab.t[obj][j] = -c[j];
        tab.t[obj][d + j] = c[j];
    }
    // Express reduced costs relative to the current basis.
    for i in 0..m {
        let cb = {
            let bi = tab.basis[i];
            if bi < d {
                -c[bi]
            } else if bi < 2 * d {
                c[bi - d]
            } else {
                0.0
            }
        };
        if cb != 0.0 {
            let row = tab.t[i].clone();
            for (v, r) in tab.t[obj].iter_mut().zip(row.iter()) {
                *v -= cb * r;
            }
        }
    }
    let mut allowed = vec![true; ncols - 1];
    for a in allowed.iter_mut().skip(2 * d + m) {
        *a = false;
    }
    if !tab.run(&allowed)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = DVector::zeros(d);
    for i in 0..m {
        let bi = tab.basis[i];
        let val = tab.t[i][ncols - 1];
        if bi < d {
            x[bi] += val;
        } else if bi < 2 * d {
            x[bi - d] -= val;
        }
    }
    let value = c.dot(&x);
    Ok(LpOutcome::Optimal { x, value })
}

/// Is `{x : a x ≤ b}` nonempty?
pub fn is_feasible(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<bool> {
    let zero = DVector::zeros(a.ncols());
    match maximize(&zero, a, b)? {
        LpOutcome::Infeasible => Ok(false),
        _ => Ok(true),
    }
}

/// Largest uniform slack: `max δ  s.t.  a x + δ·1 ≤ b`, capped at `cap`
/// so sets with unbounded inradius still return. Always feasible
/// (δ → -∞), so the result is `(x, δ*)`.
pub fn max_slack(a: &DMatrix<f64>, b: &DVector<f64>, cap: f64) -> Result<(DVector<f64>, f64)> {
    let (m, d) = (a.nrows(), a.ncols());
    let mut a2 = DMatrix::zeros(m + 1, d + 1);
    let mut b2 = DVector::zeros(m + 1);
    for i in 0..m {
        for j in 0..d {
            a2[(i, j)] = a[(i, j)];
        }
        a2[(i, d)] = 1.0;
        b2[i] = b[i];
    }
    a2[(m, d)] = 1.0;
    b2[m] = cap;
    let mut c = DVector::zeros(d + 1);
    c[d] = 1.0;
    match maximize(&c, &a2, &b2)? {
        LpOutcome::Optimal { x, value } => Ok((x.rows(0, d).into_owned(), value)),
        LpOutcome::Unbounded => Err(Error::Design("slack LP unbounded despite cap".into())),
        LpOutcome::Infeasible => Err(Error::Design("slack LP reported infeasible".into())),
    }
}
