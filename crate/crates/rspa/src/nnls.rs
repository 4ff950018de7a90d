//! Nonnegative least squares and the relative reconstruction error used to
//! score an extracted index set.
//!
//! The columns of `X` are independent subproblems sharing the basis `W`, so
//! the solver forms the Gram matrix `W^T W` once and runs an active-set
//! iteration per column on the normal equations. Basis sizes here are small
//! (tens of columns at most), which keeps the per-column Cholesky solves
//! cheap.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use std::collections::HashSet;

/// Default KKT tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default per-column iteration cap for a basis of `r` columns.
pub fn default_max_iter(r: usize) -> usize {
    10 * r
}

/// Result of a nonnegative least squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    /// Coefficients, one column per column of `X`; every entry is >= 0.
    pub h: DenseMatrix,
    /// `||X - W H||_F` at the returned iterate.
    pub objective: f64,
    /// Largest scaled KKT violation over all columns and entries.
    pub kkt_residual: f64,
    /// Total active-set iterations summed over columns.
    pub iterations: usize,
    /// False when some column hit the iteration cap before meeting `tol`.
    pub converged: bool,
    /// True when the Gram matrix needed a ridge because `W` is numerically
    /// rank deficient.
    pub rank_deficient: bool,
}

/// Minimize `||X - W H||_F` over `H >= 0`, column by column.
///
/// Convergence per entry: either the coefficient is positive and its gradient
/// magnitude is at most `tol * scale`, or it is zero and its gradient is at
/// least `-tol * scale`, with `scale = ||W^T x_j||_inf` for column `j`. A
/// column that exceeds `max_iter` keeps its best iterate and clears the
/// `converged` flag; rank-deficient `W` gets a small ridge on the Gram matrix
/// and sets a warning flag rather than failing.
pub fn nnls_solve(
    w: &DenseMatrix,
    x: &DenseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<NnlsSolution> {
    if w.rows() != x.rows() {
        return Err(Error::contract(format!(
            "basis has {} rows but data has {}",
            w.rows(),
            x.rows()
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::contract(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::contract("max_iter must be positive"));
    }

    let r = w.cols();
    let n = x.cols();

    // Shared Gram matrix, ridged once if W is numerically rank deficient.
    let mut gram = vec![0.0; r * r];
    for j in 0..r {
        for i in 0..=j {
            let v = dot(w.column(i), w.column(j));
            gram[j * r + i] = v;
            gram[i * r + j] = v;
        }
    }
    let trace: f64 = (0..r).map(|i| gram[i * r + i]).sum();
    let mut rank_deficient = false;
    if cholesky(&gram, r, 1e-13 * trace / r as f64).is_none() {
        let ridge = 1e-12 * trace / r as f64;
        for i in 0..r {
            gram[i * r + i] += ridge;
        }
        rank_deficient = true;
    }

    let mut h = DenseMatrix::zeros(r, n);
    let mut kkt_residual = 0.0_f64;
    let mut iterations = 0;
    let mut converged = true;

    let mut b = vec![0.0; r];
    for j in 0..n {
        let xj = x.column(j);
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = dot(w.column(i), xj);
        }
        let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            // Gradient at zero vanishes; h_j = 0 is optimal.
            continue;
        }
        let col = solve_column(&gram, r, &b, tol * scale, max_iter);
        iterations += col.iterations;
        converged &= col.converged;
        kkt_residual = kkt_residual.max(col.kkt_violation / scale);
        h.column_mut(j).copy_from_slice(&col.h);
    }

    // Entries are exactly >= 0 here: variables leave the passive set by
    // assignment of literal 0.0 and enter it only with positive solves.
    let objective = {
        let mut sum = 0.0;
        for j in 0..n {
            let xj = x.column(j);
            let hj = h.column(j);
            for i in 0..w.rows() {
                let mut v = xj[i];
                for (k, hk) in hj.iter().enumerate() {
                    v -= w.column(k)[i] * hk;
                }
                sum += v * v;
            }
        }
        sum.sqrt()
    };

    Ok(NnlsSolution {
        h,
        objective,
        kkt_residual,
        iterations,
        converged,
        rank_deficient,
    })
}

struct ColumnSolve {
    h: Vec<f64>,
    kkt_violation: f64,
    iterations: usize,
    converged: bool,
}

/// Active-set iteration on the normal equations `G h = b` with `h >= 0`.
fn solve_column(gram: &[f64], r: usize, b: &[f64], tol_abs: f64, max_iter: usize) -> ColumnSolve {
    let mut h = vec![0.0; r];
    let mut passive = vec![false; r];
    let mut gradient_slack; // negative gradient w = b - G h
    let mut iterations = 0;
    let mut converged = false;

    loop {
        gradient_slack = residual_gradient(gram, r, b, &h);
        // Most violating zero-set entry.
        let mut best = None;
        let mut best_w = tol_abs;
        for i in 0..r {
            if !passive[i] && gradient_slack[i] > best_w {
                best_w = gradient_slack[i];
                best = Some(i);
            }
        }
        let Some(t) = best else {
            converged = true;
            break;
        };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;
        passive[t] = true;

        // Inner loop: restore feasibility of the passive-set solve.
        loop {
            let active: Vec<usize> = (0..r).filter(|&i| passive[i]).collect();
            let z = match solve_subsystem(gram, r, b, &active) {
                Some(z) => z,
                None => {
                    // Numerically unsolvable subsystem; drop the newest
                    // variable and give up on improving this column further.
                    passive[t] = false;
                    break;
                }
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&i, &zi) in active.iter().zip(z.iter()) {
                    h[i] = zi;
                }
                break;
            }
            // Interpolate towards z until the first coefficient hits zero.
            let mut alpha = f64::INFINITY;
            for (&i, &zi) in active.iter().zip(z.iter()) {
                if zi <= 0.0 {
                    let denom = h[i] - zi;
                    if denom > 0.0 {
                        alpha = alpha.min(h[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.min(1.0).max(0.0);
            for (&i, &zi) in active.iter().zip(z.iter()) {
                h[i] += alpha * (zi - h[i]);
            }
            for &i in &active {
                if h[i] <= 0.0 {
                    h[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }

    // Final KKT violation at the returned iterate.
    gradient_slack = residual_gradient(gram, r, b, &h);
    let mut violation = 0.0_f64;
    for i in 0..r {
        if h[i] > 0.0 {
            violation = violation.max(gradient_slack[i].abs());
        } else {
            violation = violation.max((gradient_slack[i]).max(0.0));
        }
    }
    ColumnSolve {
        h,
        kkt_violation: violation,
        iterations,
        converged,
    }
}

/// Negative gradient `b - G h`.
fn residual_gradient(gram: &[f64], r: usize, b: &[f64], h: &[f64]) -> Vec<f64> {
    let mut w = b.to_vec();
    for (i, wi) in w.iter_mut().enumerate() {
        for k in 0..r {
            *wi -= gram[k * r + i] * h[k];
        }
    }
    w
}

/// Solve `G[S, S] z = b[S]` by Cholesky on the subproblem.
fn solve_subsystem(gram: &[f64], r: usize, b: &[f64], subset: &[usize]) -> Option<Vec<f64>> {
    let k = subset.len();
    let mut sub = vec![0.0; k * k];
    for (cj, &j) in subset.iter().enumerate() {
        for (ci, &i) in subset.iter().enumerate() {
            sub[cj * k + ci] = gram[j * r + i];
        }
    }
    let trace: f64 = (0..k).map(|i| sub[i * k + i]).sum();
    let chol = cholesky(&sub, k, 1e-15 * trace.max(f64::MIN_POSITIVE))?;

    // Forward then backward substitution in place.
    let mut z: Vec<f64> = subset.iter().map(|&i| b[i]).collect();
    for i in 0..k {
        for j in 0..i {
            z[i] -= chol[j * k + i] * z[j];
        }
        z[i] /= chol[i * k + i];
    }
    for i in (0..k).rev() {
        for j in (i + 1)..k {
            z[i] -= chol[i * k + j] * z[j];
        }
        z[i] /= chol[i * k + i];
    }
    Some(z)
}

/// Lower-triangular Cholesky factor (stored column-major in the lower part),
/// or `None` if a pivot falls at or below `pivot_floor`.
fn cholesky(a: &[f64], n: usize, pivot_floor: f64) -> Option<Vec<f64>> {
    let mut l = a.to_vec();
    for j in 0..n {
        let mut d = l[j * n + j];
        for k in 0..j {
            d -= l[k * n + j] * l[k * n + j];
        }
        if d <= pivot_floor {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = l[j * n + i];
            for k in 0..j {
                v -= l[k * n + i] * l[k * n + j];
            }
            l[j * n + i] = v / d;
        }
    }
    Some(l)
}

/// Relative reconstruction error of the index set `K`:
/// `min_{H >= 0} ||X - X(:,K) H||_F / ||X||_F`.
///
/// `K` must be non-empty, in range and duplicate free, and `X` non-zero.
pub fn relative_error(x: &DenseMatrix, k: &[usize], tol: f64, max_iter: usize) -> Result<f64> {
    if k.is_empty() {
        return Err(Error::contract("index set must be non-empty"));
    }
    let mut seen = HashSet::new();
    for &idx in k {
        if idx >= x.cols() {
            return Err(Error::contract(format!(
                "index {idx} out of range for {} columns",
                x.cols()
            )));
        }
        if !seen.insert(idx) {
            return Err(Error::contract(format!("duplicate index {idx}")));
        }
    }
    let x_fro = x.frobenius_norm();
    if x_fro <= 0.0 {
        return Err(Error::contract("matrix must be non-zero"));
    }
    let w = x.select_columns(k)?;
    let solution = nnls_solve(&w, x, tol, max_iter)?;
    Ok(solution.objective / x_fro)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
