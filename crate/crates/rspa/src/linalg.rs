//! Column-major dense matrices and the rank-one projection updates shared by
//! every algorithm in this crate.
//!
//! All extraction algorithms here spend their time scanning columns and
//! applying updates of the form `(I - alpha * u * u^T) * M`. Columns are kept
//! contiguous so those passes stream through memory, and every reduction uses
//! a fixed left-to-right order so results are bit-reproducible.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

/// Dense real matrix with column-contiguous storage.
///
/// Carries the data matrix, residuals and the diversification carrier. All
/// entries are finite by construction; `rows` and `cols` are at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build a matrix from column-major data. Rejects empty dimensions,
    /// length mismatches and non-finite entries.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite entry {} at row {}, column {}",
                data[pos],
                pos % rows,
                pos / rows
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build a matrix from row slices (convenient in tests and CSV loading).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::contract("matrix must have at least one row and column"));
        }
        let n_rows = rows.len();
        let n_cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::contract(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
        }
        let mut data = vec![0.0; n_rows * n_cols];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                data[j * n_rows + i] = v;
            }
        }
        Self::from_column_major(n_rows, n_cols, data)
    }

    /// All-zero matrix.
    ///
    /// # Panics
    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.rows + row] = value;
    }

    /// Contiguous view of column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Column-major backing storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// New matrix made of the given columns, in the given order. Indices may
    /// repeat; each must be in range.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::contract("column selection must be non-empty"));
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            if j >= self.cols {
                return Err(Error::contract(format!(
                    "column index {j} out of range for {} columns",
                    self.cols
                )));
            }
            data.extend_from_slice(self.column(j));
        }
        Self::from_column_major(self.rows, indices.len(), data)
    }

    /// Frobenius norm, accumulated column by column in index order.
    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for v in &self.data {
            sum += v * v;
        }
        sum.sqrt()
    }
}

// ---------------------------------------------------------------------------
// UnitVector
// ---------------------------------------------------------------------------

/// Real vector with unit Euclidean norm; the direction of a rank-one update.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    components: Vec<f64>,
}

impl UnitVector {
    /// Wrap a vector that is already normalized (norm within 1e-12 of 1).
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&components);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!(
                "unit vector norm is {norm}, expected 1 within 1e-12"
            )));
        }
        Ok(Self { components })
    }

    /// Normalize an arbitrary non-zero vector.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        let norm = l2_norm(v);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::contract("cannot normalize a zero vector"));
        }
        Ok(Self {
            components: v.iter().map(|x| x / norm).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

/// Dot product with fixed left-to-right accumulation.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    for i in 0..a.len() {
        sum += a[i] * b[i];
    }
    sum
}

/// Euclidean norm with fixed left-to-right accumulation.
pub fn l2_norm(v: &[f64]) -> f64 {
    let mut sum = 0.0;
    for x in v {
        sum += x * x;
    }
    sum.sqrt()
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Euclidean norm of each column. Plain sum of squares per column, summed
/// left to right, no compensation.
pub fn column_norms(m: &DenseMatrix) -> Vec<f64> {
    (0..m.cols()).map(|j| l2_norm(m.column(j))).collect()
}

/// `(I - alpha * u * u^T) * M`, computed as `M - alpha * u * (u^T M)`.
///
/// `alpha` must lie in (0, 1]; `alpha = 1` is the orthogonal projection used
/// by the residual update, smaller values are the partial deflations used by
/// the diversified selection. Pure: the input is untouched.
pub fn rank1_update(m: &DenseMatrix, u: &UnitVector, alpha: f64) -> Result<DenseMatrix> {
    check_rank1_args(m, u, alpha)?;
    let mut out = m.clone();
    rank1_update_in_place(&mut out, u, alpha);
    Ok(out)
}

fn check_rank1_args(m: &DenseMatrix, u: &UnitVector, alpha: f64) -> Result<()> {
    if u.len() != m.rows() {
        return Err(Error::contract(format!(
            "direction has {} components but matrix has {} rows",
            u.len(),
            m.rows()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::contract(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// In-place form of [`rank1_update`]; observationally identical.
pub(crate) fn rank1_update_in_place(m: &mut DenseMatrix, u: &UnitVector, alpha: f64) {
    let rows = m.rows();
    let u = u.as_slice();
    debug_assert_eq!(u.len(), rows);
    for j in 0..m.cols() {
        let col = m.column_mut(j);
        let c = alpha * dot(u, col);
        for i in 0..rows {
            col[i] -= c * u[i];
        }
    }
}

// ---------------------------------------------------------------------------
// Conditioning diagnostic
// ---------------------------------------------------------------------------

/// Conditioning of the composed selection function after a run of partial
/// deflations, together with the closed-form upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningReport {
    /// Number of deflations applied.
    pub step: usize,
    /// Eigenvalue ratio of `Q = M^T M` for the explicit product
    /// `M = P_step * ... * P_1`.
    pub kappa: f64,
    /// Product bound `prod_j (1 - alpha_j)^-2`.
    pub kappa_bound: f64,
    /// The deflation coefficients, in application order.
    pub alphas_used: Vec<f64>,
}

/// Condition number of the quadratic form behind the composed selection
/// function. Materializes the explicit product matrix; meant as a diagnostic,
/// not for hot paths.
///
/// Each `(u, alpha)` pair is one deflation `P = I - alpha * u * u^T`, applied
/// in slice order (first element acts first). Every `alpha` must lie strictly
/// in (0, 1). An empty slice reports `kappa = kappa_bound = 1`.
pub fn conditioning(projectors: &[(UnitVector, f64)], rows: usize) -> Result<ConditioningReport> {
    if rows == 0 {
        return Err(Error::contract("rows must be positive"));
    }
    let mut alphas_used = Vec::with_capacity(projectors.len());
    for (u, alpha) in projectors {
        if u.len() != rows {
            return Err(Error::contract(format!(
                "direction has {} components but expected {rows}",
                u.len()
            )));
        }
        if !(*alpha > 0.0 && *alpha < 1.0) {
            return Err(Error::contract(format!(
                "deflation coefficient must lie in (0, 1), got {alpha}"
            )));
        }
        alphas_used.push(*alpha);
    }

    if projectors.is_empty() {
        return Ok(ConditioningReport {
            step: 0,
            kappa: 1.0,
            kappa_bound: 1.0,
            alphas_used,
        });
    }

    // Explicit product M = P_k ... P_1 acting on the identity.
    let mut m = identity(rows);
    for (u, alpha) in projectors {
        rank1_update_in_place(&mut m, u, *alpha);
    }

    // Q = M^T M, symmetric positive definite.
    let mut q = vec![0.0; rows * rows];
    for j in 0..rows {
        for i in 0..=j {
            let v = dot(m.column(i), m.column(j));
            q[j * rows + i] = v;
            q[i * rows + j] = v;
        }
    }
    let eigs = symmetric_eigenvalues(&mut q, rows);
    let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lambda_min <= 0.0 {
        return Err(Error::contract(
            "quadratic form lost positive definiteness; coefficients too close to 1",
        ));
    }

    let kappa_bound = alphas_used
        .iter()
        .map(|a| (1.0 - a).powi(-2))
        .product::<f64>();

    Ok(ConditioningReport {
        step: projectors.len(),
        kappa: lambda_max / lambda_min,
        kappa_bound,
        alphas_used,
    })
}

/// Smallest singular value of `m`, via the eigenvalues of the smaller Gram
/// matrix. Diagnostic helper for detecting near-degenerate bases.
pub fn smallest_singular_value(m: &DenseMatrix) -> f64 {
    let (rows, cols) = (m.rows(), m.cols());
    let n = rows.min(cols);
    let mut gram = vec![0.0; n * n];
    if cols <= rows {
        for j in 0..n {
            for i in 0..=j {
                let v = dot(m.column(i), m.column(j));
                gram[j * n + i] = v;
                gram[i * n + j] = v;
            }
        }
    } else {
        for j in 0..n {
            for i in 0..=j {
                let mut v = 0.0;
                for k in 0..cols {
                    let col = m.column(k);
                    v += col[i] * col[j];
                }
                gram[j * n + i] = v;
                gram[i * n + j] = v;
            }
        }
    }
    let eigs = symmetric_eigenvalues(&mut gram, n);
    let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    lambda_min.max(0.0).sqrt()
}

fn identity(n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, 1.0);
    }
    m
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. The matrix
/// is destroyed. Adequate for the small diagnostic problems in this crate.
fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let idx = |i: usize, j: usize| j * n + i;
    let fro: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-14 * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[idx(p, q)] * a[idx(p, q)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[idx(i, i)]).collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
