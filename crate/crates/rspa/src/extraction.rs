//! The outer greedy loop: repeatedly select a column, project the residual
//! onto its orthogonal complement, and record the index.
//!
//! The two algorithms differ only in how the column is selected. Plain
//! successive projection takes the residual column of largest norm; the
//! robust variant delegates to [`diversify_select`]. The projection step is
//! identical in both.

use crate::error::{Error, Result};
use crate::io::l1_normalize_columns;
use crate::linalg::{column_norms, rank1_update_in_place, DenseMatrix, UnitVector};
use crate::selection::{argmax, diversify_select, RspaParams};

/// Relative Frobenius threshold below which the residual counts as exhausted.
const RESIDUAL_REL_TOL: f64 = 1e-12;

/// Column selection strategy for one extraction run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Largest residual column norm (squared Euclidean selection function).
    Spa,
    /// Diversified candidate selection with the given parameters.
    Rspa(RspaParams),
}

/// A full extraction problem: data, target count, strategy, preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionRequest {
    x: DenseMatrix,
    r: usize,
    strategy: Strategy,
    normalize_l1: bool,
}

impl ExtractionRequest {
    /// Validates `1 <= r <= min(rows, cols)`.
    pub fn new(x: DenseMatrix, r: usize, strategy: Strategy, normalize_l1: bool) -> Result<Self> {
        let max_r = x.rows().min(x.cols());
        if r < 1 || r > max_r {
            return Err(Error::contract(format!(
                "r must lie in [1, {max_r}] for a {}x{} matrix, got {r}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(Self {
            x,
            r,
            strategy,
            normalize_l1,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn normalize_l1(&self) -> bool {
        self.normalize_l1
    }
}

/// Why an extraction stopped before reaching `r` indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarlyStopReason {
    /// The residual Frobenius norm fell below the relative threshold.
    ResidualExhausted,
}

/// Ordered extracted indices plus per-step residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    /// Extracted column indices, 0-based, in extraction order. Distinct.
    pub indices: Vec<usize>,
    /// Residual Frobenius norm after each projection. Non-increasing.
    pub per_step_residual_fro: Vec<f64>,
    /// Number of extraction steps performed; equals `indices.len()`.
    pub steps_completed: usize,
    /// Present when fewer than `r` indices were extracted.
    pub early_stop_reason: Option<EarlyStopReason>,
}

/// Run the greedy extraction described by the request.
pub fn extract(req: &ExtractionRequest) -> Result<ExtractionResult> {
    let working;
    let x = if req.normalize_l1 {
        let (normalized, _zero_cols) = l1_normalize_columns(&req.x);
        working = normalized;
        &working
    } else {
        &req.x
    };

    let x_fro = x.frobenius_norm();
    if x_fro <= 0.0 {
        return Err(Error::contract("input matrix is zero; nothing to extract"));
    }
    let stop_tol = RESIDUAL_REL_TOL * x_fro;

    let mut residual = x.clone();
    let mut residual_fro = x_fro;
    let mut indices: Vec<usize> = Vec::with_capacity(req.r);
    let mut per_step_residual_fro: Vec<f64> = Vec::with_capacity(req.r);
    let mut early_stop_reason = None;

    for _ in 0..req.r {
        if residual_fro <= stop_tol {
            early_stop_reason = Some(EarlyStopReason::ResidualExhausted);
            break;
        }
        let chosen = match &req.strategy {
            Strategy::Spa => argmax(&column_norms(&residual)),
            Strategy::Rspa(params) => diversify_select(&residual, params)?.chosen_index,
        };
        let u = UnitVector::normalize(residual.column(chosen))?;
        rank1_update_in_place(&mut residual, &u, 1.0);
        residual_fro = residual.frobenius_norm();
        indices.push(chosen);
        per_step_residual_fro.push(residual_fro);
    }

    Ok(ExtractionResult {
        steps_completed: indices.len(),
        indices,
        per_step_residual_fro,
        early_stop_reason,
    })
}

/// Plain successive projection on `x`, extracting `r` indices.
pub fn spa_extract(x: &DenseMatrix, r: usize) -> Result<ExtractionResult> {
    extract(&ExtractionRequest::new(x.clone(), r, Strategy::Spa, false)?)
}

/// Diversified extraction on `x` with the given parameters.
pub fn rspa_extract(x: &DenseMatrix, r: usize, params: RspaParams) -> Result<ExtractionResult> {
    extract(&ExtractionRequest::new(
        x.clone(),
        r,
        Strategy::Rspa(params),
        false,
    )?)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, l2_norm, rank1_update};
    use crate::synth::generate_instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn outlier_matrix() -> DenseMatrix {
        DenseMatrix::from_rows(&[
            vec![2.0, 0.0, 0.0, 1.0],
            vec![0.0, 2.0, 0.0, 1.0],
            vec![0.0, 0.0, 2.2, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn spa_prefers_vertices_over_midpoint() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5]]).unwrap();
        let result = spa_extract(&x, 2).unwrap();
        assert_eq!(result.indices, vec![0, 1]);
        assert!(result.early_stop_reason.is_none());
    }

    #[test]
    fn spa_grabs_the_outlier() {
        let result = spa_extract(&outlier_matrix(), 2).unwrap();
        assert_eq!(result.indices, vec![2, 0]);
    }

    #[test]
    fn rspa_rejects_the_outlier() {
        let params = RspaParams::new(2, 1.0, 4.0).unwrap();
        let result = rspa_extract(&outlier_matrix(), 2, params).unwrap();
        assert_eq!(result.indices, vec![0, 1]);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let x = DenseMatrix::zeros(3, 4);
        assert!(spa_extract(&x, 2).is_err());
    }

    #[test]
    fn request_validates_r() {
        let x = outlier_matrix();
        assert!(ExtractionRequest::new(x.clone(), 0, Strategy::Spa, false).is_err());
        assert!(ExtractionRequest::new(x.clone(), 4, Strategy::Spa, false).is_err());
        assert!(ExtractionRequest::new(x, 3, Strategy::Spa, false).is_ok());
    }

    #[test]
    fn early_stop_on_rank_deficient_input() {
        // Rank 2, but r = 3 requested: the third step finds nothing left.
        let x = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let result = spa_extract(&x, 3).unwrap();
        assert_eq!(result.steps_completed, 2);
        assert_eq!(
            result.early_stop_reason,
            Some(EarlyStopReason::ResidualExhausted)
        );
    }

    #[test]
    fn residual_is_monotone_and_matches_replay() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let data: Vec<f64> = (0..6 * 12).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x = DenseMatrix::from_column_major(6, 12, data).unwrap();
        let result = spa_extract(&x, 5).unwrap();

        // Replay the loop with public operations and check the Pythagorean
        // decrease at every step.
        let mut residual = x.clone();
        for (step, &k) in result.indices.iter().enumerate() {
            let before2 = residual.frobenius_norm().powi(2);
            let u = UnitVector::normalize(residual.column(k)).unwrap();
            let mut removed2 = 0.0;
            for j in 0..residual.cols() {
                let c = dot(u.as_slice(), residual.column(j));
                removed2 += c * c;
            }
            residual = rank1_update(&residual, &u, 1.0).unwrap();
            let after = residual.frobenius_norm();
            assert!(
                (after * after - (before2 - removed2)).abs() <= 1e-9 * before2,
                "step {step}: {} vs {}",
                after * after,
                before2 - removed2
            );
            assert!((after - result.per_step_residual_fro[step]).abs() <= 1e-12 * before2.sqrt());
            // The extracted column is numerically gone.
            assert!(l2_norm(residual.column(k)) <= 1e-10 * x.frobenius_norm());
        }
        for w in result.per_step_residual_fro.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let instance = generate_instance(8, 3, 30, 2, 99).unwrap();
        let params = RspaParams::new(5, 1.0, 4.0).unwrap();
        let a = rspa_extract(&instance.x, 3, params).unwrap();
        let b = rspa_extract(&instance.x, 3, params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn indices_are_distinct() {
        let instance = generate_instance(10, 4, 50, 3, 1234).unwrap();
        for result in [
            spa_extract(&instance.x, 4).unwrap(),
            rspa_extract(&instance.x, 4, RspaParams::new(6, 1.0, 4.0).unwrap()).unwrap(),
        ] {
            let mut seen = result.indices.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), result.indices.len());
        }
    }

    #[test]
    fn scaling_leaves_indices_unchanged() {
        let instance = generate_instance(7, 3, 40, 3, 5150).unwrap();
        let params = RspaParams::new(4, 1.0, 4.0).unwrap();
        let base_spa = spa_extract(&instance.x, 3).unwrap();
        let base_rspa = rspa_extract(&instance.x, 3, params).unwrap();
        for &c in &[0.25, 2.0, 1024.0, 3.7] {
            let scaled = DenseMatrix::from_column_major(
                instance.x.rows(),
                instance.x.cols(),
                instance.x.data().iter().map(|v| v * c).collect(),
            )
            .unwrap();
            assert_eq!(spa_extract(&scaled, 3).unwrap().indices, base_spa.indices);
            assert_eq!(
                rspa_extract(&scaled, 3, params).unwrap().indices,
                base_rspa.indices
            );
        }
    }

    #[test]
    fn column_permutation_equivariance() {
        let instance = generate_instance(6, 3, 25, 2, 777).unwrap();
        let x = &instance.x;
        let n = x.cols();
        // Deterministic tie-free rotation.
        let perm: Vec<usize> = (0..n).map(|j| (j + 11) % n).collect();
        let permuted = x.select_columns(&perm).unwrap();
        for (a, b) in [
            (spa_extract(x, 3).unwrap(), spa_extract(&permuted, 3).unwrap()),
            (
                rspa_extract(x, 3, RspaParams::new(4, 1.0, 4.0).unwrap()).unwrap(),
                rspa_extract(&permuted, 3, RspaParams::new(4, 1.0, 4.0).unwrap()).unwrap(),
            ),
        ] {
            let mapped: Vec<usize> = b.indices.iter().map(|&j| perm[j]).collect();
            assert_eq!(a.indices, mapped);
        }
    }

    #[test]
    fn d1_equals_spa_on_random_instances() {
        let params = RspaParams::new(1, 1.0, 4.0).unwrap();
        for seed in 0..20 {
            let n_out = if seed % 2 == 0 { 0 } else { 4 };
            let instance = generate_instance(8, 4, 40, n_out, seed).unwrap();
            let spa = spa_extract(&instance.x, 4).unwrap();
            let rspa = rspa_extract(&instance.x, 4, params).unwrap();
            assert_eq!(spa.indices, rspa.indices, "seed {seed}");
        }
    }

    #[test]
    fn noiseless_separable_instances_recover_the_vertex_set() {
        let params = RspaParams::new(4, 1.0, 4.0).unwrap();
        for seed in 0..25 {
            let instance = generate_instance(12, 4, 60, 0, 10_000 + seed).unwrap();
            let mut truth = instance.true_vertex_indices.clone();
            truth.sort_unstable();
            for result in [
                spa_extract(&instance.x, 4).unwrap(),
                rspa_extract(&instance.x, 4, params).unwrap(),
            ] {
                let mut got = result.indices.clone();
                got.sort_unstable();
                assert_eq!(got, truth, "seed {seed}");
            }
        }
    }

    #[test]
    fn l1_normalization_flag_is_honored() {
        // Column 3 has a large norm but is a positive mixture of the first
        // two vertices; after l1 normalization all columns live on the
        // simplex and the mixture can no longer win the argmax.
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0, 5.0], vec![0.0, 1.0, 5.0]]).unwrap();
        let raw = extract(&ExtractionRequest::new(x.clone(), 2, Strategy::Spa, false).unwrap())
            .unwrap();
        assert_eq!(raw.indices[0], 2);
        let normalized =
            extract(&ExtractionRequest::new(x, 2, Strategy::Spa, true).unwrap()).unwrap();
        assert_eq!(normalized.indices, vec![0, 1]);
    }
}
