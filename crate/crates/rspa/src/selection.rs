//! Diversified candidate selection.
//!
//! Plain successive projection picks the residual column with the largest
//! norm, which is exactly what an outlier of large norm looks like. The
//! selection step here instead evaluates `d` candidate columns, each the
//! maximizer of a progressively deflated quadratic norm, and keeps the one
//! whose removal shrinks the residual the most.
//!
//! The deflations are chosen so that after candidate `i` is identified, the
//! runner-up column's deflated squared norm is exactly `beta` times the
//! candidate's, which forces the next maximizer to be a different column.
//! [`alpha_star`] is the closed-form coefficient that achieves this.

use crate::error::{Error, Result};
use crate::linalg::{column_norms, dot, rank1_update_in_place, DenseMatrix, UnitVector};

/// Relative tolerance below which a column counts as zero.
const ZERO_COL_REL_TOL: f64 = 1e-12;

/// Relative tolerance below which two directions count as parallel.
const PARALLEL_REL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Parameters and state
// ---------------------------------------------------------------------------

/// Parameters of the diversified selection: candidate count `d`, residual
/// norm exponent `p`, and separation factor `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RspaParams {
    d: usize,
    p: f64,
    beta: f64,
}

impl RspaParams {
    /// Validates `d >= 1`, `p > 0`, `beta > 1`.
    pub fn new(d: usize, p: f64, beta: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::contract("candidate count d must be at least 1"));
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::contract(format!(
                "error norm exponent p must be positive, got {p}"
            )));
        }
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::contract(format!(
                "diversification factor beta must exceed 1, got {beta}"
            )));
        }
        Ok(Self { d, p, beta })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// One applied deflation of the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deflation {
    /// Column whose direction was deflated.
    pub candidate: usize,
    /// Runner-up column the coefficient was balanced against.
    pub runner_up: usize,
    /// Coefficient in (0, 1).
    pub alpha: f64,
}

/// Scratch and diagnostics accumulated while evaluating candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversificationState {
    /// Deflated copy of the residual; the squared norm of its column `k` is
    /// the current selection function evaluated at residual column `k`.
    pub carrier: DenseMatrix,
    /// Candidate column indices, in evaluation order. Pairwise distinct: a
    /// loop iteration whose argmax lands on an earlier candidate deflates
    /// again but records nothing new (the score would be identical).
    pub candidates: Vec<usize>,
    /// Runner-up column per candidate (largest post-projection norm).
    pub runners_up: Vec<usize>,
    /// Every deflation applied to the carrier, in order. Iterations that
    /// revisit a candidate contribute here but not to `candidates`.
    pub deflations: Vec<Deflation>,
    /// Residual score of each candidate.
    pub scores: Vec<f64>,
    /// Number of loop iterations performed, at most `d`.
    pub steps_completed: usize,
}

impl DiversificationState {
    /// Applied deflation coefficients, in order; each lies in (0, 1).
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.deflations.iter().map(|d| d.alpha)
    }
}

/// Chosen column plus the evaluation trace that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub chosen_index: usize,
    pub state: DiversificationState,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Coefficient `alpha` in (0, 1) such that deflating along `x`'s direction
/// makes `y`'s deflated squared norm exactly `beta` times `x`'s:
///
/// `||(I - alpha u u^T) y||^2 = beta * ||(I - alpha u u^T) x||^2`, `u = x/||x||`.
///
/// Requires `||x|| >= ||y|| > 0` (equality is fine when the argmax ties) and
/// `x`, `y` not parallel. Parallel inputs yield [`Error::DegenerateDirection`].
pub fn alpha_star(x: &[f64], y: &[f64], beta: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::contract(format!(
            "vectors have different lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::contract(format!("beta must exceed 1, got {beta}")));
    }
    let nx2 = dot(x, x);
    let ny2 = dot(y, y);
    if ny2 <= 0.0 {
        return Err(Error::contract("y must be non-zero"));
    }
    if nx2 < ny2 {
        return Err(Error::contract(format!(
            "||x|| must be at least ||y||, got ||x||^2 = {nx2} < ||y||^2 = {ny2}"
        )));
    }
    let nx = nx2.sqrt();
    let uty = dot(x, y) / nx;

    // Rejection of the parallel case: the component of y orthogonal to x.
    let orth2 = ny2 - uty * uty;
    if orth2 <= PARALLEL_REL_TOL * ny2 {
        return Err(Error::DegenerateDirection);
    }

    // With u^T x = ||x||: the discriminant ratio simplifies to
    // 1 - (beta nx2 - ny2) / (beta nx2 - uty^2) = (ny2 - uty^2) / (beta nx2 - uty^2).
    let denom = beta * nx2 - uty * uty;
    let alpha = 1.0 - (orth2 / denom).sqrt();
    debug_assert!(alpha > 0.0 && alpha < 1.0, "alpha = {alpha}");
    Ok(alpha)
}

/// Sum over columns of the Euclidean column norm raised to `p`, accumulated
/// in column order.
///
/// # Panics
/// Panics if `p` is not positive and finite.
pub fn residual_score(r_proj: &DenseMatrix, p: f64) -> f64 {
    assert!(p > 0.0 && p.is_finite(), "exponent p must be positive");
    score_from_norms(&column_norms(r_proj), p)
}

fn score_from_norms(norms: &[f64], p: f64) -> f64 {
    let mut sum = 0.0;
    for n in norms {
        sum += n.powf(p);
    }
    sum
}

/// Evaluate up to `d` diversified candidates on the residual `R` and return
/// the index whose removal leaves the smallest residual score.
///
/// Each iteration picks the column maximizing the current deflated norm,
/// measures the residual left after projecting that column out of `R`, then
/// deflates the carrier so the runner-up dominates the next round. An
/// iteration whose argmax lands on an already-evaluated candidate (possible
/// once columns have been deflated below one another repeatedly) skips the
/// re-evaluation — the score would be identical — and only deflates further.
/// The loop stops early when the geometry runs out: residual numerically
/// rank one, or candidate and runner-up parallel. The winner is then chosen
/// among the candidates evaluated so far; iteration one always completes, so
/// a non-zero `R` always yields a choice.
pub fn diversify_select(r: &DenseMatrix, params: &RspaParams) -> Result<SelectionOutcome> {
    let norms = column_norms(r);
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    if max_norm <= 0.0 {
        return Err(Error::contract(
            "residual matrix is zero; nothing to select",
        ));
    }
    let zero_tol = ZERO_COL_REL_TOL * max_norm;

    let mut carrier = r.clone();
    let mut candidates: Vec<usize> = Vec::with_capacity(params.d);
    let mut runners_up: Vec<usize> = Vec::with_capacity(params.d);
    let mut deflations: Vec<Deflation> = Vec::new();
    let mut scores: Vec<f64> = Vec::with_capacity(params.d);
    let mut scratch = r.clone();
    let mut steps_completed = 0;

    for i in 0..params.d {
        steps_completed = i + 1;
        let carrier_norms = column_norms(&carrier);
        let k_i = argmax(&carrier_norms);

        let runner = match candidates.iter().position(|&c| c == k_i) {
            Some(pos) => {
                // Revisit: the projection of R along column k_i is unchanged,
                // so score and runner-up are the stored ones.
                runners_up[pos]
            }
            None => {
                // Projection in the original residual space measures the
                // true reconstruction error of candidate k_i.
                let u_i = UnitVector::normalize(r.column(k_i))?;
                scratch.clone_from(r);
                rank1_update_in_place(&mut scratch, &u_i, 1.0);
                let projected_norms = column_norms(&scratch);

                candidates.push(k_i);
                scores.push(score_from_norms(&projected_norms, params.p));
                let runner = argmax(&projected_norms);
                runners_up.push(runner);
                if projected_norms[runner] <= zero_tol {
                    // Residual is numerically rank one; nothing left to
                    // diversify against.
                    break;
                }
                runner
            }
        };

        if i + 1 == params.d {
            break;
        }

        // The carrier columns, not the residual columns, feed the coefficient
        // so the beta-separation guarantee holds for the next deflated norm.
        let x = carrier.column(k_i).to_vec();
        let y = carrier.column(runner);
        let alpha = match alpha_star(&x, y, params.beta) {
            Ok(a) => a,
            Err(Error::DegenerateDirection) => break,
            Err(e) => return Err(e),
        };
        let u_hat = UnitVector::normalize(&x)?;
        rank1_update_in_place(&mut carrier, &u_hat, alpha);
        deflations.push(Deflation {
            candidate: k_i,
            runner_up: runner,
            alpha,
        });
    }

    let best = argmin(&scores);
    Ok(SelectionOutcome {
        chosen_index: candidates[best],
        state: DiversificationState {
            carrier,
            steps_completed,
            candidates,
            runners_up,
            deflations,
            scores,
        },
    })
}

/// Index of the largest value, smallest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value, smallest index on ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
