//! Seeded generator for separable instances with planted outliers, the
//! recovery metric, and the sweep harness that measures recovery against the
//! ambient dimension.
//!
//! Reproducibility: all randomness flows through ChaCha8 streams keyed by a
//! SplitMix64-style mix of the base seed with a purpose tag (and, in sweeps,
//! the dimension and trial number). Identical configurations produce
//! identical instances and identical recovery tables on every platform; wall
//! times are the only non-deterministic output.

use crate::error::{Error, Result};
use crate::extraction::{extract, ExtractionRequest, Strategy};
use crate::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

// Stream tags for the per-purpose generators.
const TAG_BASIS: u64 = 0x57;
const TAG_MIXTURES: u64 = 0x48;
const TAG_OUTLIERS: u64 = 0x4F;
const TAG_PLACEMENT: u64 = 0x50;

/// SplitMix64 finalizer; the documented seed-mixing primitive for streams
/// and per-trial seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_seed(base: u64, tag: u64) -> u64 {
    mix(base ^ mix(tag))
}

/// Seed for trial `trial` at dimension `m` under `base_seed`; shared by all
/// algorithms so they face identical instances.
pub fn trial_seed(base_seed: u64, m: usize, trial: usize) -> u64 {
    mix(mix(mix(base_seed) ^ m as u64) ^ trial as u64)
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

/// A generated benchmark instance: data matrix, planted basis, ground truth
/// bookkeeping, and the coefficients behind every separable column.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    /// Data matrix, `m x (n + n_out)`, columns shuffled.
    pub x: DenseMatrix,
    /// Planted basis, `m x r`, entries uniform on [0, 1).
    pub w: DenseMatrix,
    /// Position in `x` of each basis column, in basis order.
    pub true_vertex_indices: Vec<usize>,
    /// Positions in `x` of the outlier columns.
    pub outlier_indices: Vec<usize>,
    /// Seed the instance was generated from.
    pub seed: u64,
    /// `placement[k]` is the final position of pre-shuffle column `k`
    /// (separable columns first, then outliers).
    pub placement: Vec<usize>,
    /// Coefficients of the separable block, `r x n`: identity for the basis
    /// columns, then the l1-normalized mixture weights.
    pub coefficients: DenseMatrix,
}

/// Generate a separable instance with planted outliers.
///
/// Basis entries are uniform on [0, 1); mixture coefficients are uniform then
/// l1-normalized per column; outlier entries are standard normal. The `n +
/// n_out` columns are then shuffled by a seeded permutation. Everything is a
/// pure function of the arguments. `r <= m` gives a full-rank basis; smaller
/// `m` is allowed but the basis is then necessarily rank deficient.
pub fn generate_instance(
    m: usize,
    r: usize,
    n: usize,
    n_out: usize,
    seed: u64,
) -> Result<SyntheticInstance> {
    if m == 0 || r == 0 {
        return Err(Error::contract("m and r must be positive"));
    }
    if n <= r {
        return Err(Error::contract(format!(
            "n must exceed r, got n = {n}, r = {r}"
        )));
    }

    let mut basis_rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, TAG_BASIS));
    let w_data: Vec<f64> = (0..m * r).map(|_| basis_rng.gen::<f64>()).collect();
    let w = DenseMatrix::from_column_major(m, r, w_data)?;

    // Coefficients of the separable block: [I_r, H'] with H' uniform then
    // l1-normalized per column. Entries are nonnegative, so the l1 norm is
    // the plain sum.
    let mut mix_rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, TAG_MIXTURES));
    let mut coefficients = DenseMatrix::zeros(r, n);
    for j in 0..r {
        coefficients.set(j, j, 1.0);
    }
    for j in r..n {
        let col = coefficients.column_mut(j);
        let mut sum = 0.0;
        for v in col.iter_mut() {
            *v = mix_rng.gen::<f64>();
            sum += *v;
        }
        for v in col.iter_mut() {
            *v /= sum;
        }
    }

    // Pre-shuffle columns: the basis verbatim, the mixtures, then outliers.
    let total = n + n_out;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(total);
    for j in 0..r {
        columns.push(w.column(j).to_vec());
    }
    for j in r..n {
        let h = coefficients.column(j);
        let mut col = vec![0.0; m];
        for (k, &hk) in h.iter().enumerate() {
            let wk = w.column(k);
            for i in 0..m {
                col[i] += wk[i] * hk;
            }
        }
        columns.push(col);
    }
    let mut outlier_rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, TAG_OUTLIERS));
    for _ in 0..n_out {
        columns.push((0..m).map(|_| outlier_rng.sample(StandardNormal)).collect());
    }

    // Seeded Fisher-Yates over the final positions.
    let mut placement: Vec<usize> = (0..total).collect();
    let mut place_rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, TAG_PLACEMENT));
    for i in (1..total).rev() {
        let j = place_rng.gen_range(0..=i);
        placement.swap(i, j);
    }

    let mut x = DenseMatrix::zeros(m, total);
    for (orig, &pos) in placement.iter().enumerate() {
        x.column_mut(pos).copy_from_slice(&columns[orig]);
    }

    Ok(SyntheticInstance {
        true_vertex_indices: placement[..r].to_vec(),
        outlier_indices: placement[n..].to_vec(),
        x,
        w,
        seed,
        placement,
        coefficients,
    })
}

/// Percentage of ground-truth indices present in the extracted set.
pub fn recovery_rate(extracted: &[usize], truth: &[usize]) -> f64 {
    assert!(!truth.is_empty(), "truth set must be non-empty");
    let hits = truth.iter().filter(|t| extracted.contains(t)).count();
    100.0 * hits as f64 / truth.len() as f64
}

// ---------------------------------------------------------------------------
// Sweep harness
// ---------------------------------------------------------------------------

/// Configuration of a recovery sweep over the ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m_values: Vec<usize>,
    pub r: usize,
    pub n: usize,
    pub n_out: usize,
    pub trials: usize,
    /// Labeled strategies; every algorithm sees the same instances.
    pub algorithms: Vec<(String, Strategy)>,
    pub base_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::contract("trials must be at least 1"));
        }
        if self.m_values.is_empty() {
            return Err(Error::contract("m_values must be non-empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::contract("algorithms must be non-empty"));
        }
        if self.n <= self.r {
            return Err(Error::contract("n must exceed r"));
        }
        Ok(())
    }
}

/// One aggregated sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: String,
    pub m: usize,
    pub mean_recovery_percent: f64,
    pub std_recovery_percent: f64,
    pub mean_wall_time_s: f64,
    /// Trials whose extraction failed; counted as zero recovery.
    pub failed_trials: usize,
}

/// Aggregated sweep results, one row per (algorithm, m) in configuration
/// order with m ascending within each algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV rendering: fixed header, one row per (algorithm, m), six
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,m,mean_recovery,std_recovery,mean_time_s\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.algorithm,
                row.m,
                format_sig6(row.mean_recovery_percent),
                format_sig6(row.std_recovery_percent),
                format_sig6(row.mean_wall_time_s),
            ));
        }
        out
    }

    /// Deterministic fields only (wall times vary run to run).
    pub fn same_statistics(&self, other: &SweepResult) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(other.rows.iter()).all(|(a, b)| {
                a.algorithm == b.algorithm
                    && a.m == b.m
                    && a.mean_recovery_percent == b.mean_recovery_percent
                    && a.std_recovery_percent == b.std_recovery_percent
                    && a.failed_trials == b.failed_trials
            })
    }
}

/// Format with six significant digits, plain decimal notation.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mut exponent = x.abs().log10().floor() as i32;
    // Rounding at six significant digits can carry into the next magnitude
    // (99.99999 -> 100.000), which shifts the decimal count by one.
    let scale = 10f64.powi(5 - exponent);
    let rounded = (x * scale).round() / scale;
    if rounded.abs() >= 10f64.powi(exponent + 1) {
        exponent += 1;
    }
    let decimals = (5 - exponent).max(0) as usize;
    format!("{:.*}", decimals, rounded)
}

/// Run every (algorithm, m, trial) cell of the sweep.
///
/// The instance for cell (m, trial) is seeded by [`trial_seed`], independent
/// of the algorithm. A failing extraction contributes zero recovery and bumps
/// the row's failure count instead of aborting the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.algorithms.len() * config.m_values.len());
    let mut m_sorted = config.m_values.clone();
    m_sorted.sort_unstable();

    for (name, strategy) in &config.algorithms {
        for &m in &m_sorted {
            let mut recoveries = Vec::with_capacity(config.trials);
            let mut total_time = 0.0;
            let mut failed_trials = 0;
            for trial in 0..config.trials {
                let seed = trial_seed(config.base_seed, m, trial);
                let instance = generate_instance(m, config.r, config.n, config.n_out, seed)?;
                let started = Instant::now();
                let outcome = ExtractionRequest::new(
                    instance.x.clone(),
                    config.r,
                    *strategy,
                    false,
                )
                .and_then(|req| extract(&req));
                total_time += started.elapsed().as_secs_f64();
                match outcome {
                    Ok(result) => {
                        recoveries
                            .push(recovery_rate(&result.indices, &instance.true_vertex_indices));
                    }
                    Err(_) => {
                        recoveries.push(0.0);
                        failed_trials += 1;
                    }
                }
            }
            let mean = recoveries.iter().sum::<f64>() / recoveries.len() as f64;
            let std = if recoveries.len() > 1 {
                let var = recoveries.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (recoveries.len() - 1) as f64;
                var.sqrt()
            } else {
                0.0
            };
            rows.push(SweepRow {
                algorithm: name.clone(),
                m,
                mean_recovery_percent: mean,
                std_recovery_percent: std,
                mean_wall_time_s: total_time / config.trials as f64,
                failed_trials,
            });
        }
    }
    Ok(SweepResult { rows })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
