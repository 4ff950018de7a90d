//! Greedy column subset selection for separable nonnegative matrix
//! factorization.
//!
//! Given a data matrix whose columns are (approximately) nonnegative
//! combinations of a few of its own columns, the successive projection
//! algorithm extracts those generating columns by alternating an
//! argmax-of-norm selection with an orthogonal projection of the residual.
//! That selection rule is easily fooled by outliers of large norm, so this
//! crate also implements a diversified variant: each step evaluates several
//! candidate columns under progressively deflated norms and keeps the one
//! whose removal shrinks the residual the most.
//!
//! The crate provides:
//!
//! - [`linalg`]: column-major dense matrices, rank-one updates, and a
//!   conditioning diagnostic for the deflated selection functions;
//! - [`selection`]: the diversified selection step and its closed-form
//!   deflation coefficient;
//! - [`extraction`]: the outer greedy loop for both variants;
//! - [`nnls`]: a Gram-based active-set nonnegative least squares solver and
//!   the relative reconstruction error of an index set;
//! - [`synth`]: a seeded generator of separable instances with planted
//!   outliers plus a recovery sweep harness;
//! - [`io`]: matrix/index file formats and the sweep configuration format.
//!
//! The `rspa` binary exposes all of this as `extract`, `evaluate`, `sweep`
//! and `synth` subcommands.

pub mod error;
pub mod extraction;
pub mod io;
pub mod linalg;
pub mod nnls;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
pub use extraction::{
    extract, rspa_extract, spa_extract, EarlyStopReason, ExtractionRequest, ExtractionResult,
    Strategy,
};
pub use linalg::{column_norms, conditioning, rank1_update, DenseMatrix, UnitVector};
pub use nnls::{nnls_solve, relative_error, NnlsSolution};
pub use selection::{alpha_star, diversify_select, residual_score, RspaParams, SelectionOutcome};
pub use synth::{generate_instance, recovery_rate, run_sweep, SweepConfig, SweepResult};
