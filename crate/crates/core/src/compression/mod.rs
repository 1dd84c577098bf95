//! Coarsening of the exact product by agglomeration and H²-recompression
//! with block-relative error control.

mod coarsen;
mod control;
mod lowrank;
mod recompress;

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{H2Error, Result};
use crate::geometry::BlockTree;
use crate::h2core::H2Matrix;
use crate::linalg::power_iteration;

pub use coarsen::{coarsen, coarsen_product, BlockwiseLowRank, CoarseBlock};
pub use control::TruncationControl;
pub use lowrank::{agglomerate, merge_horizontal, merge_vertical, truncate, LowRankBlock};
pub use recompress::{
    adaptive_col_basis, adaptive_row_basis, couple, recompress, recompress_with_report, LocalError,
    RecompressionReport,
};

/// Seed of the power-iteration start vector.
pub const POWER_SEED: u64 = 0x48_32_6d_75_6c;

/// Lower bound for `||A||_2` by power iteration on `A^T A` from a fixed
/// random start vector.
pub fn spectral_norm_lower_bound<F, G>(apply: F, apply_adjoint: G, dim: usize, iterations: usize) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    if iterations == 0 {
        return Err(H2Error::InvalidArgument("at least one power iteration is required".into()));
    }
    Ok(power_iteration(apply, apply_adjoint, dim, iterations, POWER_SEED))
}

/// Approximate product `X Y` over the block tree `target`.
///
/// Coarsening and recompression each get half of the target tolerance.
pub fn multiply(x: &H2Matrix, y: &H2Matrix, target: &Arc<BlockTree>, ctl: &TruncationControl) -> Result<H2Matrix> {
    let half = ctl.with_target(ctl.target_eps() / 2.0)?;
    let coarse = coarsen_product(x, y, target, &half)?;
    recompress(&coarse, &half)
}
