use crate::error::{H2Error, Result};

/// Tolerances for coarsening and recompression.
///
/// `target_eps` is the block-relative accuracy, `theta` the level damping
/// of the recompression weights and `sigma` the maximal number of children
/// per cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationControl {
    target_eps: f64,
    theta: f64,
    sigma: usize,
}

impl TruncationControl {
    /// Control for binary cluster trees (`sigma = 2`).
    pub fn new(target_eps: f64, theta: f64) -> Result<Self> {
        Self::with_sigma(target_eps, theta, 2)
    }

    pub fn with_sigma(target_eps: f64, theta: f64, sigma: usize) -> Result<Self> {
        if !(target_eps > 0.0 && target_eps < 1.0) {
            return Err(H2Error::InvalidArgument(format!("target tolerance must lie in (0, 1), got {target_eps}")));
        }
        if sigma == 0 {
            return Err(H2Error::InvalidArgument("sigma must be positive".into()));
        }
        if !(theta > 0.0 && theta * (sigma as f64) < 1.0) {
            return Err(H2Error::InvalidArgument(format!("theta must lie in (0, 1/sigma), got {theta}")));
        }
        Ok(Self { target_eps, theta, sigma })
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Same damping with a different target tolerance.
    pub fn with_target(&self, target_eps: f64) -> Result<Self> {
        Self::with_sigma(target_eps, self.theta, self.sigma)
    }

    /// Pairwise truncation tolerance `eps / (2mn)` for agglomerating an
    /// `m x n` arrangement to accuracy `eps`.
    pub fn coarsen_eps(&self, m: usize, n: usize) -> f64 {
        self.target_eps / (2 * m * n) as f64
    }

    /// Accuracy for agglomerating blocks `depth` levels below a target
    /// leaf: `target_eps / (2 sigma)^depth`. The truncation errors of one
    /// level lie in disjoint blocks of a `sigma^depth x sigma^depth` grid, so
    /// level `depth` contributes at most `target_eps / 2^(depth + 1)`.
    pub fn depth_budget(&self, depth: usize) -> f64 {
        self.target_eps / (2.0 * self.sigma as f64).powi(depth as i32)
    }

    /// Absolute cutoff `eps * sqrt(1 - sigma theta)` for weighted singular
    /// values in the basis construction.
    pub fn recompress_eps(&self) -> f64 {
        self.target_eps * (1.0 - self.sigma as f64 * self.theta).sqrt()
    }
}

impl Default for TruncationControl {
    fn default() -> Self {
        Self { target_eps: 1e-4, theta: 0.25, sigma: 2 }
    }
}
