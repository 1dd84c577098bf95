use crate::error::{H2Error, Result};
use crate::linalg::{svd_sorted, thin_qr, truncation_rank, vcat, Mat};

/// Factorized matrix `A B^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankBlock {
    pub a: Mat,
    pub b: Mat,
}

impl LowRankBlock {
    pub fn new(a: Mat, b: Mat) -> Result<Self> {
        if a.ncols() != b.ncols() {
            return Err(H2Error::DimensionMismatch { expected: a.ncols(), actual: b.ncols() });
        }
        Ok(Self { a, b })
    }

    /// Rank-zero block of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { a: Mat::zeros(rows, 0), b: Mat::zeros(cols, 0) }
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.b.nrows()
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    pub fn to_dense(&self) -> Mat {
        &self.a * self.b.transpose()
    }

    /// `B A^T`.
    pub fn transpose(&self) -> Self {
        Self { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn stored_reals(&self) -> usize {
        self.a.len() + self.b.len()
    }
}

/// Truncated low-rank approximation of `[parts[0], parts[1], ..]`.
///
/// The right factors are orthogonalized separately, so the SVD only acts on
/// the condensed `rows x sum(k_i)` matrix. The rank is the smallest `rho`
/// with `sigma_{rho+1} <= eps * sigma_1`.
fn merge_row(parts: &[&LowRankBlock], eps: f64) -> LowRankBlock {
    let rows = parts[0].nrows();
    let qrs: Vec<(Mat, Mat)> = parts.iter().map(|p| thin_qr(&p.b)).collect();
    let widths: Vec<usize> = qrs.iter().map(|(q, _)| q.ncols()).collect();
    let total: usize = widths.iter().sum();
    let mut g = Mat::zeros(rows, total);
    let mut off = 0;
    for (p, ((_, r), &w)) in parts.iter().zip(qrs.iter().zip(&widths)) {
        debug_assert_eq!(p.nrows(), rows);
        g.columns_mut(off, w).copy_from(&(&p.a * r.transpose()));
        off += w;
    }
    let (u, sigma, v) = if rows > total {
        let (q, r) = thin_qr(&g);
        let (ur, sigma, v) = svd_sorted(&r);
        (q * ur, sigma, v)
    } else {
        svd_sorted(&g)
    };
    let top = sigma.first().copied().unwrap_or(0.0);
    let rho = truncation_rank(&sigma, eps * top);
    let mut a = u.columns(0, rho).into_owned();
    for (j, s) in sigma.iter().take(rho).enumerate() {
        a.column_mut(j).scale_mut(*s);
    }
    let mut off = 0;
    let pieces: Vec<Mat> = qrs
        .iter()
        .zip(&widths)
        .map(|((q, _), &w)| {
            let piece = q * v.view((off, 0), (w, rho));
            off += w;
            piece
        })
        .collect();
    LowRankBlock { a, b: vcat(rho, &pieces.iter().collect::<Vec<_>>()) }
}

/// Truncated low-rank approximation of `[left, right]` with relative
/// tolerance `eps`.
pub fn merge_horizontal(left: &LowRankBlock, right: &LowRankBlock, eps: f64) -> LowRankBlock {
    merge_row(&[left, right], eps)
}

/// Best approximation of `block` with `sigma_{rho+1} <= eps * sigma_1`.
pub fn truncate(block: &LowRankBlock, eps: f64) -> LowRankBlock {
    merge_row(&[block], eps)
}

/// Truncated low-rank approximation of `[top; bottom]`.
pub fn merge_vertical(top: &LowRankBlock, bottom: &LowRankBlock, eps: f64) -> LowRankBlock {
    merge_horizontal(&top.transpose(), &bottom.transpose(), eps).transpose()
}

/// Agglomerates a block arrangement `grid[i][j]` into one low-rank matrix.
///
/// Every block row is merged left to right, then the merged rows top to
/// bottom, each pairwise step truncated with relative tolerance `eps`.
pub fn agglomerate(grid: &[Vec<LowRankBlock>], eps: f64) -> Result<LowRankBlock> {
    let first = grid.first().ok_or_else(|| H2Error::InvalidArgument("empty block arrangement".into()))?;
    if first.is_empty() {
        return Err(H2Error::InvalidArgument("empty block row".into()));
    }
    if !(eps >= 0.0) {
        return Err(H2Error::InvalidArgument(format!("tolerance must be non-negative, got {eps}")));
    }
    let widths: Vec<usize> = first.iter().map(LowRankBlock::ncols).collect();
    for row in grid {
        if row.len() != widths.len() {
            return Err(H2Error::DimensionMismatch { expected: widths.len(), actual: row.len() });
        }
        let height = row[0].nrows();
        for (blk, &w) in row.iter().zip(&widths) {
            if blk.ncols() != w {
                return Err(H2Error::DimensionMismatch { expected: w, actual: blk.ncols() });
            }
            if blk.nrows() != height {
                return Err(H2Error::DimensionMismatch { expected: height, actual: blk.nrows() });
            }
        }
    }
    let mut merged_rows = grid.iter().map(|row| {
        let mut acc = row[0].clone();
        for blk in &row[1..] {
            acc = merge_horizontal(&acc, blk, eps);
        }
        acc
    });
    let mut out = merged_rows.next().expect("non-empty grid");
    for row in merged_rows {
        out = merge_vertical(&out, &row, eps);
    }
    Ok(out)
}
