use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{BlockKind, ClusterTree};
use crate::h2core::{BlockData, ClusterBasis, H2Matrix};
use crate::linalg::{hcat, left_singular, matrix_norm_estimate, spectral_norm, thin_qr, truncation_rank, vcat, Mat};

use super::coarsen::{BlockwiseLowRank, CoarseBlock};
use super::control::TruncationControl;

/// Power-iteration steps for the block weights.
const WEIGHT_STEPS: usize = 10;

/// Local projection error `||G^_sb - V^_s V^_s^T G^_sb||_2` of the condensed
/// block `b` at a cluster `s` below (or equal to) the block's own cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalError {
    pub cluster: usize,
    pub block: usize,
    pub error: f64,
}

/// Per-cluster diagnostics of a recompression.
#[derive(Debug, Clone, Default)]
pub struct RecompressionReport {
    /// Local errors of the row basis construction.
    pub row: Vec<LocalError>,
    /// Local errors of the column basis construction, for the adjoint blocks.
    pub col: Vec<LocalError>,
    /// Estimated spectral norm of every admissible block (0 elsewhere).
    pub block_norms: Vec<f64>,
}

impl RecompressionReport {
    /// `sqrt(sum_s local(s, b)^2)` over one side.
    pub fn error_bound(&self, block: usize, column_side: bool) -> f64 {
        let list = if column_side { &self.col } else { &self.row };
        list.iter().filter(|e| e.block == block).map(|e| e.error * e.error).sum::<f64>().sqrt()
    }
}

struct Condensed {
    /// Own cluster of the block on this side.
    cluster: usize,
    /// `A R^T` with `B = Q R`.
    gc: Mat,
    norm: f64,
}

/// Adaptive isometric basis for one side of `g`. With `column_side` the
/// adjoint blocks are used. Returns the basis and, when `record` is set, the
/// local errors of every condensed block at every cluster.
fn build_basis(g: &BlockwiseLowRank, column_side: bool, ctl: &TruncationControl, record: bool) -> (ClusterBasis, Vec<LocalError>, Vec<f64>) {
    let bt = g.block_tree();
    let tree: &Arc<ClusterTree> = if column_side { bt.cols() } else { bt.rows() };
    let mut condensed: Vec<Option<Condensed>> = Vec::with_capacity(bt.len());
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); tree.len()];
    let mut norms = vec![0.0; bt.len()];
    for (id, b) in bt.blocks().iter().enumerate() {
        let entry = match g.data(id) {
            CoarseBlock::LowRank(lr) if b.kind == BlockKind::Admissible => {
                let (a, f, cluster) = if column_side { (&lr.b, &lr.a, b.col) } else { (&lr.a, &lr.b, b.row) };
                let (_, r) = thin_qr(f);
                let gc = a * r.transpose();
                let norm = matrix_norm_estimate(&gc, WEIGHT_STEPS);
                norms[id] = norm;
                at[cluster].push(id);
                Some(Condensed { cluster, gc, norm })
            }
            _ => None,
        };
        condensed.push(entry);
    }

    let eps = ctl.recompress_eps();
    let n = tree.len();
    let mut ranks = vec![0; n];
    let mut leaf: Vec<Option<Mat>> = vec![None; n];
    let mut transfer: Vec<Option<Mat>> = vec![None; n];
    // aux[t][i] = V_t^T G^c_{t, b_i} for the blocks b_i of the ancestors of t
    // (root first), followed by the blocks of t itself.
    let mut aux: Vec<Vec<Mat>> = vec![Vec::new(); n];
    let mut local = Vec::new();

    let list_of = |t: usize| -> Vec<usize> {
        let mut path = vec![t];
        while let Some(p) = tree.cluster(*path.last().expect("non-empty")).parent {
            path.push(p);
        }
        path.iter().rev().flat_map(|&a| at[a].iter().copied()).collect()
    };

    for t in (0..n).rev() {
        let c = tree.cluster(t);
        let blocks = list_of(t);
        let weight = |b: usize| {
            let cd = condensed[b].as_ref().expect("admissible block");
            let lvl = tree.cluster(cd.cluster).level;
            ctl.theta().powf((c.level - lvl) as f64 / 2.0) * cd.norm
        };
        let raw: Vec<Mat> = if c.is_leaf() {
            blocks
                .iter()
                .map(|&b| {
                    let cd = condensed[b].as_ref().expect("admissible block");
                    let off = c.start - tree.cluster(cd.cluster).start;
                    cd.gc.rows(off, c.size()).into_owned()
                })
                .collect()
        } else {
            blocks
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let parts: Vec<&Mat> = c.children.iter().map(|&k| &aux[k][i]).collect();
                    vcat(parts[0].ncols(), &parts)
                })
                .collect()
        };
        let height: usize = if c.is_leaf() { c.size() } else { c.children.iter().map(|&k| ranks[k]).sum() };
        let scaled: Vec<Mat> = blocks
            .iter()
            .zip(&raw)
            .filter_map(|(&b, m)| {
                let w = weight(b);
                (w > 0.0).then(|| m / w)
            })
            .collect();
        let gt = hcat(height, &scaled.iter().collect::<Vec<_>>());
        let (u, sigma) = left_singular(&gt);
        let rho = truncation_rank(&sigma, eps);
        let v = u.columns(0, rho).into_owned();
        ranks[t] = rho;
        aux[t] = raw.iter().map(|m| v.transpose() * m).collect();
        if record {
            for ((&b, m), p) in blocks.iter().zip(&raw).zip(&aux[t]) {
                local.push(LocalError { cluster: t, block: b, error: spectral_norm(&(m - &v * p)) });
            }
        }
        if c.is_leaf() {
            leaf[t] = Some(v);
        } else {
            let mut off = 0;
            for &k in &c.children {
                transfer[k] = Some(v.rows(off, ranks[k]).into_owned());
                off += ranks[k];
                aux[k] = Vec::new();
            }
        }
    }
    let basis = ClusterBasis::new(tree.clone(), ranks, leaf, transfer).expect("consistent adaptive basis");
    (basis, local, norms)
}

/// Adaptive isometric row basis of `g`.
pub fn adaptive_row_basis(g: &BlockwiseLowRank, ctl: &TruncationControl) -> ClusterBasis {
    build_basis(g, false, ctl, false).0
}

/// Adaptive isometric column basis of `g`, built from the adjoint blocks.
pub fn adaptive_col_basis(g: &BlockwiseLowRank, ctl: &TruncationControl) -> ClusterBasis {
    build_basis(g, true, ctl, false).0
}

/// H²-matrix with the given bases and couplings `(V_t^T A)(W_r^T B)^T`.
pub fn couple(g: &BlockwiseLowRank, row_basis: Arc<ClusterBasis>, col_basis: Arc<ClusterBasis>) -> Result<H2Matrix> {
    let bt = g.block_tree();
    let data = bt
        .blocks()
        .iter()
        .enumerate()
        .map(|(id, b)| match g.data(id) {
            CoarseBlock::LowRank(lr) => {
                let va = row_basis.project(b.row, &lr.a);
                let wb = col_basis.project(b.col, &lr.b);
                BlockData::Coupling(va * wb.transpose())
            }
            CoarseBlock::Dense(n) => BlockData::Nearfield(n.clone()),
            CoarseBlock::Subdivided => BlockData::Subdivided,
        })
        .collect();
    H2Matrix::new(bt.clone(), row_basis, col_basis, data)
}

/// Converts `g` to an H²-matrix with adaptive isometric bases.
pub fn recompress(g: &BlockwiseLowRank, ctl: &TruncationControl) -> Result<H2Matrix> {
    let row = adaptive_row_basis(g, ctl);
    let col = adaptive_col_basis(g, ctl);
    couple(g, Arc::new(row), Arc::new(col))
}

/// [`recompress`] together with the local errors of both basis
/// constructions.
pub fn recompress_with_report(g: &BlockwiseLowRank, ctl: &TruncationControl) -> Result<(H2Matrix, RecompressionReport)> {
    let (row, row_local, block_norms) = build_basis(g, false, ctl, true);
    let (col, col_local, _) = build_basis(g, true, ctl, true);
    let h2 = couple(g, Arc::new(row), Arc::new(col))?;
    Ok((h2, RecompressionReport { row: row_local, col: col_local, block_norms }))
}
