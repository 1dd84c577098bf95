use std::sync::Arc;

use crate::error::{H2Error, Result};
use crate::geometry::{BlockKind, ClusterTree};
use crate::h2core::{ClusterBasis, H2Matrix, DENSE_LIMIT};
use crate::linalg::Mat;

use super::accumulator::{accumulator_dense, Accumulator, ProductContext};

/// Node of the exact product. Leaves carry an accumulator without pending
/// products; `kind` is `Admissible` or `Inadmissible` for leaves.
#[derive(Debug, Clone)]
pub struct ExactNode {
    pub row: usize,
    pub col: usize,
    pub kind: BlockKind,
    pub children: Vec<usize>,
    pub leaf: Option<Accumulator>,
}

/// Exact product `X Y` as a blockwise semi-uniform matrix over the induced
/// block tree. Accumulators use the row basis of X and the column basis
/// of Y.
#[derive(Debug, Clone)]
pub struct ExactProduct {
    row_basis: Arc<ClusterBasis>,
    col_basis: Arc<ClusterBasis>,
    nodes: Vec<ExactNode>,
}

impl ExactProduct {
    pub fn row_basis(&self) -> &Arc<ClusterBasis> {
        &self.row_basis
    }

    pub fn col_basis(&self) -> &Arc<ClusterBasis> {
        &self.col_basis
    }

    pub fn rows(&self) -> &Arc<ClusterTree> {
        self.row_basis.tree()
    }

    pub fn cols(&self) -> &Arc<ClusterTree> {
        self.col_basis.tree()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, id: usize) -> &ExactNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[ExactNode] {
        &self.nodes
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    /// Dense entries of a leaf.
    pub fn leaf_dense(&self, id: usize) -> Mat {
        let acc = self.nodes[id].leaf.as_ref().expect("leaf node");
        accumulator_dense(acc, &self.row_basis, &self.col_basis)
    }

    /// Dense product in tree order, refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<Mat> {
        let (rows, cols) = (self.rows().size(), self.cols().size());
        if rows > DENSE_LIMIT || cols > DENSE_LIMIT {
            return Err(H2Error::DenseLimit { rows, cols, limit: DENSE_LIMIT });
        }
        let mut out = Mat::zeros(rows, cols);
        for id in self.leaves() {
            let n = &self.nodes[id];
            let (tc, rc) = (self.rows().cluster(n.row), self.cols().cluster(n.col));
            out.view_mut((tc.start, rc.start), (tc.size(), rc.size())).copy_from(&self.leaf_dense(id));
        }
        Ok(out)
    }
}

/// Computes the exact product `X Y` by splitting accumulators top-down
/// until no pending products remain.
pub fn exact_product(x: &H2Matrix, y: &H2Matrix) -> Result<ExactProduct> {
    let ctx = ProductContext::new(x, y)?;
    let mut nodes = Vec::new();
    build(&ctx, ctx.root_accumulator(), &mut nodes);
    Ok(ExactProduct { row_basis: x.row_basis().clone(), col_basis: y.col_basis().clone(), nodes })
}

fn build(ctx: &ProductContext<'_>, mut acc: Accumulator, nodes: &mut Vec<ExactNode>) -> usize {
    if !ctx.needs_split(&acc) {
        ctx.expand_pending(&mut acc);
    }
    let id = nodes.len();
    nodes.push(ExactNode { row: acc.row, col: acc.col, kind: BlockKind::Subdivided, children: Vec::new(), leaf: None });
    if acc.pending.is_empty() {
        nodes[id].kind = if acc.inadmissible { BlockKind::Inadmissible } else { BlockKind::Admissible };
        nodes[id].leaf = Some(acc);
        return id;
    }
    let children: Vec<usize> = ctx.split(acc).into_iter().map(|child| build(ctx, child, nodes)).collect();
    nodes[id].children = children;
    id
}
