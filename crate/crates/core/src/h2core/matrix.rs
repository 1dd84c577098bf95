use std::sync::Arc;

use nalgebra::DVector;

use super::basis::ClusterBasis;
use crate::error::{H2Error, Result};
use crate::geometry::{BlockKind, BlockTree, ClusterTree};
use crate::linalg::Mat;

/// Default row/column limit for dense conversion.
pub const DENSE_LIMIT: usize = 4096;

/// Content of one block tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockData {
    /// Coupling matrix `S_ts` of an admissible leaf.
    Coupling(Mat),
    /// Dense entries of an inadmissible leaf.
    Nearfield(Mat),
    Subdivided,
}

/// H²-matrix: a block tree, row and column cluster bases, and per-block data
/// indexed by block id. All vectors are in tree order.
#[derive(Debug, Clone)]
pub struct H2Matrix {
    blocks: Arc<BlockTree>,
    row_basis: Arc<ClusterBasis>,
    col_basis: Arc<ClusterBasis>,
    data: Vec<BlockData>,
}

impl H2Matrix {
    pub fn new(
        blocks: Arc<BlockTree>,
        row_basis: Arc<ClusterBasis>,
        col_basis: Arc<ClusterBasis>,
        data: Vec<BlockData>,
    ) -> Result<Self> {
        if !blocks.rows().same_structure(row_basis.tree()) {
            return Err(H2Error::TreeMismatch("row basis does not match the row cluster tree".into()));
        }
        if !blocks.cols().same_structure(col_basis.tree()) {
            return Err(H2Error::TreeMismatch("column basis does not match the column cluster tree".into()));
        }
        if data.len() != blocks.len() {
            return Err(H2Error::DimensionMismatch { expected: blocks.len(), actual: data.len() });
        }
        for (id, (b, d)) in blocks.blocks().iter().zip(&data).enumerate() {
            let ok = match (b.kind, d) {
                (BlockKind::Admissible, BlockData::Coupling(s)) => {
                    s.shape() == (row_basis.rank(b.row), col_basis.rank(b.col))
                }
                (BlockKind::Inadmissible, BlockData::Nearfield(n)) => {
                    n.shape() == (blocks.rows().cluster(b.row).size(), blocks.cols().cluster(b.col).size())
                }
                (BlockKind::Subdivided, BlockData::Subdivided) => true,
                _ => false,
            };
            if !ok {
                return Err(H2Error::InvalidArgument(format!("block {id} data does not match its kind or shape")));
            }
        }
        Ok(Self { blocks, row_basis, col_basis, data })
    }

    pub fn block_tree(&self) -> &Arc<BlockTree> {
        &self.blocks
    }

    pub fn row_basis(&self) -> &Arc<ClusterBasis> {
        &self.row_basis
    }

    pub fn col_basis(&self) -> &Arc<ClusterBasis> {
        &self.col_basis
    }

    pub fn row_tree(&self) -> &Arc<ClusterTree> {
        self.blocks.rows()
    }

    pub fn col_tree(&self) -> &Arc<ClusterTree> {
        self.blocks.cols()
    }

    pub fn data(&self, block: usize) -> &BlockData {
        &self.data[block]
    }

    pub fn block_data(&self) -> &[BlockData] {
        &self.data
    }

    pub fn coupling(&self, block: usize) -> Option<&Mat> {
        match &self.data[block] {
            BlockData::Coupling(s) => Some(s),
            _ => None,
        }
    }

    pub fn nearfield(&self, block: usize) -> Option<&Mat> {
        match &self.data[block] {
            BlockData::Nearfield(n) => Some(n),
            _ => None,
        }
    }

    pub fn nrows(&self) -> usize {
        self.blocks.rows().size()
    }

    pub fn ncols(&self) -> usize {
        self.blocks.cols().size()
    }

    /// Number of stored reals in bases, coupling and nearfield matrices.
    pub fn stored_reals(&self) -> usize {
        let blocks: usize = self
            .data
            .iter()
            .map(|d| match d {
                BlockData::Coupling(m) | BlockData::Nearfield(m) => m.len(),
                BlockData::Subdivided => 0,
            })
            .sum();
        blocks + self.row_basis.stored_reals() + self.col_basis.stored_reals()
    }

    /// Dense matrix in tree order, refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<Mat> {
        self.to_dense_with_limit(DENSE_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<Mat> {
        let (rows, cols) = (self.nrows(), self.ncols());
        if rows > limit || cols > limit {
            return Err(H2Error::DenseLimit { rows, cols, limit });
        }
        Ok(self.block_dense(self.blocks.root()))
    }

    /// Dense entries of an arbitrary block (leaf or subdivided).
    pub fn block_dense(&self, block: usize) -> Mat {
        let (r0, c0) = {
            let b = self.blocks.block(block);
            (self.row_tree().cluster(b.row).start, self.col_tree().cluster(b.col).start)
        };
        let (rr, cr) = self.blocks.ranges(block);
        let mut out = Mat::zeros(rr.len(), cr.len());
        self.fill_dense(block, r0, c0, &mut out);
        out
    }

    fn fill_dense(&self, block: usize, r0: usize, c0: usize, out: &mut Mat) {
        let b = self.blocks.block(block);
        let (rr, cr) = self.blocks.ranges(block);
        let mut target = out.view_mut((rr.start - r0, cr.start - c0), (rr.len(), cr.len()));
        match &self.data[block] {
            BlockData::Coupling(s) => {
                let v = self.row_basis.expand(b.row);
                let w = self.col_basis.expand(b.col);
                target.copy_from(&(v * s * w.transpose()));
            }
            BlockData::Nearfield(n) => target.copy_from(n),
            BlockData::Subdivided => {
                for &ch in &b.children {
                    self.fill_dense(ch, r0, c0, out);
                }
            }
        }
    }

    /// `G x` for a vector in tree order.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols() {
            return Err(H2Error::DimensionMismatch { expected: self.ncols(), actual: x.len() });
        }
        let xm = Mat::from_column_slice(x.len(), 1, x);
        Ok(self.apply_block(self.blocks.root(), &xm, false).as_slice().to_vec())
    }

    /// `G^T x` for a vector in tree order.
    pub fn matvec_adjoint(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows() {
            return Err(H2Error::DimensionMismatch { expected: self.nrows(), actual: x.len() });
        }
        let xm = Mat::from_column_slice(x.len(), 1, x);
        Ok(self.apply_block(self.blocks.root(), &xm, true).as_slice().to_vec())
    }

    pub fn matvec_dvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let xm = Mat::from_column_slice(x.len(), 1, x.as_slice());
        DVector::from_column_slice(self.apply_block(self.blocks.root(), &xm, false).as_slice())
    }

    pub fn matvec_adjoint_dvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let xm = Mat::from_column_slice(x.len(), 1, x.as_slice());
        DVector::from_column_slice(self.apply_block(self.blocks.root(), &xm, true).as_slice())
    }

    /// Multiplies the submatrix of one block (or its transpose) with the
    /// columns of `x` using forward transform, coupling and backward
    /// transform restricted to the block's subtrees.
    pub fn apply_block(&self, block: usize, x: &Mat, transpose: bool) -> Mat {
        let b = self.blocks.block(block);
        let side = if transpose {
            Side {
                out_tree: self.col_tree(),
                in_tree: self.row_tree(),
                out_basis: &self.col_basis,
                in_basis: &self.row_basis,
                out_root: b.col,
                in_root: b.row,
                transpose,
            }
        } else {
            Side {
                out_tree: self.row_tree(),
                in_tree: self.col_tree(),
                out_basis: &self.row_basis,
                in_basis: &self.col_basis,
                out_root: b.row,
                in_root: b.col,
                transpose,
            }
        };
        let in_c = side.in_tree.cluster(side.in_root);
        let out_c = side.out_tree.cluster(side.out_root);
        assert_eq!(x.nrows(), in_c.size(), "input rows do not match the block");
        let nrhs = x.ncols();

        let mut xhat: Vec<Option<Mat>> = vec![None; in_c.subtree_end - side.in_root];
        forward(side.in_tree, side.in_basis, side.in_root, side.in_root, in_c.start, x, &mut xhat);

        let mut yhat: Vec<Option<Mat>> = vec![None; out_c.subtree_end - side.out_root];
        let mut y = Mat::zeros(out_c.size(), nrhs);
        self.couple(block, &side, in_c.start, out_c.start, x, &xhat, &mut yhat, &mut y);
        backward(side.out_tree, side.out_basis, side.out_root, side.out_root, out_c.start, &mut yhat, &mut y);
        y
    }

    #[allow(clippy::too_many_arguments)]
    fn couple(
        &self,
        block: usize,
        side: &Side<'_>,
        in_off: usize,
        out_off: usize,
        x: &Mat,
        xhat: &[Option<Mat>],
        yhat: &mut [Option<Mat>],
        y: &mut Mat,
    ) {
        let b = self.blocks.block(block);
        let (o, i) = if side.transpose { (b.col, b.row) } else { (b.row, b.col) };
        match &self.data[block] {
            BlockData::Coupling(s) => {
                let xh = xhat[i - side.in_root].as_ref().expect("forward transform covers the subtree");
                let slot = &mut yhat[o - side.out_root];
                let acc = slot.get_or_insert_with(|| Mat::zeros(side.out_basis.rank(o), x.ncols()));
                if side.transpose {
                    acc.gemm(1.0, &s.transpose(), xh, 1.0);
                } else {
                    acc.gemm(1.0, s, xh, 1.0);
                }
            }
            BlockData::Nearfield(n) => {
                let oc = side.out_tree.cluster(o);
                let ic = side.in_tree.cluster(i);
                let xs = x.rows(ic.start - in_off, ic.size());
                let mut ys = y.rows_mut(oc.start - out_off, oc.size());
                if side.transpose {
                    ys.gemm(1.0, &n.transpose(), &xs, 1.0);
                } else {
                    ys.gemm(1.0, n, &xs, 1.0);
                }
            }
            BlockData::Subdivided => {
                for &ch in &b.children {
                    self.couple(ch, side, in_off, out_off, x, xhat, yhat, y);
                }
            }
        }
    }
}

struct Side<'a> {
    out_tree: &'a ClusterTree,
    in_tree: &'a ClusterTree,
    out_basis: &'a ClusterBasis,
    in_basis: &'a ClusterBasis,
    out_root: usize,
    in_root: usize,
    transpose: bool,
}

fn forward(
    tree: &ClusterTree,
    basis: &ClusterBasis,
    base: usize,
    t: usize,
    offset: usize,
    x: &Mat,
    xhat: &mut [Option<Mat>],
) {
    let c = tree.cluster(t);
    let value = if c.is_leaf() {
        basis.leaf_matrix(t).transpose() * x.rows(c.start - offset, c.size())
    } else {
        let mut acc = Mat::zeros(basis.rank(t), x.ncols());
        for &ch in &c.children {
            forward(tree, basis, base, ch, offset, x, xhat);
            acc.gemm(1.0, &basis.transfer(ch).transpose(), xhat[ch - base].as_ref().unwrap(), 1.0);
        }
        acc
    };
    xhat[t - base] = Some(value);
}

fn backward(
    tree: &ClusterTree,
    basis: &ClusterBasis,
    base: usize,
    t: usize,
    offset: usize,
    yhat: &mut [Option<Mat>],
    y: &mut Mat,
) {
    let c = tree.cluster(t);
    let own = yhat[t - base].take();
    if c.is_leaf() {
        if let Some(v) = own {
            y.rows_mut(c.start - offset, c.size()).gemm(1.0, basis.leaf_matrix(t), &v, 1.0);
        }
        return;
    }
    for &ch in &c.children {
        if let Some(v) = &own {
            let pushed = basis.transfer(ch) * v;
            let slot = &mut yhat[ch - base];
            *slot = Some(match slot.take() {
                Some(old) => old + pushed,
                None => pushed,
            });
        }
        backward(tree, basis, base, ch, offset, yhat, y);
    }
}
