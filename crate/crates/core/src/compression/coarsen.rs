use std::sync::Arc;

use crate::error::{H2Error, Result};
use crate::geometry::{child_or_self, BlockKind, BlockTree, ClusterTree};
use crate::h2core::{ClusterBasis, H2Matrix, DENSE_LIMIT};
use crate::linalg::{hcat, Mat};
use crate::product::{accumulator_dense, split_settled, Accumulator, ExactProduct, ProductContext};

use super::control::TruncationControl;
use super::lowrank::{agglomerate, truncate, LowRankBlock};

/// Content of a block of a [`BlockwiseLowRank`] matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarseBlock {
    LowRank(LowRankBlock),
    Dense(Mat),
    Subdivided,
}

/// Matrix over a block tree with factorized admissible leaves and dense
/// inadmissible leaves.
#[derive(Debug, Clone)]
pub struct BlockwiseLowRank {
    blocks: Arc<BlockTree>,
    data: Vec<CoarseBlock>,
}

impl BlockwiseLowRank {
    pub fn new(blocks: Arc<BlockTree>, data: Vec<CoarseBlock>) -> Result<Self> {
        if data.len() != blocks.len() {
            return Err(H2Error::DimensionMismatch { expected: blocks.len(), actual: data.len() });
        }
        for (id, (b, d)) in blocks.blocks().iter().zip(&data).enumerate() {
            let (rows, cols) = (blocks.rows().cluster(b.row).size(), blocks.cols().cluster(b.col).size());
            let ok = match (b.kind, d) {
                (BlockKind::Admissible, CoarseBlock::LowRank(lr)) => lr.nrows() == rows && lr.ncols() == cols,
                (BlockKind::Inadmissible, CoarseBlock::Dense(n)) => n.shape() == (rows, cols),
                (BlockKind::Subdivided, CoarseBlock::Subdivided) => true,
                _ => false,
            };
            if !ok {
                return Err(H2Error::InvalidArgument(format!("block {id} data does not match its kind or shape")));
            }
        }
        Ok(Self { blocks, data })
    }

    pub fn block_tree(&self) -> &Arc<BlockTree> {
        &self.blocks
    }

    pub fn rows(&self) -> &Arc<ClusterTree> {
        self.blocks.rows()
    }

    pub fn cols(&self) -> &Arc<ClusterTree> {
        self.blocks.cols()
    }

    pub fn data(&self, block: usize) -> &CoarseBlock {
        &self.data[block]
    }

    pub fn low_rank(&self, block: usize) -> Option<&LowRankBlock> {
        match &self.data[block] {
            CoarseBlock::LowRank(lr) => Some(lr),
            _ => None,
        }
    }

    pub fn dense_block(&self, block: usize) -> Option<&Mat> {
        match &self.data[block] {
            CoarseBlock::Dense(n) => Some(n),
            _ => None,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows().size()
    }

    pub fn ncols(&self) -> usize {
        self.cols().size()
    }

    pub fn stored_reals(&self) -> usize {
        self.data
            .iter()
            .map(|d| match d {
                CoarseBlock::LowRank(lr) => lr.stored_reals(),
                CoarseBlock::Dense(n) => n.len(),
                CoarseBlock::Subdivided => 0,
            })
            .sum()
    }

    /// Largest rank of an admissible leaf.
    pub fn max_rank(&self) -> usize {
        self.data
            .iter()
            .filter_map(|d| match d {
                CoarseBlock::LowRank(lr) => Some(lr.rank()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Dense entries of a leaf.
    pub fn block_dense(&self, block: usize) -> Mat {
        let b = self.blocks.block(block);
        match &self.data[block] {
            CoarseBlock::LowRank(lr) => lr.to_dense(),
            CoarseBlock::Dense(n) => n.clone(),
            CoarseBlock::Subdivided => {
                let (rc, cc) = (self.rows().cluster(b.row), self.cols().cluster(b.col));
                let mut out = Mat::zeros(rc.size(), cc.size());
                for &ch in &b.children {
                    let c = self.blocks.block(ch);
                    let (r2, c2) = (self.rows().cluster(c.row), self.cols().cluster(c.col));
                    out.view_mut((r2.start - rc.start, c2.start - cc.start), (r2.size(), c2.size()))
                        .copy_from(&self.block_dense(ch));
                }
                out
            }
        }
    }

    /// Dense matrix in tree order, refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<Mat> {
        let (rows, cols) = (self.nrows(), self.ncols());
        if rows > DENSE_LIMIT || cols > DENSE_LIMIT {
            return Err(H2Error::DenseLimit { rows, cols, limit: DENSE_LIMIT });
        }
        Ok(self.block_dense(self.blocks.root()))
    }
}

enum Source {
    Stored(usize),
    Live(Accumulator),
}

enum Opened {
    Leaf(Accumulator),
    Split(Vec<Source>),
}

struct Coarsener<'a> {
    row_basis: &'a ClusterBasis,
    col_basis: &'a ClusterBasis,
    stored: Option<&'a ExactProduct>,
    ctx: Option<&'a ProductContext<'a>>,
    target: &'a BlockTree,
    ctl: TruncationControl,
}

impl Coarsener<'_> {
    fn position(&self, src: &Source) -> (usize, usize) {
        match src {
            Source::Stored(id) => {
                let n = self.stored.expect("stored product").node(*id);
                (n.row, n.col)
            }
            Source::Live(acc) => (acc.row, acc.col),
        }
    }

    fn open(&self, src: Source) -> Opened {
        match src {
            Source::Stored(id) => {
                let node = self.stored.expect("stored product").node(id);
                if node.children.is_empty() {
                    Opened::Leaf(node.leaf.clone().expect("leaf carries an accumulator"))
                } else {
                    Opened::Split(node.children.iter().map(|&c| Source::Stored(c)).collect())
                }
            }
            Source::Live(mut acc) => {
                if acc.pending.is_empty() {
                    return Opened::Leaf(acc);
                }
                let ctx = self.ctx.expect("pending products need a product context");
                if ctx.needs_split(&acc) {
                    Opened::Split(ctx.split(acc).into_iter().map(Source::Live).collect())
                } else {
                    ctx.expand_pending(&mut acc);
                    Opened::Leaf(acc)
                }
            }
        }
    }

    fn visit(&self, b: usize, src: Source, data: &mut Vec<CoarseBlock>) -> Result<()> {
        let block = self.target.block(b);
        match block.kind {
            BlockKind::Admissible => {
                data[b] = CoarseBlock::LowRank(self.low_rank(src, 0));
            }
            BlockKind::Inadmissible => {
                data[b] = CoarseBlock::Dense(self.dense(src));
            }
            BlockKind::Subdivided => {
                let kids = match self.open(src) {
                    Opened::Split(kids) => kids,
                    Opened::Leaf(acc) => {
                        if self.row_basis.tree().is_leaf(acc.row) && self.col_basis.tree().is_leaf(acc.col) {
                            return Err(H2Error::NotCoarsening { row: block.row, col: block.col });
                        }
                        split_settled(&acc, self.row_basis, self.col_basis).into_iter().map(Source::Live).collect()
                    }
                };
                if kids.len() != block.children.len() {
                    return Err(H2Error::NotCoarsening { row: block.row, col: block.col });
                }
                let mut slots: Vec<Option<Source>> = kids.into_iter().map(Some).collect();
                for &ch in &block.children {
                    let c = self.target.block(ch);
                    let idx = slots
                        .iter()
                        .position(|s| s.as_ref().is_some_and(|s| self.position(s) == (c.row, c.col)))
                        .ok_or(H2Error::NotCoarsening { row: c.row, col: c.col })?;
                    let src = slots[idx].take().expect("slot checked above");
                    self.visit(ch, src, data)?;
                }
            }
        }
        Ok(())
    }

    fn low_rank(&self, src: Source, depth: usize) -> LowRankBlock {
        let (t, r) = self.position(&src);
        match self.open(src) {
            Opened::Leaf(acc) if depth == 0 => self.leaf_factors(&acc),
            Opened::Leaf(acc) => truncate(&self.leaf_factors(&acc), self.ctl.depth_budget(depth + 1) / 2.0),
            Opened::Split(kids) => {
                let m = child_or_self(self.row_basis.tree(), t).len();
                let n = child_or_self(self.col_basis.tree(), r).len();
                debug_assert_eq!(kids.len(), m * n);
                let mut grid: Vec<Vec<LowRankBlock>> = vec![Vec::with_capacity(n); m];
                for (i, kid) in kids.into_iter().enumerate() {
                    grid[i / n].push(self.low_rank(kid, depth + 1));
                }
                let eps = self.ctl.depth_budget(depth) / (2 * m * n) as f64;
                agglomerate(&grid, eps).expect("consistent product grid")
            }
        }
    }

    /// Factors `[yield(alpha), V_t, ..] [W_r, yield(beta), ..]^T` of a
    /// settled accumulator. The nearfield part uses an identity factor on
    /// the smaller side.
    fn leaf_factors(&self, acc: &Accumulator) -> LowRankBlock {
        let rows = self.row_basis.tree().cluster(acc.row).size();
        let cols = self.col_basis.tree().cluster(acc.col).size();
        let mut a_parts = Vec::new();
        let mut b_parts = Vec::new();
        if let Some(alpha) = &acc.alpha {
            a_parts.push(alpha.yield_of(self.row_basis));
            b_parts.push(self.col_basis.expand(acc.col));
        }
        if let Some(beta) = &acc.beta {
            a_parts.push(self.row_basis.expand(acc.row));
            b_parts.push(beta.yield_of(self.col_basis));
        }
        if let Some(n) = &acc.near {
            if rows <= cols {
                a_parts.push(Mat::identity(rows, rows));
                b_parts.push(n.transpose());
            } else {
                a_parts.push(n.clone());
                b_parts.push(Mat::identity(cols, cols));
            }
        }
        let a = hcat(rows, &a_parts.iter().collect::<Vec<_>>());
        let b = hcat(cols, &b_parts.iter().collect::<Vec<_>>());
        LowRankBlock { a, b }
    }

    fn dense(&self, src: Source) -> Mat {
        let (t, r) = self.position(&src);
        match self.open(src) {
            Opened::Leaf(acc) => accumulator_dense(&acc, self.row_basis, self.col_basis),
            Opened::Split(kids) => {
                let (rows, cols) = (self.row_basis.tree(), self.col_basis.tree());
                let (tc, rc) = (rows.cluster(t), cols.cluster(r));
                let mut out = Mat::zeros(tc.size(), rc.size());
                for kid in kids {
                    let (t2, r2) = self.position(&kid);
                    let (c2, d2) = (rows.cluster(t2), cols.cluster(r2));
                    out.view_mut((c2.start - tc.start, d2.start - rc.start), (c2.size(), d2.size()))
                        .copy_from(&self.dense(kid));
                }
                out
            }
        }
    }
}

fn check_target(target: &BlockTree, rows: &ClusterTree, cols: &ClusterTree) -> Result<()> {
    if !target.rows().same_structure(rows) || !target.cols().same_structure(cols) {
        return Err(H2Error::TreeMismatch("target block tree uses different cluster trees".into()));
    }
    Ok(())
}

/// Converts the exact product to a blockwise low-rank matrix over `target`.
///
/// Product leaves below a target admissible leaf are truncated and then
/// agglomerated with a tolerance that shrinks by `2 sigma` per level, so
/// every admissible target block has relative spectral error at most
/// `ctl.target_eps()`. A product leaf that coincides with a target leaf is
/// converted without truncation; product leaves coarser than the target
/// are split exactly.
pub fn coarsen(product: &ExactProduct, target: &Arc<BlockTree>, ctl: &TruncationControl) -> Result<BlockwiseLowRank> {
    check_target(target, product.rows(), product.cols())?;
    let c = Coarsener {
        row_basis: product.row_basis(),
        col_basis: product.col_basis(),
        stored: Some(product),
        ctx: None,
        target,
        ctl: *ctl,
    };
    let mut data = vec![CoarseBlock::Subdivided; target.len()];
    c.visit(target.root(), Source::Stored(product.root()), &mut data)?;
    BlockwiseLowRank::new(target.clone(), data)
}

/// Same result as [`coarsen`] applied to [`exact_product`](crate::product::exact_product)
/// of `x` and `y`, without storing the exact product.
pub fn coarsen_product(x: &H2Matrix, y: &H2Matrix, target: &Arc<BlockTree>, ctl: &TruncationControl) -> Result<BlockwiseLowRank> {
    check_target(target, x.row_tree(), y.col_tree())?;
    let ctx = ProductContext::new(x, y)?;
    let c = Coarsener {
        row_basis: x.row_basis(),
        col_basis: y.col_basis(),
        stored: None,
        ctx: Some(&ctx),
        target,
        ctl: *ctl,
    };
    let mut data = vec![CoarseBlock::Subdivided; target.len()];
    c.visit(target.root(), Source::Live(ctx.root_accumulator()), &mut data)?;
    BlockwiseLowRank::new(target.clone(), data)
}
