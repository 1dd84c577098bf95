use std::sync::Arc;

use super::cluster::{admissible, ClusterTree};
use crate::error::{H2Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Admissible,
    Inadmissible,
    Subdivided,
}

/// A node `(row, col)` of a [`BlockTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub kind: BlockKind,
    pub children: Vec<usize>,
}

impl Block {
    pub fn is_leaf(&self) -> bool {
        self.kind != BlockKind::Subdivided
    }
}

/// Block tree over a pair of cluster trees, stored in depth-first preorder.
#[derive(Debug, Clone)]
pub struct BlockTree {
    rows: Arc<ClusterTree>,
    cols: Arc<ClusterTree>,
    blocks: Vec<Block>,
    eta: f64,
}

impl BlockTree {
    /// Recursive construction from `(root, root)`: admissible pairs become
    /// admissible leaves, pairs of leaf clusters become inadmissible leaves
    /// and everything else is subdivided.
    pub fn build(rows: Arc<ClusterTree>, cols: Arc<ClusterTree>, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(H2Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        let mut tree = Self { rows, cols, blocks: Vec::new(), eta };
        let (r, c) = (tree.rows.root(), tree.cols.root());
        tree.build_node(r, c);
        Ok(tree)
    }

    fn build_node(&mut self, row: usize, col: usize) -> usize {
        let id = self.blocks.len();
        let rc = self.rows.cluster(row);
        let cc = self.cols.cluster(col);
        let kind = if admissible(&rc.bbox, &cc.bbox, self.eta) {
            BlockKind::Admissible
        } else if rc.is_leaf() && cc.is_leaf() {
            BlockKind::Inadmissible
        } else {
            BlockKind::Subdivided
        };
        self.blocks.push(Block { row, col, kind, children: Vec::new() });
        if kind == BlockKind::Subdivided {
            let row_kids = child_or_self(&self.rows, row);
            let col_kids = child_or_self(&self.cols, col);
            let mut children = Vec::with_capacity(row_kids.len() * col_kids.len());
            for &r in &row_kids {
                for &c in &col_kids {
                    children.push(self.build_node(r, c));
                }
            }
            self.blocks[id].children = children;
        }
        id
    }

    /// Reassembles a block tree from stored nodes.
    pub fn from_parts(rows: Arc<ClusterTree>, cols: Arc<ClusterTree>, blocks: Vec<Block>, eta: f64) -> Result<Self> {
        if blocks.is_empty() || blocks[0].row != rows.root() || blocks[0].col != cols.root() {
            return Err(H2Error::Format("block tree root must pair the cluster roots".into()));
        }
        for (id, b) in blocks.iter().enumerate() {
            if b.row >= rows.len() || b.col >= cols.len() {
                return Err(H2Error::Format(format!("block {id} references a missing cluster")));
            }
            if (b.kind == BlockKind::Subdivided) == b.children.is_empty() {
                return Err(H2Error::Format(format!("block {id} kind does not match its children")));
            }
            if b.children.iter().any(|&c| c <= id || c >= blocks.len()) {
                return Err(H2Error::Format(format!("block {id} has invalid children")));
            }
        }
        Ok(Self { rows, cols, blocks, eta })
    }

    pub fn rows(&self) -> &Arc<ClusterTree> {
        &self.rows
    }

    pub fn cols(&self) -> &Arc<ClusterTree> {
        &self.cols
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn block(&self, id: usize) -> &Block {
        &self.blocks[id]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.blocks.len()).filter(|&b| self.blocks[b].is_leaf())
    }

    /// Admissible leaves grouped by row cluster.
    pub fn admissible_by_row(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rows.len()];
        for (id, b) in self.blocks.iter().enumerate() {
            if b.kind == BlockKind::Admissible {
                out[b.row].push(id);
            }
        }
        out
    }

    /// Admissible leaves grouped by column cluster.
    pub fn admissible_by_col(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cols.len()];
        for (id, b) in self.blocks.iter().enumerate() {
            if b.kind == BlockKind::Admissible {
                out[b.col].push(id);
            }
        }
        out
    }

    /// Row and column index ranges (tree order) of a block.
    pub fn ranges(&self, id: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let b = &self.blocks[id];
        (self.rows.cluster(b.row).range(), self.cols.cluster(b.col).range())
    }

    /// Structural equality of the block hierarchy (ignores `eta`).
    pub fn same_structure(&self, other: &BlockTree) -> bool {
        self.rows.same_structure(&other.rows)
            && self.cols.same_structure(&other.cols)
            && self.blocks == other.blocks
    }
}

/// Children of `id`, or `[id]` for a leaf cluster.
pub(crate) fn child_or_self(tree: &ClusterTree, id: usize) -> Vec<usize> {
    if tree.is_leaf(id) {
        vec![id]
    } else {
        tree.children(id).to_vec()
    }
}

pub fn build_block_tree(rows: Arc<ClusterTree>, cols: Arc<ClusterTree>, eta: f64) -> Result<BlockTree> {
    BlockTree::build(rows, cols, eta)
}
