use std::sync::Arc;

use crate::error::{H2Error, Result};
use crate::geometry::ClusterTree;
use crate::linalg::Mat;

/// Nested cluster basis: leaf matrices for leaf clusters and transfer
/// matrices for every non-root cluster.
///
/// The transfer matrix of cluster `t'` with parent `t` has shape
/// `rank(t') x rank(t)` and satisfies `V_t|_{t'} = V_{t'} E_{t'}`.
/// Ranks are stored per cluster.
#[derive(Debug, Clone)]
pub struct ClusterBasis {
    tree: Arc<ClusterTree>,
    ranks: Vec<usize>,
    leaf: Vec<Option<Mat>>,
    transfer: Vec<Option<Mat>>,
}

impl ClusterBasis {
    pub fn new(
        tree: Arc<ClusterTree>,
        ranks: Vec<usize>,
        leaf: Vec<Option<Mat>>,
        transfer: Vec<Option<Mat>>,
    ) -> Result<Self> {
        let n = tree.len();
        if ranks.len() != n || leaf.len() != n || transfer.len() != n {
            return Err(H2Error::InvalidArgument("basis arrays must have one entry per cluster".into()));
        }
        for (id, c) in tree.clusters().iter().enumerate() {
            match (&leaf[id], c.is_leaf()) {
                (Some(v), true) if v.shape() == (c.size(), ranks[id]) => {}
                (None, false) => {}
                _ => return Err(H2Error::InvalidArgument(format!("leaf matrix of cluster {id} has the wrong shape"))),
            }
            match (&transfer[id], c.parent) {
                (Some(e), Some(p)) if e.shape() == (ranks[id], ranks[p]) => {}
                (None, None) => {}
                _ => return Err(H2Error::InvalidArgument(format!("transfer matrix of cluster {id} has the wrong shape"))),
            }
        }
        Ok(Self { tree, ranks, leaf, transfer })
    }

    /// Basis with all-zero leaf and transfer matrices of the given rank.
    pub fn zeros(tree: Arc<ClusterTree>, rank: usize) -> Self {
        let leaf = tree
            .clusters()
            .iter()
            .map(|c| c.is_leaf().then(|| Mat::zeros(c.size(), rank)))
            .collect();
        let transfer = tree.clusters().iter().map(|c| c.parent.map(|_| Mat::zeros(rank, rank))).collect();
        Self { ranks: vec![rank; tree.len()], tree, leaf, transfer }
    }

    pub fn tree(&self) -> &Arc<ClusterTree> {
        &self.tree
    }

    pub fn rank(&self, t: usize) -> usize {
        self.ranks[t]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Leaf matrix `V_t`; panics for non-leaf clusters.
    pub fn leaf_matrix(&self, t: usize) -> &Mat {
        self.leaf[t].as_ref().expect("leaf matrix requested for a non-leaf cluster")
    }

    /// Transfer matrix `E_t`; panics for the root.
    pub fn transfer(&self, t: usize) -> &Mat {
        self.transfer[t].as_ref().expect("transfer matrix requested for the root cluster")
    }

    /// Dense `|t| x rank(t)` matrix `V_t`, reconstructed through the
    /// transfer matrices for non-leaf clusters.
    pub fn expand(&self, t: usize) -> Mat {
        let c = self.tree.cluster(t);
        if c.is_leaf() {
            return self.leaf_matrix(t).clone();
        }
        let mut out = Mat::zeros(c.size(), self.ranks[t]);
        for &ch in &c.children {
            let child = self.tree.cluster(ch);
            let part = self.expand(ch) * self.transfer(ch);
            out.view_mut((child.start - c.start, 0), (child.size(), self.ranks[t])).copy_from(&part);
        }
        out
    }

    /// `V_t^T a` for `a` with `|t|` rows, evaluated bottom-up through the
    /// transfer matrices.
    pub fn project(&self, t: usize, a: &Mat) -> Mat {
        let c = self.tree.cluster(t);
        debug_assert_eq!(a.nrows(), c.size());
        if c.is_leaf() {
            return self.leaf_matrix(t).transpose() * a;
        }
        let mut out = Mat::zeros(self.ranks[t], a.ncols());
        for &ch in &c.children {
            let child = self.tree.cluster(ch);
            let rows = a.rows(child.start - c.start, child.size()).into_owned();
            let inner = self.project(ch, &rows);
            out.gemm(1.0, &self.transfer(ch).transpose(), &inner, 1.0);
        }
        out
    }

    /// Number of stored reals (leaf plus transfer matrices).
    pub fn stored_reals(&self) -> usize {
        let leaf: usize = self.leaf.iter().flatten().map(|m| m.len()).sum();
        let transfer: usize = self.transfer.iter().flatten().map(|m| m.len()).sum();
        leaf + transfer
    }

    /// Largest deviation `||V_t^T V_t - I||_F` over all clusters.
    pub fn isometry_defect(&self) -> f64 {
        (0..self.tree.len())
            .map(|t| {
                let v = self.expand(t);
                (v.tr_mul(&v) - Mat::identity(self.ranks[t], self.ranks[t])).norm()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn leaf_slot(&self, t: usize) -> Option<&Mat> {
        self.leaf[t].as_ref()
    }

    pub(crate) fn transfer_slot(&self, t: usize) -> Option<&Mat> {
        self.transfer[t].as_ref()
    }
}

/// Products `P_s = W_{X,s}^T V_{Y,s}` for every cluster `s`.
#[derive(Debug, Clone)]
pub struct BasisProductMap {
    products: Vec<Mat>,
}

impl BasisProductMap {
    pub fn get(&self, s: usize) -> &Mat {
        &self.products[s]
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }
}

/// Computes all basis products bottom-up: leaves directly, parents by
/// `P_s = sum_{s'} F_{s'}^T P_{s'} E_{s'}`.
pub fn basis_products(col_basis_x: &ClusterBasis, row_basis_y: &ClusterBasis) -> Result<BasisProductMap> {
    let tree = col_basis_x.tree();
    if !tree.same_structure(row_basis_y.tree()) {
        return Err(H2Error::TreeMismatch("basis products need bases over the same cluster tree".into()));
    }
    let mut products: Vec<Mat> = vec![Mat::zeros(0, 0); tree.len()];
    // Preorder ids: children always have larger ids than their parent.
    for s in (0..tree.len()).rev() {
        let kids = tree.children(s);
        products[s] = if kids.is_empty() {
            col_basis_x.leaf_matrix(s).transpose() * row_basis_y.leaf_matrix(s)
        } else {
            let mut p = Mat::zeros(col_basis_x.rank(s), row_basis_y.rank(s));
            for &ch in kids {
                let inner = &products[ch] * row_basis_y.transfer(ch);
                p.gemm(1.0, &col_basis_x.transfer(ch).transpose(), &inner, 1.0);
            }
            p
        };
    }
    Ok(BasisProductMap { products })
}
