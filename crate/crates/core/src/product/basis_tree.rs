use std::sync::Arc;

use crate::error::{H2Error, Result};
use crate::h2core::ClusterBasis;
use crate::linalg::{vcat, Mat};

/// Variant of a [`BasisTree`] node.
#[derive(Debug, Clone)]
pub enum NodeKind {
    /// Node over a leaf cluster with an optional dense part `N` (`|t| x c`).
    Leaf { near: Option<Mat> },
    /// Node over a non-leaf cluster without children.
    Stub,
    /// One child node per cluster child, in cluster order.
    Branch(Vec<Arc<BasisTree>>),
}

/// Basis tree over a cluster `t` yielding a `|t| x w` matrix.
///
/// A node stores a coefficient matrix `C` (`rank(t) x c`) and a pending
/// transformation `M` (`c x w`, `None` for the identity). Its yield is
/// `(V_t C + N) M` for leaves, `V_t C M` for stubs and
/// `(V_t C + [yield(children)]) M` for branches, where `V_t` is the cluster
/// basis passed to the operations. Children are shared between trees and
/// copied on write.
#[derive(Debug, Clone)]
pub struct BasisTree {
    cluster: usize,
    coeff: Mat,
    transform: Option<Mat>,
    kind: NodeKind,
}

fn applied(c: &Mat, m: &Option<Mat>) -> Mat {
    match m {
        Some(m) => c * m,
        None => c.clone(),
    }
}

impl BasisTree {
    /// Raw constructor; shapes are checked against `basis`.
    pub fn from_parts(
        basis: &ClusterBasis,
        cluster: usize,
        coeff: Mat,
        transform: Option<Mat>,
        kind: NodeKind,
    ) -> Result<Self> {
        let tree = basis.tree();
        let c = coeff.ncols();
        if coeff.nrows() != basis.rank(cluster) {
            return Err(H2Error::DimensionMismatch { expected: basis.rank(cluster), actual: coeff.nrows() });
        }
        if let Some(m) = &transform {
            if m.nrows() != c {
                return Err(H2Error::DimensionMismatch { expected: c, actual: m.nrows() });
            }
        }
        match &kind {
            NodeKind::Leaf { near } => {
                if !tree.is_leaf(cluster) {
                    return Err(H2Error::InvalidArgument(format!("leaf node over non-leaf cluster {cluster}")));
                }
                if let Some(n) = near {
                    if n.shape() != (tree.cluster(cluster).size(), c) {
                        return Err(H2Error::InvalidArgument("nearfield part has the wrong shape".into()));
                    }
                }
            }
            NodeKind::Stub => {
                if tree.is_leaf(cluster) {
                    return Err(H2Error::InvalidArgument(format!("stub node over leaf cluster {cluster}")));
                }
            }
            NodeKind::Branch(kids) => {
                let expected = tree.children(cluster);
                if kids.len() != expected.len()
                    || kids.iter().zip(expected).any(|(k, &e)| k.cluster != e || k.width() != c)
                {
                    return Err(H2Error::InvalidArgument(format!("branch children do not match cluster {cluster}")));
                }
            }
        }
        Ok(Self { cluster, coeff, transform, kind })
    }

    /// `V_t C` as a leaf or stub node.
    pub fn uniform(basis: &ClusterBasis, cluster: usize, coeff: Mat) -> Self {
        debug_assert_eq!(coeff.nrows(), basis.rank(cluster));
        let kind = if basis.tree().is_leaf(cluster) { NodeKind::Leaf { near: None } } else { NodeKind::Stub };
        Self { cluster, coeff, transform: None, kind }
    }

    /// Dense part `N` over a leaf cluster.
    pub fn nearfield(basis: &ClusterBasis, cluster: usize, near: Mat) -> Result<Self> {
        if !basis.tree().is_leaf(cluster) {
            return Err(H2Error::InvalidArgument(format!("nearfield node over non-leaf cluster {cluster}")));
        }
        let coeff = Mat::zeros(basis.rank(cluster), near.ncols());
        Ok(Self { cluster, coeff, transform: None, kind: NodeKind::Leaf { near: Some(near) } })
    }

    pub fn zero(basis: &ClusterBasis, cluster: usize, width: usize) -> Self {
        Self::uniform(basis, cluster, Mat::zeros(basis.rank(cluster), width))
    }

    pub fn cluster(&self) -> usize {
        self.cluster
    }

    pub fn coeff(&self) -> &Mat {
        &self.coeff
    }

    pub fn transform(&self) -> Option<&Mat> {
        self.transform.as_ref()
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    /// Number of columns of the yield.
    pub fn width(&self) -> usize {
        self.transform.as_ref().map_or(self.coeff.ncols(), |m| m.ncols())
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match &self.kind {
            NodeKind::Branch(kids) => 1 + kids.iter().map(|k| k.node_count()).sum::<usize>(),
            _ => 1,
        }
    }

    /// Dense yield `|t| x w`.
    pub fn yield_of(&self, basis: &ClusterBasis) -> Mat {
        self.yield_with(basis, None)
    }

    /// Yield plus `V_t P` for a pushed coefficient `P` of the output width.
    fn yield_with(&self, basis: &ClusterBasis, pushed: Option<Mat>) -> Mat {
        let mut cm = applied(&self.coeff, &self.transform);
        if let Some(p) = pushed {
            cm += p;
        }
        match &self.kind {
            NodeKind::Leaf { near } => {
                let mut y = basis.leaf_matrix(self.cluster) * &cm;
                if let Some(n) = near {
                    y += applied(n, &self.transform);
                }
                y
            }
            NodeKind::Stub => expand_coeff(basis, self.cluster, &cm),
            NodeKind::Branch(kids) => {
                let parts: Vec<Mat> = kids
                    .iter()
                    .map(|k| {
                        let pushed = Some(basis.transfer(k.cluster) * &cm);
                        match &self.transform {
                            Some(m) => k.mul(m).yield_with(basis, pushed),
                            None => k.yield_with(basis, pushed),
                        }
                    })
                    .collect();
                let refs: Vec<&Mat> = parts.iter().collect();
                vcat(cm.ncols(), &refs)
            }
        }
    }

    /// `yield(mul(α, X)) = yield(α) X`.
    pub fn mul(&self, x: &Mat) -> Self {
        let mut out = self.clone();
        out.mul_mut(x);
        out
    }

    pub fn mul_mut(&mut self, x: &Mat) {
        self.transform = Some(match &self.transform {
            Some(m) => m * x,
            None => x.clone(),
        });
    }

    /// Pushes the pending transformation into the coefficients and children.
    pub fn finish(&self) -> Self {
        let mut out = self.clone();
        out.finish_mut();
        out
    }

    pub fn finish_mut(&mut self) {
        let Some(m) = self.transform.take() else { return };
        self.coeff = &self.coeff * &m;
        match &mut self.kind {
            NodeKind::Leaf { near } => {
                if let Some(n) = near {
                    *n = &*n * &m;
                }
            }
            NodeKind::Stub => {}
            NodeKind::Branch(kids) => {
                for k in kids {
                    Arc::make_mut(k).mul_mut(&m);
                }
            }
        }
    }

    /// Replaces a stub by a branch with children `E_{t_i} C M`.
    pub fn split(&self, basis: &ClusterBasis) -> Result<Self> {
        let mut out = self.clone();
        out.split_mut(basis)?;
        Ok(out)
    }

    pub fn split_mut(&mut self, basis: &ClusterBasis) -> Result<()> {
        match self.kind {
            NodeKind::Leaf { .. } => Err(H2Error::LeafCluster(self.cluster)),
            NodeKind::Branch(_) => Ok(()),
            NodeKind::Stub => {
                let cm = applied(&self.coeff, &self.transform);
                let kids = basis
                    .tree()
                    .children(self.cluster)
                    .iter()
                    .map(|&ch| Arc::new(Self::uniform(basis, ch, basis.transfer(ch) * &cm)))
                    .collect();
                self.coeff = Mat::zeros(basis.rank(self.cluster), cm.ncols());
                self.transform = None;
                self.kind = NodeKind::Branch(kids);
                Ok(())
            }
        }
    }

    /// Makes the children of a non-leaf node directly accessible: stubs are
    /// split and branches finished.
    pub(crate) fn open_mut(&mut self, basis: &ClusterBasis) {
        match self.kind {
            NodeKind::Stub => self.split_mut(basis).expect("stub is never a leaf"),
            NodeKind::Branch(_) => self.finish_mut(),
            NodeKind::Leaf { .. } => {}
        }
    }

    /// Mutable access to the child node over cluster child number `index`;
    /// requires an opened branch.
    pub(crate) fn child_mut(&mut self, index: usize) -> &mut BasisTree {
        match &mut self.kind {
            NodeKind::Branch(kids) => Arc::make_mut(&mut kids[index]),
            _ => panic!("child access on a node without children"),
        }
    }

    /// `yield(add(a, b)) = yield(a) + yield(b)`.
    pub fn add(&self, other: &BasisTree, basis: &ClusterBasis) -> Result<Self> {
        let mut out = self.clone();
        out.add_mut(other, basis)?;
        Ok(out)
    }

    pub fn add_mut(&mut self, other: &BasisTree, basis: &ClusterBasis) -> Result<()> {
        if self.cluster != other.cluster {
            return Err(H2Error::InvalidArgument(format!(
                "cannot add basis trees over clusters {} and {}",
                self.cluster, other.cluster
            )));
        }
        if self.width() != other.width() {
            return Err(H2Error::DimensionMismatch { expected: self.width(), actual: other.width() });
        }
        self.finish_mut();
        self.coeff += applied(&other.coeff, &other.transform);
        match (&mut self.kind, &other.kind) {
            (NodeKind::Leaf { near }, NodeKind::Leaf { near: other_near }) => {
                if let Some(on) = other_near {
                    let on = applied(on, &other.transform);
                    match near {
                        Some(n) => *n += on,
                        None => *near = Some(on),
                    }
                }
            }
            (_, NodeKind::Stub) => {}
            (NodeKind::Stub, NodeKind::Branch(kids)) => {
                let kids = kids
                    .iter()
                    .map(|k| match &other.transform {
                        Some(m) => Arc::new(k.mul(m)),
                        None => k.clone(),
                    })
                    .collect();
                self.kind = NodeKind::Branch(kids);
            }
            (NodeKind::Branch(mine), NodeKind::Branch(theirs)) => {
                for (a, b) in mine.iter_mut().zip(theirs) {
                    let b = match &other.transform {
                        Some(m) => std::borrow::Cow::Owned(b.mul(m)),
                        None => std::borrow::Cow::Borrowed(&**b),
                    };
                    Arc::make_mut(a).add_mut(&b, basis)?;
                }
            }
            _ => return Err(H2Error::InvalidArgument("leaf and non-leaf nodes cannot be added".into())),
        }
        Ok(())
    }

    /// Adds `V_t C` to the yield.
    pub(crate) fn add_uniform_mut(&mut self, coeff: &Mat) {
        self.finish_mut();
        self.coeff += coeff;
    }

    /// Adds the dense part `N` to the yield of a leaf node.
    pub(crate) fn add_near_mut(&mut self, add: Mat) {
        self.finish_mut();
        match &mut self.kind {
            NodeKind::Leaf { near } => match near {
                Some(n) => *n += add,
                None => *near = Some(add),
            },
            _ => panic!("nearfield contribution on a non-leaf cluster"),
        }
    }

    /// Node over the child cluster `child` whose yield is the restriction
    /// of `yield(self)` to the rows of `child`.
    pub fn restrict(&self, child: usize, basis: &ClusterBasis) -> Result<Self> {
        let tree = basis.tree();
        let index = tree
            .child_index(self.cluster, child)
            .ok_or_else(|| H2Error::InvalidArgument(format!("{child} is not a child of cluster {}", self.cluster)))?;
        let cm = applied(&self.coeff, &self.transform);
        let pushed = basis.transfer(child) * &cm;
        match &self.kind {
            NodeKind::Leaf { .. } => Err(H2Error::LeafCluster(self.cluster)),
            NodeKind::Stub => Ok(Self::uniform(basis, child, pushed)),
            NodeKind::Branch(kids) => {
                let mut out = (*kids[index]).clone();
                if let Some(m) = &self.transform {
                    out.mul_mut(m);
                }
                out.finish_mut();
                out.coeff += pushed;
                Ok(out)
            }
        }
    }
}

/// `V_t C` evaluated through the transfer matrices.
fn expand_coeff(basis: &ClusterBasis, t: usize, c: &Mat) -> Mat {
    let tree = basis.tree();
    if tree.is_leaf(t) {
        return basis.leaf_matrix(t) * c;
    }
    let parts: Vec<Mat> = tree.children(t).iter().map(|&ch| expand_coeff(basis, ch, &(basis.transfer(ch) * c))).collect();
    let refs: Vec<&Mat> = parts.iter().collect();
    vcat(c.ncols(), &refs)
}
