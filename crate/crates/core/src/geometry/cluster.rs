use std::ops::Range;

use super::mesh::{Point3, TriangleMesh};
use crate::error::{H2Error, Result};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lower: Point3,
    pub upper: Point3,
}

impl BoundingBox {
    pub fn new(lower: Point3, upper: Point3) -> Self {
        debug_assert!((0..3).all(|d| lower[d] <= upper[d]));
        Self { lower, upper }
    }

    /// Smallest box containing all `points`. Panics on an empty slice.
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut lower = [f64::INFINITY; 3];
        let mut upper = [f64::NEG_INFINITY; 3];
        for p in points {
            for d in 0..3 {
                lower[d] = lower[d].min(p[d]);
                upper[d] = upper[d].max(p[d]);
            }
        }
        assert!(lower[0].is_finite(), "bounding box of an empty point set");
        Self { lower, upper }
    }

    /// Euclidean length of the diagonal.
    pub fn diameter(&self) -> f64 {
        (0..3).map(|d| (self.upper[d] - self.lower[d]).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean distance between the boxes (zero if they intersect).
    pub fn distance(&self, other: &BoundingBox) -> f64 {
        (0..3)
            .map(|d| {
                let gap = (self.lower[d] - other.upper[d]).max(other.lower[d] - self.upper[d]).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains_point(&self, p: &Point3, slack: f64) -> bool {
        (0..3).all(|d| p[d] >= self.lower[d] - slack && p[d] <= self.upper[d] + slack)
    }

    pub fn contains_box(&self, other: &BoundingBox, slack: f64) -> bool {
        self.contains_point(&other.lower, slack) && self.contains_point(&other.upper, slack)
    }

    fn longest_axis(&self) -> usize {
        let ext = [0, 1, 2].map(|d| self.upper[d] - self.lower[d]);
        if ext[0] >= ext[1] && ext[0] >= ext[2] {
            0
        } else if ext[1] >= ext[2] {
            1
        } else {
            2
        }
    }
}

/// Standard admissibility test
/// `max(diam(a), diam(b)) <= 2 eta dist(a, b)`.
pub fn admissible(a: &BoundingBox, b: &BoundingBox, eta: f64) -> bool {
    a.diameter().max(b.diameter()) <= 2.0 * eta * a.distance(b)
}

/// A node of a [`ClusterTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Positions `start..end` in tree order.
    pub start: usize,
    pub end: usize,
    pub bbox: BoundingBox,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub level: usize,
    /// Ids of the subtree rooted here are `id..subtree_end`.
    pub subtree_end: usize,
}

impl Cluster {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn size(&self) -> usize {
        self.end - self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Binary cluster tree over an index set.
///
/// Clusters are stored in depth-first preorder, so the root is id `0` and
/// every subtree occupies a contiguous id range. Indices are permuted such
/// that every cluster owns a contiguous range of tree-order positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    clusters: Vec<Cluster>,
    /// `order[pos]` is the original index stored at tree position `pos`.
    order: Vec<usize>,
    /// `position[i]` is the tree position of original index `i`.
    position: Vec<usize>,
    leaf_size: usize,
    depth: usize,
}

impl ClusterTree {
    /// Builds the tree by recursive median bisection along the longest box
    /// axis until clusters have at most `leaf_size` indices.
    pub fn from_points(points: &[Point3], leaf_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(H2Error::EmptyMesh);
        }
        if leaf_size == 0 {
            return Err(H2Error::InvalidArgument("leaf_size must be positive".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut clusters = Vec::new();
        build_node(points, &mut order, 0, points.len(), leaf_size, None, 0, &mut clusters);
        let mut position = vec![0; points.len()];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let depth = clusters.iter().map(|c| c.level).max().unwrap_or(0);
        Ok(Self { clusters, order, position, leaf_size, depth })
    }

    /// Reassembles a tree from its parts, checking structural consistency.
    pub fn from_parts(clusters: Vec<Cluster>, order: Vec<usize>, leaf_size: usize) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &i) in order.iter().enumerate() {
            if i >= n || position[i] != usize::MAX {
                return Err(H2Error::Format("index order is not a permutation".into()));
            }
            position[i] = pos;
        }
        if clusters.is_empty() || clusters[0].start != 0 || clusters[0].end != n {
            return Err(H2Error::Format("root cluster must cover all indices".into()));
        }
        for (id, c) in clusters.iter().enumerate() {
            if c.subtree_end <= id || c.subtree_end > clusters.len() {
                return Err(H2Error::Format(format!("cluster {id} has an invalid subtree range")));
            }
            let mut next = c.start;
            for &ch in &c.children {
                let child = clusters.get(ch).ok_or_else(|| H2Error::Format(format!("cluster {id} child out of range")))?;
                if child.start != next || child.parent != Some(id) || child.level != c.level + 1 {
                    return Err(H2Error::Format(format!("cluster {id} children are inconsistent")));
                }
                next = child.end;
            }
            if !c.children.is_empty() && next != c.end {
                return Err(H2Error::Format(format!("children of cluster {id} do not cover it")));
            }
        }
        let depth = clusters.iter().map(|c| c.level).max().unwrap_or(0);
        Ok(Self { clusters, order, position, leaf_size, depth })
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn cluster(&self, id: usize) -> &Cluster {
        &self.clusters[id]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Number of indices.
    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.clusters[id].children
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.clusters[id].children.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.clusters.len()).filter(|&c| self.is_leaf(c))
    }

    /// Tree position to original index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Original index to tree position.
    pub fn position(&self) -> &[usize] {
        &self.position
    }

    /// Position of `child` among the children of `parent`.
    pub fn child_index(&self, parent: usize, child: usize) -> Option<usize> {
        self.clusters[parent].children.iter().position(|&c| c == child)
    }

    /// Reorders a vector given in original numbering into tree order.
    pub fn to_tree_order(&self, x: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&i| x[i]).collect()
    }

    /// Reorders a vector given in tree order back into original numbering.
    pub fn from_tree_order(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            out[i] = x[pos];
        }
        out
    }

    /// True if both trees describe the same hierarchy of index ranges.
    pub fn same_structure(&self, other: &ClusterTree) -> bool {
        self.clusters.len() == other.clusters.len()
            && self.order.len() == other.order.len()
            && self
                .clusters
                .iter()
                .zip(&other.clusters)
                .all(|(a, b)| a.start == b.start && a.end == b.end && a.children == b.children)
    }
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    points: &[Point3],
    order: &mut [usize],
    start: usize,
    end: usize,
    leaf_size: usize,
    parent: Option<usize>,
    level: usize,
    clusters: &mut Vec<Cluster>,
) -> usize {
    let id = clusters.len();
    let bbox = BoundingBox::of_points(order[start..end].iter().map(|&i| &points[i]));
    clusters.push(Cluster { start, end, bbox, children: Vec::new(), parent, level, subtree_end: id + 1 });
    if end - start > leaf_size {
        let axis = bbox.longest_axis();
        order[start..end].sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
        let mid = start + (end - start) / 2;
        let left = build_node(points, order, start, mid, leaf_size, Some(id), level + 1, clusters);
        let right = build_node(points, order, mid, end, leaf_size, Some(id), level + 1, clusters);
        clusters[id].children = vec![left, right];
    }
    clusters[id].subtree_end = clusters.len();
    id
}

/// Cluster tree over the triangle midpoints of `mesh`.
pub fn build_cluster_tree(mesh: &TriangleMesh, leaf_size: usize) -> Result<ClusterTree> {
    if mesh.is_empty() {
        return Err(H2Error::EmptyMesh);
    }
    ClusterTree::from_points(mesh.midpoints(), leaf_size)
}
