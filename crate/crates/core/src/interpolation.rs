//! Tensor Chebyshev interpolation and H²-matrix assembly.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{H2Error, Result};
use crate::geometry::{BlockKind, BlockTree, BoundingBox, ClusterTree, Point3, TriangleMesh};
use crate::h2core::{BlockData, ClusterBasis, H2Matrix};
use crate::linalg::Mat;

/// Chebyshev points of the first kind on `[a, b]`:
/// `(a+b)/2 + (b-a)/2 cos((2j+1)π/(2m))` for `j = 0..m`.
pub fn chebyshev_points(a: f64, b: f64, m: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..m)
        .map(|j| {
            if half == 0.0 {
                a
            } else {
                mid + half * ((2 * j + 1) as f64 * PI / (2 * m) as f64).cos()
            }
        })
        .collect()
}

/// Values of all `m` Lagrange polynomials for the nodes `nodes` at `x`.
///
/// Coincident nodes (a flat box axis) select the constant polynomial:
/// `l_0 = 1` and all others vanish.
fn lagrange_1d(nodes: &[f64], x: f64, out: &mut [f64]) {
    let m = nodes.len();
    if m > 1 && nodes[0] == nodes[m - 1] {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    for j in 0..m {
        let mut v = 1.0;
        for i in 0..m {
            if i != j {
                v *= (x - nodes[i]) / (nodes[j] - nodes[i]);
            }
        }
        out[j] = v;
    }
}

/// Tensor Chebyshev interpolation with `m` points per axis and rank `m³`.
///
/// Multi-indices are ordered with the x index running fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationScheme {
    order: usize,
}

impl InterpolationScheme {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(H2Error::InvalidArgument("interpolation order must be positive".into()));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.order.pow(3)
    }

    fn axis_nodes(&self, bbox: &BoundingBox) -> [Vec<f64>; 3] {
        [0, 1, 2].map(|d| chebyshev_points(bbox.lower[d], bbox.upper[d], self.order))
    }

    /// The `m³` interpolation points of a box.
    pub fn points(&self, bbox: &BoundingBox) -> Vec<Point3> {
        let nodes = self.axis_nodes(bbox);
        let m = self.order;
        let mut pts = Vec::with_capacity(self.rank());
        for l in 0..m {
            for j in 0..m {
                for i in 0..m {
                    pts.push([nodes[0][i], nodes[1][j], nodes[2][l]]);
                }
            }
        }
        pts
    }

    /// Values `l_{t,ν}(x)` of all tensor Lagrange polynomials of a box.
    pub fn lagrange(&self, bbox: &BoundingBox, x: &Point3) -> Vec<f64> {
        let nodes = self.axis_nodes(bbox);
        let mut out = vec![0.0; self.rank()];
        self.lagrange_with(&nodes, x, &mut out);
        out
    }

    fn lagrange_with(&self, nodes: &[Vec<f64>; 3], x: &Point3, out: &mut [f64]) {
        let m = self.order;
        let mut vals = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        for d in 0..3 {
            lagrange_1d(&nodes[d], x[d], &mut vals[d]);
        }
        let mut idx = 0;
        for l in 0..m {
            for j in 0..m {
                let yz = vals[1][j] * vals[2][l];
                for i in 0..m {
                    out[idx] = vals[0][i] * yz;
                    idx += 1;
                }
            }
        }
    }

    /// Transfer matrix with entries `E[ν', ν] = l_{t,ν}(ξ_{t',ν'})` for a
    /// child box `t'` of the parent box `t`.
    pub fn transfer_matrix(&self, parent: &BoundingBox, child: &BoundingBox) -> Mat {
        let k = self.rank();
        let nodes = self.axis_nodes(parent);
        let mut e = Mat::zeros(k, k);
        let mut row = vec![0.0; k];
        for (nu_p, xi) in self.points(child).iter().enumerate() {
            self.lagrange_with(&nodes, xi, &mut row);
            for (nu, v) in row.iter().enumerate() {
                e[(nu_p, nu)] = *v;
            }
        }
        e
    }
}

/// A kernel function `g(x, y)`.
pub trait Kernel: Sync {
    fn eval(&self, x: &Point3, y: &Point3) -> f64;
}

impl<F> Kernel for F
where
    F: Fn(&Point3, &Point3) -> f64 + Sync,
{
    fn eval(&self, x: &Point3, y: &Point3) -> f64 {
        self(x, y)
    }
}

/// `g(x, y) = 1 / (4π |x - y|)`, and `0` for `x = y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplaceSingleLayer;

impl Kernel for LaplaceSingleLayer {
    fn eval(&self, x: &Point3, y: &Point3) -> f64 {
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        if d == 0.0 {
            0.0
        } else {
            1.0 / (4.0 * PI * d)
        }
    }
}

/// Interpolation basis of a cluster tree: leaf matrices
/// `V[i, ν] = area_i l_{t,ν}(midpoint_i)` and Chebyshev transfer matrices.
pub fn interpolation_basis(mesh: &TriangleMesh, tree: &Arc<ClusterTree>, scheme: &InterpolationScheme) -> ClusterBasis {
    let k = scheme.rank();
    let mut leaf = Vec::with_capacity(tree.len());
    let mut transfer = Vec::with_capacity(tree.len());
    for c in tree.clusters() {
        leaf.push(c.is_leaf().then(|| {
            let nodes = scheme.axis_nodes(&c.bbox);
            let mut v = Mat::zeros(c.size(), k);
            let mut row = vec![0.0; k];
            for (r, pos) in c.range().enumerate() {
                let i = tree.order()[pos];
                scheme.lagrange_with(&nodes, &mesh.midpoints()[i], &mut row);
                for (nu, val) in row.iter().enumerate() {
                    v[(r, nu)] = mesh.areas()[i] * val;
                }
            }
            v
        }));
        transfer.push(c.parent.map(|p| scheme.transfer_matrix(&tree.cluster(p).bbox, &c.bbox)));
    }
    ClusterBasis::new(tree.clone(), vec![k; tree.len()], leaf, transfer)
        .expect("interpolation basis shapes are consistent")
}

/// Assembles the H²-matrix of a kernel on a mesh. Nearfield entries are
/// `area_i area_j g(midpoint_i, midpoint_j)` with a zero diagonal, and
/// coupling matrices are kernel values at pairs of interpolation points.
pub fn assemble_h2<K: Kernel + ?Sized>(
    mesh: &TriangleMesh,
    block_tree: Arc<BlockTree>,
    kernel: &K,
    scheme: &InterpolationScheme,
) -> Result<H2Matrix> {
    for tree in [block_tree.rows(), block_tree.cols()] {
        if tree.size() != mesh.len() {
            return Err(H2Error::DimensionMismatch { expected: mesh.len(), actual: tree.size() });
        }
    }
    let rows = block_tree.rows().clone();
    let cols = block_tree.cols().clone();
    let row_basis = Arc::new(interpolation_basis(mesh, &rows, scheme));
    let col_basis = if Arc::ptr_eq(&rows, &cols) {
        Arc::new((*row_basis).clone())
    } else {
        Arc::new(interpolation_basis(mesh, &cols, scheme))
    };
    let row_points: Vec<Vec<Point3>> = rows.clusters().iter().map(|c| scheme.points(&c.bbox)).collect();
    let col_points: Vec<Vec<Point3>> = if Arc::ptr_eq(&rows, &cols) {
        row_points.clone()
    } else {
        cols.clusters().iter().map(|c| scheme.points(&c.bbox)).collect()
    };
    let (mids, areas) = (mesh.midpoints(), mesh.areas());
    let data = block_tree
        .blocks()
        .iter()
        .map(|b| match b.kind {
            BlockKind::Admissible => {
                let (xt, xs) = (&row_points[b.row], &col_points[b.col]);
                BlockData::Coupling(Mat::from_fn(xt.len(), xs.len(), |a, c| kernel.eval(&xt[a], &xs[c])))
            }
            BlockKind::Inadmissible => {
                let (rt, ct) = (rows.cluster(b.row), cols.cluster(b.col));
                BlockData::Nearfield(Mat::from_fn(rt.size(), ct.size(), |a, c| {
                    let i = rows.order()[rt.start + a];
                    let j = cols.order()[ct.start + c];
                    if i == j {
                        0.0
                    } else {
                        areas[i] * areas[j] * kernel.eval(&mids[i], &mids[j])
                    }
                }))
            }
            BlockKind::Subdivided => BlockData::Subdivided,
        })
        .collect();
    H2Matrix::new(block_tree, row_basis, col_basis, data)
}

/// Dense matrix `area_i area_j g(midpoint_i, midpoint_j)` (zero diagonal)
/// in the tree order of `rows` and `cols`.
pub fn assemble_dense<K: Kernel + ?Sized>(mesh: &TriangleMesh, rows: &ClusterTree, cols: &ClusterTree, kernel: &K) -> Mat {
    let (mids, areas) = (mesh.midpoints(), mesh.areas());
    Mat::from_fn(rows.size(), cols.size(), |a, c| {
        let i = rows.order()[a];
        let j = cols.order()[c];
        if i == j {
            0.0
        } else {
            areas[i] * areas[j] * kernel.eval(&mids[i], &mids[j])
        }
    })
}
