//! Cluster bases, H²-matrices, matrix-vector products and binary storage.

mod basis;
mod matrix;
mod serialize;

pub use basis::{basis_products, BasisProductMap, ClusterBasis};
pub use matrix::{BlockData, H2Matrix, DENSE_LIMIT};

/// Dense `V_t` of a cluster basis.
pub fn expand_basis(basis: &ClusterBasis, cluster: usize) -> crate::linalg::Mat {
    basis.expand(cluster)
}

/// `G x` in tree order.
pub fn h2_matvec(matrix: &H2Matrix, x: &[f64]) -> crate::Result<Vec<f64>> {
    matrix.matvec(x)
}

/// `G^T x` in tree order.
pub fn h2_matvec_adjoint(matrix: &H2Matrix, x: &[f64]) -> crate::Result<Vec<f64>> {
    matrix.matvec_adjoint(x)
}
