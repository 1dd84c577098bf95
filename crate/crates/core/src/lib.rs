//! Adaptive multiplication of H²-matrices.
//!
//! The product of two H²-matrices is first represented exactly by
//! accumulators built from basis trees, then coarsened to a prescribed
//! block structure by agglomeration and finally converted back to an
//! H²-matrix with adaptive isometric cluster bases. Every admissible block
//! of the result carries a relative spectral error bound.
//!
//! Module overview:
//!
//! - [`geometry`]: meshes, bounding boxes, cluster trees and block trees.
//! - [`interpolation`]: tensor Chebyshev interpolation and H²-matrix assembly.
//! - [`h2core`]: cluster bases, H²-matrices, matrix-vector products.
//! - [`product`]: basis trees, accumulators and the exact product.
//! - [`compression`]: agglomeration, coarsening and recompression.
//! - [`bench`]: the single-layer benchmark driver behind the `h2mul` binary.

pub mod bench;
pub mod compression;
pub mod error;
pub mod geometry;
pub mod h2core;
pub mod interpolation;
pub mod linalg;
pub mod product;

pub use error::{H2Error, Result};

pub use compression::{
    agglomerate, coarsen, coarsen_product, multiply, recompress, spectral_norm_lower_bound, BlockwiseLowRank,
    LowRankBlock, RecompressionReport, TruncationControl,
};
pub use geometry::{
    admissible, build_block_tree, build_cluster_tree, build_hemisphere_mesh, build_sphere_mesh,
    BlockKind, BlockTree, BoundingBox, ClusterTree, Point3, TriangleMesh,
};
pub use h2core::{basis_products, BasisProductMap, BlockData, ClusterBasis, H2Matrix};
pub use interpolation::{assemble_h2, chebyshev_points, InterpolationScheme, Kernel, LaplaceSingleLayer};
pub use product::{build_product_tree, exact_product, Accumulator, BasisTree, ExactProduct};
