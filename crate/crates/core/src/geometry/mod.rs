//! Meshes, bounding boxes, cluster trees and block trees.

mod block;
mod cluster;
mod mesh;

pub use block::{build_block_tree, Block, BlockKind, BlockTree};
pub(crate) use block::child_or_self;
pub use cluster::{admissible, build_cluster_tree, BoundingBox, Cluster, ClusterTree};
pub use mesh::{build_hemisphere_mesh, build_sphere_mesh, Point3, TriangleMesh};
