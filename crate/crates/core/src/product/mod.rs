//! Exact products of H²-matrices: basis trees, accumulators, product trees
//! and the induced block structure.

mod accumulator;
mod basis_tree;
mod exact;
mod tree;

pub use accumulator::{accumulator_dense, split_settled, Accumulator, PendingProduct, ProductContext};
pub use basis_tree::{BasisTree, NodeKind};
pub use exact::{exact_product, ExactNode, ExactProduct};
pub use tree::{build_product_tree, InducedBlockTree, InducedNode, ProductNode, ProductTree};
