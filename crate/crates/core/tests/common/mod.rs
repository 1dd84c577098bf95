#![allow(dead_code)]

pub mod agglo;
pub mod lemma;
pub mod trees;

use std::sync::Arc;

use h2mul::interpolation::assemble_dense;
use h2mul::linalg::Mat;
use h2mul::{
    assemble_h2, build_block_tree, build_cluster_tree, build_hemisphere_mesh, build_sphere_mesh, BlockTree,
    H2Matrix, InterpolationScheme, LaplaceSingleLayer, TriangleMesh,
};

pub struct Setup {
    pub mesh: TriangleMesh,
    pub blocks: Arc<BlockTree>,
    pub g: H2Matrix,
}

pub fn assemble(mesh: TriangleMesh, leaf_size: usize, eta: f64, order: usize) -> Setup {
    let tree = Arc::new(build_cluster_tree(&mesh, leaf_size).unwrap());
    let blocks = Arc::new(build_block_tree(tree.clone(), tree, eta).unwrap());
    let scheme = InterpolationScheme::new(order).unwrap();
    let g = assemble_h2(&mesh, blocks.clone(), &LaplaceSingleLayer, &scheme).unwrap();
    Setup { mesh, blocks, g }
}

/// Sphere with `8 * 4^level` triangles.
pub fn sphere(level: usize, leaf_size: usize, eta: f64, order: usize) -> Setup {
    assemble(build_sphere_mesh(level), leaf_size, eta, order)
}

/// Mesh with `n` triangles for n in {128, 256, 512, 2048, ...}.
pub fn mesh_with(n: usize) -> TriangleMesh {
    let mut level = 0;
    while 8 * 4usize.pow(level as u32) < n {
        level += 1;
    }
    if 8 * 4usize.pow(level as u32) == n {
        build_sphere_mesh(level)
    } else {
        let m = build_hemisphere_mesh(level);
        assert_eq!(m.len(), n, "no mesh with {n} triangles");
        m
    }
}

pub fn dense(s: &Setup) -> Mat {
    assemble_dense(&s.mesh, s.blocks.rows(), s.blocks.cols(), &LaplaceSingleLayer)
}

pub fn rel(a: &Mat, b: &Mat) -> f64 {
    h2mul::linalg::rel_frobenius(a, b)
}
