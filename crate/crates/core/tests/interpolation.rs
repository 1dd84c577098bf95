mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use h2mul::geometry::Point3;
use h2mul::linalg::{spectral_norm, Mat};
use h2mul::{
    assemble_h2, build_block_tree, build_cluster_tree, chebyshev_points, BlockKind, BoundingBox, ClusterTree,
    InterpolationScheme, Kernel, LaplaceSingleLayer, TriangleMesh,
};

#[test]
fn chebyshev_examples() {
    assert!(chebyshev_points(-1.0, 1.0, 1)[0].abs() < 1e-15);
    let h = 2f64.sqrt() / 2.0;
    let p = chebyshev_points(-1.0, 1.0, 2);
    assert!((p[0] - h).abs() < 1e-15 && (p[1] + h).abs() < 1e-15);
    let p = chebyshev_points(0.0, 2.0, 2);
    assert!((p[0] - (1.0 + h)).abs() < 1e-15 && (p[1] - (1.0 - h)).abs() < 1e-15);
    assert_eq!(chebyshev_points(0.5, 0.5, 3), vec![0.5; 3]);
}

#[test]
fn zero_order_rejected() {
    assert!(InterpolationScheme::new(0).is_err());
}

#[test]
fn lagrange_cardinality() {
    let s = InterpolationScheme::new(3).unwrap();
    let b = BoundingBox::new([0.0, -1.0, 2.0], [1.0, 0.5, 4.0]);
    let pts = s.points(&b);
    assert_eq!(pts.len(), 27);
    for (mu, xi) in pts.iter().enumerate() {
        assert!(b.contains_point(xi, 0.0));
        for (nu, v) in s.lagrange(&b, xi).iter().enumerate() {
            assert!((v - if nu == mu { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }
}

#[test]
fn lagrange_reproduces_quadratics() {
    let s = InterpolationScheme::new(3).unwrap();
    let b = BoundingBox::new([0.0, 0.0, 0.0], [1.0, 2.0, 0.5]);
    let f = |p: &Point3| 1.0 + p[0] * p[1] - 2.0 * p[2] * p[2] + p[0] * p[0] * p[1] * p[1] * p[2];
    let values: Vec<f64> = s.points(&b).iter().map(f).collect();
    for x in [[0.3, 1.1, 0.2], [0.9, 0.1, 0.45], [0.5, 1.9, 0.0]] {
        let interp: f64 = s.lagrange(&b, &x).iter().zip(&values).map(|(l, v)| l * v).sum();
        assert!((interp - f(&x)).abs() < 1e-12);
    }
}

#[test]
fn transfer_of_identical_box_is_identity() {
    let s = InterpolationScheme::new(2).unwrap();
    let b = BoundingBox::new([0.0; 3], [1.0, 2.0, 3.0]);
    assert!((s.transfer_matrix(&b, &b) - Mat::identity(8, 8)).norm() < 1e-14);
}

#[test]
fn transfer_rows_sum_to_one() {
    let s = InterpolationScheme::new(2).unwrap();
    let parent = BoundingBox::new([0.0; 3], [2.0, 0.0, 0.0]);
    let child = BoundingBox::new([0.0; 3], [1.0, 0.0, 0.0]);
    let e = s.transfer_matrix(&parent, &child);
    for r in 0..e.nrows() {
        assert!((e.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn laplace_kernel_diagonal() {
    let g = LaplaceSingleLayer;
    assert_eq!(g.eval(&[1.0; 3], &[1.0; 3]), 0.0);
    assert!((g.eval(&[0.0; 3], &[1.0, 0.0, 0.0]) - 1.0 / (4.0 * PI)).abs() < 1e-16);
    assert!((g.eval(&[0.0; 3], &[0.0, 2.0, 0.0]) - 1.0 / (8.0 * PI)).abs() < 1e-16);
}

/// `V_t` evaluated directly from the Lagrange polynomials of the box of `t`.
fn direct_basis(mesh: &TriangleMesh, tree: &ClusterTree, scheme: &InterpolationScheme, t: usize) -> Mat {
    let c = tree.cluster(t);
    let mut v = Mat::zeros(c.size(), scheme.rank());
    for (r, pos) in c.range().enumerate() {
        let i = tree.order()[pos];
        for (nu, l) in scheme.lagrange(&c.bbox, &mesh.midpoints()[i]).iter().enumerate() {
            v[(r, nu)] = mesh.areas()[i] * l;
        }
    }
    v
}

#[test]
fn assembled_bases_are_nested() {
    let s = sphere(3, 16, 1.0, 3);
    let scheme = InterpolationScheme::new(3).unwrap();
    let tree = s.blocks.rows();
    let basis = s.g.row_basis();
    for t in 0..tree.len() {
        let direct = direct_basis(&s.mesh, tree, &scheme, t);
        let expanded = basis.expand(t);
        assert!((&expanded - &direct).norm() <= 1e-12 * direct.norm(), "cluster {t}");
        for &ch in tree.children(t) {
            let c = tree.cluster(ch);
            let part = expanded.rows(c.start - tree.cluster(t).start, c.size()).into_owned();
            let nested = basis.expand(ch) * basis.transfer(ch);
            assert!((part - &nested).norm() <= 1e-12 * nested.norm());
        }
    }
}

#[test]
fn two_triangle_nearfield_has_zero_diagonal() {
    let mesh = TriangleMesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap();
    let tree = Arc::new(build_cluster_tree(&mesh, 4).unwrap());
    let blocks = Arc::new(build_block_tree(tree.clone(), tree, 1.0).unwrap());
    let g = assemble_h2(&mesh, blocks.clone(), &LaplaceSingleLayer, &InterpolationScheme::new(2).unwrap()).unwrap();
    assert_eq!(blocks.len(), 1);
    let n = g.nearfield(0).unwrap();
    assert_eq!(n.shape(), (2, 2));
    assert_eq!((n[(0, 0)], n[(1, 1)]), (0.0, 0.0));
    let (m0, m1) = (mesh.midpoints()[0], mesh.midpoints()[1]);
    let expected = 0.25 * LaplaceSingleLayer.eval(&m0, &m1);
    assert!((n[(0, 1)] - expected).abs() < 1e-15 && (n[(1, 0)] - expected).abs() < 1e-15);
}

#[test]
fn admissible_blocks_approximate_kernel() {
    let s = sphere(3, 16, 1.0, 3);
    let d = dense(&s);
    let mut worst: f64 = 0.0;
    for leaf in s.blocks.leaves() {
        let (r, c) = s.blocks.ranges(leaf);
        let exact = d.view((r.start, c.start), (r.len(), c.len())).into_owned();
        let approx = s.g.block_dense(leaf);
        let err = spectral_norm(&(&approx - &exact)) / spectral_norm(&exact);
        if s.blocks.block(leaf).kind == BlockKind::Inadmissible {
            assert_eq!(approx, exact);
        } else {
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-2, "worst admissible block error {worst:e}");
}

#[test]
fn assembled_matrix_is_symmetric() {
    let s = assemble(mesh_with(128), 16, 1.0, 2);
    let d = s.g.to_dense().unwrap();
    assert!((&d - d.transpose()).norm() <= 1e-12 * d.norm());
}

#[test]
fn assembly_is_deterministic() {
    let a = sphere(2, 8, 1.0, 2);
    let b = sphere(2, 8, 1.0, 2);
    assert_eq!(a.g.block_data(), b.g.block_data());
    assert_eq!(a.g.to_dense().unwrap(), b.g.to_dense().unwrap());
}
