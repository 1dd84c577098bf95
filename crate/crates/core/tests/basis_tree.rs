mod common;

use std::sync::Arc;

use common::trees::*;
use h2mul::linalg::{random_matrix, Mat};
use h2mul::product::NodeKind;
use h2mul::{BasisTree, H2Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn yield_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let basis = random_basis(40, 4, 6, &mut rng);
        let node = random_tree(&basis, 0, 3, &mut rng);
        assert!(rel_diff(&node.yield_of(&basis), &naive_yield(&node, &basis)) <= TOL);
    }
}

#[test]
fn operations_preserve_yield() {
    for seed in 0..500 {
        let (err, name) = check_identities(seed);
        assert!(err <= TOL, "case {seed}: {name} deviates by {err:e}");
    }
}

#[test]
fn zero_leaf_yields_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let basis = random_basis(16, 4, 4, &mut rng);
    let leaf = basis.tree().leaves().next().unwrap();
    let node = BasisTree::zero(&basis, leaf, 3);
    assert_eq!(node.yield_of(&basis), Mat::zeros(basis.tree().cluster(leaf).size(), 3));
}

#[test]
fn identity_stub_yields_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = random_basis(16, 4, 4, &mut rng);
    let k = basis.rank(0);
    let node = BasisTree::uniform(&basis, 0, Mat::identity(k, k));
    assert!(matches!(node.kind(), NodeKind::Stub));
    assert!(rel_diff(&node.yield_of(&basis), &basis.expand(0)) <= TOL);
}

#[test]
fn mul_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let basis = random_basis(24, 4, 4, &mut rng);
    let a = random_tree(&basis, 0, 3, &mut rng);
    let y = a.yield_of(&basis);
    assert!(rel_diff(&a.mul(&Mat::identity(3, 3)).yield_of(&basis), &y) <= TOL);
    assert_eq!(a.mul(&Mat::identity(3, 3)).node_count(), a.node_count());
    assert_eq!(a.mul(&Mat::zeros(3, 2)).yield_of(&basis), Mat::zeros(24, 2));
}

#[test]
fn finish_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let basis = random_basis(8, 8, 3, &mut rng);
    let k = basis.rank(0);
    let c = random_matrix(k, 2, &mut rng);
    let n = random_matrix(8, 2, &mut rng);
    let m = random_matrix(2, 3, &mut rng);
    let leaf = BasisTree::from_parts(&basis, 0, c.clone(), Some(m.clone()), NodeKind::Leaf { near: Some(n.clone()) }).unwrap();
    let f = leaf.finish();
    assert!(f.transform().is_none());
    assert!(rel_diff(f.coeff(), &(&c * &m)) <= TOL);
    match f.kind() {
        NodeKind::Leaf { near: Some(fnear) } => assert!(rel_diff(fnear, &(&n * &m)) <= TOL),
        _ => panic!("finish changed the node kind"),
    }
    let plain = BasisTree::from_parts(&basis, 0, c.clone(), None, NodeKind::Leaf { near: None }).unwrap();
    assert_eq!(plain.finish().coeff(), &c);
}

#[test]
fn split_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let basis = random_basis(16, 4, 4, &mut rng);
    let zero = BasisTree::zero(&basis, 0, 2).split(&basis).unwrap();
    match zero.kind() {
        NodeKind::Branch(kids) => {
            assert_eq!(kids.len(), 2);
            assert!(kids.iter().all(|k| k.coeff().norm() == 0.0));
        }
        _ => panic!("split must produce a branch"),
    }
    assert!(zero.coeff().norm() == 0.0);
    let leaf = basis.tree().leaves().next().unwrap();
    assert!(matches!(BasisTree::zero(&basis, leaf, 2).split(&basis), Err(H2Error::LeafCluster(_))));
}

#[test]
fn add_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let basis = random_basis(24, 4, 4, &mut rng);
    let a = random_tree(&basis, 0, 3, &mut rng);
    let sum = a.add(&BasisTree::zero(&basis, 0, 3), &basis).unwrap();
    assert!(rel_diff(&sum.yield_of(&basis), &a.yield_of(&basis)) <= TOL);

    let single = random_basis(6, 8, 3, &mut rng);
    let k = single.rank(0);
    let mk = |rng: &mut ChaCha8Rng| {
        let c = random_matrix(k, 2, rng);
        let n = random_matrix(6, 2, rng);
        let m = random_matrix(2, 2, rng);
        (c.clone(), n.clone(), m.clone(), BasisTree::from_parts(&single, 0, c, Some(m), NodeKind::Leaf { near: Some(n) }).unwrap())
    };
    let (ca, na, ma, la) = mk(&mut rng);
    let (cb, nb, mb, lb) = mk(&mut rng);
    let s = la.add(&lb, &single).unwrap();
    assert!(s.transform().is_none());
    assert!(rel_diff(s.coeff(), &(&ca * &ma + &cb * &mb)) <= TOL);
    match s.kind() {
        NodeKind::Leaf { near: Some(n) } => assert!(rel_diff(n, &(&na * &ma + &nb * &mb)) <= TOL),
        _ => panic!("leaf sum must stay a leaf"),
    }
    let other = random_tree(&basis, basis.tree().children(0)[0], 3, &mut rng);
    assert!(a.add(&other, &basis).is_err());
}

#[test]
fn restrict_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let basis = random_basis(32, 4, 4, &mut rng);
    let tree = basis.tree().clone();
    let kids: Vec<Arc<BasisTree>> = tree.children(0).iter().map(|&ch| Arc::new(random_tree(&basis, ch, 2, &mut rng))).collect();
    let zero_c = Mat::zeros(basis.rank(0), 2);
    let branch = BasisTree::from_parts(&basis, 0, zero_c, None, NodeKind::Branch(kids.clone())).unwrap();
    for (i, &ch) in tree.children(0).iter().enumerate() {
        let r = branch.restrict(ch, &basis).unwrap();
        assert!(rel_diff(&r.yield_of(&basis), &kids[i].yield_of(&basis)) <= TOL);
    }
    let c = random_matrix(basis.rank(0), 2, &mut rng);
    let stub = BasisTree::uniform(&basis, 0, c.clone());
    for &ch in tree.children(0) {
        let r = stub.restrict(ch, &basis).unwrap();
        assert!(rel_diff(r.coeff(), &(basis.transfer(ch) * &c)) <= TOL);
        assert!(r.transform().is_none());
    }
}

#[test]
fn malformed_nodes_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let basis = random_basis(16, 4, 4, &mut rng);
    let k = basis.rank(0);
    assert!(BasisTree::from_parts(&basis, 0, Mat::zeros(k + 1, 2), None, NodeKind::Stub).is_err());
    assert!(BasisTree::from_parts(&basis, 0, Mat::zeros(k, 2), None, NodeKind::Leaf { near: None }).is_err());
    assert!(BasisTree::from_parts(&basis, 0, Mat::zeros(k, 2), Some(Mat::zeros(3, 2)), NodeKind::Stub).is_err());
    assert!(BasisTree::nearfield(&basis, 0, Mat::zeros(16, 2)).is_err());
}
