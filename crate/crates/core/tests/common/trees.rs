use std::sync::Arc;

use h2mul::geometry::Point3;
use h2mul::linalg::{random_matrix, vcat, Mat};
use h2mul::product::NodeKind;
use h2mul::{BasisTree, ClusterBasis, ClusterTree};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random basis over `points` collinear points with per-cluster ranks in `1..=max_rank`.
pub fn random_basis(points: usize, leaf: usize, max_rank: usize, rng: &mut ChaCha8Rng) -> ClusterBasis {
    let pts: Vec<Point3> = (0..points).map(|i| [i as f64, 0.0, 0.0]).collect();
    let tree = Arc::new(ClusterTree::from_points(&pts, leaf).unwrap());
    let ranks: Vec<usize> = (0..tree.len()).map(|_| rng.random_range(1..=max_rank)).collect();
    let leafm =
        tree.clusters().iter().enumerate().map(|(i, c)| c.is_leaf().then(|| random_matrix(c.size(), ranks[i], rng))).collect();
    let transfer =
        tree.clusters().iter().enumerate().map(|(i, c)| c.parent.map(|p| random_matrix(ranks[i], ranks[p], rng))).collect();
    ClusterBasis::new(tree, ranks, leafm, transfer).unwrap()
}

/// Random basis tree over `t` with yield width `width`, mixing all node
/// kinds, optional transformations and optional nearfield parts.
pub fn random_tree(basis: &ClusterBasis, t: usize, width: usize, rng: &mut ChaCha8Rng) -> BasisTree {
    let tree = basis.tree();
    let c = if rng.random_bool(0.5) { width } else { rng.random_range(1..=6) };
    let m = if c != width || rng.random_bool(0.5) { Some(random_matrix(c, width, rng)) } else { None };
    let coeff = random_matrix(basis.rank(t), c, rng);
    let kind = if tree.is_leaf(t) {
        NodeKind::Leaf { near: rng.random_bool(0.5).then(|| random_matrix(tree.cluster(t).size(), c, rng)) }
    } else if rng.random_bool(0.3) {
        NodeKind::Stub
    } else {
        NodeKind::Branch(tree.children(t).iter().map(|&ch| Arc::new(random_tree(basis, ch, c, rng))).collect())
    };
    BasisTree::from_parts(basis, t, coeff, m, kind).unwrap()
}

/// Yield evaluated directly from the definition with expanded bases.
pub fn naive_yield(node: &BasisTree, basis: &ClusterBasis) -> Mat {
    let v = basis.expand(node.cluster());
    let mut inner = &v * node.coeff();
    match node.kind() {
        NodeKind::Leaf { near: Some(n) } => inner += n,
        NodeKind::Branch(kids) => {
            let parts: Vec<Mat> = kids.iter().map(|k| naive_yield(k, basis)).collect();
            let refs: Vec<&Mat> = parts.iter().collect();
            inner += vcat(node.coeff().ncols(), &refs);
        }
        _ => {}
    }
    match node.transform() {
        Some(m) => inner * m,
        None => inner,
    }
}

pub fn rel_diff(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Checks the yield identities of all basis-tree operations for one random
/// case and returns the largest relative deviation with the failing
/// identity's name.
pub fn check_identities(seed: u64) -> (f64, &'static str) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = rng.random_range(8..=48);
    let basis = random_basis(points, rng.random_range(3..=6), 8, &mut rng);
    let tree = basis.tree().clone();
    let width = rng.random_range(1..=8);
    let a = random_tree(&basis, 0, width, &mut rng);
    let b = random_tree(&basis, 0, width, &mut rng);
    let c = random_tree(&basis, 0, width, &mut rng);
    let (ya, yb, yc) = (naive_yield(&a, &basis), naive_yield(&b, &basis), naive_yield(&c, &basis));
    let x = random_matrix(width, rng.random_range(1..=8), &mut rng);
    let z = random_matrix(x.ncols(), rng.random_range(1..=8), &mut rng);
    let mut worst = (0.0, "none");
    let mut record = |err: f64, name: &'static str| {
        if err > worst.0 {
            worst = (err, name);
        }
    };
    record(rel_diff(&a.yield_of(&basis), &ya), "yield");
    record(rel_diff(&naive_yield(&a.mul(&x), &basis), &(&ya * &x)), "mul");
    record(rel_diff(&naive_yield(&a.mul(&x).mul(&z), &basis), &(&ya * &x * &z)), "mul composition");
    let f = a.finish();
    record(rel_diff(&naive_yield(&f, &basis), &ya), "finish");
    record(if f.transform().is_none() { 0.0 } else { f64::INFINITY }, "finish clears transform");
    record(rel_diff(&naive_yield(&f.finish(), &basis), &naive_yield(&f, &basis)), "finish idempotence");
    record(rel_diff(&naive_yield(&a.add(&b, &basis).unwrap(), &basis), &(&ya + &yb)), "add");
    let left = a.add(&b, &basis).unwrap().add(&c, &basis).unwrap();
    let right = a.add(&b.add(&c, &basis).unwrap(), &basis).unwrap();
    let total = &ya + &yb + &yc;
    record(rel_diff(&naive_yield(&left, &basis), &total), "add associativity");
    record(rel_diff(&naive_yield(&right, &basis), &total), "add associativity");
    if !tree.is_leaf(0) {
        record(rel_diff(&naive_yield(&a.split(&basis).unwrap(), &basis), &ya), "split");
        for &ch in tree.children(0) {
            let cl = tree.cluster(ch);
            let r = a.restrict(ch, &basis).unwrap();
            record(rel_diff(&naive_yield(&r, &basis), &ya.rows(cl.start, cl.size()).into_owned()), "restrict");
        }
    }
    worst
}
