use h2mul::product::build_product_tree;
use h2mul::BlockTree;

/// Counts product-tree nodes with children that violate
/// `eta / (eta + 1) dist(t, r) < max(diam t, diam s, diam r)`.
/// Returns `(subdivided nodes checked, violations)`.
pub fn product_admissibility_violations(blocks: &BlockTree) -> (usize, usize) {
    let (product, _) = build_product_tree(blocks, blocks).unwrap();
    let eta = blocks.eta();
    let (rows, mid, cols) = (blocks.rows(), blocks.cols(), blocks.cols());
    let mut checked = 0;
    let mut violations = 0;
    for node in product.nodes.iter().filter(|n| !n.children.is_empty()) {
        let (bt, bs, br) = (rows.cluster(node.row).bbox, mid.cluster(node.middle).bbox, cols.cluster(node.col).bbox);
        let lhs = eta / (eta + 1.0) * bt.distance(&br);
        let rhs = bt.diameter().max(bs.diameter()).max(br.diameter());
        checked += 1;
        if !(lhs < rhs) {
            violations += 1;
        }
    }
    (checked, violations)
}
