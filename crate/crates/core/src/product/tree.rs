use crate::error::{H2Error, Result};
use crate::geometry::{child_or_self, BlockKind, BlockTree};

/// Node `(t, s, r)` of a product tree with its blocks in both factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductNode {
    pub row: usize,
    pub middle: usize,
    pub col: usize,
    pub x_block: usize,
    pub y_block: usize,
    pub children: Vec<usize>,
    /// Leaf with an admissible factor block.
    pub admissible: bool,
}

/// Tree of subproducts `X|_{t×s} Y|_{s×r}` in preorder.
#[derive(Debug, Clone)]
pub struct ProductTree {
    pub nodes: Vec<ProductNode>,
}

/// Node `(t, r)` of the block structure induced by a product tree.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedNode {
    pub row: usize,
    pub col: usize,
    /// `Admissible` if every product covering the leaf has an admissible
    /// factor, `Inadmissible` otherwise.
    pub kind: BlockKind,
    pub children: Vec<usize>,
}

/// Block tree of the exact product in preorder.
#[derive(Debug, Clone)]
pub struct InducedBlockTree {
    pub nodes: Vec<InducedNode>,
}

impl InducedBlockTree {
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }
}

/// Builds the product tree of two block trees sharing the middle cluster
/// tree, together with the induced block tree of the product.
pub fn build_product_tree(bt_xy: &BlockTree, bt_yz: &BlockTree) -> Result<(ProductTree, InducedBlockTree)> {
    if !bt_xy.cols().same_structure(bt_yz.rows()) {
        return Err(H2Error::TreeMismatch("block trees do not share the middle cluster tree".into()));
    }
    let mut product = ProductTree { nodes: Vec::new() };
    product_node(bt_xy, bt_yz, bt_xy.root(), bt_yz.root(), &mut product.nodes);
    let mut induced = InducedBlockTree { nodes: Vec::new() };
    let (t, r) = (bt_xy.block(bt_xy.root()).row, bt_yz.block(bt_yz.root()).col);
    induced_node(bt_xy, bt_yz, t, r, vec![(bt_xy.root(), bt_yz.root())], false, &mut induced.nodes);
    Ok((product, induced))
}

fn product_node(bx: &BlockTree, by: &BlockTree, xb: usize, yb: usize, nodes: &mut Vec<ProductNode>) -> usize {
    let (x, y) = (bx.block(xb), by.block(yb));
    let id = nodes.len();
    nodes.push(ProductNode {
        row: x.row,
        middle: x.col,
        col: y.col,
        x_block: xb,
        y_block: yb,
        children: Vec::new(),
        admissible: x.kind == BlockKind::Admissible || y.kind == BlockKind::Admissible,
    });
    if x.kind == BlockKind::Subdivided && y.kind == BlockKind::Subdivided {
        let mut children = Vec::new();
        for &xc in &x.children {
            for &yc in &y.children {
                if bx.block(xc).col == by.block(yc).row {
                    children.push(product_node(bx, by, xc, yc, nodes));
                }
            }
        }
        nodes[id].children = children;
    }
    id
}

/// Splits a list of products into finished leaves (returning whether any
/// was inadmissible) and products that still have to be subdivided.
fn classify(bx: &BlockTree, by: &BlockTree, triples: Vec<(usize, usize)>) -> (bool, Vec<(usize, usize)>) {
    let mut inadmissible = false;
    let mut pending = Vec::new();
    for (xb, yb) in triples {
        let (kx, ky) = (bx.block(xb).kind, by.block(yb).kind);
        if kx == BlockKind::Admissible || ky == BlockKind::Admissible {
            continue;
        }
        if kx == BlockKind::Inadmissible || ky == BlockKind::Inadmissible {
            inadmissible = true;
        } else {
            pending.push((xb, yb));
        }
    }
    (inadmissible, pending)
}

fn expand(bx: &BlockTree, by: &BlockTree, t: usize, r: usize, pending: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(xb, yb) in pending {
        for &xc in &bx.block(xb).children {
            let x = bx.block(xc);
            if x.row != t {
                continue;
            }
            for &yc in &by.block(yb).children {
                let y = by.block(yc);
                if y.col == r && y.row == x.col {
                    out.push((xc, yc));
                }
            }
        }
    }
    out
}

fn induced_node(
    bx: &BlockTree,
    by: &BlockTree,
    t: usize,
    r: usize,
    triples: Vec<(usize, usize)>,
    inherited: bool,
    nodes: &mut Vec<InducedNode>,
) -> usize {
    let id = nodes.len();
    nodes.push(InducedNode { row: t, col: r, kind: BlockKind::Admissible, children: Vec::new() });
    let (inad, mut pending) = classify(bx, by, triples);
    let mut inadmissible = inherited || inad;
    let (rows, cols) = (bx.rows(), by.cols());
    if rows.is_leaf(t) && cols.is_leaf(r) {
        while !pending.is_empty() {
            let (inad, rest) = classify(bx, by, expand(bx, by, t, r, &pending));
            inadmissible |= inad;
            pending = rest;
        }
    }
    if pending.is_empty() {
        nodes[id].kind = if inadmissible { BlockKind::Inadmissible } else { BlockKind::Admissible };
        return id;
    }
    nodes[id].kind = BlockKind::Subdivided;
    let mut children = Vec::new();
    for &t2 in &child_or_self(rows, t) {
        for &r2 in &child_or_self(cols, r) {
            let sub = expand(bx, by, t2, r2, &pending);
            children.push(induced_node(bx, by, t2, r2, sub, inadmissible, nodes));
        }
    }
    nodes[id].children = children;
    id
}
