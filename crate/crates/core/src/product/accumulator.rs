use crate::error::{H2Error, Result};
use crate::geometry::{child_or_self, BlockKind};
use crate::h2core::{basis_products, BasisProductMap, BlockData, ClusterBasis, H2Matrix};
use crate::linalg::Mat;

use super::basis_tree::BasisTree;

/// Subproduct `X|_{t×s} Y|_{s×r}` that still has to be subdivided, given by
/// the middle cluster and the block ids in X and Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingProduct {
    pub middle: usize,
    pub x_block: usize,
    pub y_block: usize,
}

/// Accumulator for the block `(t, r)` of a product `X Y`.
///
/// Represents `yield(alpha) W_{Y,r}^T + V_{X,t} yield(beta)^T + N` plus all
/// pending subproducts. `alpha` is a basis tree against the row basis of X
/// and `beta` one against the column basis of Y; absent parts are zero.
#[derive(Debug, Clone)]
pub struct Accumulator {
    pub row: usize,
    pub col: usize,
    pub alpha: Option<BasisTree>,
    pub beta: Option<BasisTree>,
    pub near: Option<Mat>,
    pub pending: Vec<PendingProduct>,
    /// Set once a product with an inadmissible leaf has been added.
    pub inadmissible: bool,
}

impl Accumulator {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col, alpha: None, beta: None, near: None, pending: Vec::new(), inadmissible: false }
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_none() && self.beta.is_none() && self.near.is_none() && self.pending.is_empty()
    }
}

/// One side of the `addproduct` recursion. The row side adds
/// `X|_{t×s} V_{Y,s} S` to trees against `V_X`; the column side adds
/// `Y|_{s×r}^T W_{X,s} S` to trees against `W_Y`.
///
/// `prepared` holds per leaf block the factor applied to `S`: `S_X P_s` or
/// `N_X V_{Y,s}` on the row side, `S_Y^T P_s^T` or `N_Y^T W_{X,s}` on the
/// column side.
struct Side<'a> {
    mat: &'a H2Matrix,
    transposed: bool,
    own: &'a ClusterBasis,
    other: &'a ClusterBasis,
    prepared: &'a [Option<Mat>],
}

impl Side<'_> {
    /// `(own cluster, middle cluster)` of a block.
    fn orient(&self, block: usize) -> (usize, usize) {
        let b = self.mat.block_tree().block(block);
        if self.transposed {
            (b.col, b.row)
        } else {
            (b.row, b.col)
        }
    }
}

/// Shared data for computing the exact product `X Y`.
pub struct ProductContext<'a> {
    x: &'a H2Matrix,
    y: &'a H2Matrix,
    products: BasisProductMap,
    x_prepared: Vec<Option<Mat>>,
    y_prepared: Vec<Option<Mat>>,
}

impl<'a> ProductContext<'a> {
    pub fn new(x: &'a H2Matrix, y: &'a H2Matrix) -> Result<Self> {
        if !x.col_tree().same_structure(y.row_tree()) {
            return Err(H2Error::TreeMismatch("column tree of X differs from row tree of Y".into()));
        }
        let products = basis_products(x.col_basis(), y.row_basis())?;
        let x_prepared = x
            .block_tree()
            .blocks()
            .iter()
            .enumerate()
            .map(|(id, b)| match x.data(id) {
                BlockData::Coupling(sm) => Some(sm * products.get(b.col)),
                BlockData::Nearfield(n) => Some(n * y.row_basis().leaf_matrix(b.col)),
                BlockData::Subdivided => None,
            })
            .collect();
        let y_prepared = y
            .block_tree()
            .blocks()
            .iter()
            .enumerate()
            .map(|(id, b)| match y.data(id) {
                BlockData::Coupling(sm) => Some((products.get(b.row) * sm).transpose()),
                BlockData::Nearfield(n) => Some(n.transpose() * x.col_basis().leaf_matrix(b.row)),
                BlockData::Subdivided => None,
            })
            .collect();
        Ok(Self { x, y, products, x_prepared, y_prepared })
    }

    pub fn x(&self) -> &H2Matrix {
        self.x
    }

    pub fn y(&self) -> &H2Matrix {
        self.y
    }

    pub fn basis_products(&self) -> &BasisProductMap {
        &self.products
    }

    fn row_side(&self) -> Side<'_> {
        Side {
            mat: self.x,
            transposed: false,
            own: self.x.row_basis(),
            other: self.y.row_basis(),
            prepared: &self.x_prepared,
        }
    }

    fn col_side(&self) -> Side<'_> {
        Side {
            mat: self.y,
            transposed: true,
            own: self.y.col_basis(),
            other: self.x.col_basis(),
            prepared: &self.y_prepared,
        }
    }

    /// Accumulator for the root block holding the full product as pending.
    pub fn root_accumulator(&self) -> Accumulator {
        let xb = self.x.block_tree().root();
        let yb = self.y.block_tree().root();
        let mut acc = Accumulator::new(self.x.block_tree().block(xb).row, self.y.block_tree().block(yb).col);
        self.accumulate(&mut acc, xb, yb);
        acc
    }

    /// Adds `X|_{t×s} V_{Y,s} S` to `alpha` (a tree over `t` against `V_X`).
    pub fn add_product_rows(&self, x_block: usize, s: &Mat, alpha: &mut BasisTree) {
        self.add_product(&self.row_side(), x_block, s, alpha);
    }

    /// Adds `Y|_{s×r}^T W_{X,s} S` to `beta` (a tree over `r` against `W_Y`).
    pub fn add_product_cols(&self, y_block: usize, s: &Mat, beta: &mut BasisTree) {
        self.add_product(&self.col_side(), y_block, s, beta);
    }

    fn add_product(&self, side: &Side<'_>, block: usize, s: &Mat, alpha: &mut BasisTree) {
        let (own_c, mid_c) = side.orient(block);
        debug_assert_eq!(alpha.cluster(), own_c);
        match side.mat.data(block) {
            BlockData::Coupling(_) => {
                let f = side.prepared[block].as_ref().expect("prepared coupling factor");
                alpha.add_uniform_mut(&(f * s));
            }
            BlockData::Nearfield(_) => {
                let f = side.prepared[block].as_ref().expect("prepared nearfield factor");
                alpha.add_near_mut(f * s);
            }
            BlockData::Subdivided => {
                let own_tree = side.own.tree();
                if !own_tree.is_leaf(own_c) {
                    alpha.open_mut(side.own);
                }
                let mut pushed: Vec<(usize, Mat)> = Vec::new();
                for &ch in &side.mat.block_tree().block(block).children {
                    let (o2, m2) = side.orient(ch);
                    let s2 = if m2 == mid_c {
                        s
                    } else {
                        let idx = match pushed.iter().position(|(m, _)| *m == m2) {
                            Some(i) => i,
                            None => {
                                pushed.push((m2, side.other.transfer(m2) * s));
                                pushed.len() - 1
                            }
                        };
                        &pushed[idx].1
                    };
                    if o2 == own_c {
                        self.add_product(side, ch, s2, alpha);
                    } else {
                        let idx = own_tree.child_index(own_c, o2).expect("block child row is a cluster child");
                        self.add_product(side, ch, s2, alpha.child_mut(idx));
                    }
                }
            }
        }
    }

    /// Adds `X|_{t×s} Y|_{s×r}` for blocks `(t, s)` of X and `(s, r)` of Y.
    pub fn accumulate(&self, acc: &mut Accumulator, x_block: usize, y_block: usize) {
        let xb = self.x.block_tree().block(x_block);
        let yb = self.y.block_tree().block(y_block);
        debug_assert_eq!((xb.row, yb.col), (acc.row, acc.col));
        debug_assert_eq!(xb.col, yb.row);
        if yb.kind == BlockKind::Admissible {
            let s = self.y.coupling(y_block).expect("admissible block has a coupling matrix");
            let alpha = acc.alpha.get_or_insert_with(|| BasisTree::zero(self.x.row_basis(), acc.row, s.ncols()));
            self.add_product_rows(x_block, s, alpha);
        } else if xb.kind == BlockKind::Admissible {
            let s = self.x.coupling(x_block).expect("admissible block has a coupling matrix").transpose();
            let beta = acc.beta.get_or_insert_with(|| BasisTree::zero(self.y.col_basis(), acc.col, s.ncols()));
            self.add_product_cols(y_block, &s, beta);
        } else if xb.kind == BlockKind::Inadmissible || yb.kind == BlockKind::Inadmissible {
            let prod = match (self.x.nearfield(x_block), self.y.nearfield(y_block)) {
                (Some(nx), Some(ny)) => nx * ny,
                (Some(nx), None) => self.y.apply_block(y_block, &nx.transpose(), true).transpose(),
                (None, Some(ny)) => self.x.apply_block(x_block, ny, false),
                (None, None) => unreachable!("one block is an inadmissible leaf"),
            };
            match &mut acc.near {
                Some(n) => *n += prod,
                None => acc.near = Some(prod),
            }
            acc.inadmissible = true;
        } else {
            acc.pending.push(PendingProduct { middle: xb.col, x_block, y_block });
        }
    }

    /// Processes pending products whose row and column clusters are both
    /// leaves, descending only in the middle cluster.
    pub fn expand_pending(&self, acc: &mut Accumulator) {
        while !acc.pending.is_empty() {
            let pending = std::mem::take(&mut acc.pending);
            for p in pending {
                self.expand_into(acc, p);
            }
        }
    }

    fn expand_into(&self, acc: &mut Accumulator, p: PendingProduct) {
        let xbt = self.x.block_tree();
        let ybt = self.y.block_tree();
        for &xc in &xbt.block(p.x_block).children {
            let xcb = xbt.block(xc);
            if xcb.row != acc.row {
                continue;
            }
            for &yc in &ybt.block(p.y_block).children {
                let ycb = ybt.block(yc);
                if ycb.col == acc.col && ycb.row == xcb.col {
                    self.accumulate(acc, xc, yc);
                }
            }
        }
    }

    /// True if the accumulator must be split: pending products remain and at
    /// least one of its clusters has children.
    pub fn needs_split(&self, acc: &Accumulator) -> bool {
        !acc.pending.is_empty() && !(self.x.row_tree().is_leaf(acc.row) && self.y.col_tree().is_leaf(acc.col))
    }

    /// Children `(t', r')` over the children (or the cluster itself, for
    /// leaves) of `t` and `r`, each representing the restriction of `acc`.
    pub fn split(&self, acc: Accumulator) -> Vec<Accumulator> {
        let mut out = split_settled(&acc, self.x.row_basis(), self.y.col_basis());
        for child in &mut out {
            for p in &acc.pending {
                self.expand_into(child, *p);
            }
        }
        out
    }

    /// Dense matrix represented by an accumulator, excluding pending
    /// products. Test oracle.
    pub fn dense(&self, acc: &Accumulator) -> Mat {
        accumulator_dense(acc, self.x.row_basis(), self.y.col_basis())
    }
}

/// `yield(alpha) W_r^T + V_t yield(beta)^T + N` for bases `V = row_basis`
/// and `W = col_basis`.
pub fn accumulator_dense(acc: &Accumulator, row_basis: &ClusterBasis, col_basis: &ClusterBasis) -> Mat {
    let tc = row_basis.tree().cluster(acc.row);
    let rc = col_basis.tree().cluster(acc.col);
    let mut out = acc.near.clone().unwrap_or_else(|| Mat::zeros(tc.size(), rc.size()));
    if let Some(a) = &acc.alpha {
        out += a.yield_of(row_basis) * col_basis.expand(acc.col).transpose();
    }
    if let Some(b) = &acc.beta {
        out += row_basis.expand(acc.row) * b.yield_of(col_basis).transpose();
    }
    out
}

/// Restrictions of the settled part of `acc` (ignoring pending products) to
/// the blocks `(t', r')` with `t'` and `r'` from the children, or the
/// cluster itself for leaves, of `t` and `r`. Row-major in `t'`.
pub fn split_settled(acc: &Accumulator, row_basis: &ClusterBasis, col_basis: &ClusterBasis) -> Vec<Accumulator> {
    let rows = row_basis.tree();
    let cols = col_basis.tree();
    let row_kids = child_or_self(rows, acc.row);
    let col_kids = child_or_self(cols, acc.col);
    let alphas: Vec<Option<BasisTree>> = row_kids
        .iter()
        .map(|&t2| {
            acc.alpha.as_ref().map(|a| if t2 == acc.row { a.clone() } else { a.restrict(t2, row_basis).expect("non-leaf row") })
        })
        .collect();
    let betas: Vec<Option<BasisTree>> = col_kids
        .iter()
        .map(|&r2| {
            acc.beta.as_ref().map(|b| if r2 == acc.col { b.clone() } else { b.restrict(r2, col_basis).expect("non-leaf col") })
        })
        .collect();
    let (t0, r0) = (rows.cluster(acc.row).start, cols.cluster(acc.col).start);
    let mut out = Vec::with_capacity(row_kids.len() * col_kids.len());
    for (i, &t2) in row_kids.iter().enumerate() {
        for (j, &r2) in col_kids.iter().enumerate() {
            let mut child = Accumulator::new(t2, r2);
            child.inadmissible = acc.inadmissible;
            child.alpha = alphas[i]
                .as_ref()
                .map(|a| if r2 == acc.col { a.clone() } else { a.mul(&col_basis.transfer(r2).transpose()) });
            child.beta = betas[j]
                .as_ref()
                .map(|b| if t2 == acc.row { b.clone() } else { b.mul(&row_basis.transfer(t2).transpose()) });
            if let Some(n) = &acc.near {
                let (tc, rc) = (rows.cluster(t2), cols.cluster(r2));
                child.near = Some(n.view((tc.start - t0, rc.start - r0), (tc.size(), rc.size())).into_owned());
            }
            out.push(child);
        }
    }
    out
}
