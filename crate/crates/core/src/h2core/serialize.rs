//! Binary storage of [`H2Matrix`] values.
//!
//! All integers are little-endian `u64` unless noted, all reals
//! little-endian `f64`. Layout:
//!
//! ```text
//! magic "H2MX" | version u32 | eta f64
//! row tree | column tree
//! block tree
//! row basis | column basis
//! block data
//! ```
//!
//! A tree is `leaf_size, n, order[n], cluster count` followed per cluster by
//! `start, end, parent (u64::MAX for none), level, subtree_end, child count,
//! children..., lower[3] f64, upper[3] f64`.
//!
//! The block tree is the block count followed per block by `row, col, kind
//! u8 (0 admissible, 1 inadmissible, 2 subdivided), child count,
//! children...`.
//!
//! A basis stores per cluster `rank`, a `u8` flag plus matrix for the leaf
//! matrix and a `u8` flag plus matrix for the transfer matrix.
//!
//! Block data is one `u8` tag per block (0 coupling, 1 nearfield, 2 none),
//! followed by the matrix for tags 0 and 1. Matrices are `rows, cols` and
//! then `rows * cols` reals in column-major order.

use std::io::{Read, Write};
use std::sync::Arc;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::basis::ClusterBasis;
use super::matrix::{BlockData, H2Matrix};
use crate::error::{H2Error, Result};
use crate::geometry::{Block, BlockKind, BlockTree, BoundingBox, Cluster, ClusterTree};
use crate::linalg::Mat;

const MAGIC: &[u8; 4] = b"H2MX";
const VERSION: u32 = 1;
const MAX_COUNT: u64 = 1 << 32;

impl H2Matrix {
    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        out.write_all(MAGIC)?;
        out.write_u32::<LE>(VERSION)?;
        out.write_f64::<LE>(self.block_tree().eta())?;
        write_tree(&mut out, self.row_tree())?;
        write_tree(&mut out, self.col_tree())?;
        let bt = self.block_tree();
        out.write_u64::<LE>(bt.len() as u64)?;
        for b in bt.blocks() {
            out.write_u64::<LE>(b.row as u64)?;
            out.write_u64::<LE>(b.col as u64)?;
            out.write_u8(match b.kind {
                BlockKind::Admissible => 0,
                BlockKind::Inadmissible => 1,
                BlockKind::Subdivided => 2,
            })?;
            write_ids(&mut out, &b.children)?;
        }
        write_basis(&mut out, self.row_basis())?;
        write_basis(&mut out, self.col_basis())?;
        for d in self.block_data() {
            match d {
                BlockData::Coupling(m) => {
                    out.write_u8(0)?;
                    write_mat(&mut out, m)?;
                }
                BlockData::Nearfield(m) => {
                    out.write_u8(1)?;
                    write_mat(&mut out, m)?;
                }
                BlockData::Subdivided => out.write_u8(2)?,
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(input: R) -> Result<Self> {
        let mut input = std::io::BufReader::new(input);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(H2Error::Format("bad magic".into()));
        }
        let version = input.read_u32::<LE>()?;
        if version != VERSION {
            return Err(H2Error::Format(format!("unsupported version {version}")));
        }
        let eta = input.read_f64::<LE>()?;
        let rows = Arc::new(read_tree(&mut input)?);
        let cols = Arc::new(read_tree(&mut input)?);
        let nblocks = read_count(&mut input)?;
        let mut blocks = Vec::with_capacity(nblocks);
        for _ in 0..nblocks {
            let row = read_count(&mut input)?;
            let col = read_count(&mut input)?;
            let kind = match input.read_u8()? {
                0 => BlockKind::Admissible,
                1 => BlockKind::Inadmissible,
                2 => BlockKind::Subdivided,
                k => return Err(H2Error::Format(format!("unknown block kind {k}"))),
            };
            let children = read_ids(&mut input)?;
            blocks.push(Block { row, col, kind, children });
        }
        let bt = Arc::new(BlockTree::from_parts(rows.clone(), cols.clone(), blocks, eta)?);
        let row_basis = Arc::new(read_basis(&mut input, rows)?);
        let col_basis = Arc::new(read_basis(&mut input, cols)?);
        let mut data = Vec::with_capacity(nblocks);
        for _ in 0..nblocks {
            data.push(match input.read_u8()? {
                0 => BlockData::Coupling(read_mat(&mut input)?),
                1 => BlockData::Nearfield(read_mat(&mut input)?),
                2 => BlockData::Subdivided,
                t => return Err(H2Error::Format(format!("unknown block data tag {t}"))),
            });
        }
        H2Matrix::new(bt, row_basis, col_basis, data)
    }
}

fn write_ids<W: Write>(out: &mut W, ids: &[usize]) -> Result<()> {
    out.write_u64::<LE>(ids.len() as u64)?;
    for &i in ids {
        out.write_u64::<LE>(i as u64)?;
    }
    Ok(())
}

fn read_count<R: Read>(input: &mut R) -> Result<usize> {
    let v = input.read_u64::<LE>()?;
    if v > MAX_COUNT {
        return Err(H2Error::Format(format!("count {v} out of range")));
    }
    Ok(v as usize)
}

fn read_ids<R: Read>(input: &mut R) -> Result<Vec<usize>> {
    let n = read_count(input)?;
    (0..n).map(|_| read_count(input)).collect()
}

fn write_tree<W: Write>(out: &mut W, tree: &ClusterTree) -> Result<()> {
    out.write_u64::<LE>(tree.leaf_size() as u64)?;
    write_ids(out, tree.order())?;
    out.write_u64::<LE>(tree.len() as u64)?;
    for c in tree.clusters() {
        out.write_u64::<LE>(c.start as u64)?;
        out.write_u64::<LE>(c.end as u64)?;
        out.write_u64::<LE>(c.parent.map_or(u64::MAX, |p| p as u64))?;
        out.write_u64::<LE>(c.level as u64)?;
        out.write_u64::<LE>(c.subtree_end as u64)?;
        write_ids(out, &c.children)?;
        for v in c.bbox.lower.iter().chain(&c.bbox.upper) {
            out.write_f64::<LE>(*v)?;
        }
    }
    Ok(())
}

fn read_tree<R: Read>(input: &mut R) -> Result<ClusterTree> {
    let leaf_size = read_count(input)?;
    let order = read_ids(input)?;
    let n = read_count(input)?;
    let mut clusters = Vec::with_capacity(n);
    for _ in 0..n {
        let start = read_count(input)?;
        let end = read_count(input)?;
        let parent = match input.read_u64::<LE>()? {
            u64::MAX => None,
            p if p < n as u64 => Some(p as usize),
            p => return Err(H2Error::Format(format!("parent {p} out of range"))),
        };
        let level = read_count(input)?;
        let subtree_end = read_count(input)?;
        let children = read_ids(input)?;
        let mut b = [0.0; 6];
        input.read_f64_into::<LE>(&mut b)?;
        let bbox = BoundingBox::new([b[0], b[1], b[2]], [b[3], b[4], b[5]]);
        if end < start || end > order.len() {
            return Err(H2Error::Format("cluster range out of bounds".into()));
        }
        clusters.push(Cluster { start, end, bbox, children, parent, level, subtree_end });
    }
    ClusterTree::from_parts(clusters, order, leaf_size)
}

fn write_mat<W: Write>(out: &mut W, m: &Mat) -> Result<()> {
    out.write_u64::<LE>(m.nrows() as u64)?;
    out.write_u64::<LE>(m.ncols() as u64)?;
    for v in m.as_slice() {
        out.write_f64::<LE>(*v)?;
    }
    Ok(())
}

fn read_mat<R: Read>(input: &mut R) -> Result<Mat> {
    let rows = read_count(input)?;
    let cols = read_count(input)?;
    let len = rows.checked_mul(cols).filter(|&l| l as u64 <= MAX_COUNT).ok_or_else(|| H2Error::Format("matrix too large".into()))?;
    let mut data = vec![0.0; len];
    input.read_f64_into::<LE>(&mut data)?;
    Ok(Mat::from_vec(rows, cols, data))
}

fn write_opt_mat<W: Write>(out: &mut W, m: Option<&Mat>) -> Result<()> {
    match m {
        Some(m) => {
            out.write_u8(1)?;
            write_mat(out, m)
        }
        None => Ok(out.write_u8(0)?),
    }
}

fn read_opt_mat<R: Read>(input: &mut R) -> Result<Option<Mat>> {
    match input.read_u8()? {
        0 => Ok(None),
        1 => Ok(Some(read_mat(input)?)),
        f => Err(H2Error::Format(format!("bad matrix flag {f}"))),
    }
}

fn write_basis<W: Write>(out: &mut W, basis: &ClusterBasis) -> Result<()> {
    for t in 0..basis.tree().len() {
        out.write_u64::<LE>(basis.rank(t) as u64)?;
        write_opt_mat(out, basis.leaf_slot(t))?;
        write_opt_mat(out, basis.transfer_slot(t))?;
    }
    Ok(())
}

fn read_basis<R: Read>(input: &mut R, tree: Arc<ClusterTree>) -> Result<ClusterBasis> {
    let n = tree.len();
    let (mut ranks, mut leaf, mut transfer) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        ranks.push(read_count(input)?);
        leaf.push(read_opt_mat(input)?);
        transfer.push(read_opt_mat(input)?);
    }
    ClusterBasis::new(tree, ranks, leaf, transfer).map_err(|e| H2Error::Format(e.to_string()))
}
