//! Single-layer benchmark: assemble `G` on a sphere, compute `Z ≈ G G`,
//! time the row and column basis phases and estimate the relative error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use crate::compression::{adaptive_col_basis, adaptive_row_basis, coarsen_product, couple, TruncationControl};
use crate::error::{H2Error, Result};
use crate::geometry::{build_block_tree, build_cluster_tree, build_sphere_mesh, TriangleMesh};
use crate::h2core::{H2Matrix, DENSE_LIMIT};
use crate::interpolation::{assemble_h2, InterpolationScheme, LaplaceSingleLayer};
use crate::linalg::power_iteration;

/// CSV header written by [`emit_csv`].
pub const CSV_HEADER: &str = "n,row_s,col_s,mem_mb,rel_error";

/// Bytes per MB in the memory column.
pub const BYTES_PER_MB: f64 = 1024.0 * 1024.0;

/// Benchmark parameters. Level `l` is the sphere with `8 * 4^l` triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub levels: Vec<usize>,
    pub leaf_size: usize,
    pub order: usize,
    pub eta: f64,
    pub eps: f64,
    pub theta: f64,
    pub power_steps: usize,
    pub seed: u64,
    /// Also compare against the dense product; only allowed up to
    /// [`DENSE_LIMIT`] triangles.
    pub dense_check: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            levels: vec![3, 4, 5, 6],
            leaf_size: 16,
            order: 3,
            eta: 1.0,
            eps: 1e-4,
            theta: 0.25,
            power_steps: 10,
            seed: 42,
            dense_check: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(H2Error::InvalidArgument(msg.into()));
        if self.levels.is_empty() {
            return bad("at least one level is required");
        }
        if self.leaf_size == 0 || self.order == 0 || self.power_steps == 0 {
            return bad("leaf size, order and power steps must be positive");
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive");
        }
        TruncationControl::new(self.eps, self.theta)?;
        if self.dense_check {
            if let Some(&l) = self.levels.iter().find(|&&l| 8 * 4usize.pow(l as u32) > DENSE_LIMIT) {
                return Err(H2Error::InvalidArgument(format!(
                    "dense check requested for level {l} with more than {DENSE_LIMIT} triangles"
                )));
            }
        }
        Ok(())
    }
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// Exact product, coarsening and row basis.
    pub row_s: f64,
    /// Column basis and coupling matrices.
    pub col_s: f64,
    pub mem_mb: f64,
    /// Power-iteration estimate of `||G G - Z||_2 / ||G G||_2`.
    pub rel_error: f64,
    /// Largest rank of the row and column bases of `Z`.
    pub max_rank: usize,
    /// Relative spectral error against the dense product, if requested.
    pub dense_error: Option<f64>,
}

/// Result of one benchmark size, including the matrices.
pub struct BenchRun {
    pub mesh: TriangleMesh,
    pub g: H2Matrix,
    pub z: H2Matrix,
    pub row: BenchRow,
}

/// Stored bytes of an H²-matrix: 8 bytes per real in leaf, transfer,
/// coupling and nearfield matrices. Tree topology is not counted.
pub fn memory_footprint(matrix: &H2Matrix) -> usize {
    8 * matrix.stored_reals()
}

/// Power-iteration estimate of `||G G - Z||_2 / ||G G||_2`.
pub fn product_error(g: &H2Matrix, z: &H2Matrix, steps: usize, seed: u64) -> f64 {
    let n = g.ncols();
    let gg = |x: &DVector<f64>| g.matvec_dvec(&g.matvec_dvec(x));
    let ggt = |x: &DVector<f64>| g.matvec_adjoint_dvec(&g.matvec_adjoint_dvec(x));
    let diff = power_iteration(
        |x| gg(x) - z.matvec_dvec(x),
        |y| ggt(y) - z.matvec_adjoint_dvec(y),
        n,
        steps,
        seed,
    );
    let norm = power_iteration(gg, ggt, n, steps, seed);
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Runs the benchmark for one refinement level.
pub fn run_level(config: &BenchConfig, level: usize) -> Result<BenchRun> {
    let mesh = build_sphere_mesh(level);
    let tree = Arc::new(build_cluster_tree(&mesh, config.leaf_size)?);
    let blocks = Arc::new(build_block_tree(tree.clone(), tree, config.eta)?);
    let scheme = InterpolationScheme::new(config.order)?;
    let g = assemble_h2(&mesh, blocks.clone(), &LaplaceSingleLayer, &scheme)?;
    let half = TruncationControl::new(config.eps / 2.0, config.theta)?;

    let start = Instant::now();
    let coarse = coarsen_product(&g, &g, &blocks, &half)?;
    let row_basis = adaptive_row_basis(&coarse, &half);
    let row_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let col_basis = adaptive_col_basis(&coarse, &half);
    let z = couple(&coarse, Arc::new(row_basis), Arc::new(col_basis))?;
    let col_s = start.elapsed().as_secs_f64();
    drop(coarse);

    let rel_error = product_error(&g, &z, config.power_steps, config.seed);
    let dense_error = if config.dense_check {
        let d = g.to_dense()?;
        let diff = &d * &d - z.to_dense()?;
        Some(crate::linalg::spectral_norm(&diff) / crate::linalg::spectral_norm(&(&d * &d)))
    } else {
        None
    };
    let max_rank = z.row_basis().ranks().iter().chain(z.col_basis().ranks()).copied().max().unwrap_or(0);
    let row = BenchRow {
        n: mesh.len(),
        row_s,
        col_s,
        mem_mb: memory_footprint(&z) as f64 / BYTES_PER_MB,
        rel_error,
        max_rank,
        dense_error,
    };
    Ok(BenchRun { mesh, g, z, row })
}

/// Runs all configured levels in order.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    config.levels.iter().map(|&l| run_level(config, l).map(|r| r.row)).collect()
}

/// Writes the CSV table to any writer.
pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{:.5e},{:.5e},{:.5e},{:.5e}", r.n, r.row_s, r.col_s, r.mem_mb, r.rel_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the CSV table to `path`.
pub fn emit_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    write_csv(rows, BufWriter::new(File::create(path)?))
}
