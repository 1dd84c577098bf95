use h2mul::linalg::{random_matrix, spectral_norm, Mat};
use h2mul::{agglomerate, LowRankBlock};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct AgglomerationCase {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub error: f64,
    pub bound: f64,
}

/// Random block with geometrically decaying column scales.
pub fn decaying_block(rows: usize, cols: usize, rank: usize, rng: &mut ChaCha8Rng) -> LowRankBlock {
    let decay: f64 = rng.random_range(0.05..0.9);
    let mut a = random_matrix(rows, rank, rng);
    for j in 0..rank {
        a.column_mut(j).scale_mut(decay.powi(j as i32));
    }
    LowRankBlock::new(a, random_matrix(cols, rank, rng)).unwrap()
}

/// Agglomerates a random arrangement (m, n <= 3, ranks <= 5, dims <= 60) and
/// measures `||G - G~||_2` against `eps (mn + eps m n^2) ||G||_2`.
pub fn agglomeration_case(seed: u64) -> AgglomerationCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let heights: Vec<usize> = (0..m).map(|_| rng.random_range(1..=20)).collect();
    let widths: Vec<usize> = (0..n).map(|_| rng.random_range(1..=20)).collect();
    let eps = [1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8][rng.random_range(0..6)];
    let grid: Vec<Vec<LowRankBlock>> = heights
        .iter()
        .map(|&h| widths.iter().map(|&w| decaying_block(h, w, rng.random_range(0..=5), &mut rng)).collect())
        .collect();
    let (rows, cols) = (heights.iter().sum(), widths.iter().sum());
    let mut dense = Mat::zeros(rows, cols);
    let mut r0 = 0;
    for (i, row) in grid.iter().enumerate() {
        let mut c0 = 0;
        for (j, blk) in row.iter().enumerate() {
            dense.view_mut((r0, c0), (heights[i], widths[j])).copy_from(&blk.to_dense());
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    let merged = agglomerate(&grid, eps).unwrap();
    let error = spectral_norm(&(&dense - merged.to_dense()));
    let (mf, nf) = (m as f64, n as f64);
    let bound = eps * (mf * nf + eps * mf * nf * nf) * spectral_norm(&dense);
    AgglomerationCase { m, n, eps, error, bound }
}
