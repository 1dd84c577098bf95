use std::sync::Arc;

use h2mul::bench::{emit_csv, memory_footprint, product_error, run_benchmark, run_level, write_csv, BenchConfig, BenchRow, CSV_HEADER};
use h2mul::linalg::Mat;
use h2mul::{BlockData, BlockTree, ClusterBasis, ClusterTree, H2Matrix};

fn config(levels: Vec<usize>, eps: f64) -> BenchConfig {
    BenchConfig { levels, eps, ..BenchConfig::default() }
}

fn row(n: usize, row_s: f64, col_s: f64, mem_mb: f64, rel_error: f64) -> BenchRow {
    BenchRow { n, row_s, col_s, mem_mb, rel_error, max_rank: 0, dense_error: None }
}

fn single_coupling(k: usize) -> H2Matrix {
    let a = Arc::new(ClusterTree::from_points(&[[0.0; 3]], 4).unwrap());
    let b = Arc::new(ClusterTree::from_points(&[[10.0, 0.0, 0.0]], 4).unwrap());
    let bt = Arc::new(BlockTree::build(a.clone(), b.clone(), 1.0).unwrap());
    let v = Arc::new(ClusterBasis::new(a, vec![k], vec![Some(Mat::zeros(1, k))], vec![None]).unwrap());
    let w = Arc::new(ClusterBasis::new(b, vec![k], vec![Some(Mat::zeros(1, k))], vec![None]).unwrap());
    H2Matrix::new(bt, v, w, vec![BlockData::Coupling(Mat::zeros(k, k))]).unwrap()
}

#[test]
fn memory_footprint_counts_reals() {
    assert_eq!(memory_footprint(&single_coupling(0)), 0);
    assert_eq!(memory_footprint(&single_coupling(5)), 8 * (25 + 5 + 5));
}

#[test]
fn product_footprint_is_near_reference_per_dof() {
    let run = run_level(&config(vec![4], 1e-4), 4).unwrap();
    let per_dof = memory_footprint(&run.z) as f64 / 2048.0;
    let reference = 4.7 * 1024.0 * 1024.0 / 2048.0;
    assert!(per_dof <= 4.0 * reference && per_dof >= reference / 4.0, "{per_dof} bytes per dof");
}

#[test]
fn level_four_meets_tolerance() {
    let rows = run_benchmark(&config(vec![4], 1e-4)).unwrap();
    assert_eq!(rows[0].n, 2048);
    assert!(rows[0].rel_error <= 1e-4, "{:e}", rows[0].rel_error);
    assert!(rows[0].row_s > 0.0 && rows[0].col_s > 0.0);
}

#[test]
fn coarser_tolerance_needs_less_memory() {
    let fine = run_benchmark(&config(vec![3], 1e-4)).unwrap();
    let coarse = run_benchmark(&config(vec![3], 1e-2)).unwrap();
    assert!(coarse[0].mem_mb <= fine[0].mem_mb);
    assert!(coarse[0].max_rank <= fine[0].max_rank);
}

#[test]
fn error_column_is_deterministic() {
    let cfg = config(vec![2, 3], 1e-4);
    let a = run_benchmark(&cfg).unwrap();
    let b = run_benchmark(&cfg).unwrap();
    let errors = |rows: &[BenchRow]| rows.iter().map(|r| r.rel_error.to_bits()).collect::<Vec<_>>();
    assert_eq!(errors(&a), errors(&b));
    let column = |rows: &[BenchRow]| {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap().lines().map(|l| l.rsplit(',').next().unwrap().to_string()).collect::<Vec<_>>()
    };
    assert_eq!(column(&a), column(&b));
}

#[test]
fn dense_check_agrees_with_estimate() {
    let cfg = BenchConfig { dense_check: true, ..config(vec![3], 1e-4) };
    let row = run_level(&cfg, 3).unwrap().row;
    let dense = row.dense_error.unwrap();
    assert!(row.rel_error <= dense * (1.0 + 1e-8));
    assert!(dense <= 2e-4);
}

#[test]
fn product_error_of_exact_square_is_small() {
    let run = run_level(&config(vec![2], 1e-4), 2).unwrap();
    assert!(product_error(&run.g, &run.z, 10, 1) <= 1e-4);
}

#[test]
fn invalid_configs_rejected() {
    assert!(run_benchmark(&config(vec![], 1e-4)).is_err());
    assert!(run_benchmark(&config(vec![2], 0.0)).is_err());
    assert!(run_benchmark(&config(vec![2], 1.5)).is_err());
    assert!(run_benchmark(&BenchConfig { theta: 0.6, ..config(vec![2], 1e-4) }).is_err());
    assert!(run_benchmark(&BenchConfig { leaf_size: 0, ..config(vec![2], 1e-4) }).is_err());
    assert!(BenchConfig { dense_check: true, ..config(vec![6], 1e-4) }.validate().is_err());
    assert!(BenchConfig::default().validate().is_ok());
}

#[test]
fn csv_header_only_for_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let r = row(2048, 1.234567891, 0.000123456789, 7.7012345, 2.6e-5);
    emit_csv(std::slice::from_ref(&r), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,row_s,col_s,mem_mb,rel_error");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0].parse::<usize>().unwrap(), 2048);
    for (field, value) in fields[1..].iter().zip([r.row_s, r.col_s, r.mem_mb, r.rel_error]) {
        let parsed: f64 = field.parse().unwrap();
        assert!((parsed - value).abs() <= 5e-6 * value.abs(), "{field} vs {value}");
    }
}

#[test]
fn unwritable_csv_path_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(emit_csv(&[], &path).is_err());
}
