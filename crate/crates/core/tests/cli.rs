use std::process::Command;

use h2mul::{H2Matrix, TriangleMesh};

fn h2mul() -> Command {
    Command::new(env!("CARGO_BIN_EXE_h2mul"))
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let status = h2mul().args(["bench", "--levels", "1,2", "--eps", "1e-4", "--out"]).arg(&out).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,row_s,col_s,mem_mb,rel_error");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("32,") && lines[2].starts_with("128,"));
}

#[test]
fn bench_prints_csv_to_stdout() {
    let output = h2mul().args(["bench", "--levels", "1"]).output().unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8(output.stdout).unwrap().starts_with("n,row_s,col_s,mem_mb,rel_error\n32,"));
}

#[test]
fn invalid_arguments_fail() {
    let output = h2mul().args(["bench", "--levels", "1", "--eps", "2"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error:"));
    let output = h2mul().args(["bench", "--levels", "6", "--dense-check"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(!h2mul().args(["bench", "--levels", "x"]).output().unwrap().status.success());
    assert!(!h2mul().arg("frobnicate").output().unwrap().status.success());
}

#[test]
fn mesh_and_square_outputs_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("sphere.txt");
    assert!(h2mul().args(["mesh", "--level", "2", "--out"]).arg(&mesh_path).status().unwrap().success());
    let mesh = TriangleMesh::read_text(std::io::BufReader::new(std::fs::File::open(&mesh_path).unwrap())).unwrap();
    assert_eq!(mesh.len(), 128);

    let bin = dir.path().join("z.h2");
    let output = h2mul().args(["square", "--level", "2", "--order", "2", "--out"]).arg(&bin).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let z = H2Matrix::read_binary(std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!((z.nrows(), z.ncols()), (128, 128));
}

#[test]
fn unwritable_output_fails() {
    let output = h2mul().args(["mesh", "--level", "0", "--out", "/nonexistent/dir/mesh.txt"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}
