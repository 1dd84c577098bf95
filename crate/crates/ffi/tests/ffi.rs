use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use h2mul_ffi::*;

fn assemble(level: usize) -> *mut H2mulMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { h2mul_sphere_assemble(level, 16, 3, 1.0, &mut m) }, H2mulStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = h2mul_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn dims(m: *const H2mulMatrix) -> (usize, usize) {
    let (mut r, mut c) = (0, 0);
    assert_eq!(unsafe { h2mul_matrix_dims(m, &mut r, &mut c) }, H2mulStatus::Ok);
    (r, c)
}

fn matvec(m: *const H2mulMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; dims(m).0];
    assert_eq!(unsafe { h2mul_matrix_matvec(m, x.as_ptr(), x.len(), y.as_mut_ptr(), y.len()) }, H2mulStatus::Ok);
    y
}

fn test_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect()
}

#[test]
fn assemble_dims_and_free() {
    let m = assemble(2);
    assert_eq!(dims(m), (128, 128));
    let mut bytes = 0;
    assert_eq!(unsafe { h2mul_matrix_memory(m, &mut bytes) }, H2mulStatus::Ok);
    assert!(bytes > 0 && bytes % 8 == 0);
    unsafe { h2mul_matrix_free(m) };
    unsafe { h2mul_matrix_free(ptr::null_mut()) };
}

#[test]
fn matvec_and_adjoint_are_consistent() {
    let m = assemble(2);
    let x = test_vector(128);
    let z: Vec<f64> = (0..128).map(|i| (i as f64).sin()).collect();
    let y = matvec(m, &x);
    let mut w = vec![0.0; 128];
    assert_eq!(unsafe { h2mul_matrix_matvec_adjoint(m, z.as_ptr(), 128, w.as_mut_ptr(), 128) }, H2mulStatus::Ok);
    let lhs: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
    let rhs: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    unsafe { h2mul_matrix_free(m) };
}

#[test]
fn multiply_matches_repeated_matvec() {
    let g = assemble(2);
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { h2mul_multiply(g, g, 1e-6, 0.25, &mut z) }, H2mulStatus::Ok);
    let x = test_vector(128);
    let expected = matvec(g, &matvec(g, &x));
    let actual = matvec(z, &x);
    let err: f64 = expected.iter().zip(&actual).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = expected.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(err <= 1e-5 * norm, "{}", err / norm);
    let mut est = -1.0;
    assert_eq!(unsafe { h2mul_square_error(g, z, 10, 42, &mut est) }, H2mulStatus::Ok);
    assert!((0.0..=1e-5).contains(&est));
    unsafe {
        h2mul_matrix_free(z);
        h2mul_matrix_free(g);
    }
}

#[test]
fn norm_estimate_is_positive_lower_bound() {
    let g = assemble(1);
    let mut norm = 0.0;
    assert_eq!(unsafe { h2mul_matrix_norm_estimate(g, 20, &mut norm) }, H2mulStatus::Ok);
    let x = test_vector(32);
    let y = matvec(g, &x);
    let ratio = y.iter().map(|a| a * a).sum::<f64>().sqrt() / x.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(norm > 0.0 && ratio <= norm * (1.0 + 1e-6));
    assert_eq!(unsafe { h2mul_matrix_norm_estimate(g, 0, &mut norm) }, H2mulStatus::InvalidArgument);
    unsafe { h2mul_matrix_free(g) };
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.h2").to_str().unwrap()).unwrap();
    let g = assemble(2);
    assert_eq!(unsafe { h2mul_matrix_save(g, path.as_ptr()) }, H2mulStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { h2mul_matrix_load(path.as_ptr(), &mut h) }, H2mulStatus::Ok);
    let x = test_vector(128);
    assert_eq!(matvec(g, &x), matvec(h, &x));
    unsafe {
        h2mul_matrix_free(g);
        h2mul_matrix_free(h);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { h2mul_sphere_assemble(2, 0, 3, 1.0, &mut m) }, H2mulStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { h2mul_sphere_assemble(2, 16, 3, 1.0, ptr::null_mut()) }, H2mulStatus::NullPointer);
    assert!(last_error().contains("out"));

    let g = assemble(1);
    let x = vec![0.0; 31];
    let mut y = vec![0.0; 32];
    assert_eq!(
        unsafe { h2mul_matrix_matvec(g, x.as_ptr(), x.len(), y.as_mut_ptr(), y.len()) },
        H2mulStatus::DimensionMismatch
    );
    assert_eq!(unsafe { h2mul_matrix_matvec(g, ptr::null(), 32, y.as_mut_ptr(), 32) }, H2mulStatus::NullPointer);
    assert_eq!(unsafe { h2mul_matrix_dims(ptr::null(), &mut 0, &mut 0) }, H2mulStatus::NullPointer);
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { h2mul_multiply(g, g, 2.0, 0.25, &mut z) }, H2mulStatus::InvalidArgument);

    let other = assemble(2);
    assert_eq!(unsafe { h2mul_multiply(g, other, 1e-4, 0.25, &mut z) }, H2mulStatus::TreeMismatch);
    assert!(z.is_null());

    let missing = CString::new("/nonexistent/dir/g.h2").unwrap();
    assert_eq!(unsafe { h2mul_matrix_load(missing.as_ptr(), &mut z) }, H2mulStatus::Io);
    assert_eq!(unsafe { h2mul_matrix_save(g, missing.as_ptr()) }, H2mulStatus::Io);

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.h2");
    std::fs::write(&junk, b"not a matrix").unwrap();
    let junk = CString::new(junk.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { h2mul_matrix_load(junk.as_ptr(), &mut z) }, H2mulStatus::Format);

    assert_eq!(dims(g), (32, 32));
    assert!(h2mul_last_error_message().is_null());
    unsafe {
        h2mul_matrix_free(g);
        h2mul_matrix_free(other);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("h2mul.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["h2mul_sphere_assemble", "h2mul_matrix_free", "h2mul_multiply", "h2mul_last_error_message", "H2MUL_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"h2mul.h\"\nint main(void) { H2mulMatrix *m = 0; size_t r, c; return h2mul_matrix_dims(m, &r, &c) == H2MUL_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .expect("C compiler not available");
    assert!(status.success());
}
