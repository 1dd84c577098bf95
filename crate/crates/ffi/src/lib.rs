//! C interface to `h2mul`.
//!
//! Matrices are opaque handles created by `h2mul_sphere_assemble`,
//! `h2mul_multiply` or `h2mul_matrix_load` and released with
//! `h2mul_matrix_free`. Every fallible function returns an `H2mulStatus`;
//! on failure `h2mul_last_error_message` describes the error. Vectors are
//! in cluster tree order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use h2mul::bench::product_error;
use h2mul::{
    assemble_h2, build_block_tree, build_cluster_tree, build_sphere_mesh, multiply, spectral_norm_lower_bound,
    BlockTree, H2Error, H2Matrix, InterpolationScheme, LaplaceSingleLayer, TruncationControl,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H2mulStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    TreeMismatch = 4,
    Format = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque H²-matrix handle.
pub struct H2mulMatrix {
    inner: H2Matrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &H2Error) -> H2mulStatus {
    match err {
        H2Error::InvalidArgument(_) | H2Error::EmptyMesh | H2Error::DenseLimit { .. } => H2mulStatus::InvalidArgument,
        H2Error::DimensionMismatch { .. } => H2mulStatus::DimensionMismatch,
        H2Error::TreeMismatch(_) | H2Error::NotCoarsening { .. } => H2mulStatus::TreeMismatch,
        H2Error::Format(_) | H2Error::Parse { .. } => H2mulStatus::Format,
        H2Error::Io(_) => H2mulStatus::Io,
        _ => H2mulStatus::Internal,
    }
}

struct Failure(H2mulStatus, String);

impl From<H2Error> for Failure {
    fn from(err: H2Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(H2mulStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> H2mulStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            H2mulStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            H2mulStatus::Panic
        }
    }
}

unsafe fn matrix<'a>(m: *const H2mulMatrix, name: &str) -> Result<&'a H2Matrix, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null(name))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn path_of(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(H2mulStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

fn boxed(inner: H2Matrix) -> *mut H2mulMatrix {
    Box::into_raw(Box::new(H2mulMatrix { inner }))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn h2mul_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Assembles the single-layer Laplace matrix on the sphere mesh with
/// `8 * 4^level` triangles.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn h2mul_sphere_assemble(
    level: usize,
    leaf_size: usize,
    order: usize,
    eta: f64,
    out: *mut *mut H2mulMatrix,
) -> H2mulStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if level > 10 {
            return Err(Failure(H2mulStatus::InvalidArgument, format!("level {level} is too large")));
        }
        let mesh = build_sphere_mesh(level);
        let tree = Arc::new(build_cluster_tree(&mesh, leaf_size)?);
        let blocks = Arc::new(build_block_tree(tree.clone(), tree, eta)?);
        let g = assemble_h2(&mesh, blocks, &LaplaceSingleLayer, &InterpolationScheme::new(order)?)?;
        *out = boxed(g);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle returned by this library that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_free(m: *mut H2mulMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of rows and columns.
///
/// # Safety
/// `m` must be a valid handle, `rows` and `cols` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_dims(m: *const H2mulMatrix, rows: *mut usize, cols: *mut usize) -> H2mulStatus {
    guard(|| {
        let g = matrix(m, "matrix")?;
        *out_ref(rows, "rows")? = g.nrows();
        *out_ref(cols, "cols")? = g.ncols();
        Ok(())
    })
}

unsafe fn apply(m: *const H2mulMatrix, x: *const f64, x_len: usize, y: *mut f64, y_len: usize, adjoint: bool) -> H2mulStatus {
    guard(|| {
        let g = matrix(m, "matrix")?;
        if x.is_null() {
            return Err(null("x"));
        }
        if y.is_null() {
            return Err(null("y"));
        }
        let xs = std::slice::from_raw_parts(x, x_len);
        let out_len = if adjoint { g.ncols() } else { g.nrows() };
        if y_len != out_len {
            return Err(H2Error::DimensionMismatch { expected: out_len, actual: y_len }.into());
        }
        let r = if adjoint { g.matvec_adjoint(xs)? } else { g.matvec(xs)? };
        std::slice::from_raw_parts_mut(y, y_len).copy_from_slice(&r);
        Ok(())
    })
}

/// `y = G x`.
///
/// # Safety
/// `m` must be a valid handle, `x` and `y` valid for `x_len` and `y_len`
/// doubles and not overlapping.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_matvec(
    m: *const H2mulMatrix,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> H2mulStatus {
    apply(m, x, x_len, y, y_len, false)
}

/// `y = G^T x`.
///
/// # Safety
/// Same as `h2mul_matrix_matvec`.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_matvec_adjoint(
    m: *const H2mulMatrix,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> H2mulStatus {
    apply(m, x, x_len, y, y_len, true)
}

/// Storage of bases, coupling and nearfield matrices in bytes.
///
/// # Safety
/// `m` must be a valid handle and `bytes` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_memory(m: *const H2mulMatrix, bytes: *mut usize) -> H2mulStatus {
    guard(|| {
        *out_ref(bytes, "bytes")? = 8 * matrix(m, "matrix")?.stored_reals();
        Ok(())
    })
}

/// Approximates `X Y` with block-relative accuracy `eps` on the standard
/// block tree of the row tree of `X` and the column tree of `Y`.
///
/// # Safety
/// `x` and `y` must be valid handles and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn h2mul_multiply(
    x: *const H2mulMatrix,
    y: *const H2mulMatrix,
    eps: f64,
    theta: f64,
    out: *mut *mut H2mulMatrix,
) -> H2mulStatus {
    guard(|| {
        let (gx, gy) = (matrix(x, "x")?, matrix(y, "y")?);
        let out = out_ref(out, "out")?;
        let bx = gx.block_tree();
        let target = Arc::new(BlockTree::build(bx.rows().clone(), gy.block_tree().cols().clone(), bx.eta())?);
        let z = multiply(gx, gy, &target, &TruncationControl::new(eps, theta)?)?;
        *out = boxed(z);
        Ok(())
    })
}

/// Writes the matrix in the binary format.
///
/// # Safety
/// `m` must be a valid handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_save(m: *const H2mulMatrix, path: *const c_char) -> H2mulStatus {
    guard(|| {
        let g = matrix(m, "matrix")?;
        let file = File::create(path_of(path)?).map_err(H2Error::from)?;
        g.write_binary(BufWriter::new(file))?;
        Ok(())
    })
}

/// Reads a matrix written by `h2mul_matrix_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_load(path: *const c_char, out: *mut *mut H2mulMatrix) -> H2mulStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let file = File::open(path_of(path)?).map_err(H2Error::from)?;
        *out = boxed(H2Matrix::read_binary(BufReader::new(file))?);
        Ok(())
    })
}

/// Lower bound for the spectral norm by `iterations` power iteration steps.
///
/// # Safety
/// `m` must be a valid handle and `norm` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn h2mul_matrix_norm_estimate(m: *const H2mulMatrix, iterations: usize, norm: *mut f64) -> H2mulStatus {
    guard(|| {
        let g = matrix(m, "matrix")?;
        let norm = out_ref(norm, "norm")?;
        *norm = spectral_norm_lower_bound(|x| g.matvec_dvec(x), |x| g.matvec_adjoint_dvec(x), g.ncols(), iterations)?;
        Ok(())
    })
}

/// Power iteration estimate of `||G G - Z||_2 / ||G G||_2`.
///
/// # Safety
/// `g` and `z` must be valid handles and `error` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn h2mul_square_error(
    g: *const H2mulMatrix,
    z: *const H2mulMatrix,
    iterations: usize,
    seed: u64,
    error: *mut f64,
) -> H2mulStatus {
    guard(|| {
        let (gm, zm) = (matrix(g, "g")?, matrix(z, "z")?);
        let error = out_ref(error, "error")?;
        if iterations == 0 {
            return Err(Failure(H2mulStatus::InvalidArgument, "at least one power iteration is required".into()));
        }
        if gm.nrows() != gm.ncols() || (zm.nrows(), zm.ncols()) != (gm.nrows(), gm.ncols()) {
            return Err(H2Error::DimensionMismatch { expected: gm.nrows(), actual: zm.nrows() }.into());
        }
        *error = product_error(gm, zm, iterations, seed);
        Ok(())
    })
}
