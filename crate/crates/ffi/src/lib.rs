//! C ABI over `choreoqep`.
//!
//! Objects are opaque heap handles created by `cq_*_new` functions and released
//! with the matching `cq_*_free`. Every fallible call returns a [`CqStatus`];
//! the message of the most recent failure on the calling thread is available
//! through [`cq_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use choreoqep::celsolve::{dirichlet_cel, EndpointData, SystemSolution};
use choreoqep::convergence::hausdorff_distance;
use choreoqep::model::{validate_spec, LagrangianSpec};
use choreoqep::numkernel::C64;
use choreoqep::pencil::{classical_spectrum, transcendental_spectrum, ClassicalPencil, TranscendentalPencil};
use choreoqep::periodic::{build_choreography_cel, commensurability};
use choreoqep::scaleop::ScaleOperator;
use choreoqep::Error;
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    AssumptionViolation = 4,
    NumericalFailure = 5,
    NotChoreographic = 6,
    DelayResonant = 7,
    EmptySet = 8,
    Panic = 9,
}

impl From<&Error> for CqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotChoreographic(_) => CqStatus::NotChoreographic,
            Error::DelayResonant { .. } => CqStatus::DelayResonant,
            Error::EmptySet => CqStatus::EmptySet,
            Error::ConfigParse(_) | Error::DimensionMismatch(_) | Error::InvalidSpec(_) | Error::InvalidOperator(_) => {
                CqStatus::InvalidArgument
            }
            other if other.exit_code() == 3 => CqStatus::AssumptionViolation,
            _ => CqStatus::NumericalFailure,
        }
    }
}

/// Quadratic Lagrangian of `n` particles in `R^d`.
pub struct CqSpec(LagrangianSpec);

/// Scale derivative with its step.
pub struct CqOperator(ScaleOperator);

/// Pseudo-periodic trajectories of all particles.
pub struct CqSolution(SystemSolution);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: CqStatus, msg: impl Into<String>) -> CqStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), CqStatus>) -> CqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CqStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CqStatus::Panic, "internal panic"),
    }
}

fn check(e: Error) -> CqStatus {
    let status = CqStatus::from(&e);
    fail(status, e.to_string())
}

unsafe fn read<'a, T>(p: *const T, len: usize) -> Result<&'a [T], CqStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CqStatus::NullPointer, "null input array"));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, CqStatus> {
    p.as_ref().ok_or_else(|| fail(CqStatus::NullPointer, "null handle"))
}

unsafe fn square(p: *const f64, d: usize) -> Result<DMatrix<f64>, CqStatus> {
    Ok(DMatrix::from_row_slice(d, d, read(p, d * d)?))
}

unsafe fn write_roots(roots: &[C64], re: *mut f64, im: *mut f64, capacity: usize, len: *mut usize) -> Result<(), CqStatus> {
    if len.is_null() {
        return Err(fail(CqStatus::NullPointer, "null length output"));
    }
    *len = roots.len();
    if roots.len() > capacity {
        return Err(fail(CqStatus::BufferTooSmall, format!("need room for {} roots", roots.len())));
    }
    if !roots.is_empty() && (re.is_null() || im.is_null()) {
        return Err(fail(CqStatus::NullPointer, "null output array"));
    }
    for (i, r) in roots.iter().enumerate() {
        *re.add(i) = r.re;
        *im.add(i) = r.im;
    }
    Ok(())
}

/// Copies the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `capacity`) and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cq_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a Lagrangian from row-major `d×d` matrices `j1..j5` and vectors
/// `j6`, `j7` of length `d`. `j3`, `j4`, `j5`, `j6`, `j7` may be null for zero.
/// Symmetry of `j1..j4` and skew-symmetry of `j5` are enforced.
///
/// # Safety
/// Non-null array arguments must point to the stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_spec_new(
    d: usize,
    n: usize,
    j1: *const f64,
    j2: *const f64,
    j3: *const f64,
    j4: *const f64,
    j5: *const f64,
    j6: *const f64,
    j7: *const f64,
    out: *mut *mut CqSpec,
) -> CqStatus {
    guard(|| {
        if out.is_null() || j1.is_null() || j2.is_null() {
            return Err(fail(CqStatus::NullPointer, "j1, j2 and out are required"));
        }
        let opt_m = |p: *const f64| if p.is_null() { Ok(DMatrix::zeros(d, d)) } else { square(p, d) };
        let opt_v = |p: *const f64| {
            if p.is_null() {
                Ok(DVector::zeros(d))
            } else {
                read(p, d).map(DVector::from_column_slice)
            }
        };
        let spec = LagrangianSpec::new(n, square(j1, d)?, square(j2, d)?, opt_m(j3)?, opt_m(j4)?, opt_m(j5)?, opt_v(j6)?, opt_v(j7)?)
            .map_err(check)?;
        if let Some(v) = validate_spec(&spec).first() {
            return Err(fail(CqStatus::InvalidArgument, format!("{}: {:?} (magnitude {:.3e})", v.matrix, v.kind, v.magnitude)));
        }
        *out = Box::into_raw(Box::new(CqSpec(spec)));
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a handle from [`cq_spec_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cq_spec_free(spec: *mut CqSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Operator with `2·order+1` coefficients `γ_{−N}..γ_N` and step `epsilon`.
///
/// # Safety
/// `gamma_re` must hold `2·order+1` doubles, `gamma_im` likewise or be null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_new(
    order: usize,
    gamma_re: *const f64,
    gamma_im: *const f64,
    epsilon: f64,
    out: *mut *mut CqOperator,
) -> CqStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let len = 2 * order + 1;
        let re = read(gamma_re, len)?;
        let im = if gamma_im.is_null() { vec![0.0; len] } else { read(gamma_im, len)?.to_vec() };
        let gamma = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let op = ScaleOperator::new(gamma, epsilon).map_err(check)?;
        *out = Box::into_raw(Box::new(CqOperator(op)));
        Ok(())
    })
}

/// Three-point operator `(−½+ik, −2ik, ½+ik)/ε`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_k_family(k: f64, epsilon: f64, out: *mut *mut CqOperator) -> CqStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let op = ScaleOperator::k_family(k, epsilon).map_err(check)?;
        *out = Box::into_raw(Box::new(CqOperator(op)));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_free(op: *mut CqOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Roots of `det P_ν(λ)`, sorted by imaginary then real part. `*len` always
/// receives the root count; `BufferTooSmall` is returned when it exceeds `capacity`.
///
/// # Safety
/// `re` and `im` must hold `capacity` doubles; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_classical_spectrum(
    spec: *const CqSpec,
    nu: f64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> CqStatus {
    guard(|| {
        let spec = &handle(spec)?.0;
        let roots = classical_spectrum(&ClassicalPencil::new(spec, nu)).map_err(check)?;
        write_roots(roots.roots(), re, im, capacity, len)
    })
}

/// The `4Nd` roots `λ` of the discrete pencil on the principal branch.
///
/// # Safety
/// As [`cq_classical_spectrum`]; `op` must be a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn cq_transcendental_spectrum(
    spec: *const CqSpec,
    op: *const CqOperator,
    nu: f64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> CqStatus {
    guard(|| {
        let spec = &handle(spec)?.0;
        let op = &handle(op)?.0;
        let s = transcendental_spectrum(&TranscendentalPencil::new(spec, op, nu)).map_err(check)?;
        write_roots(s.lambdas.roots(), re, im, capacity, len)
    })
}

unsafe fn complex_points(re: *const f64, im: *const f64, len: usize) -> Result<Vec<C64>, CqStatus> {
    let (re, im) = (read(re, len)?, read(im, len)?);
    Ok(re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect())
}

/// Hausdorff distance between two finite sets of complex numbers.
///
/// # Safety
/// Each array must hold its stated length of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_hausdorff(
    a_re: *const f64,
    a_im: *const f64,
    a_len: usize,
    b_re: *const f64,
    b_im: *const f64,
    b_len: usize,
    out: *mut f64,
) -> CqStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let a = complex_points(a_re, a_im, a_len)?;
        let b = complex_points(b_re, b_im, b_len)?;
        *out = hausdorff_distance(&a, &b).map_err(check)?;
        Ok(())
    })
}

/// Sets `*periodic` to 1 and `*period` to the least common period when all
/// `e^{λt}` share one, else `*periodic = 0` and `*period = 0`.
///
/// # Safety
/// `re`, `im` must hold `len` doubles; `period`, `periodic` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_commensurability(
    re: *const f64,
    im: *const f64,
    len: usize,
    tol: f64,
    max_den: i64,
    period: *mut f64,
    periodic: *mut i32,
) -> CqStatus {
    guard(|| {
        if period.is_null() || periodic.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let roots = complex_points(re, im, len)?;
        let report = commensurability(&roots, tol, max_den).map_err(check)?;
        *periodic = report.period.is_some() as i32;
        *period = report.period.unwrap_or(0.0);
        Ok(())
    })
}

/// Classical Dirichlet problem on `[t0, tf]` with row-major `n×d` position arrays.
///
/// # Safety
/// `start`, `end` must hold `n·d` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_solve_dirichlet_cel(
    spec: *const CqSpec,
    t0: f64,
    tf: f64,
    start: *const f64,
    end: *const f64,
    out: *mut *mut CqSolution,
) -> CqStatus {
    guard(|| {
        let spec = &handle(spec)?.0;
        if out.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let (n, d) = (spec.n, spec.d);
        let s = DMatrix::from_row_slice(n, d, read(start, n * d)?);
        let e = DMatrix::from_row_slice(n, d, read(end, n * d)?);
        let (sol, _) = dirichlet_cel(spec, &EndpointData::real(t0, tf, &s, &e)).map_err(check)?;
        *out = Box::into_raw(Box::new(CqSolution(sol)));
        Ok(())
    })
}

/// Classical choreography with `len` complex amplitudes on the particle modes;
/// writes its period to `*period`.
///
/// # Safety
/// `amp_re` must hold `len` doubles, `amp_im` likewise or be null; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_choreography_cel(
    spec: *const CqSpec,
    amp_re: *const f64,
    amp_im: *const f64,
    len: usize,
    period: *mut f64,
    out: *mut *mut CqSolution,
) -> CqStatus {
    guard(|| {
        let spec = &handle(spec)?.0;
        if out.is_null() || period.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        let re = read(amp_re, len)?;
        let im = if amp_im.is_null() { vec![0.0; len] } else { read(amp_im, len)?.to_vec() };
        let amps: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let (ch, sol) = build_choreography_cel(spec, &amps).map_err(check)?;
        *period = ch.period;
        *out = Box::into_raw(Box::new(CqSolution(sol)));
        Ok(())
    })
}

/// Writes the positions of every particle at `t` into row-major `n×d` arrays.
///
/// # Safety
/// `re`, `im` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn cq_solution_eval(
    sol: *const CqSolution,
    t: f64,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> CqStatus {
    guard(|| {
        let sol = &handle(sol)?.0;
        let pos = sol.positions(t);
        let (n, d) = (pos.nrows(), pos.ncols());
        if n * d > capacity {
            return Err(fail(CqStatus::BufferTooSmall, format!("need room for {} values", n * d)));
        }
        if re.is_null() || im.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output array"));
        }
        for j in 0..n {
            for c in 0..d {
                *re.add(j * d + c) = pos[(j, c)].re;
                *im.add(j * d + c) = pos[(j, c)].im;
            }
        }
        Ok(())
    })
}

/// Number of particles and dimension of a solution.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_solution_shape(sol: *const CqSolution, n: *mut usize, d: *mut usize) -> CqStatus {
    guard(|| {
        let sol = &handle(sol)?.0;
        if n.is_null() || d.is_null() {
            return Err(fail(CqStatus::NullPointer, "null output"));
        }
        *n = sol.n();
        *d = sol.xs.dim();
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn cq_solution_free(sol: *mut CqSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
