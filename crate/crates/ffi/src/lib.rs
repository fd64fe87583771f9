//! C interface to `homopt`.
//!
//! Every fallible function returns a [`HomoptStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`homopt_last_error_message`]. Handles are opaque and must be released
//! with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use homopt::gp::{
    CorrelationKernel, Estimator, EvaluationHistory, KernelFamily, Region, SurrogatePosterior,
};
use homopt::homogeneity;
use homopt::numeral::ExtendedNumeral;
use homopt::objectives;
use homopt::optimizer::{self, Algorithm, OptimizationTrace, OptimizerConfig};
use homopt::Error;
use libc::{c_char, c_int, c_void};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomoptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad configuration or input data.
    Config = 3,
    /// The computation itself failed.
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomoptAlgorithm {
    P = 0,
    Ei = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomoptKernel {
    Exponential = 0,
    SquaredExponential = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomoptEstimator {
    Mle = 0,
    Sample = 1,
}

/// Opaque extended numeral.
pub struct HomoptNumeral(ExtendedNumeral);

/// Opaque fitted Gaussian model.
pub struct HomoptPosterior(SurrogatePosterior);

/// Opaque optimization trace.
pub struct HomoptTrace(OptimizationTrace);

/// One trace row. Optional fields are NaN when absent; `grid_index` is -1
/// for a design point that is not on the candidate grid.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HomoptTraceRow {
    pub iter: usize,
    pub grid_index: i64,
    pub y: f64,
    pub criterion: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub y_on: f64,
    pub best: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(e: Error) -> HomoptStatus {
    set_error(e.to_string());
    match e {
        Error::Io(_) => HomoptStatus::Io,
        e if e.is_config() => HomoptStatus::Config,
        Error::InvalidHistory(_) | Error::DuplicatePoints { .. } | Error::Precondition(_) => {
            HomoptStatus::InvalidArgument
        }
        _ => HomoptStatus::Numerical,
    }
}

fn guard(body: impl FnOnce() -> Result<(), HomoptStatus>) -> HomoptStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HomoptStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HomoptStatus::Panic
        }
    }
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), HomoptStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(HomoptStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, HomoptStatus> {
    null_check(s, name)?;
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        HomoptStatus::InvalidArgument
    })
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn homopt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from a `homopt_*` function returning `char *`, and must not
/// be freed twice.
#[no_mangle]
pub unsafe extern "C" fn homopt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses text such as `3*G^2 + 1.5 - 2*G^-1`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_parse(
    text: *const c_char,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    guard(|| {
        null_check(out, "out")?;
        let n: ExtendedNumeral = read_str(text, "text")?.parse().map_err(fail)?;
        *out = Box::into_raw(Box::new(HomoptNumeral(n)));
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_from_f64(
    value: f64,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    guard(|| {
        null_check(out, "out")?;
        if !value.is_finite() {
            set_error("value must be finite");
            return Err(HomoptStatus::InvalidArgument);
        }
        *out = Box::into_raw(Box::new(HomoptNumeral(ExtendedNumeral::finite(value))));
        Ok(())
    })
}

unsafe fn binary(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut *mut HomoptNumeral,
    op: impl FnOnce(&ExtendedNumeral, &ExtendedNumeral) -> homopt::Result<ExtendedNumeral>,
) -> HomoptStatus {
    guard(|| {
        null_check(a, "a")?;
        null_check(b, "b")?;
        null_check(out, "out")?;
        let r = op(&(*a).0, &(*b).0).map_err(fail)?;
        *out = Box::into_raw(Box::new(HomoptNumeral(r)));
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be live numeral handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_add(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    binary(a, b, out, |x, y| Ok(x + y))
}

/// # Safety
/// As [`homopt_numeral_add`].
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_sub(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    binary(a, b, out, |x, y| Ok(x - y))
}

/// # Safety
/// As [`homopt_numeral_add`].
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_mul(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    binary(a, b, out, |x, y| Ok(x * y))
}

/// Division by a single-term divisor only.
///
/// # Safety
/// As [`homopt_numeral_add`].
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_div(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut *mut HomoptNumeral,
) -> HomoptStatus {
    binary(a, b, out, |x, y| x.div_monomial(y))
}

/// Writes -1, 0 or 1 to `out`.
///
/// # Safety
/// `a` and `b` must be live numeral handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_compare(
    a: *const HomoptNumeral,
    b: *const HomoptNumeral,
    out: *mut c_int,
) -> HomoptStatus {
    guard(|| {
        null_check(a, "a")?;
        null_check(b, "b")?;
        null_check(out, "out")?;
        *out = (*a).0.compare(&(*b).0) as c_int;
        Ok(())
    })
}

/// Coefficient of `G^grade` (0 when absent).
///
/// # Safety
/// `n` must be a live numeral handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_coefficient(
    n: *const HomoptNumeral,
    grade: i32,
    out: *mut f64,
) -> HomoptStatus {
    guard(|| {
        null_check(n, "n")?;
        null_check(out, "out")?;
        *out = (*n).0.coefficient(grade);
        Ok(())
    })
}

/// Canonical text form; free with [`homopt_string_free`]. NULL if `n` is
/// NULL.
///
/// # Safety
/// `n` must be NULL or a live numeral handle.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_to_string(n: *const HomoptNumeral) -> *mut c_char {
    if n.is_null() {
        return ptr::null_mut();
    }
    to_c_string((*n).0.to_string())
}

/// # Safety
/// `n` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn homopt_numeral_free(n: *mut HomoptNumeral) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

fn kernel_of(kernel: HomoptKernel, decay: f64) -> homopt::Result<CorrelationKernel> {
    let family = match kernel {
        HomoptKernel::Exponential => KernelFamily::Exponential,
        HomoptKernel::SquaredExponential => KernelFamily::SquaredExponential,
    };
    CorrelationKernel::new(family, decay)
}

fn estimator_of(e: HomoptEstimator) -> Estimator {
    match e {
        HomoptEstimator::Mle => Estimator::Mle,
        HomoptEstimator::Sample => Estimator::Sample,
    }
}

/// Fits the model to `n` points of dimension `dim` stored row-major in
/// `points`, with values `values`, inside the box `[lower, upper]`.
///
/// # Safety
/// `points` must hold `n * dim` doubles, `values` `n`, `lower` and `upper`
/// `dim` each; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_posterior_new(
    points: *const f64,
    values: *const f64,
    n: usize,
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    kernel: HomoptKernel,
    decay: f64,
    estimator: HomoptEstimator,
    out: *mut *mut HomoptPosterior,
) -> HomoptStatus {
    guard(|| {
        null_check(points, "points")?;
        null_check(values, "values")?;
        null_check(lower, "lower")?;
        null_check(upper, "upper")?;
        null_check(out, "out")?;
        if dim == 0 {
            set_error("dim must be positive");
            return Err(HomoptStatus::InvalidArgument);
        }
        let flat = std::slice::from_raw_parts(points, n * dim);
        let region = Region::new(
            std::slice::from_raw_parts(lower, dim).to_vec(),
            std::slice::from_raw_parts(upper, dim).to_vec(),
        )
        .map_err(fail)?;
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let vals = std::slice::from_raw_parts(values, n).to_vec();
        let history = EvaluationHistory::new(region, pts, vals).map_err(fail)?;
        let k = kernel_of(kernel, decay).map_err(fail)?;
        let post =
            SurrogatePosterior::build(&history, &k, estimator_of(estimator)).map_err(fail)?;
        *out = Box::into_raw(Box::new(HomoptPosterior(post)));
        Ok(())
    })
}

/// Estimated `mu` and `sigma2`.
///
/// # Safety
/// `p` must be a live posterior handle; `mu` and `sigma2` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn homopt_posterior_parameters(
    p: *const HomoptPosterior,
    mu: *mut f64,
    sigma2: *mut f64,
) -> HomoptStatus {
    guard(|| {
        null_check(p, "posterior")?;
        null_check(mu, "mu")?;
        null_check(sigma2, "sigma2")?;
        let params = (*p).0.parameters();
        *mu = params.mu;
        *sigma2 = params.sigma2;
        Ok(())
    })
}

/// Conditional mean and variance at `x` (`dim` entries).
///
/// # Safety
/// `p` must be a live posterior handle, `x` must hold `dim` doubles and
/// `mean`, `variance` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn homopt_posterior_moments(
    p: *const HomoptPosterior,
    x: *const f64,
    dim: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> HomoptStatus {
    guard(|| {
        null_check(p, "posterior")?;
        null_check(x, "x")?;
        null_check(mean, "mean")?;
        null_check(variance, "variance")?;
        let post = &(*p).0;
        if dim != post.history().region().dim() {
            set_error(format!(
                "x has {dim} coordinates, the model has {}",
                post.history().region().dim()
            ));
            return Err(HomoptStatus::InvalidArgument);
        }
        let m = post.conditional_moments(std::slice::from_raw_parts(x, dim));
        *mean = m.mean;
        *variance = m.variance;
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn homopt_posterior_free(p: *mut HomoptPosterior) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn config_of(algorithm: HomoptAlgorithm, epsilon: f64) -> OptimizerConfig {
    OptimizerConfig {
        algorithm: match algorithm {
            HomoptAlgorithm::P => Algorithm::PAlgorithm,
            HomoptAlgorithm::Ei => Algorithm::OneStepBayes,
        },
        epsilon,
        ..OptimizerConfig::default()
    }
}

/// Runs the algorithm on a built-in objective (`sin3x`, `rastrigin1d`,
/// `gramacy-lee`, `quadratic`, `branin`) with the default design and grid.
///
/// # Safety
/// `objective` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_run_builtin(
    algorithm: HomoptAlgorithm,
    objective: *const c_char,
    epsilon: f64,
    budget: usize,
    out: *mut *mut HomoptTrace,
) -> HomoptStatus {
    guard(|| {
        null_check(out, "out")?;
        let o = objectives::builtin(read_str(objective, "objective")?).map_err(fail)?;
        let region = o.region();
        let design = optimizer::default_initial_design(&region);
        let trace = optimizer::run(
            &config_of(algorithm, epsilon),
            &region,
            |x| o.eval(x),
            &design,
            budget,
        )
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(HomoptTrace(trace)));
        Ok(())
    })
}

/// Runs the algorithm on a caller-supplied objective over `[lower, upper]`.
/// The callback receives the point (`dim` entries) and `user_data`.
///
/// # Safety
/// `lower` and `upper` must hold `dim` doubles, `objective` must be safe to
/// call with `user_data`, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn homopt_run_callback(
    algorithm: HomoptAlgorithm,
    objective: Option<extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>,
    user_data: *mut c_void,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    epsilon: f64,
    budget: usize,
    out: *mut *mut HomoptTrace,
) -> HomoptStatus {
    guard(|| {
        let Some(f) = objective else {
            set_error("objective is null");
            return Err(HomoptStatus::NullPointer);
        };
        null_check(lower, "lower")?;
        null_check(upper, "upper")?;
        null_check(out, "out")?;
        let region = Region::new(
            std::slice::from_raw_parts(lower, dim).to_vec(),
            std::slice::from_raw_parts(upper, dim).to_vec(),
        )
        .map_err(fail)?;
        let design = optimizer::default_initial_design(&region);
        let trace = optimizer::run(
            &config_of(algorithm, epsilon),
            &region,
            |x| f(x.as_ptr(), x.len(), user_data),
            &design,
            budget,
        )
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(HomoptTrace(trace)));
        Ok(())
    })
}

/// Number of rows, initial design included. 0 if `t` is NULL.
///
/// # Safety
/// `t` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn homopt_trace_len(t: *const HomoptTrace) -> usize {
    if t.is_null() {
        0
    } else {
        (*t).0.rows.len()
    }
}

/// Copies row `i`; its point goes to `x` (at most `x_len` entries written).
///
/// # Safety
/// `t` must be a live trace handle, `row` a valid pointer and `x` NULL or
/// writable for `x_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn homopt_trace_row(
    t: *const HomoptTrace,
    i: usize,
    row: *mut HomoptTraceRow,
    x: *mut f64,
    x_len: usize,
) -> HomoptStatus {
    guard(|| {
        null_check(t, "trace")?;
        null_check(row, "row")?;
        let trace = &(*t).0;
        let Some(r) = trace.rows.get(i) else {
            set_error(format!("row {i} out of range"));
            return Err(HomoptStatus::InvalidArgument);
        };
        *row = HomoptTraceRow {
            iter: r.iter,
            grid_index: r.grid_index.map_or(-1, |g| g as i64),
            y: r.y,
            criterion: r.criterion.unwrap_or(f64::NAN),
            mu: r.mu.unwrap_or(f64::NAN),
            sigma2: r.sigma2.unwrap_or(f64::NAN),
            y_on: r.y_on.unwrap_or(f64::NAN),
            best: r.best,
        };
        if !x.is_null() {
            let n = x_len.min(r.x.len());
            ptr::copy_nonoverlapping(r.x.as_ptr(), x, n);
        }
        Ok(())
    })
}

/// Writes the trace as CSV.
///
/// # Safety
/// `t` must be a live trace handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn homopt_trace_write_csv(
    t: *const HomoptTrace,
    path: *const c_char,
) -> HomoptStatus {
    guard(|| {
        null_check(t, "trace")?;
        let path = read_str(path, "path")?;
        let file = std::fs::File::create(Path::new(path)).map_err(|e| fail(e.into()))?;
        (*t).0
            .write_csv(std::io::BufWriter::new(file))
            .map_err(fail)
    })
}

/// The trace as JSON; free with [`homopt_string_free`].
///
/// # Safety
/// `t` must be NULL or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn homopt_trace_to_json(t: *const HomoptTrace) -> *mut c_char {
    if t.is_null() {
        return ptr::null_mut();
    }
    match (*t).0.to_json() {
        Ok(s) => to_c_string(s),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `t` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn homopt_trace_free(t: *mut HomoptTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Runs a built-in objective on `f` and `a * f + b` and writes 1 to
/// `passed` when every step selects the same grid point (near-ties
/// allowed), else 0. `a` and `b` are numeral strings; if either is
/// infinite or infinitesimal the extended-arithmetic path is used.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn homopt_homogeneity_check(
    algorithm: HomoptAlgorithm,
    objective: *const c_char,
    a: *const c_char,
    b: *const c_char,
    budget: usize,
    passed: *mut c_int,
) -> HomoptStatus {
    guard(|| {
        null_check(passed, "passed")?;
        let o = objectives::builtin(read_str(objective, "objective")?).map_err(fail)?;
        let a: ExtendedNumeral = read_str(a, "a")?.parse().map_err(fail)?;
        let b: ExtendedNumeral = read_str(b, "b")?.parse().map_err(fail)?;
        let region = o.region();
        let design = optimizer::default_initial_design(&region);
        let config = config_of(algorithm, homopt::acquisition::DEFAULT_EPSILON);
        let report = match (a.as_finite(), b.as_finite()) {
            (Some(af), Some(bf)) => {
                if af <= 0.0 {
                    set_error(format!("a must be positive, got {af}"));
                    return Err(HomoptStatus::Config);
                }
                homogeneity::compare_finite(
                    &config,
                    &region,
                    |x| o.eval(x),
                    af,
                    bf,
                    &design,
                    budget,
                )
            }
            _ => homogeneity::compare_extended(
                &config,
                &region,
                |x| o.eval(x),
                &a,
                &b,
                &design,
                budget,
            ),
        }
        .map_err(fail)?;
        *passed = c_int::from(report.passed());
        Ok(())
    })
}
