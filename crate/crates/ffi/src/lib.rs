//! C ABI for the excess-risk laboratory.
//!
//! Every function returns an [`ErlabStatus`]; results are written through
//! out-pointers. On failure a message is available from
//! [`erlab_last_error_message`] on the same thread until the next call.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use erlab::bounds::{legendre_dual_inverse, posterior_sampling_mi_bound, CumulantEnvelope, PriorFamily};
use erlab::game::{solve_fictitious_play, solve_lp, PayoffMatrix};
use erlab::linear::{cmi_y_given_xzn, mi_w_zn, LinearModelSpec};
use erlab::prob::SeedSpec;
use erlab::vc::{blahut_arimoto, sauer_bound, DiscreteChannel};
use erlab::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    SizeLimit = 5,
    Unsupported = 6,
    Panic = 7,
}

/// Gaussian linear model.
pub struct ErlabLinearModel {
    spec: LinearModelSpec,
}

/// Payoff matrix of a finite game.
pub struct ErlabPayoff {
    matrix: PayoffMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> ErlabStatus {
    match err {
        Error::DimensionMismatch { .. } => ErlabStatus::DimensionMismatch,
        Error::Singular(_) => ErlabStatus::Singular,
        Error::InvalidArgument(_) => ErlabStatus::InvalidArgument,
        Error::SizeLimit { .. } => ErlabStatus::SizeLimit,
        Error::Unsupported(_) => ErlabStatus::Unsupported,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ErlabStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ErlabStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            ErlabStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            ErlabStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn erlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread; empty after success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn erlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Model with `φ ≡ 1` (d = 1).
///
/// # Safety
/// `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn erlab_linear_model_constant_feature(
    sigma_w: f64,
    sigma_e: f64,
    mu: f64,
    c: f64,
    out_model: *mut *mut ErlabLinearModel,
) -> ErlabStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let spec = LinearModelSpec::constant_feature(sigma_w, sigma_e, mu, c)?;
        *slot = Box::into_raw(Box::new(ErlabLinearModel { spec }));
        Ok(())
    })
}

/// Model with identity features and inputs uniform on `[-1/√d, 1/√d]^d`;
/// `mu` has length `d`.
///
/// # Safety
/// `mu` must point to `d` doubles and `out_model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_linear_model_identity(
    d: usize,
    sigma_w: f64,
    sigma_e: f64,
    mu: *const f64,
    c: f64,
    out_model: *mut *mut ErlabLinearModel,
) -> ErlabStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let mu = slice(mu, d, "mu")?.to_vec();
        let spec = LinearModelSpec::identity_unit_box(d, sigma_w, sigma_e, mu, c)?;
        *slot = Box::into_raw(Box::new(ErlabLinearModel { spec }));
        Ok(())
    })
}

/// Model from its JSON description (same schema as the `linear` config key).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_linear_model_from_json(json: *const c_char, out_model: *mut *mut ErlabLinearModel) -> ErlabStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Error::InvalidArgument("json is not UTF-8".into()))?;
        let spec: LinearModelSpec = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        spec.validate()?;
        *slot = Box::into_raw(Box::new(ErlabLinearModel { spec }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from an `erlab_linear_model_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn erlab_linear_model_free(model: *mut ErlabLinearModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Monte Carlo `I(W; Z^n)` in nats.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_mi_w_zn(
    model: *const ErlabLinearModel,
    n: usize,
    reps: usize,
    seed: u64,
    stream: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> ErlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Fail::Null("model"))?;
        let (mean, se) = (out(out_mean, "out_mean")?, out(out_std_error, "out_std_error")?);
        let est = mi_w_zn(&m.spec, n, reps, SeedSpec::new(seed, stream))?;
        *mean = est.mean;
        *se = est.std_error;
        Ok(())
    })
}

/// Monte Carlo `I(W; Y | X, Z^n)` in nats.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_cmi(
    model: *const ErlabLinearModel,
    n: usize,
    reps: usize,
    seed: u64,
    stream: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> ErlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Fail::Null("model"))?;
        let (mean, se) = (out(out_mean, "out_mean")?, out(out_std_error, "out_std_error")?);
        let est = cmi_y_given_xzn(&m.spec, n, reps, SeedSpec::new(seed, stream))?;
        *mean = est.mean;
        *se = est.std_error;
        Ok(())
    })
}

/// Posterior-sampling bound `φ*⁻¹((I(W;Z^n) + r)/n)` for the model's
/// sub-exponential envelope and prior-mean ball.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_posterior_sampling_mi_bound(
    model: *const ErlabLinearModel,
    mi_wzn: f64,
    n: usize,
    out_value: *mut f64,
) -> ErlabStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Fail::Null("model"))?;
        let v = out(out_value, "out_value")?;
        let env = CumulantEnvelope::sub_exponential(m.spec.sigma_w, m.spec.sigma_e)?;
        let fam = PriorFamily::for_model(&m.spec)?;
        *v = posterior_sampling_mi_bound(&env, &fam, mi_wzn, n)?.value;
        Ok(())
    })
}

/// Generalised inverse of the Legendre dual of the sub-exponential envelope.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_legendre_dual_inverse(sigma_w: f64, sigma_e: f64, x: f64, out_value: *mut f64) -> ErlabStatus {
    guard(|| {
        let v = out(out_value, "out_value")?;
        let env = CumulantEnvelope::sub_exponential(sigma_w, sigma_e)?;
        *v = legendre_dual_inverse(&env, x);
        Ok(())
    })
}

/// `(1 + d_vc ln n)/n`.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_sauer_bound(dvc: usize, n: usize, out_value: *mut f64) -> ErlabStatus {
    guard(|| {
        let v = out(out_value, "out_value")?;
        *v = sauer_bound(dvc, n)?;
        Ok(())
    })
}

/// Payoff matrix from `rows × cols` values in row-major order (row player
/// minimises).
///
/// # Safety
/// `values` must point to `rows * cols` doubles and `out_payoff` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erlab_payoff_new(rows: usize, cols: usize, values: *const f64, out_payoff: *mut *mut ErlabPayoff) -> ErlabStatus {
    guard(|| {
        let slot = out(out_payoff, "out_payoff")?;
        let len = rows.checked_mul(cols).ok_or_else(|| Error::InvalidArgument("matrix too large".into()))?;
        let v = slice(values, len, "values")?;
        let rows_vec: Vec<Vec<f64>> = v.chunks(cols.max(1)).map(<[f64]>::to_vec).collect();
        let matrix = PayoffMatrix::from_rows(&rows_vec)?;
        *slot = Box::into_raw(Box::new(ErlabPayoff { matrix }));
        Ok(())
    })
}

/// # Safety
/// `payoff` must come from `erlab_payoff_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn erlab_payoff_free(payoff: *mut ErlabPayoff) {
    if !payoff.is_null() {
        drop(Box::from_raw(payoff));
    }
}

/// Exact game solution. `out_row` holds `rows` doubles, `out_col` holds
/// `cols` doubles.
///
/// # Safety
/// All pointers must be valid and large enough.
#[no_mangle]
pub unsafe extern "C" fn erlab_solve_lp(payoff: *const ErlabPayoff, out_row: *mut f64, out_col: *mut f64, out_value: *mut f64) -> ErlabStatus {
    guard(|| {
        let p = payoff.as_ref().ok_or(Fail::Null("payoff"))?;
        let (m, n) = p.matrix.shape();
        let (row, col, value) = (slice_mut(out_row, m, "out_row")?, slice_mut(out_col, n, "out_col")?, out(out_value, "out_value")?);
        let s = solve_lp(&p.matrix)?;
        row.copy_from_slice(&s.row.weights);
        col.copy_from_slice(&s.col.weights);
        *value = s.value;
        Ok(())
    })
}

/// Fictitious play; `out_gap` receives the certified duality gap.
///
/// # Safety
/// All pointers must be valid and large enough.
#[no_mangle]
pub unsafe extern "C" fn erlab_solve_fictitious_play(
    payoff: *const ErlabPayoff,
    max_iters: usize,
    tol: f64,
    out_row: *mut f64,
    out_col: *mut f64,
    out_value: *mut f64,
    out_gap: *mut f64,
) -> ErlabStatus {
    guard(|| {
        let p = payoff.as_ref().ok_or(Fail::Null("payoff"))?;
        let (m, n) = p.matrix.shape();
        let row = slice_mut(out_row, m, "out_row")?;
        let col = slice_mut(out_col, n, "out_col")?;
        let (value, gap) = (out(out_value, "out_value")?, out(out_gap, "out_gap")?);
        let s = solve_fictitious_play(&p.matrix, max_iters, tol)?;
        row.copy_from_slice(&s.row.weights);
        col.copy_from_slice(&s.col.weights);
        *value = s.value;
        *gap = s.gap;
        Ok(())
    })
}

/// Capacity in nats of the channel with row-stochastic `inputs × outputs`
/// matrix (row-major); `out_prior` receives `inputs` doubles.
///
/// # Safety
/// All pointers must be valid and large enough.
#[no_mangle]
pub unsafe extern "C" fn erlab_blahut_arimoto(
    inputs: usize,
    outputs: usize,
    matrix: *const f64,
    tol: f64,
    out_capacity: *mut f64,
    out_prior: *mut f64,
) -> ErlabStatus {
    guard(|| {
        let len = inputs.checked_mul(outputs).ok_or_else(|| Error::InvalidArgument("channel too large".into()))?;
        let v = slice(matrix, len, "matrix")?;
        let cap = out(out_capacity, "out_capacity")?;
        let prior = slice_mut(out_prior, inputs, "out_prior")?;
        let ch = DiscreteChannel::from_matrix(v.chunks(outputs.max(1)).map(<[f64]>::to_vec).collect())?;
        let res = blahut_arimoto(&ch, tol)?;
        *cap = res.kappa;
        prior.copy_from_slice(&res.prior);
        Ok(())
    })
}
