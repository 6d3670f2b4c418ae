//! C ABI for the stabchan library.
//!
//! All functions return an [`ScStatus`]; results come back through out
//! pointers holding opaque handles ([`ScMatrix`], [`ScChannel`]) or
//! heap-allocated strings. Handles are freed with the matching `*_free`
//! function, strings with [`sc_string_free`]. On any non-OK status,
//! [`sc_last_error_message`] returns a thread-local description of what
//! went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use stabchan::channel::{
    apply_choi_linear, fixed_point, is_completely_positive, is_trace_preserving, ChoiMatrix,
};
use stabchan::json;
use stabchan::qmat::{gibbs, ComplexMatrix, DensityMatrix, HermitianMatrix};
use stabchan::scattering::{collision_choi, partial_swap, CollisionSpec};
use stabchan::sdpcert::{brute_force_min_trace, certify_optimality};
use stabchan::stabilizer::{
    is_in_family, iterate, min_choi, FamilyChannel, StabilizerTarget,
};
use stabchan::{tol, Error};
use num_complex::Complex64;

/// Status of a C API call. Mirrors the CLI exit-code contract, with an
/// extra code for null arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    VerificationFailed = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    NullArgument = 4,
}

/// Opaque dense complex matrix.
pub struct ScMatrix(ComplexMatrix);

/// Opaque channel (Choi matrix with dimensions).
pub struct ScChannel(ChoiMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(e: Error) -> ScStatus {
    let status = match e.exit_code() {
        1 => ScStatus::VerificationFailed,
        2 => ScStatus::InvalidInput,
        _ => ScStatus::NumericalFailure,
    };
    set_error(e.to_string());
    status
}

fn null_arg(name: &str) -> ScStatus {
    set_error(format!("null argument: {name}"));
    ScStatus::NullArgument
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread, or NULL when the last
/// call succeeded. Valid until the next failing call on the same thread;
/// do not free.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `stabchan` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a matrix from `2 * rows * cols` interleaved doubles
/// (re0, im0, re1, im1, ... in row-major order).
///
/// # Safety
/// `entries` must point to `2 * rows * cols` readable doubles; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_new(
    rows: usize,
    cols: usize,
    entries: *const f64,
    out: *mut *mut ScMatrix,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if entries.is_null() {
        return null_arg("entries");
    }
    let raw = std::slice::from_raw_parts(entries, 2 * rows * cols);
    let data = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    match ComplexMatrix::new(rows, cols, data) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(ScMatrix(m)));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, ScStatus> {
    if text.is_null() {
        return Err(null_arg("text"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("string is not valid UTF-8".into());
        ScStatus::InvalidInput
    })
}

/// Parse a matrix from its JSON form
/// `{"rows": r, "cols": c, "data": [[re, im], ...]}`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_from_json(
    text: *const c_char,
    out: *mut *mut ScMatrix,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match json::parse_matrix(text) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(ScMatrix(m)));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serialize a matrix to JSON; free the result with [`sc_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_to_json(
    matrix: *const ScMatrix,
    out: *mut *mut c_char,
) -> ScStatus {
    if matrix.is_null() {
        return null_arg("matrix");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let text = json::matrix_to_string(&(*matrix).0);
    match CString::new(text) {
        Ok(s) => {
            *out = s.into_raw();
            ScStatus::Ok
        }
        Err(_) => {
            set_error("serialized matrix contained a NUL byte".into());
            ScStatus::NumericalFailure
        }
    }
}

/// # Safety
/// `matrix` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_rows(matrix: *const ScMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    (*matrix).0.n_rows()
}

/// # Safety
/// `matrix` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_cols(matrix: *const ScMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    (*matrix).0.n_cols()
}

/// Read one entry.
///
/// # Safety
/// `matrix` must be a live handle; `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_get(
    matrix: *const ScMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> ScStatus {
    if matrix.is_null() {
        return null_arg("matrix");
    }
    if re.is_null() || im.is_null() {
        return null_arg("re/im");
    }
    let m = &(*matrix).0;
    if row >= m.n_rows() || col >= m.n_cols() {
        set_error(format!(
            "index ({row}, {col}) out of bounds for {}x{}",
            m.n_rows(),
            m.n_cols()
        ));
        return ScStatus::InvalidInput;
    }
    let z = m.get(row, col);
    *re = z.re;
    *im = z.im;
    ScStatus::Ok
}

/// # Safety
/// `matrix` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_matrix_free(matrix: *mut ScMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Parse a channel from `{"choi": ..., "d_out": n, "d_in": m}`.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_from_json(
    text: *const c_char,
    out: *mut *mut ScChannel,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match json::parse_channel(text) {
        Ok(c) => {
            *out = Box::into_raw(Box::new(ScChannel(c)));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serialize a channel to JSON; free with [`sc_string_free`].
///
/// # Safety
/// `channel` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_to_json(
    channel: *const ScChannel,
    out: *mut *mut c_char,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let text = json::channel_to_string(&(*channel).0);
    match CString::new(text) {
        Ok(s) => {
            *out = s.into_raw();
            ScStatus::Ok
        }
        Err(_) => {
            set_error("serialized channel contained a NUL byte".into());
            ScStatus::NumericalFailure
        }
    }
}

/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_d_out(channel: *const ScChannel) -> usize {
    if channel.is_null() {
        return 0;
    }
    (*channel).0.d_out()
}

/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_d_in(channel: *const ScChannel) -> usize {
    if channel.is_null() {
        return 0;
    }
    (*channel).0.d_in()
}

/// # Safety
/// `channel` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_free(channel: *mut ScChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

unsafe fn density_from(matrix: *const ScMatrix, name: &str) -> Result<DensityMatrix, ScStatus> {
    if matrix.is_null() {
        return Err(null_arg(name));
    }
    DensityMatrix::from_complex((*matrix).0.clone()).map_err(fail)
}

unsafe fn hermitian_from(matrix: *const ScMatrix, name: &str) -> Result<HermitianMatrix, ScStatus> {
    if matrix.is_null() {
        return Err(null_arg(name));
    }
    HermitianMatrix::new((*matrix).0.clone()).map_err(fail)
}

/// Thermal state `exp(-βH)/Z`.
///
/// # Safety
/// `hamiltonian` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_gibbs(
    hamiltonian: *const ScMatrix,
    beta: f64,
    out: *mut *mut ScMatrix,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let h = match hermitian_from(hamiltonian, "hamiltonian") {
        Ok(h) => h,
        Err(status) => return status,
    };
    match gibbs(&h, beta) {
        Ok(state) => {
            *out = Box::into_raw(Box::new(ScMatrix(state.as_matrix().clone())));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Minimum-trace channel fixing `sigma`. Reports the Choi trace
/// (`1/λ_max`), `λ_max` itself, and whether the top eigenvalue was
/// degenerate (making the construction convention-dependent).
///
/// # Safety
/// `sigma` must be a live handle; out pointers must be valid or NULL for
/// the scalar reports.
#[no_mangle]
pub unsafe extern "C" fn sc_min_channel(
    sigma: *const ScMatrix,
    out: *mut *mut ScChannel,
    trace: *mut f64,
    lambda_max: *mut f64,
    degenerate: *mut bool,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match StabilizerTarget::new(state) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let choi = min_choi(&target);
    if !trace.is_null() {
        *trace = choi.matrix().trace().re;
    }
    if !lambda_max.is_null() {
        *lambda_max = target.lambda_max();
    }
    if !degenerate.is_null() {
        *degenerate = target.is_degenerate();
    }
    *out = Box::into_raw(Box::new(ScChannel(choi)));
    ScStatus::Ok
}

/// Trace-preserving completion channel for `sigma` and completion state
/// `b`. Reports the completion overlap `q`, complete positivity, and the
/// CP-gap eigenvalue (minimum eigenvalue of `σ - (1-λ_max)B`).
///
/// # Safety
/// `sigma` and `b` must be live handles; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_tp_channel(
    sigma: *const ScMatrix,
    b: *const ScMatrix,
    out: *mut *mut ScChannel,
    overlap_q: *mut f64,
    cp: *mut bool,
    gap_min_eig: *mut f64,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let completion = match density_from(b, "b") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match StabilizerTarget::new(state) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let fam = match FamilyChannel::new(target, completion) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let choi = fam.choi();
    if !overlap_q.is_null() {
        *overlap_q = fam.overlap_q();
    }
    if !gap_min_eig.is_null() {
        *gap_min_eig = match fam.cp_sector_min_eig() {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
    }
    if !cp.is_null() {
        *cp = match is_completely_positive(&choi, tol::CHECK) {
            Ok(r) => r.is_cp,
            Err(e) => return fail(e),
        };
    }
    *out = Box::into_raw(Box::new(ScChannel(choi)));
    ScStatus::Ok
}

/// Apply a channel to a state (as a raw matrix; the output trace may differ
/// from one for non-trace-preserving channels).
///
/// # Safety
/// `channel` and `rho` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_apply(
    channel: *const ScChannel,
    rho: *const ScMatrix,
    out: *mut *mut ScMatrix,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    if rho.is_null() {
        return null_arg("rho");
    }
    if out.is_null() {
        return null_arg("out");
    }
    match apply_choi_linear(&(*channel).0, &(*rho).0) {
        Ok(image) => {
            *out = Box::into_raw(Box::new(ScMatrix(image)));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `Tr_out[C] = I` within `tol`; the defect is `‖Tr_out[C] - I‖_max`.
///
/// # Safety
/// `channel` must be a live handle; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_is_trace_preserving(
    channel: *const ScChannel,
    tolerance: f64,
    is_tp: *mut bool,
    defect: *mut f64,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    let report = is_trace_preserving(&(*channel).0, tolerance);
    if !is_tp.is_null() {
        *is_tp = report.is_tp;
    }
    if !defect.is_null() {
        *defect = report.defect;
    }
    ScStatus::Ok
}

/// `C ⪰ 0` within `tol`; also reports the minimum eigenvalue.
///
/// # Safety
/// `channel` must be a live handle; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_is_completely_positive(
    channel: *const ScChannel,
    tolerance: f64,
    is_cp: *mut bool,
    min_eigenvalue: *mut f64,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    match is_completely_positive(&(*channel).0, tolerance) {
        Ok(report) => {
            if !is_cp.is_null() {
                *is_cp = report.is_cp;
            }
            if !min_eigenvalue.is_null() {
                *min_eigenvalue = report.min_eigenvalue;
            }
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fixed point of a trace-preserving channel. With a degenerate fixed
/// space, `unique` is false and the returned state is the projection of the
/// maximally mixed state.
///
/// # Safety
/// `channel` must be a live handle; `state` must be valid; other out
/// pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_channel_fixed_point(
    channel: *const ScChannel,
    tolerance: f64,
    state: *mut *mut ScMatrix,
    unique: *mut bool,
    space_dim: *mut usize,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    if state.is_null() {
        return null_arg("state");
    }
    match fixed_point(&(*channel).0, tolerance) {
        Ok(report) => {
            if !unique.is_null() {
                *unique = report.unique;
            }
            if !space_dim.is_null() {
                *space_dim = report.space_dim;
            }
            *state = Box::into_raw(Box::new(ScMatrix(report.state.as_matrix().clone())));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Check the closed-form optimality certificate for `sigma`: both programs
/// evaluate to `1/λ_max` and the gap closes within `tol`.
///
/// # Safety
/// `sigma` must be a live handle; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_verify_sdp(
    sigma: *const ScMatrix,
    tolerance: f64,
    primal_trace: *mut f64,
    dual_value: *mut f64,
    gap: *mut f64,
    certified: *mut bool,
) -> ScStatus {
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match certify_optimality(&state, tolerance) {
        Ok(report) => {
            if !primal_trace.is_null() {
                *primal_trace = report.primal_trace;
            }
            if !dual_value.is_null() {
                *dual_value = report.dual_value;
            }
            if !gap.is_null() {
                *gap = report.gap;
            }
            if !certified.is_null() {
                *certified = report.certified;
            }
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Independent minimum-trace search (d ≤ 3), deterministic per seed.
///
/// # Safety
/// `sigma` must be a live handle; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_oracle_min_trace(
    sigma: *const ScMatrix,
    budget: usize,
    seed: u64,
    value: *mut f64,
) -> ScStatus {
    if value.is_null() {
        return null_arg("value");
    }
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match brute_force_min_trace(&state, budget, seed) {
        Ok(v) => {
            *value = v;
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Membership of a channel in the stabilizing family of `sigma`. On
/// success, `completion` (when non-NULL) receives the recovered completion
/// state or NULL if the channel is not in the family.
///
/// # Safety
/// `channel` and `sigma` must be live handles; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_is_in_family(
    channel: *const ScChannel,
    sigma: *const ScMatrix,
    tolerance: f64,
    in_family: *mut bool,
    completion: *mut *mut ScMatrix,
) -> ScStatus {
    if channel.is_null() {
        return null_arg("channel");
    }
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match StabilizerTarget::new(state) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let report = is_in_family(&(*channel).0, &target, tolerance);
    if !in_family.is_null() {
        *in_family = report.in_family;
    }
    if !completion.is_null() {
        *completion = match (report.in_family, report.completion) {
            (true, Some(b)) => Box::into_raw(Box::new(ScMatrix(b.as_matrix().clone()))),
            _ => std::ptr::null_mut(),
        };
    }
    ScStatus::Ok
}

/// Collision channel `ρ ↦ Tr_X[S(ρ_X ⊗ ρ)S†]` from a joint unitary and a
/// bath state.
///
/// # Safety
/// `s` and `rho_x` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_collision_channel(
    s: *const ScMatrix,
    rho_x: *const ScMatrix,
    d_y: usize,
    out: *mut *mut ScChannel,
) -> ScStatus {
    if s.is_null() {
        return null_arg("s");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let bath = match density_from(rho_x, "rho_x") {
        Ok(b) => b,
        Err(status) => return status,
    };
    let spec = match CollisionSpec::new((*s).0.clone(), bath, d_y) {
        Ok(spec) => spec,
        Err(e) => return fail(e),
    };
    match collision_choi(&spec) {
        Ok(choi) => {
            *out = Box::into_raw(Box::new(ScChannel(choi)));
            ScStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The partial-swap unitary `cos θ · I + i sin θ · SWAP` on `d ⊗ d`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_partial_swap(
    theta: f64,
    d: usize,
    out: *mut *mut ScMatrix,
) -> ScStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if d < 1 {
        set_error("dimension must be positive".into());
        return ScStatus::InvalidInput;
    }
    *out = Box::into_raw(Box::new(ScMatrix(partial_swap(theta, d))));
    ScStatus::Ok
}

/// Iterate the completion channel of (`sigma`, `b`) from `rho0` and return
/// the per-step CSV trace (`n,p_n,weight_B,dist_to_sigma`); free it with
/// [`sc_string_free`]. Also reports the final trace distance to `sigma`
/// and whether the run stagnated.
///
/// # Safety
/// All matrix arguments must be live handles; `csv` must be valid; other
/// out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn sc_iterate_csv(
    sigma: *const ScMatrix,
    b: *const ScMatrix,
    rho0: *const ScMatrix,
    steps: usize,
    csv: *mut *mut c_char,
    final_dist: *mut f64,
    stagnant: *mut bool,
) -> ScStatus {
    if csv.is_null() {
        return null_arg("csv");
    }
    let state = match density_from(sigma, "sigma") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let completion = match density_from(b, "b") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let initial = match density_from(rho0, "rho0") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match StabilizerTarget::new(state) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let fam = match FamilyChannel::new(target, completion) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    match iterate(&fam, &initial, steps, None) {
        Ok(trace) => {
            if !final_dist.is_null() {
                *final_dist = trace.final_distance();
            }
            if !stagnant.is_null() {
                *stagnant = trace.stagnant;
            }
            match CString::new(trace.to_csv()) {
                Ok(s) => {
                    *csv = s.into_raw();
                    ScStatus::Ok
                }
                Err(_) => {
                    set_error("CSV contained a NUL byte".into());
                    ScStatus::NumericalFailure
                }
            }
        }
        Err(e) => fail(e),
    }
}
