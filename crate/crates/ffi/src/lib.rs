//! C ABI over `bfrate`.
//!
//! Channels live behind an opaque [`BfrateChannel`] handle. Every fallible
//! call returns a [`BfrateStatus`] and writes results through out-pointers;
//! on failure the out-pointers are left untouched and a message is kept per
//! thread for [`bfrate_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bfrate::bounds::{bound_point, DispersionStats};
use bfrate::fading::{ChannelSpec, FadingDistribution};
use bfrate::montecarlo::{simulate_information_density, simulate_st_controller, SimConfig};
use bfrate::specfun::{inv_cdf, std_normal_cdf, Probability};
use bfrate::waterfill::solve_waterfill;
use bfrate::Error;

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfrateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoConvergence = 4,
    BudgetBackoff = 5,
    Panic = 6,
}

/// A fading channel: gains, probabilities, noise variance and coherence length.
pub struct BfrateChannel {
    spec: ChannelSpec,
}

/// Capacity (nats per use), dispersions and water level at one budget.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfrateDispersion {
    pub capacity: f64,
    pub v_bf: f64,
    pub v_bf_prime: f64,
    pub lambda: f64,
    pub nocsit_capacity: f64,
    pub nocsit_v: f64,
}

/// Bounds on `log M*` in nats and the matching rates.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfrateBounds {
    pub n: u64,
    pub blocks: u64,
    pub log_m_lb_st: f64,
    pub log_m_lb_lt: f64,
    pub log_m_ub_st: f64,
    pub log_m_ub_lt: f64,
    pub rate_lb_st: f64,
    pub rate_lb_lt: f64,
    pub rate_ub_st: f64,
    pub rate_ub_lt: f64,
    pub rate_nocsit: f64,
}

/// Monte Carlo settings. Results depend only on these values, not on the
/// number of worker threads.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfrateSimConfig {
    pub budget: f64,
    pub blocks: u64,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfrateViolation {
    pub empirical_prob: f64,
    pub violations: u64,
    pub hoeffding_bound: f64,
    pub binomial_sigma: f64,
    pub delta_b: f64,
    pub lambda_b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfrateDensity {
    pub empirical_mean_per_use: f64,
    pub empirical_var_per_use: f64,
    pub analytic_mean: f64,
    pub analytic_var: f64,
    pub mean_std_error: f64,
    pub ks_distance: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BfrateStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter { .. } => BfrateStatus::InvalidArgument,
            Error::Domain { .. } => BfrateStatus::Domain,
            Error::NoConvergence { .. } => BfrateStatus::NoConvergence,
            Error::BudgetBackoff { .. } => BfrateStatus::BudgetBackoff,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BfrateStatus::NullPointer, format!("`{what}` is null"))
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BfrateStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            BfrateStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BfrateStatus::Panic
        }
    }
}

unsafe fn channel_ref<'a>(channel: *const BfrateChannel) -> Result<&'a ChannelSpec, Failure> {
    channel.as_ref().map(|c| &c.spec).ok_or_else(|| null("channel"))
}

unsafe fn out_ref<'a, T>(out: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    out.as_mut().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full message length plus one,
/// or 0 if the last call on this thread succeeded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn bfrate_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bfrate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a channel from `len` gains and probabilities. Gains must be
/// distinct and positive; probabilities must sum to 1 within 1e-9.
///
/// # Safety
/// `gains` and `probs` must point to `len` readable doubles; `out` must be
/// writable. Release the handle with [`bfrate_channel_free`].
#[no_mangle]
pub unsafe extern "C" fn bfrate_channel_new(
    gains: *const f64,
    probs: *const f64,
    len: usize,
    noise_var: f64,
    n_c: u32,
    out: *mut *mut BfrateChannel,
) -> BfrateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if gains.is_null() {
            return Err(null("gains"));
        }
        if probs.is_null() {
            return Err(null("probs"));
        }
        let gains = std::slice::from_raw_parts(gains, len).to_vec();
        let probs = std::slice::from_raw_parts(probs, len).to_vec();
        let spec = ChannelSpec::new(noise_var, n_c, FadingDistribution::new(gains, probs)?)?;
        *out = Box::into_raw(Box::new(BfrateChannel { spec }));
        Ok(())
    })
}

/// Builds a named preset: `"paper-rayleigh"` (ten-state discretized
/// Rayleigh) or `"two-state"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_channel_preset(name: *const c_char, out: *mut *mut BfrateChannel) -> BfrateStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if name.is_null() {
            return Err(null("name"));
        }
        let spec = match CStr::from_ptr(name).to_bytes() {
            b"paper-rayleigh" => ChannelSpec::paper_rayleigh(),
            b"two-state" => ChannelSpec::two_state(),
            other => {
                return Err(Failure(
                    BfrateStatus::InvalidArgument,
                    format!("unknown preset `{}`", String::from_utf8_lossy(other)),
                ))
            }
        };
        *out = Box::into_raw(Box::new(BfrateChannel { spec }));
        Ok(())
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bfrate_channel_free(channel: *mut BfrateChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Number of fading states, or 0 for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bfrate_channel_num_states(channel: *const BfrateChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.spec.fading.len())
}

/// Water level for `budget`. When `powers` is non-null it receives the
/// per-state powers in ascending gain order; `powers_len` must then equal
/// the number of states.
///
/// # Safety
/// `channel` must be a live handle, `lambda` writable, and `powers` null or
/// valid for `powers_len` writes.
#[no_mangle]
pub unsafe extern "C" fn bfrate_waterfill(
    channel: *const BfrateChannel,
    budget: f64,
    lambda: *mut f64,
    powers: *mut f64,
    powers_len: usize,
) -> BfrateStatus {
    guard(|| {
        let spec = channel_ref(channel)?;
        let lambda = out_ref(lambda, "lambda")?;
        if !powers.is_null() && powers_len != spec.fading.len() {
            return Err(Failure(
                BfrateStatus::InvalidArgument,
                format!("powers_len {powers_len} != {} states", spec.fading.len()),
            ));
        }
        let alloc = solve_waterfill(spec, budget)?;
        *lambda = alloc.lambda;
        if !powers.is_null() {
            std::slice::from_raw_parts_mut(powers, powers_len).copy_from_slice(&alloc.powers);
        }
        Ok(())
    })
}

/// Capacity and dispersions at `budget`.
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_dispersion(
    channel: *const BfrateChannel,
    budget: f64,
    out: *mut BfrateDispersion,
) -> BfrateStatus {
    guard(|| {
        let spec = channel_ref(channel)?;
        let out = out_ref(out, "out")?;
        let s = DispersionStats::compute(spec, budget)?;
        *out = BfrateDispersion {
            capacity: s.capacity,
            v_bf: s.v_bf,
            v_bf_prime: s.v_bf_prime,
            lambda: s.lambda,
            nocsit_capacity: s.nocsit_capacity,
            nocsit_v: s.nocsit_v,
        };
        Ok(())
    })
}

/// The four bounds at blocklength `n` (a multiple of the coherence length)
/// and error probability `epsilon` in (0, ½).
///
/// # Safety
/// `channel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_bounds(
    channel: *const BfrateChannel,
    budget: f64,
    n: u64,
    epsilon: f64,
    beta: f64,
    out: *mut BfrateBounds,
) -> BfrateStatus {
    guard(|| {
        let spec = channel_ref(channel)?;
        let out = out_ref(out, "out")?;
        let stats = DispersionStats::compute(spec, budget)?;
        let b = bound_point(&stats, n, spec.n_c, spec.fading.len(), Probability::new(epsilon)?, beta)?;
        *out = BfrateBounds {
            n: b.n,
            blocks: b.blocks,
            log_m_lb_st: b.log_m_lb_st,
            log_m_lb_lt: b.log_m_lb_lt,
            log_m_ub_st: b.log_m_ub_st,
            log_m_ub_lt: b.log_m_ub_lt,
            rate_lb_st: b.rate_lb_st,
            rate_lb_lt: b.rate_lb_lt,
            rate_ub_st: b.rate_ub_st,
            rate_ub_lt: b.rate_ub_lt,
            rate_nocsit: b.rate_nocsit,
        };
        Ok(())
    })
}

/// Standard normal CDF.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_normal_cdf(x: f64, out: *mut f64) -> BfrateStatus {
    guard(|| {
        *out_ref(out, "out")? = std_normal_cdf(x)?;
        Ok(())
    })
}

/// Standard normal quantile for `p` in (0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_normal_inv_cdf(p: f64, out: *mut f64) -> BfrateStatus {
    guard(|| {
        *out_ref(out, "out")? = inv_cdf(p)?;
        Ok(())
    })
}

fn sim_config(spec: &ChannelSpec, cfg: &BfrateSimConfig) -> SimConfig {
    SimConfig {
        spec: spec.clone(),
        budget: cfg.budget,
        blocks: cfg.blocks,
        alpha: cfg.alpha,
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

/// Simulates the short-term power controller.
///
/// # Safety
/// `channel` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_simulate_controller(
    channel: *const BfrateChannel,
    config: *const BfrateSimConfig,
    out: *mut BfrateViolation,
) -> BfrateStatus {
    guard(|| {
        let spec = channel_ref(channel)?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out_ref(out, "out")?;
        let r = simulate_st_controller(&sim_config(spec, config))?;
        *out = BfrateViolation {
            empirical_prob: r.empirical_prob,
            violations: r.violations,
            hoeffding_bound: r.hoeffding_bound,
            binomial_sigma: r.binomial_sigma(),
            delta_b: r.delta_b,
            lambda_b: r.lambda_b,
        };
        Ok(())
    })
}

/// Simulates the information density sum (at least 100 trials).
///
/// # Safety
/// `channel` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bfrate_simulate_density(
    channel: *const BfrateChannel,
    config: *const BfrateSimConfig,
    out: *mut BfrateDensity,
) -> BfrateStatus {
    guard(|| {
        let spec = channel_ref(channel)?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out_ref(out, "out")?;
        let d = simulate_information_density(&sim_config(spec, config))?;
        *out = BfrateDensity {
            empirical_mean_per_use: d.empirical_mean_per_use,
            empirical_var_per_use: d.empirical_var_per_use,
            analytic_mean: d.analytic_mean,
            analytic_var: d.analytic_var,
            mean_std_error: d.mean_std_error,
            ks_distance: d.ks_distance,
        };
        Ok(())
    })
}
