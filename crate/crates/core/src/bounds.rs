//! Channel dispersions and the normal-approximation bounds on `log M*`.
//!
//! All quantities are in nats. The achievability side uses
//! `V_BF = E[V(G)] + n_c·Var[C(G)] + ½·Var[ℒ(G)]` and the converse side
//! `V_BF′ = E[V(G)] + Var[n_c·C(G) + P̄/(2λ) − ℒ(G)/2]`, with `G = H²·P_WF(H)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::ChannelSpec;
use crate::specfun::{std_normal_inv_cdf, Probability};
use crate::waterfill::{self, c_of, l_of, v_of, PowerAllocation};

/// Default exponent in the `n^((1−β)/2)` correction term.
pub const DEFAULT_BETA: f64 = 0.01;

/// Mean and variance of a per-state quantity under the fading law.
fn moments(probs: &[f64], values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    let mean: f64 = probs.iter().zip(&values).map(|(q, v)| q * v).sum();
    let var: f64 = probs
        .iter()
        .zip(&values)
        .map(|(q, v)| q * (v - mean) * (v - mean))
        .sum();
    (mean, var)
}

/// `V_BF(P̄)` for the allocation `alloc`.
pub fn dispersion_v_bf(spec: &ChannelSpec, alloc: &PowerAllocation) -> f64 {
    let g2 = alloc.received(&spec.fading);
    dispersion_from_received(spec, &g2)
}

// Shared by the CSIT and constant-power (no CSIT) dispersions.
fn dispersion_from_received(spec: &ChannelSpec, g2: &[f64]) -> f64 {
    let s = spec.noise_var;
    let q = spec.fading.probs();
    let (ev, _) = moments(q, g2.iter().map(|&x| v_of(x, s)));
    let (_, var_c) = moments(q, g2.iter().map(|&x| c_of(x, s)));
    let (_, var_l) = moments(q, g2.iter().map(|&x| l_of(x, s)));
    ev + f64::from(spec.n_c) * var_c + 0.5 * var_l
}

/// `V_BF′(P̄)` for the allocation `alloc`.
pub fn dispersion_v_bf_prime(spec: &ChannelSpec, alloc: &PowerAllocation) -> f64 {
    let s = spec.noise_var;
    let q = spec.fading.probs();
    let g2 = alloc.received(&spec.fading);
    let n_c = f64::from(spec.n_c);
    let offset = alloc.budget / (2.0 * alloc.lambda);
    let (ev, _) = moments(q, g2.iter().map(|&x| v_of(x, s)));
    let (_, var) = moments(q, g2.iter().map(|&x| n_c * c_of(x, s) + offset - 0.5 * l_of(x, s)));
    ev + var
}

/// Capacity and dispersion with constant power `P̄` in every state.
pub fn nocsit_stats(spec: &ChannelSpec, budget: f64) -> Result<(f64, f64)> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid("budget", format!("{budget} is not positive")));
    }
    let g2: Vec<f64> = spec.fading.gains().iter().map(|h| h * h * budget).collect();
    let cap = spec
        .fading
        .probs()
        .iter()
        .zip(&g2)
        .map(|(q, &x)| q * c_of(x, spec.noise_var))
        .sum();
    Ok((cap, dispersion_from_received(spec, &g2)))
}

/// Capacity, dispersions and water level for one channel and budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionStats {
    pub capacity: f64,
    pub v_bf: f64,
    pub v_bf_prime: f64,
    pub lambda: f64,
    pub nocsit_capacity: f64,
    pub nocsit_v: f64,
}

impl DispersionStats {
    pub fn compute(spec: &ChannelSpec, budget: f64) -> Result<Self> {
        let alloc = waterfill::solve_waterfill(spec, budget)?;
        let (nocsit_capacity, nocsit_v) = nocsit_stats(spec, budget)?;
        Ok(DispersionStats {
            capacity: waterfill::capacity(spec, &alloc),
            v_bf: dispersion_v_bf(spec, &alloc),
            v_bf_prime: dispersion_v_bf_prime(spec, &alloc),
            lambda: alloc.lambda,
            nocsit_capacity,
            nocsit_v,
        })
    }
}

/// Bounds on `log M*` (nats) and the corresponding rates at one `(n, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub n: u64,
    pub blocks: u64,
    pub epsilon: f64,
    pub beta: f64,
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

/// Evaluates the four bounds and the no-CSIT rate, dropping the
/// `O(n^β)`, `O(1/n^(1−β))` and `O(1/n)` residuals.
///
/// `n` must be a positive multiple of `n_c`; `num_states` sets the `|ℋ|/2`
/// coefficient of `log n` in the upper bounds.
pub fn bound_point(
    stats: &DispersionStats,
    n: u64,
    n_c: u32,
    num_states: usize,
    epsilon: Probability,
    beta: f64,
) -> Result<BoundPoint> {
    let eps = epsilon.value();
    if eps >= 0.5 {
        return Err(Error::Domain {
            function: "bound_point (epsilon must be below 1/2)",
            value: eps,
        });
    }
    if n_c == 0 || n == 0 || !n.is_multiple_of(u64::from(n_c)) {
        return Err(Error::invalid(
            "n",
            format!("{n} is not a positive multiple of n_c = {n_c}"),
        ));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta", format!("{beta} is outside (0, 1)")));
    }
    if num_states == 0 {
        return Err(Error::invalid("num_states", "at least one state"));
    }

    let nf = n as f64;
    let z = std_normal_inv_cdf(epsilon);
    let ln_n = nf.ln();
    let correction = 0.5 * ln_n - nf.powf(0.5 * (1.0 - beta));

    let log_m_lb_lt = nf * stats.capacity + (nf * stats.v_bf).sqrt() * z + correction;
    let log_m_lb_st = log_m_lb_lt - (nf / 2.0).sqrt();
    let log_m_ub_st = nf * stats.capacity + (nf * stats.v_bf_prime).sqrt() * z + 0.5 * num_states as f64 * ln_n;
    let log_m_ub_lt = log_m_ub_st + nf.sqrt() / (2.0 * stats.lambda);
    let log_m_nocsit = nf * stats.nocsit_capacity + (nf * stats.nocsit_v).sqrt() * z + correction;

    Ok(BoundPoint {
        n,
        blocks: n / u64::from(n_c),
        epsilon: eps,
        beta,
        log_m_lb_st,
        log_m_lb_lt,
        log_m_ub_st,
        log_m_ub_lt,
        rate_lb_st: log_m_lb_st / nf,
        rate_lb_lt: log_m_lb_lt / nf,
        rate_ub_st: log_m_ub_st / nf,
        rate_ub_lt: log_m_ub_lt / nf,
        rate_nocsit: log_m_nocsit / nf,
    })
}
