//! Water-filling power allocation across fading states and the scalar link
//! functions `C`, `ℒ` and `V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{ChannelSpec, FadingDistribution};

/// Bisection iteration cap for the water level.
pub const MAX_ITERATIONS: usize = 200;

/// Bisection stops once the budget residual is below this times `max(1, P̄)`.
pub const BISECTION_TOLERANCE: f64 = 1e-12;

/// Residual accepted when the bracket has collapsed to adjacent floats
/// (large water levels cannot resolve the bisection tolerance).
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// `C(x) = ½ log(1 + x/σ²)` in nats.
pub fn link_c(x: f64, noise_var: f64) -> Result<f64> {
    check_link("link_c", x)?;
    Ok(c_of(x, noise_var))
}

/// `ℒ(x) = x / (σ² + x)`.
pub fn link_l(x: f64, noise_var: f64) -> Result<f64> {
    check_link("link_l", x)?;
    Ok(l_of(x, noise_var))
}

/// `V(x) = ½[1 − (1 − ℒ(x))²]` in nats².
pub fn link_v(x: f64, noise_var: f64) -> Result<f64> {
    check_link("link_v", x)?;
    Ok(v_of(x, noise_var))
}

fn check_link(function: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, value: x })
    }
}

pub(crate) fn c_of(x: f64, noise_var: f64) -> f64 {
    0.5 * (x / noise_var).ln_1p()
}

pub(crate) fn l_of(x: f64, noise_var: f64) -> f64 {
    x / (noise_var + x)
}

pub(crate) fn v_of(x: f64, noise_var: f64) -> f64 {
    let r = noise_var / (noise_var + x);
    0.5 * (1.0 - r * r)
}

/// Water level and per-state powers for one average-power budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub lambda: f64,
    pub powers: Vec<f64>,
    pub budget: f64,
}

impl PowerAllocation {
    /// Received SNR-scaled powers `g_i² = η_i² · P_i`.
    pub fn received(&self, fading: &FadingDistribution) -> Vec<f64> {
        fading
            .gains()
            .iter()
            .zip(&self.powers)
            .map(|(h, p)| h * h * p)
            .collect()
    }
}

/// `(λ − σ²/η²)⁺`; a tie at the threshold gets zero power.
pub fn waterfill_power(lambda: f64, gain: f64, noise_var: f64) -> f64 {
    let p = lambda - noise_var / (gain * gain);
    if p > 0.0 {
        p
    } else {
        0.0
    }
}

fn mean_power(fading: &FadingDistribution, noise_var: f64, lambda: f64) -> f64 {
    fading.expect(|g| waterfill_power(lambda, g, noise_var))
}

/// Water level for an average budget on an arbitrary fading law.
pub fn water_level(fading: &FadingDistribution, noise_var: f64, budget: f64) -> Result<f64> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid("budget", format!("{budget} is not positive")));
    }
    let mut lo = noise_var / (fading.max_gain() * fading.max_gain());
    let mut hi = noise_var / (fading.min_gain() * fading.min_gain()) + budget;
    let tol = BISECTION_TOLERANCE * budget.max(1.0);

    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        residual = mean_power(fading, noise_var, mid) - budget;
        if residual.abs() <= tol {
            return Ok(mid);
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // Bracket collapsed to adjacent floats.
    let best = [lo, hi]
        .into_iter()
        .map(|l| (l, (mean_power(fading, noise_var, l) - budget).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if best.1 <= BUDGET_TOLERANCE * budget.max(1.0) {
        Ok(best.0)
    } else {
        Err(Error::NoConvergence {
            what: "water level bisection",
            iterations: MAX_ITERATIONS,
            residual: residual.abs().min(best.1),
        })
    }
}

/// Solves `E[(λ − σ²/H²)⁺] = P̄` by bisection.
pub fn solve_waterfill(spec: &ChannelSpec, budget: f64) -> Result<PowerAllocation> {
    let lambda = water_level(&spec.fading, spec.noise_var, budget)?;
    let powers = spec
        .fading
        .gains()
        .iter()
        .map(|&g| waterfill_power(lambda, g, spec.noise_var))
        .collect();
    Ok(PowerAllocation { lambda, powers, budget })
}

/// `E_H[C(H² P_WF(H))]` in nats per channel use.
pub fn capacity(spec: &ChannelSpec, alloc: &PowerAllocation) -> f64 {
    alloc
        .received(&spec.fading)
        .iter()
        .zip(spec.fading.probs())
        .map(|(g2, q)| q * c_of(*g2, spec.noise_var))
        .sum()
}
