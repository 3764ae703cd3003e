//! Monte Carlo checks of the short-term power controller and of the
//! information density used by the achievability argument.
//!
//! Every trial draws from its own ChaCha8 stream (`set_stream(trial)`), and
//! per-trial results are reduced in trial order, so reports are bit-identical
//! regardless of how rayon schedules the work.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{ChannelSpec, FadingDistribution};
use crate::specfun::phi;
use crate::waterfill::{self, c_of, v_of, water_level, waterfill_power};

const CONTROLLER_STREAM_SALT: u64 = 0x5354_4354_524c_0001;
const DENSITY_STREAM_SALT: u64 = 0x494e_4644_454e_0002;

/// Monte Carlo configuration shared by both simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: ChannelSpec,
    pub budget: f64,
    pub blocks: u64,
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "at least one trial is required"));
        }
        if self.blocks == 0 {
            return Err(Error::invalid("blocks", "at least one block is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::invalid("budget", format!("{} is not positive", self.budget)));
        }
        Ok(())
    }

    fn rng(&self, salt: u64, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt);
        rng.set_stream(trial);
        rng
    }
}

/// Budget back-off `δ_B = λ·√(2 / B^(1−α))`.
pub fn delta_b(blocks: u64, alpha: f64, lambda: f64) -> f64 {
    lambda * (2.0 / (blocks as f64).powf(1.0 - alpha)).sqrt()
}

/// Hoeffding bound `exp(−B·δ²/(2λ²))` on the controller's violation
/// probability.
pub fn hoeffding_violation_bound(blocks: u64, delta: f64, lambda: f64) -> f64 {
    (-(blocks as f64) * delta * delta / (2.0 * lambda * lambda)).exp()
}

/// McDiarmid bound `exp(−2nδ²/(κ+c)²)`.
pub fn mcdiarmid_violation_bound(n: u64, delta_n: f64, kappa: f64, c: f64) -> f64 {
    let spread = kappa + c;
    (-2.0 * n as f64 * delta_n * delta_n / (spread * spread)).exp()
}

/// Canonical deviation `δ_n = n^(−(1−α)/2)`.
pub fn canonical_delta_n(n: u64, alpha: f64) -> f64 {
    (n as f64).powf(-0.5 * (1.0 - alpha))
}

/// Smallest `B` with `δ_B < P̄`, i.e. `B^(1−α) > 2λ²/P̄²`.
pub fn min_blocks_for_backoff(budget: f64, alpha: f64, lambda: f64) -> u64 {
    let threshold = (2.0 * lambda * lambda / (budget * budget)).powf(1.0 / (1.0 - alpha));
    let mut b = threshold.floor().max(1.0) as u64;
    while delta_b(b, alpha, lambda) >= budget {
        b += 1;
    }
    while b > 1 && delta_b(b - 1, alpha, lambda) < budget {
        b -= 1;
    }
    b
}

/// Outcome of the controller simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub empirical_prob: f64,
    pub violations: u64,
    pub hoeffding_bound: f64,
    pub delta_b: f64,
    pub lambda_b: f64,
    pub lambda: f64,
    pub blocks: u64,
    pub trials: u64,
}

impl ViolationReport {
    /// Binomial standard error of the empirical probability.
    pub fn binomial_sigma(&self) -> f64 {
        let p = self.empirical_prob;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Empirical rate within the Hoeffding bound plus three standard errors.
    pub fn within_bound(&self) -> bool {
        self.empirical_prob <= self.hoeffding_bound + 3.0 * self.binomial_sigma()
    }
}

fn draw_state(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    FadingDistribution::index_for(cumulative, rng.random::<f64>())
}

/// Simulates the short-term controller: water-fill against `P̄ − δ_B` and
/// count realizations whose total energy exceeds `B·P̄`.
///
/// Reference symbols have unit energy per use, so the prefix condition reduces
/// to the full-sum check.
pub fn simulate_st_controller(cfg: &SimConfig) -> Result<ViolationReport> {
    cfg.validate()?;
    let spec = &cfg.spec;
    let lambda = water_level(&spec.fading, spec.noise_var, cfg.budget)?;
    let delta = delta_b(cfg.blocks, cfg.alpha, lambda);
    if cfg.budget <= delta {
        return Err(Error::BudgetBackoff {
            budget: cfg.budget,
            delta_b: delta,
            alpha: cfg.alpha,
            min_blocks: min_blocks_for_backoff(cfg.budget, cfg.alpha, lambda),
        });
    }
    let lambda_b = water_level(&spec.fading, spec.noise_var, cfg.budget - delta)?;
    let powers: Vec<f64> = spec
        .fading
        .gains()
        .iter()
        .map(|&g| waterfill_power(lambda_b, g, spec.noise_var))
        .collect();
    let cumulative = spec.fading.cumulative();
    let cap = cfg.blocks as f64 * cfg.budget;

    let violations: u64 = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = cfg.rng(CONTROLLER_STREAM_SALT, trial);
            let used: f64 = (0..cfg.blocks).map(|_| powers[draw_state(&mut rng, &cumulative)]).sum();
            u64::from(used > cap)
        })
        .sum();

    Ok(ViolationReport {
        empirical_prob: violations as f64 / cfg.trials as f64,
        violations,
        hoeffding_bound: hoeffding_violation_bound(cfg.blocks, delta, lambda),
        delta_b: delta,
        lambda_b,
        lambda,
        blocks: cfg.blocks,
        trials: cfg.trials,
    })
}

/// One block of the information density with power `p` on the all-ones
/// reference symbols:
/// `n_c·C(g²) + [n_c σ² h² p + 2h√p σ² ⟨1,Z⟩ − g²‖Z‖²] / [2σ²(σ² + g²)]`.
///
/// `g2` is the water-filled received power of the state.
pub fn block_density(gain: f64, power: f64, g2: f64, noise_var: f64, noise: &[f64]) -> f64 {
    let n_c = noise.len() as f64;
    let sum: f64 = noise.iter().sum();
    let energy: f64 = noise.iter().map(|z| z * z).sum();
    let num = n_c * noise_var * gain * gain * power + 2.0 * gain * power.sqrt() * noise_var * sum - g2 * energy;
    n_c * c_of(g2, noise_var) + num / (2.0 * noise_var * (noise_var + g2))
}

/// Conditional mean `μ_b` of [`block_density`].
pub fn block_mean(gain: f64, power: f64, g2: f64, noise_var: f64, n_c: u32) -> f64 {
    let n_c = f64::from(n_c);
    n_c * c_of(g2, noise_var) + n_c * (gain * gain * power - g2) / (2.0 * (noise_var + g2))
}

/// Conditional variance `ν_b` of [`block_density`].
pub fn block_variance(gain: f64, power: f64, g2: f64, noise_var: f64, n_c: u32) -> f64 {
    let n_c = f64::from(n_c);
    let d = noise_var + g2;
    (2.0 * noise_var * gain * gain * n_c * power + n_c * g2 * g2) / (2.0 * d * d)
}

/// Empirical versus analytic behaviour of the information density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityStats {
    pub empirical_mean_per_use: f64,
    pub empirical_var_per_use: f64,
    pub analytic_mean: f64,
    pub analytic_var: f64,
    pub mean_std_error: f64,
    pub ks_distance: f64,
    pub blocks: u64,
    pub trials: u64,
}

impl DensityStats {
    pub fn mean_within(&self, sigmas: f64) -> bool {
        (self.empirical_mean_per_use - self.analytic_mean).abs() <= sigmas * self.mean_std_error
    }

    pub fn var_relative_error(&self) -> f64 {
        (self.empirical_var_per_use - self.analytic_var).abs() / self.analytic_var
    }
}

/// Analytic per-use variance of the fixed-codeword density sum,
/// `E[V(G)] + n_c·Var[C(G)]`.
pub fn density_variance_target(spec: &ChannelSpec, alloc: &waterfill::PowerAllocation) -> f64 {
    let s = spec.noise_var;
    let g2 = alloc.received(&spec.fading);
    let q = spec.fading.probs();
    let ev: f64 = q.iter().zip(&g2).map(|(q, &x)| q * v_of(x, s)).sum();
    let ec: f64 = q.iter().zip(&g2).map(|(q, &x)| q * c_of(x, s)).sum();
    let var_c: f64 = q.iter().zip(&g2).map(|(q, &x)| q * (c_of(x, s) - ec).powi(2)).sum();
    ev + f64::from(spec.n_c) * var_c
}

/// Kolmogorov–Smirnov distance between a sample and Φ.
pub fn ks_distance_to_normal(sample: &mut [f64]) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Simulates `Σ_b W_b″(P_WF(h_b))` and compares it with its Gaussian limit.
pub fn simulate_information_density(cfg: &SimConfig) -> Result<DensityStats> {
    cfg.validate()?;
    if cfg.trials < 100 {
        return Err(Error::invalid("trials", format!("{} < 100", cfg.trials)));
    }
    let spec = &cfg.spec;
    let alloc = waterfill::solve_waterfill(spec, cfg.budget)?;
    let g2 = alloc.received(&spec.fading);
    let gains = spec.fading.gains();
    let cumulative = spec.fading.cumulative();
    let n_c = spec.n_c as usize;
    let s = spec.noise_var;
    let noise_sd = s.sqrt();
    let n = cfg.blocks as f64 * n_c as f64;

    let sums: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = cfg.rng(DENSITY_STREAM_SALT, trial);
            let mut noise = vec![0.0; n_c];
            let mut total = 0.0;
            for _ in 0..cfg.blocks {
                let k = draw_state(&mut rng, &cumulative);
                for z in noise.iter_mut() {
                    *z = noise_sd * rng.sample::<f64, _>(StandardNormal);
                }
                total += block_density(gains[k], alloc.powers[k], g2[k], s, &noise);
            }
            total
        })
        .collect();

    let trials = sums.len() as f64;
    let mean_sum = sums.iter().sum::<f64>() / trials;
    let var_sum = sums.iter().map(|x| (x - mean_sum).powi(2)).sum::<f64>() / (trials - 1.0);

    let analytic_mean = waterfill::capacity(spec, &alloc);
    let analytic_var = density_variance_target(spec, &alloc);
    let scale = (n * analytic_var).sqrt();
    let mut standardized: Vec<f64> = sums.iter().map(|x| (x - n * analytic_mean) / scale).collect();
    let ks_distance = ks_distance_to_normal(&mut standardized);

    let empirical_var_per_use = var_sum / n;
    Ok(DensityStats {
        empirical_mean_per_use: mean_sum / n,
        empirical_var_per_use,
        analytic_mean,
        analytic_var,
        mean_std_error: (empirical_var_per_use / (trials * n)).sqrt(),
        ks_distance,
        blocks: cfg.blocks,
        trials: cfg.trials,
    })
}
