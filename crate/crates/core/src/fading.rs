//! Finite fading-state distributions and the block-fading channel model.
//!
//! A channel takes one amplitude gain per coherence block, drawn i.i.d. from a
//! finite set of positive gains. The discretized Rayleigh construction used for
//! the reference figures lives here as well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σq - 1|` below which probabilities are renormalized.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Finite set of positive amplitude gains with their probabilities.
///
/// Gains are strictly increasing; probabilities are strictly positive and sum
/// to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FadingDistribution {
    gains: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    gains: Vec<f64>,
    probs: Vec<f64>,
}

impl<'de> Deserialize<'de> for FadingDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDistribution::deserialize(d)?;
        FadingDistribution::new(raw.gains, raw.probs).map_err(serde::de::Error::custom)
    }
}

impl FadingDistribution {
    /// Validates and builds a distribution. States are sorted by gain;
    /// probabilities are renormalized when they sum to one within
    /// [`PROB_SUM_TOLERANCE`].
    pub fn new(gains: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::invalid("gains", "at least one fading state is required"));
        }
        if gains.len() != probs.len() {
            return Err(Error::invalid(
                "probs",
                format!("{} probabilities for {} gains", probs.len(), gains.len()),
            ));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::invalid(
                "gains",
                format!("gain {g} is not a positive finite number"),
            ));
        }
        if let Some(q) = probs.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return Err(Error::invalid("probs", format!("probability {q} is not positive")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::invalid("probs", format!("probabilities sum to {total}")));
        }

        let mut states: Vec<(f64, f64)> = gains.into_iter().zip(probs).collect();
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        if states.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("gains", "duplicate gains"));
        }
        let (gains, probs): (Vec<f64>, Vec<f64>) = states.into_iter().map(|(g, q)| (g, q / total)).unzip();
        Ok(FadingDistribution { gains, probs })
    }

    /// A channel with a single deterministic gain.
    pub fn constant(gain: f64) -> Result<Self> {
        Self::new(vec![gain], vec![1.0])
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of fading states, |ℋ|.
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn min_gain(&self) -> f64 {
        self.gains[0]
    }

    pub fn max_gain(&self) -> f64 {
        self.gains[self.gains.len() - 1]
    }

    /// Iterates `(gain, probability)` pairs in increasing gain order.
    pub fn states(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gains.iter().copied().zip(self.probs.iter().copied())
    }

    /// Expectation of `f(gain)` under the distribution.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.states().map(|(g, q)| q * f(g)).sum()
    }

    /// Cumulative probabilities, last entry forced to exactly one.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = self
            .probs
            .iter()
            .map(|q| {
                acc += q;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }

    /// State index for a uniform draw `u ∈ [0, 1)` via the cumulative table.
    pub fn index_for(cumulative: &[f64], u: f64) -> usize {
        cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
    }
}

/// How the interior grid of the discretized Rayleigh distribution is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridReading {
    /// `η_i = η_0 + iΔ`.
    #[default]
    Uniform,
    /// `η_i = η_{i-1} + iΔ` for the interior points, last point pinned at the
    /// upper endpoint, then sorted. Bins with non-positive mass are dropped.
    Recursive,
}

fn rayleigh_tail(x: f64, scale: f64) -> f64 {
    (-x * x / (2.0 * scale * scale)).exp()
}

/// Discretizes a Rayleigh(`scale`) amplitude onto `count` points spanning
/// `[eta_lo, eta_hi]` using the uniform grid.
///
/// State `i` carries `P(η_i ≤ H < η_{i+1})`, the last state carries the upper
/// tail `P(H ≥ η_hi)` and the lower tail `P(H < η_lo)` is folded into state 0.
pub fn discretize_rayleigh(eta_lo: f64, eta_hi: f64, count: usize, scale: f64) -> Result<FadingDistribution> {
    discretize_rayleigh_with(eta_lo, eta_hi, count, scale, GridReading::Uniform)
}

pub fn discretize_rayleigh_with(
    eta_lo: f64,
    eta_hi: f64,
    count: usize,
    scale: f64,
    reading: GridReading,
) -> Result<FadingDistribution> {
    if !(eta_lo.is_finite() && eta_lo > 0.0) {
        return Err(Error::invalid("eta_lo", format!("{eta_lo} is not positive")));
    }
    if !(eta_hi.is_finite() && eta_hi > eta_lo) {
        return Err(Error::invalid(
            "eta_hi",
            format!("{eta_hi} does not exceed eta_lo = {eta_lo}"),
        ));
    }
    if count < 2 {
        return Err(Error::invalid("count", format!("{count} < 2")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid("scale", format!("{scale} is not positive")));
    }

    let step = (eta_hi - eta_lo) / (count - 1) as f64;
    let mut gains: Vec<f64> = match reading {
        GridReading::Uniform => (0..count)
            .map(|i| {
                if i + 1 == count {
                    eta_hi
                } else {
                    eta_lo + i as f64 * step
                }
            })
            .collect(),
        GridReading::Recursive => {
            let mut g = Vec::with_capacity(count);
            g.push(eta_lo);
            for i in 1..count - 1 {
                let prev = g[i - 1];
                g.push(prev + i as f64 * step);
            }
            g.push(eta_hi);
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        }
    };

    let mut probs: Vec<f64> = gains
        .windows(2)
        .map(|w| rayleigh_tail(w[0], scale) - rayleigh_tail(w[1], scale))
        .collect();
    probs.push(rayleigh_tail(gains[gains.len() - 1], scale));
    probs[0] += 1.0 - rayleigh_tail(gains[0], scale);

    if reading == GridReading::Recursive {
        let keep: Vec<bool> = probs.iter().map(|&q| q > 0.0).collect();
        let mut k = keep.iter();
        gains.retain(|_| *k.next().unwrap());
        probs.retain(|&q| q > 0.0);
    }

    // The mass is exactly one up to rounding; renormalize in one step.
    let total: f64 = probs.iter().sum();
    FadingDistribution::new(gains, probs.into_iter().map(|q| q / total).collect())
}

/// Block-fading AWGN channel: noise variance, coherence length and fading law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub noise_var: f64,
    pub n_c: u32,
    pub fading: FadingDistribution,
}

impl ChannelSpec {
    pub fn new(noise_var: f64, n_c: u32, fading: FadingDistribution) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid("noise_var", format!("{noise_var} is not positive")));
        }
        if n_c == 0 {
            return Err(Error::invalid("n_c", "coherence length must be at least 1"));
        }
        Ok(ChannelSpec { noise_var, n_c, fading })
    }

    /// The discretized Rayleigh channel of the reference figures:
    /// ten states on `[0.1, 4.1]`, unit scale, unit noise, fast fading.
    pub fn paper_rayleigh() -> Self {
        let fading = discretize_rayleigh(0.1, 4.1, 10, 1.0).expect("preset grid is valid");
        ChannelSpec {
            noise_var: 1.0,
            n_c: 1,
            fading,
        }
    }

    /// Two equiprobable states `{1, 2}` with unit noise.
    pub fn two_state() -> Self {
        ChannelSpec {
            noise_var: 1.0,
            n_c: 1,
            fading: FadingDistribution::new(vec![1.0, 2.0], vec![0.5, 0.5]).expect("valid"),
        }
    }

    pub fn with_coherence(mut self, n_c: u32) -> Result<Self> {
        if n_c == 0 {
            return Err(Error::invalid("n_c", "coherence length must be at least 1"));
        }
        self.n_c = n_c;
        Ok(self)
    }
}
