//! Finite-blocklength achievability and converse bounds for block-fading AWGN
//! channels with channel state at both ends.
//!
//! The crate water-fills power across a finite set of fading states, evaluates
//! the capacity and the two channel dispersions, and turns them into normal
//! approximations of the maximal `log M` under short-term and long-term power
//! constraints. A Monte Carlo module checks the power controller and the
//! information density behind the achievability bounds.
//!
//! ```
//! use bfrate::{bound_point, ChannelSpec, DispersionStats, Probability};
//!
//! let spec = ChannelSpec::two_state();
//! let stats = DispersionStats::compute(&spec, 1.0).unwrap();
//! let eps = Probability::new(0.01).unwrap();
//! let point = bound_point(&stats, 10_000, spec.n_c, spec.fading.len(), eps, 0.01).unwrap();
//! assert!(point.rate_lb_st < point.rate_ub_lt);
//! ```

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fading;
pub mod montecarlo;
pub mod specfun;
pub mod waterfill;

pub use bounds::{bound_point, dispersion_v_bf, dispersion_v_bf_prime, nocsit_stats, BoundPoint, DispersionStats};
pub use error::{Error, Result};
pub use fading::{discretize_rayleigh, ChannelSpec, FadingDistribution, GridReading};
pub use montecarlo::{simulate_information_density, simulate_st_controller, DensityStats, SimConfig, ViolationReport};
pub use specfun::{std_normal_cdf, std_normal_inv_cdf, Probability};
pub use waterfill::{capacity, link_c, link_l, link_v, solve_waterfill, PowerAllocation};

/// Converts a power in dB (relative to one) to linear units.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
