//! Independent re-derivations of the dispersion quantities.
//!
//! Variances here use the pairwise form `½ ΣΣ q_i q_j (x_i − x_j)²`, which
//! shares no accumulation path with the library's two-pass mean/variance.

use bfrate::bounds::{dispersion_v_bf, dispersion_v_bf_prime, nocsit_stats};
use bfrate::fading::{ChannelSpec, FadingDistribution};
use bfrate::waterfill::{capacity, solve_waterfill};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pairwise_var(q: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in (0..q.len()).rev() {
        for j in (0..q.len()).rev() {
            acc += q[i] * q[j] * (x[i] - x[j]).powi(2);
        }
    }
    0.5 * acc
}

struct Oracle {
    v_bf: f64,
    v_bf_prime: f64,
}

fn oracle(spec: &ChannelSpec, lambda: f64, budget: f64) -> Oracle {
    let s = spec.noise_var;
    let n_c = f64::from(spec.n_c);
    let q = spec.fading.probs();
    // Received power from the water level directly.
    let g: Vec<f64> = spec
        .fading
        .gains()
        .iter()
        .map(|h| (h * h * lambda - s).max(0.0))
        .collect();
    let c: Vec<f64> = g.iter().map(|x| 0.5 * (1.0 + x / s).ln()).collect();
    let l: Vec<f64> = g.iter().map(|x| x / (s + x)).collect();
    let v: Vec<f64> = l.iter().map(|l| 0.5 * (1.0 - (1.0 - l) * (1.0 - l))).collect();
    let ev: f64 = q.iter().zip(&v).rev().map(|(a, b)| a * b).sum();
    let mixed: Vec<f64> = c
        .iter()
        .zip(&l)
        .map(|(c, l)| n_c * c + budget / (2.0 * lambda) - l / 2.0)
        .collect();
    Oracle {
        v_bf: ev + n_c * pairwise_var(q, &c) + 0.5 * pairwise_var(q, &l),
        v_bf_prime: ev + pairwise_var(q, &mixed),
    }
}

#[test]
fn dispersions_match_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let k = rng.random_range(1..=15);
        let mut gains: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..5.0)).collect();
        gains.sort_by(f64::total_cmp);
        gains.dedup();
        let w: Vec<f64> = (0..gains.len()).map(|_| rng.random_range(0.01..1.0)).collect();
        let t: f64 = w.iter().sum();
        let fading = FadingDistribution::new(gains, w.iter().map(|x| x / t).collect()).unwrap();
        let spec = ChannelSpec::new(rng.random_range(0.2..4.0), rng.random_range(1..5), fading).unwrap();
        let budget = rng.random_range(0.05..30.0);

        let alloc = solve_waterfill(&spec, budget).unwrap();
        let o = oracle(&spec, alloc.lambda, budget);
        let v = dispersion_v_bf(&spec, &alloc);
        let vp = dispersion_v_bf_prime(&spec, &alloc);
        assert!((v - o.v_bf).abs() <= 1e-14, "{v} vs {}", o.v_bf);
        assert!((vp - o.v_bf_prime).abs() <= 1e-14, "{vp} vs {}", o.v_bf_prime);
    }
}

#[test]
fn two_state_hand_solution() {
    // KKT with both states active: ½(λ − 1) + ½(λ − ¼) = 1.
    let lambda: f64 = (2.0 + 1.0 + 0.25) / 2.0;
    assert_eq!(lambda, 1.625);
    let spec = ChannelSpec::two_state();
    let alloc = solve_waterfill(&spec, 1.0).unwrap();
    let o = oracle(&spec, lambda, 1.0);
    assert!((dispersion_v_bf(&spec, &alloc) - o.v_bf).abs() < 1e-12);
    assert!((dispersion_v_bf_prime(&spec, &alloc) - o.v_bf_prime).abs() < 1e-12);
    assert!((o.v_bf - 0.5461).abs() < 5e-5);
    assert!((o.v_bf_prime - 0.4529).abs() < 5e-5);

    let cap = 0.25 * 1.625f64.ln() + 0.25 * 6.5f64.ln();
    assert!((capacity(&spec, &alloc) - cap).abs() < 1e-12);

    let spec2 = spec.clone().with_coherence(2).unwrap();
    let o2 = oracle(&spec2, lambda, 1.0);
    assert!((o2.v_bf - 0.6663).abs() < 5e-5);
    let alloc2 = solve_waterfill(&spec2, 1.0).unwrap();
    assert!((dispersion_v_bf(&spec2, &alloc2) - o2.v_bf).abs() < 1e-12);
}

#[test]
fn nocsit_matches_oracle_with_constant_power() {
    let spec = ChannelSpec::paper_rayleigh();
    let p = bfrate::db_to_linear(5.0);
    let (c, v) = nocsit_stats(&spec, p).unwrap();
    let q = spec.fading.probs();
    let g: Vec<f64> = spec.fading.gains().iter().map(|h| h * h * p).collect();
    let cs: Vec<f64> = g.iter().map(|x| 0.5 * (1.0 + x).ln()).collect();
    let ls: Vec<f64> = g.iter().map(|x| x / (1.0 + x)).collect();
    let ev: f64 = ls.iter().zip(q).map(|(l, q)| q * 0.5 * (1.0 - (1.0 - l).powi(2))).sum();
    let want_c: f64 = cs.iter().zip(q).map(|(c, q)| c * q).sum();
    let want_v = ev + pairwise_var(q, &cs) + 0.5 * pairwise_var(q, &ls);
    assert!((c - want_c).abs() < 1e-14);
    assert!((v - want_v).abs() < 1e-13);
}
