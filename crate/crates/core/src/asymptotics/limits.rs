use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::exponent::{Exponent, ExponentKind};
use super::saddle::decay_rate_with;
use crate::error::{Error, Result};

/// Optimal parameters and rate coefficient as `mu -> 0`, where `A ~ alpha mu^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakLimit {
    pub tau: f64,
    pub rho: f64,
    pub alpha: f64,
    /// `2 cos^k(pi tau/2) cos(k pi tau/2) - 1` at `tau`.
    pub residual: f64,
    /// `A / mu^2` at the extrapolation nodes.
    pub samples: [(f64, f64); 3],
}

/// Small-`mu` optimum for `k`-SAT.
pub fn weak_limit(k: u32) -> Result<WeakLimit> {
    if k < 2 {
        return Err(Error::domain("weak-limit parameters need k >= 2"));
    }
    let kf = k as f64;
    let f = |t: f64| 2.0 * (PI * t / 2.0).cos().powi(k as i32) * (kf * PI * t / 2.0).cos() - 1.0;
    // f(0) = 1 and f(1/k) = -1
    let (mut lo, mut hi) = (0.0f64, 1.0 / kf);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::domain(format!(
            "no weak-limit root bracketed for k = {k}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    let rho = (kf * tau).ceil() - kf * tau;
    let nodes = [0.2, 0.1, 0.05];
    let mut samples = [(0.0, 0.0); 3];
    for (s, &mu) in samples.iter_mut().zip(&nodes) {
        let e = Exponent::new(k, mu, rho, tau, ExponentKind::Random)?;
        *s = (mu, decay_rate_with(&e, None)?.a / (mu * mu));
    }
    // corrections are a power series in mu; eliminate the first two orders
    let r1 = 2.0 * samples[1].1 - samples[0].1;
    let r2 = 2.0 * samples[2].1 - samples[1].1;
    let alpha = (4.0 * r2 - r1) / 3.0;
    Ok(WeakLimit {
        tau,
        rho,
        alpha,
        residual: f(tau),
        samples,
    })
}

/// Closed forms for large `mu` at `tau = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongLimit {
    pub tau: f64,
    pub rho: f64,
    pub a: f64,
    pub prefactor: f64,
}

pub fn strong_limit(k: u32, mu: f64) -> Result<StrongLimit> {
    if !(mu >= 1.0) || k == 0 {
        return Err(Error::domain(format!(
            "strong limit needs mu >= 1 and k >= 1 (mu = {mu}, k = {k})"
        )));
    }
    let kf = k as f64;
    let g = 2f64.powi(k as i32) - 1.0;
    Ok(StrongLimit {
        tau: 0.5,
        rho: 2f64.powi(k as i32 - 2) * g / (kf * mu),
        a: g.powi(3) * PI * PI / (16.0 * kf * kf * mu),
        prefactor: 4.0 / (16.0 + (kf - 1.0).powi(2) * PI * PI).sqrt(),
    })
}

/// Rates of simple reference strategies, in nats per variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRates {
    /// Random selection, `-log(E[S]/2^n)/n`.
    pub random_selection: f64,
    /// Amplitude amplification applied to random selection.
    pub unstructured: f64,
    /// Decay rate of `E[S]`, which bounds the soluble fraction.
    pub markov_bound: f64,
    /// Whether the bound says anything, i.e. `E[S]` decays.
    pub markov_nontrivial: bool,
}

pub fn reference_rates(k: u32, mu: f64) -> Result<ReferenceRates> {
    if !(mu >= 0.0) || k == 0 {
        return Err(Error::domain(format!("invalid mu = {mu} or k = {k}")));
    }
    let random_selection = -mu * (1.0 - 0.5f64.powi(k as i32)).ln();
    let markov_bound = random_selection - LN_2;
    Ok(ReferenceRates {
        random_selection,
        unstructured: random_selection / 2.0,
        markov_bound,
        markov_nontrivial: markov_bound > 0.0,
    })
}
