//! Pareto-distributed error sizes and the tail behaviour of fragmented harm.
//!
//! With `X ~ Pareto(α, L)` split into `N` equal fragments, each fragment's
//! harm is `ξ = -k (X/N)^β`. This module gives the density of `ξ`, its
//! truncated tail mean `M_β(N)` in closed form with a Monte Carlo
//! counterpart, and the degradation ratio `K M_β(KN) / M_β(N)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_positive, Error, Result};
use crate::harm::HarmParams;
use crate::rng::seeded_rng;
use crate::stats::Accumulator;

/// Tail index `α > 0` and scale `L > 0`; the support is `x >= L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoParams {
    alpha: f64,
    scale: f64,
}

impl ParetoParams {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("L", scale)?;
        Ok(Self { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `α L^α / x^(α+1)` on `x >= L`, zero below.
    pub fn density(&self, x: f64) -> f64 {
        if x < self.scale {
            0.0
        } else {
            self.alpha * self.scale.powf(self.alpha) / x.powf(self.alpha + 1.0)
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.alpha)
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`. Uses `(1-u)` so `u = 0` maps to `L`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        self.scale * (1.0 - u).powf(-1.0 / self.alpha)
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.gen::<f64>())
    }

    /// `count` draws from the stream seeded by `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..count).map(|_| self.sample_one(&mut rng)).collect()
    }
}

/// Number of equal fragments `N >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FragmentCount(u64);

impl FragmentCount {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain {
                name: "N",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self(n))
    }

    pub fn get(&self) -> u64 {
        self.0
    }

    fn as_f64(&self) -> f64 {
        self.0 as f64
    }
}

fn require_positive_beta(h: &HarmParams) -> Result<f64> {
    if h.beta() > 0.0 {
        Ok(h.beta())
    } else {
        Err(Error::Domain {
            name: "beta",
            value: h.beta(),
            reason: "must be positive for the fragment harm distribution",
        })
    }
}

fn require_tail_convergence(p: &ParetoParams, h: &HarmParams) -> Result<()> {
    require_positive_beta(h)?;
    if p.alpha() > h.beta() {
        Ok(())
    } else {
        Err(Error::TailMeanDiverges {
            alpha: p.alpha(),
            beta: h.beta(),
        })
    }
}

/// True when `β < α <= 1 + β`: the tail mean converges but sits below the
/// more conservative `α > 1 + β` threshold. Callers surface this as a warning.
pub fn below_conservative_threshold(p: &ParetoParams, h: &HarmParams) -> bool {
    p.alpha() > h.beta() && p.alpha() <= 1.0 + h.beta()
}

/// Upper end of the support of `ξ = -k (X/N)^β`, i.e. `-k (L/N)^β`.
pub fn fragment_harm_support_bound(p: &ParetoParams, h: &HarmParams, frag: FragmentCount) -> f64 {
    -h.k() * (p.scale() / frag.as_f64()).powf(h.beta())
}

/// Density of the per-fragment harm `ξ = -k (X/N)^β`:
///
/// `g(ξ) = α L^α N^(-α) (-ξ/k)^(-α/β) / (-β ξ)` for `ξ <= -k (L/N)^β`,
/// zero above the bound (including all `ξ >= 0`).
pub fn fragment_harm_density(p: &ParetoParams, h: &HarmParams, frag: FragmentCount, xi: f64) -> Result<f64> {
    let beta = require_positive_beta(h)?;
    if xi >= 0.0 || xi > fragment_harm_support_bound(p, h, frag) {
        return Ok(0.0);
    }
    let alpha = p.alpha();
    let n = frag.as_f64();
    let numerator = alpha * p.scale().powf(alpha) * n.powf(-alpha) * (-xi / h.k()).powf(-alpha / beta);
    Ok(numerator / (-beta * xi))
}

/// `P(ξ <= z)` for the per-fragment harm.
pub fn fragment_harm_cdf(p: &ParetoParams, h: &HarmParams, frag: FragmentCount, z: f64) -> Result<f64> {
    let beta = require_positive_beta(h)?;
    if z >= fragment_harm_support_bound(p, h, frag) {
        return Ok(1.0);
    }
    // ξ <= z  ⇔  X >= N (-z/k)^(1/β)
    Ok(p.survival(frag.as_f64() * (-z / h.k()).powf(1.0 / beta)))
}

/// Inverse of [`fragment_harm_cdf`] on `q ∈ (0, 1]`.
pub fn fragment_harm_quantile(p: &ParetoParams, h: &HarmParams, frag: FragmentCount, q: f64) -> Result<f64> {
    let beta = require_positive_beta(h)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            reason: "must lie in (0, 1]",
        });
    }
    let x = p.scale() * q.powf(-1.0 / p.alpha());
    Ok(-h.k() * (x / frag.as_f64()).powf(beta))
}

/// Closed-form truncated tail mean
///
/// `M_β(N) = -α k L^β N^(α(1/β - 1) - 1) / (α - β)`,
///
/// the unconditional mean `E[ξ · 1{ξ <= -k L^β / N}]`. For `β >= 1` the
/// truncation point lies inside the support and the two agree exactly; for
/// `β < 1, N > 1` it lies above the support and the closed form is the
/// analytic continuation only.
pub fn tail_mean(p: &ParetoParams, h: &HarmParams, frag: FragmentCount) -> Result<f64> {
    require_tail_convergence(p, h)?;
    let (alpha, beta) = (p.alpha(), h.beta());
    let exponent = alpha * (1.0 / beta - 1.0) - 1.0;
    Ok(-(alpha * h.k() * p.scale().powf(beta) * frag.as_f64().powf(exponent)) / (alpha - beta))
}

/// Truncation point `-k L^β / N` of the tail mean.
pub fn tail_threshold(p: &ParetoParams, h: &HarmParams, frag: FragmentCount) -> f64 {
    -h.k() * p.scale().powf(h.beta()) / frag.as_f64()
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Sampling estimate of [`tail_mean`]: draw `X`, form `ξ = -k (X/N)^β`, and
/// average `ξ` where it clears the truncation point (zero elsewhere).
pub fn mc_tail_mean(p: &ParetoParams, h: &HarmParams, frag: FragmentCount, trials: u64, seed: u64) -> Result<Estimate> {
    require_tail_convergence(p, h)?;
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let threshold = tail_threshold(p, h, frag);
    let n = frag.as_f64();
    let mut rng = seeded_rng(seed);
    let mut acc = Accumulator::new();
    for _ in 0..trials {
        let x = p.sample_one(&mut rng);
        let xi = -h.k() * (x / n).powf(h.beta());
        acc.push(if xi <= threshold { xi } else { 0.0 });
    }
    Ok(Estimate {
        mean: acc.mean(),
        std_error: acc.std_error(),
        trials,
    })
}

/// `K M_β(KN) / M_β(N) = K^(α(1/β - 1))`; independent of `N`, `k` and `L`.
pub fn degradation_ratio(p: &ParetoParams, h: &HarmParams, multiplier: f64, frag: FragmentCount) -> Result<f64> {
    require_tail_convergence(p, h)?;
    check_positive("K", multiplier)?;
    if multiplier * frag.as_f64() < 1.0 {
        return Err(Error::Domain {
            name: "K",
            value: multiplier,
            reason: "K·N must be at least 1",
        });
    }
    Ok(multiplier.powf(p.alpha() * (1.0 / h.beta() - 1.0)))
}

/// `(K, K^(α(1/β - 1)))` rows for each requested multiplier, at `N = 1`.
pub fn degradation_curve(p: &ParetoParams, h: &HarmParams, multipliers: &[f64]) -> Result<Vec<(f64, f64)>> {
    let one = FragmentCount(1);
    multipliers
        .iter()
        .map(|&k| degradation_ratio(p, h, k, one).map(|r| (k, r)))
        .collect()
}
