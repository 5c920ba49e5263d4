//! Power-law harm and the effect of splitting an exposure into fragments.
//!
//! Harm is `H(x) = -k x^β`: nonpositive, and "more harm" means a more
//! negative value. For `β >= 1` the sum of the harms of the pieces `w_i x`
//! is never worse than the harm of the whole `x`; for `β < 1` the direction
//! flips.

use serde::Serialize;

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::pareto::ParetoParams;
use crate::rng::seeded_rng;
use crate::stats::Accumulator;

/// Absolute tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Scale `k > 0` and convexity `β >= 0` of the harm transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmParams {
    k: f64,
    beta: f64,
}

impl HarmParams {
    pub fn new(k: f64, beta: f64) -> Result<Self> {
        check_positive("k", k)?;
        check_nonnegative("beta", beta)?;
        Ok(Self { k, beta })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when splitting an exposure can only reduce the harm magnitude,
    /// i.e. `β >= 1`.
    pub fn guarantees_fragmentation_benefit(&self) -> bool {
        self.beta >= 1.0
    }

    /// `-k x^β`, with `0^0 = 1` so that `β = 0` gives `-k` everywhere.
    pub fn harm(&self, x: f64) -> Result<f64> {
        check_nonnegative("x", x)?;
        Ok(self.harm_unchecked(x))
    }

    #[inline]
    pub(crate) fn harm_unchecked(&self, x: f64) -> f64 {
        0.0 - self.k * x.powf(self.beta)
    }

    /// `Σ_i H(w_i x)`.
    pub fn fragmented_harm(&self, weights: &FragmentWeights, x: f64) -> Result<f64> {
        check_nonnegative("x", x)?;
        Ok(self.fragmented_harm_unchecked(weights, x))
    }

    #[inline]
    fn fragmented_harm_unchecked(&self, weights: &FragmentWeights, x: f64) -> f64 {
        // Σ_i -k (w_i x)^β = -k x^β Σ_i w_i^β
        self.harm_unchecked(x) * weights.power_sum(self.beta)
    }

    /// `Σ_i H(w_i x) - H(x)`: nonnegative for `β >= 1`, nonpositive for
    /// `β <= 1`, zero for `β = 1`, a single fragment, or `x = 0` (`β > 0`).
    pub fn jensen_gap(&self, weights: &FragmentWeights, x: f64) -> Result<f64> {
        check_nonnegative("x", x)?;
        Ok(self.jensen_gap_unchecked(weights, x))
    }

    #[inline]
    fn jensen_gap_unchecked(&self, weights: &FragmentWeights, x: f64) -> f64 {
        self.k * x.powf(self.beta) * weights.fragmentation_excess(self.beta)
    }
}

/// Shares `w_i ∈ [0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentWeights(Vec<f64>);

impl FragmentWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("at least one weight is required".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidWeights(format!("weight {w} is outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE}"
            )));
        }
        Ok(Self(weights))
    }

    /// `n` equal shares of `1/n`.
    pub fn equal(n: usize) -> Result<Self> {
        crate::error::check_count("N", n)?;
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ_i w_i^β`, exactly one at `β = 1` since the shares segment the whole.
    fn power_sum(&self, beta: f64) -> f64 {
        if beta == 1.0 {
            1.0
        } else {
            self.0.iter().map(|w| w.powf(beta)).sum()
        }
    }

    /// `1 - Σ_i w_i^β`, taking `Σ_i w_i` as exactly one.
    ///
    /// Each term is written as `w (1 - w^(β-1))` so its sign follows `β - 1`
    /// exactly under rounding: `w^(β-1) <= 1` whenever `w <= 1, β >= 1`.
    fn fragmentation_excess(&self, beta: f64) -> f64 {
        self.0
            .iter()
            .map(|&w| {
                if w == 0.0 {
                    // a zero share still contributes -k·0^β, which is -k at β = 0
                    -(0f64.powf(beta))
                } else {
                    w * (1.0 - w.powf(beta - 1.0))
                }
            })
            .sum()
    }
}

/// Paired Monte Carlo estimate of the expected outcome of one unit `B`
/// exposed whole versus split by `weights`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalComparison {
    /// Mean of `B + H(X)`.
    pub centralized_mean: f64,
    /// Mean of `Σ_i (w_i B + H(w_i X))`.
    pub decentralized_mean: f64,
    /// Standard error of the per-draw difference (decentralized − centralized).
    pub difference_std_error: f64,
    pub trials: u64,
}

impl SurvivalComparison {
    pub fn difference(&self) -> f64 {
        self.decentralized_mean - self.centralized_mean
    }
}

/// Draws `X ~ Pareto(α, L)` once per trial and scores both arms on the same
/// draw: the centralized unit takes `H(X)`, fragment `i` takes `H(w_i X)`.
pub fn survival_comparison(
    params: &HarmParams,
    unit_value: f64,
    weights: &FragmentWeights,
    error_model: &ParetoParams,
    trials: u64,
    seed: u64,
) -> Result<SurvivalComparison> {
    check_positive("B", unit_value)?;
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if error_model.alpha() <= params.beta() {
        return Err(Error::HarmMeanDiverges {
            alpha: error_model.alpha(),
            beta: params.beta(),
        });
    }

    let mut rng = seeded_rng(seed);
    let mut centralized = Accumulator::new();
    let mut decentralized = Accumulator::new();
    let mut difference = Accumulator::new();
    for _ in 0..trials {
        let x = error_model.sample_one(&mut rng);
        // Σ w_i B = B since the weights segment the unit exactly.
        centralized.push(unit_value + params.harm_unchecked(x));
        decentralized.push(unit_value + params.fragmented_harm_unchecked(weights, x));
        difference.push(params.jensen_gap_unchecked(weights, x));
    }
    Ok(SurvivalComparison {
        centralized_mean: centralized.mean(),
        decentralized_mean: decentralized.mean(),
        difference_std_error: difference.std_error(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(k: f64, beta: f64) -> HarmParams {
        HarmParams::new(k, beta).unwrap()
    }

    fn w(ws: &[f64]) -> FragmentWeights {
        FragmentWeights::new(ws.to_vec()).unwrap()
    }

    #[test]
    fn harm_examples() {
        assert_eq!(h(1.0, 2.0).harm(0.0).unwrap(), 0.0);
        assert_eq!(h(1.0, 2.0).harm(1.0).unwrap(), -1.0);
        assert_eq!(h(1.0, 1.5).harm(4.0).unwrap(), -8.0);
        assert_eq!(h(2.0, 3.0).harm(2.0).unwrap(), -16.0);
    }

    #[test]
    fn harm_zero_power_convention() {
        assert_eq!(h(3.0, 0.0).harm(0.0).unwrap(), -3.0);
        assert_eq!(h(3.0, 0.0).harm(5.0).unwrap(), -3.0);
    }

    #[test]
    fn harm_rejects_negative_error() {
        assert!(matches!(h(1.0, 2.0).harm(-1.0), Err(Error::Domain { name: "x", .. })));
        assert!(h(1.0, 2.0).harm(f64::NAN).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(HarmParams::new(0.0, 1.0).is_err());
        assert!(HarmParams::new(1.0, -0.5).is_err());
        assert!(h(1.0, 1.0).guarantees_fragmentation_benefit());
        assert!(!h(1.0, 0.5).guarantees_fragmentation_benefit());
    }

    #[test]
    fn weights_validation() {
        assert!(FragmentWeights::new(vec![]).is_err());
        assert!(FragmentWeights::new(vec![0.5, 0.6]).is_err());
        assert!(FragmentWeights::new(vec![1.5, -0.5]).is_err());
        assert!(FragmentWeights::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert_eq!(FragmentWeights::equal(4).unwrap().len(), 4);
        assert!(FragmentWeights::equal(0).is_err());
    }

    #[test]
    fn fragmented_harm_examples() {
        assert_eq!(h(1.0, 2.0).fragmented_harm(&w(&[1.0]), 3.0).unwrap(), -9.0);
        assert_eq!(h(1.0, 2.0).fragmented_harm(&w(&[0.5, 0.5]), 1.0).unwrap(), -0.5);
        assert_eq!(h(1.0, 1.0).fragmented_harm(&w(&[0.3, 0.7]), 10.0).unwrap(), -10.0);
    }

    #[test]
    fn fragmented_harm_matches_termwise_sum() {
        let p = h(1.7, 2.3);
        let ws = w(&[0.1, 0.25, 0.0, 0.65]);
        let x = 13.0;
        let direct: f64 = ws.as_slice().iter().map(|wi| p.harm(wi * x).unwrap()).sum();
        let got = p.fragmented_harm(&ws, x).unwrap();
        assert!((got - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn zero_share_at_zero_power() {
        // every fragment, including the empty one, takes -k
        let got = h(2.0, 0.0).fragmented_harm(&w(&[0.0, 1.0]), 4.0).unwrap();
        assert_eq!(got, -4.0);
    }

    #[test]
    fn jensen_gap_examples() {
        assert_eq!(h(1.0, 2.0).jensen_gap(&w(&[1.0]), 5.0).unwrap(), 0.0);
        assert_eq!(h(1.0, 2.0).jensen_gap(&w(&[0.5, 0.5]), 1.0).unwrap(), 0.5);
        assert_eq!(h(1.0, 1.0).jensen_gap(&w(&[0.2, 0.8]), 7.0).unwrap(), 0.0);
        assert_eq!(h(1.0, 3.0).jensen_gap(&w(&[0.2, 0.8]), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn jensen_gap_reverses_below_one() {
        let gap = h(1.0, 0.5).jensen_gap(&w(&[0.5, 0.5]), 4.0).unwrap();
        // 2·(-(2)^0.5) - (-2) = 2 - 2√2
        assert!((gap - (2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn survival_linear_harm_is_bitwise_neutral() {
        let pareto = ParetoParams::new(3.0, 1.0).unwrap();
        let r = survival_comparison(&h(2.0, 1.0), 10.0, &w(&[0.3, 0.7]), &pareto, 10_000, 9).unwrap();
        assert_eq!(r.centralized_mean.to_bits(), r.decentralized_mean.to_bits());
    }

    #[test]
    fn survival_single_fragment_identical() {
        let pareto = ParetoParams::new(4.0, 1.0).unwrap();
        let r = survival_comparison(&h(1.0, 2.0), 10.0, &w(&[1.0]), &pareto, 5_000, 1).unwrap();
        assert_eq!(r.centralized_mean, r.decentralized_mean);
    }

    #[test]
    fn survival_is_deterministic_per_seed() {
        let pareto = ParetoParams::new(4.0, 1.0).unwrap();
        let run = |seed| survival_comparison(&h(1.0, 2.0), 10.0, &w(&[0.5, 0.5]), &pareto, 2_000, seed).unwrap();
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn survival_errors() {
        let pareto = ParetoParams::new(2.0, 1.0).unwrap();
        let err = survival_comparison(&h(1.0, 2.0), 10.0, &w(&[1.0]), &pareto, 10, 0);
        assert!(matches!(err, Err(Error::HarmMeanDiverges { .. })));
        assert!(err.unwrap_err().to_string().contains("harm mean diverges"));
        let pareto = ParetoParams::new(4.0, 1.0).unwrap();
        assert!(survival_comparison(&h(1.0, 2.0), 10.0, &w(&[1.0]), &pareto, 0, 0).is_err());
    }
}
