//! Capacity growth of a bounded modular chassis (`S·erf(u)`) versus adding
//! fixed-port switches (`p·u`).

use serde::Serialize;

use crate::error::{check_nonnegative, check_positive, Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_LIMIT: f64 = 3.0;
const CONTINUED_FRACTION_DEPTH: u32 = 80;

/// Gauss error function.
///
/// For `|x| < 3` it sums the all-positive series
/// `erf(x) = 2/√π · e^(-x²) · Σ_n 2^n x^(2n+1) / (2n+1)!!`;
/// beyond that it evaluates `erfc` through its continued fraction
/// `e^(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`
/// and returns `1 - erfc`. The sign is applied last, so `erf(-x) = -erf(x)`
/// holds bit for bit.
pub fn erf_value(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let magnitude = if a < SERIES_LIMIT {
        erf_series(a)
    } else {
        1.0 - erfc_continued_fraction(a)
    };
    magnitude.copysign(x)
}

fn erf_series(a: f64) -> f64 {
    let x2 = a * a;
    let mut term = a;
    let mut sum = a;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

fn erfc_continued_fraction(a: f64) -> f64 {
    if a.is_infinite() {
        return 0.0;
    }
    let mut tail = a;
    for n in (1..=CONTINUED_FRACTION_DEPTH).rev() {
        tail = a + (n as f64 * 0.5) / tail;
    }
    0.5 * FRAC_2_SQRT_PI * (-a * a).exp() / tail
}

/// A modular chassis that saturates at `saturation_capacity` ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmoidGrowth {
    saturation_capacity: f64,
}

impl SigmoidGrowth {
    pub fn new(saturation_capacity: f64) -> Result<Self> {
        check_positive("saturation_capacity", saturation_capacity)?;
        Ok(Self { saturation_capacity })
    }

    pub fn saturation_capacity(&self) -> f64 {
        self.saturation_capacity
    }
}

/// Scale-out by fixed-port switches of `ports_per_switch` ports each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinearGrowth {
    ports_per_switch: u32,
}

impl LinearGrowth {
    pub fn new(ports_per_switch: u32) -> Result<Self> {
        if ports_per_switch == 0 {
            return Err(Error::Domain {
                name: "ports_per_switch",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self { ports_per_switch })
    }

    pub fn ports_per_switch(&self) -> u32 {
        self.ports_per_switch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthSpec {
    Sigmoid(SigmoidGrowth),
    Linear(LinearGrowth),
}

impl From<SigmoidGrowth> for GrowthSpec {
    fn from(g: SigmoidGrowth) -> Self {
        GrowthSpec::Sigmoid(g)
    }
}

impl From<LinearGrowth> for GrowthSpec {
    fn from(g: LinearGrowth) -> Self {
        GrowthSpec::Linear(g)
    }
}

/// Port capacity after installing `units` modules (sigmoid) or switches (linear).
pub fn capacity_at(spec: &GrowthSpec, units: f64) -> Result<f64> {
    check_nonnegative("units", units)?;
    Ok(match spec {
        GrowthSpec::Sigmoid(s) => s.saturation_capacity * erf_value(units),
        GrowthSpec::Linear(l) => f64::from(l.ports_per_switch) * units,
    })
}

/// Absolute bracket width at which [`crossover`] stops bisecting.
pub const CROSSOVER_TOLERANCE: f64 = 1e-9;

/// Smallest `u >= 0` past which linear capacity never falls below the
/// sigmoid's.
///
/// `p·u - S·erf(u)` is convex on `u >= 0` and vanishes at zero, so the
/// answer is either zero (when `p >= 2S/√π`, the sigmoid's initial slope) or
/// the unique positive root, which lies below `S/p`. Always finite.
pub fn crossover(sigmoid: &SigmoidGrowth, linear: &LinearGrowth) -> f64 {
    let s = sigmoid.saturation_capacity;
    let p = f64::from(linear.ports_per_switch);
    if p >= FRAC_2_SQRT_PI * s {
        return 0.0;
    }
    let gap = |u: f64| p * u - s * erf_value(u);
    let (mut lo, mut hi) = (0.0, s / p);
    while hi - lo > CROSSOVER_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_fixed_points() {
        assert_eq!(erf_value(0.0), 0.0);
        assert!((erf_value(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf_value(6.0) - 1.0).abs() < 1e-7);
        assert_eq!(erf_value(f64::INFINITY), 1.0);
        assert_eq!(erf_value(f64::NEG_INFINITY), -1.0);
        assert!(erf_value(f64::NAN).is_nan());
    }

    #[test]
    fn erf_is_odd() {
        for x in [0.1, 0.7, 2.9, 3.0, 4.5, 5.99] {
            assert_eq!(erf_value(-x), -erf_value(x));
        }
    }

    #[test]
    fn erf_branches_agree_at_switch() {
        let below = erf_series(SERIES_LIMIT);
        let above = 1.0 - erfc_continued_fraction(SERIES_LIMIT);
        assert!((below - above).abs() < 1e-15);
    }

    #[test]
    fn capacity_examples() {
        let sig: GrowthSpec = SigmoidGrowth::new(100.0).unwrap().into();
        let lin: GrowthSpec = LinearGrowth::new(48).unwrap().into();
        assert_eq!(capacity_at(&sig, 0.0).unwrap(), 0.0);
        assert_eq!(capacity_at(&lin, 10.0).unwrap(), 480.0);
        assert!((capacity_at(&sig, 3.0).unwrap() - 99.997_790_950_300_14).abs() < 1e-9);
        assert!(capacity_at(&sig, -1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SigmoidGrowth::new(0.0).is_err());
        assert!(LinearGrowth::new(0).is_err());
    }

    #[test]
    fn crossover_examples() {
        let sig = SigmoidGrowth::new(100.0).unwrap();
        let u = crossover(&sig, &LinearGrowth::new(100).unwrap());
        assert!(u > 0.0 && u <= 1.0);
        // u = erf(u) has its positive fixed point near 0.6175
        assert!((u - erf_value(u)).abs() < 1e-8);
        let u = crossover(&sig, &LinearGrowth::new(1).unwrap());
        assert!((99.0..=101.0).contains(&u), "{u}");
        assert_eq!(crossover(&sig, &LinearGrowth::new(120).unwrap()), 0.0);
    }

    #[test]
    fn crossover_dominates_afterwards() {
        let sig = SigmoidGrowth::new(640.0).unwrap();
        let lin = LinearGrowth::new(48).unwrap();
        let u = crossover(&sig, &lin);
        for mult in [1.0, 1.5, 3.0, 10.0] {
            let at = u * mult;
            assert!(48.0 * at >= 640.0 * erf_value(at) - 1e-6);
        }
        assert!(48.0 * (u * 0.5) < 640.0 * erf_value(u * 0.5));
    }
}
