//! Independent reference computations used to cross-check the fast paths:
//! quadrature for the error function and the fragment-harm density,
//! per-pair BFS for connectivity, and exhaustive enumeration of failure
//! patterns. None of these call the routines they check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::harm::HarmParams;
use crate::pareto::{
    fragment_harm_density, fragment_harm_quantile, fragment_harm_support_bound, tail_threshold, FragmentCount,
    ParetoParams,
};
use crate::quadrature::{integrate, integrate_to_upper, Integral};
use crate::topology::{FailureModel, Topology};

/// `2/√π ∫_0^x e^(-t²) dt` by adaptive quadrature.
pub fn erf_reference(x: f64) -> f64 {
    let r = integrate(|t: f64| (-t * t).exp(), 0.0, x, 1e-17, 1e-15);
    std::f64::consts::FRAC_2_SQRT_PI * r.value
}

/// `∫ g(ξ) dξ` over the support of the fragment-harm density.
pub fn density_mass(p: &ParetoParams, h: &HarmParams, frag: FragmentCount) -> Result<Integral> {
    let bound = fragment_harm_support_bound(p, h, frag);
    // surface any parameter error before integrating
    fragment_harm_density(p, h, frag, bound)?;
    Ok(integrate_to_upper(
        |xi| fragment_harm_density(p, h, frag, xi).unwrap_or(f64::NAN),
        bound,
        1e-12,
        1e-12,
    ))
}

/// `∫_{-∞}^{-kL^β/N} ξ g(ξ) dξ` by quadrature.
pub fn tail_mean_by_quadrature(p: &ParetoParams, h: &HarmParams, frag: FragmentCount) -> Result<f64> {
    let bound = fragment_harm_support_bound(p, h, frag);
    fragment_harm_density(p, h, frag, bound)?;
    let upper = tail_threshold(p, h, frag).min(bound);
    Ok(integrate_to_upper(
        |xi| xi * fragment_harm_density(p, h, frag, xi).unwrap_or(f64::NAN),
        upper,
        1e-13,
        1e-11,
    )
    .value)
}

/// Per-fragment harms `ξ = -k (X/N)^β` for `count` Pareto draws.
pub fn sample_fragment_harm(
    p: &ParetoParams,
    h: &HarmParams,
    frag: FragmentCount,
    count: usize,
    seed: u64,
) -> Vec<f64> {
    let n = frag.get() as f64;
    p.sample(count, seed)
        .into_iter()
        .map(|x| -h.k() * (x / n).powf(h.beta()))
        .collect()
}

/// L1 distance between the empirical bin frequencies of `samples` and the
/// bin masses of the density, over `bins` equal-probability bins.
pub fn histogram_l1(
    p: &ParetoParams,
    h: &HarmParams,
    frag: FragmentCount,
    samples: &[f64],
    bins: usize,
) -> Result<f64> {
    assert!(bins >= 2 && !samples.is_empty());
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(f64::NEG_INFINITY);
    for i in 1..bins {
        edges.push(fragment_harm_quantile(p, h, frag, i as f64 / bins as f64)?);
    }
    edges.push(fragment_harm_support_bound(p, h, frag));

    let g = |xi: f64| fragment_harm_density(p, h, frag, xi).unwrap_or(f64::NAN);
    let mut counts = vec![0u64; bins];
    for &xi in samples {
        // first bin whose upper edge is >= xi
        let idx = edges[1..].partition_point(|&e| e < xi).min(bins - 1);
        counts[idx] += 1;
    }
    let total = samples.len() as f64;
    let mut l1 = 0.0;
    for i in 0..bins {
        let mass = if i == 0 {
            integrate_to_upper(g, edges[1], 1e-14, 1e-12).value
        } else {
            integrate(g, edges[i], edges[i + 1], 1e-14, 1e-12).value
        };
        l1 += (counts[i] as f64 / total - mass).abs();
    }
    Ok(l1)
}

fn neighbours(t: &Topology, failed: &BTreeSet<&str>) -> BTreeMap<String, Vec<String>> {
    let mut adj: BTreeMap<String, Vec<String>> = t
        .devices()
        .iter()
        .filter(|d| !failed.contains(d.id.as_str()))
        .map(|d| (d.id.clone(), Vec::new()))
        .collect();
    for (a, b) in t.links() {
        if failed.contains(a.as_str()) || failed.contains(b.as_str()) {
            continue;
        }
        adj.get_mut(a).expect("link endpoint").push(b.clone());
        adj.get_mut(b).expect("link endpoint").push(a.clone());
    }
    adj
}

fn reachable(adj: &BTreeMap<String, Vec<String>>, from: &str, to: &str) -> bool {
    if !adj.contains_key(from) || !adj.contains_key(to) {
        return false;
    }
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        for v in &adj[&u] {
            if seen.insert(v.clone()) {
                queue.push_back(v.clone());
            }
        }
    }
    false
}

/// Affected fraction by running a BFS for every host pair.
pub fn affected_fraction_bruteforce(t: &Topology, failed: &[&str]) -> Result<f64> {
    for id in failed {
        if t.device(id).is_none() {
            return Err(Error::UnknownDevice(id.to_string()));
        }
    }
    let failed: BTreeSet<&str> = failed.iter().copied().collect();
    let adj = neighbours(t, &failed);
    let hosts = t.hosts();
    let (mut total, mut cut) = (0u64, 0u64);
    for i in 0..hosts.len() {
        for j in i + 1..hosts.len() {
            total += 1;
            let ok = match (&hosts[i].attachment, &hosts[j].attachment) {
                (Some(a), Some(b)) => reachable(&adj, a, b),
                _ => false,
            };
            if !ok {
                cut += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { cut as f64 / total as f64 })
}

pub const MAX_EXHAUSTIVE_DEVICES: usize = 20;

/// `E[harm(affected_fraction)]` summed over all `2^n` failure patterns.
pub fn exhaustive_failure_harm(t: &Topology, fm: &FailureModel, h: &HarmParams) -> Result<f64> {
    let devices = t.devices();
    if devices.len() > MAX_EXHAUSTIVE_DEVICES {
        return Err(Error::InvalidTopology(format!(
            "exhaustive enumeration is limited to {MAX_EXHAUSTIVE_DEVICES} devices (got {})",
            devices.len()
        )));
    }
    let probs: Vec<f64> = devices.iter().map(|d| fm.probability(d.role)).collect();
    let mut expected = 0.0;
    for mask in 0u32..(1u32 << devices.len()) {
        let mut weight = 1.0;
        let mut failed = Vec::new();
        for (i, d) in devices.iter().enumerate() {
            if mask & (1 << i) != 0 {
                weight *= probs[i];
                failed.push(d.id.as_str());
            } else {
                weight *= 1.0 - probs[i];
            }
        }
        if weight == 0.0 {
            continue;
        }
        let x = affected_fraction_bruteforce(t, &failed)?;
        expected += weight * h.harm(x)?;
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_spine_leaf;

    #[test]
    fn erf_reference_known_values() {
        assert!((erf_reference(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf_reference(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf_reference(-2.0) + 0.995_322_265_018_952_7).abs() < 1e-15);
    }

    #[test]
    fn bruteforce_matches_hand_count() {
        let t = build_spine_leaf(2, 4, 1).unwrap();
        assert_eq!(affected_fraction_bruteforce(&t, &["l0"]).unwrap(), 0.5);
        assert_eq!(affected_fraction_bruteforce(&t, &["s0"]).unwrap(), 0.0);
        assert!(affected_fraction_bruteforce(&t, &["nope"]).is_err());
    }

    #[test]
    fn exhaustive_extremes() {
        let t = build_spine_leaf(2, 3, 1).unwrap();
        let h = HarmParams::new(3.0, 2.0).unwrap();
        assert_eq!(
            exhaustive_failure_harm(&t, &FailureModel::uniform(0.0).unwrap(), &h).unwrap(),
            0.0
        );
        assert_eq!(
            exhaustive_failure_harm(&t, &FailureModel::uniform(1.0).unwrap(), &h).unwrap(),
            -3.0
        );
    }

    #[test]
    fn exhaustive_refuses_large_topologies() {
        let t = build_spine_leaf(5, 16, 1).unwrap();
        let h = HarmParams::new(1.0, 1.0).unwrap();
        assert!(exhaustive_failure_harm(&t, &FailureModel::new(), &h).is_err());
    }
}
