use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{Host, Role, Topology};
use crate::error::{Error, Result};
use crate::harm::HarmParams;
use crate::rng::seeded_rng;
use crate::stats::{quantiles, Accumulator, Quantiles};

/// Index-based view of a topology used by the analyses.
struct Graph {
    adjacency: Vec<Vec<usize>>,
    hosts_on: Vec<u64>,
    detached_hosts: u64,
    total_hosts: u64,
}

impl Graph {
    fn new(t: &Topology) -> Self {
        let n = t.devices.len();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in &t.links {
            let (i, j) = (t.index[a], t.index[b]);
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut hosts_on = vec![0u64; n];
        let mut detached_hosts = 0;
        for Host { attachment, .. } in &t.hosts {
            match attachment {
                Some(dev) => hosts_on[t.index[dev]] += 1,
                None => detached_hosts += 1,
            }
        }
        Self {
            adjacency,
            hosts_on,
            detached_hosts,
            total_hosts: t.hosts.len() as u64,
        }
    }

    fn total_pairs(&self) -> u64 {
        pairs(self.total_hosts)
    }

    /// Host pairs that can still talk when only `alive` devices run.
    fn connected_pairs(&self, alive: &[bool], queue: &mut VecDeque<usize>, seen: &mut [bool]) -> u64 {
        seen.fill(false);
        let mut connected = 0;
        for start in 0..self.adjacency.len() {
            if !alive[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut component_hosts = 0;
            while let Some(u) = queue.pop_front() {
                component_hosts += self.hosts_on[u];
                for &v in &self.adjacency[u] {
                    if alive[v] && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            connected += pairs(component_hosts);
        }
        connected
    }

    fn affected_fraction(&self, alive: &[bool], queue: &mut VecDeque<usize>, seen: &mut [bool]) -> f64 {
        let total = self.total_pairs();
        if total == 0 {
            return 0.0;
        }
        let connected = self.connected_pairs(alive, queue, seen);
        (total - connected) as f64 / total as f64
    }

    fn distances_from(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.adjacency.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Histogram key: link hops between attachment devices, or unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum HopBucket {
    Hops(u32),
    Unreachable,
}

impl fmt::Display for HopBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopBucket::Hops(h) => write!(f, "{h}"),
            HopBucket::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// Number of unordered host pairs at each shortest-path length between
/// their attachment devices. Hosts on the same device sit at 0 hops;
/// detached hosts and disconnected devices land in `Unreachable`.
pub fn hop_histogram(t: &Topology) -> BTreeMap<HopBucket, u64> {
    let g = Graph::new(t);
    let mut histogram = BTreeMap::new();
    let mut add = |bucket, count: u64| {
        if count > 0 {
            *histogram.entry(bucket).or_insert(0) += count;
        }
    };
    let attached = g.total_hosts - g.detached_hosts;
    add(
        HopBucket::Unreachable,
        pairs(g.detached_hosts) + g.detached_hosts * attached,
    );
    let edge: Vec<usize> = (0..g.hosts_on.len()).filter(|&i| g.hosts_on[i] > 0).collect();
    for (pos, &i) in edge.iter().enumerate() {
        add(HopBucket::Hops(0), pairs(g.hosts_on[i]));
        let dist = g.distances_from(i);
        for &j in &edge[pos + 1..] {
            let bucket = dist[j].map_or(HopBucket::Unreachable, HopBucket::Hops);
            add(bucket, g.hosts_on[i] * g.hosts_on[j]);
        }
    }
    histogram
}

fn resolve_failed<'a, I>(t: &Topology, failed: I) -> Result<Vec<bool>>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut alive = vec![true; t.devices.len()];
    for id in failed {
        let i = t.device_index(id).ok_or_else(|| Error::UnknownDevice(id.to_string()))?;
        alive[i] = false;
    }
    Ok(alive)
}

/// Removes the failed devices and their links; hosts on them become detached.
pub fn inject_failures<'a, I>(t: &Topology, failed: I) -> Result<Topology>
where
    I: IntoIterator<Item = &'a str>,
{
    let alive = resolve_failed(t, failed)?;
    let gone: BTreeSet<&str> = t
        .devices
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| !a)
        .map(|(d, _)| d.id.as_str())
        .collect();
    let devices = t
        .devices
        .iter()
        .filter(|d| !gone.contains(d.id.as_str()))
        .cloned()
        .collect();
    let links = t
        .links
        .iter()
        .filter(|(a, b)| !gone.contains(a.as_str()) && !gone.contains(b.as_str()))
        .cloned()
        .collect();
    let hosts = t
        .hosts
        .iter()
        .map(|h| Host {
            id: h.id.clone(),
            attachment: h.attachment.clone().filter(|d| !gone.contains(d.as_str())),
        })
        .collect();
    Topology::from_parts(t.fabric, devices, links, hosts)
}

/// Fraction of all host pairs of `t` that cannot communicate once `failed`
/// devices are down. Pairs involving a detached host count as cut off.
pub fn affected_fraction<'a, I>(t: &Topology, failed: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a str>,
{
    let alive = resolve_failed(t, failed)?;
    let g = Graph::new(t);
    let mut seen = vec![false; alive.len()];
    Ok(g.affected_fraction(&alive, &mut VecDeque::new(), &mut seen))
}

/// Largest affected fraction caused by any single device failure.
pub fn max_single_failure_fraction(t: &Topology) -> f64 {
    let g = Graph::new(t);
    let n = t.devices.len();
    let mut alive = vec![true; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        alive[i] = false;
        worst = worst.max(g.affected_fraction(&alive, &mut queue, &mut seen));
        alive[i] = true;
    }
    worst
}

/// Independent per-trial failure probability for each device role.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FailureModel {
    probabilities: BTreeMap<Role, f64>,
}

impl FailureModel {
    /// No device ever fails.
    pub fn new() -> Self {
        Self::default()
    }

    /// Every role fails with probability `p`.
    pub fn uniform(p: f64) -> Result<Self> {
        let mut fm = Self::new();
        for role in Role::ALL {
            fm.set(role, p)?;
        }
        Ok(fm)
    }

    pub fn set(&mut self, role: Role, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                name: "failure probability",
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
        self.probabilities.insert(role, p);
        Ok(())
    }

    pub fn with(mut self, role: Role, p: f64) -> Result<Self> {
        self.set(role, p)?;
        Ok(self)
    }

    /// Roles without an explicit entry never fail.
    pub fn probability(&self, role: Role) -> f64 {
        self.probabilities.get(&role).copied().unwrap_or(0.0)
    }
}

/// Summary of the harm caused by random device failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FailureHarm {
    pub expected_harm: f64,
    pub std_error: f64,
    pub quantiles: Quantiles,
    pub trials: u64,
}

/// Monte Carlo over independent device failures: each trial scores
/// `harm(affected_fraction)`.
pub fn failure_harm_mc(t: &Topology, fm: &FailureModel, h: &HarmParams, trials: u64, seed: u64) -> Result<FailureHarm> {
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let g = Graph::new(t);
    let probs: Vec<f64> = t.devices.iter().map(|d| fm.probability(d.role)).collect();
    let n = probs.len();
    let mut rng = seeded_rng(seed);
    let mut alive = vec![true; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut acc = Accumulator::new();
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        for (slot, &p) in alive.iter_mut().zip(&probs) {
            *slot = rng.gen::<f64>() >= p;
        }
        let x = g.affected_fraction(&alive, &mut queue, &mut seen);
        let harm = h.harm_unchecked(x);
        acc.push(harm);
        samples.push(harm);
    }
    Ok(FailureHarm {
        expected_harm: acc.mean(),
        std_error: acc.std_error(),
        quantiles: quantiles(&mut samples),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_spine_leaf, build_three_tier};

    #[test]
    fn spine_leaf_hops_are_two() {
        let t = build_spine_leaf(2, 4, 1).unwrap();
        let hist = hop_histogram(&t);
        assert_eq!(hist, BTreeMap::from([(HopBucket::Hops(2), 6)]));
    }

    #[test]
    fn spine_leaf_hops_with_local_pairs() {
        let t = build_spine_leaf(2, 4, 10).unwrap();
        let hist = hop_histogram(&t);
        assert_eq!(
            hist,
            BTreeMap::from([(HopBucket::Hops(0), 180), (HopBucket::Hops(2), 600)])
        );
    }

    #[test]
    fn three_tier_hops() {
        let t = build_three_tier(2, 2, 2, 1).unwrap();
        // a0,a1 under d0; a2,a3 under d1
        let hist = hop_histogram(&t);
        assert_eq!(hist, BTreeMap::from([(HopBucket::Hops(2), 2), (HopBucket::Hops(4), 4)]));
    }

    #[test]
    fn unreachable_bucket() {
        let t = build_three_tier(2, 2, 1, 1).unwrap();
        let cut = inject_failures(&t, ["c0", "c1"]).unwrap();
        assert_eq!(hop_histogram(&cut), BTreeMap::from([(HopBucket::Unreachable, 1)]));
        let detached = inject_failures(&t, ["a0"]).unwrap();
        assert_eq!(hop_histogram(&detached), BTreeMap::from([(HopBucket::Unreachable, 1)]));
    }

    #[test]
    fn inject_nothing_is_identity() {
        let t = build_three_tier(2, 3, 2, 2).unwrap();
        assert_eq!(inject_failures(&t, []).unwrap(), t);
    }

    #[test]
    fn inject_unknown_device() {
        let t = build_spine_leaf(1, 1, 1).unwrap();
        assert_eq!(
            inject_failures(&t, ["x9"]).unwrap_err(),
            Error::UnknownDevice("x9".into())
        );
        assert!(affected_fraction(&t, ["x9"]).is_err());
    }

    #[test]
    fn inject_marks_hosts_detached() {
        let t = build_spine_leaf(2, 2, 2).unwrap();
        let f = inject_failures(&t, ["l0", "s1"]).unwrap();
        assert_eq!(f.devices().len(), 2);
        assert_eq!(f.links().len(), 1);
        let detached: Vec<&str> = f
            .hosts()
            .iter()
            .filter(|h| h.attachment.is_none())
            .map(|h| h.id.as_str())
            .collect();
        assert_eq!(detached, ["h0", "h1"]);
    }

    #[test]
    fn affected_fraction_examples() {
        let t = build_spine_leaf(2, 4, 1).unwrap();
        assert_eq!(affected_fraction(&t, []).unwrap(), 0.0);
        assert_eq!(affected_fraction(&t, ["l2"]).unwrap(), 0.5);
        assert_eq!(affected_fraction(&t, ["s0"]).unwrap(), 0.0);
        assert_eq!(affected_fraction(&t, ["s0", "s1"]).unwrap(), 1.0);
        let t = build_three_tier(2, 2, 2, 1).unwrap();
        // cross-distribution pairs: 4 of 6
        assert!((affected_fraction(&t, ["c0", "c1"]).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn single_failure_fault_domain() {
        assert_eq!(max_single_failure_fraction(&build_spine_leaf(2, 4, 1).unwrap()), 0.5);
        // losing d0 cuts a0 and a1 off from everything: 5 of 6 pairs
        let worst = max_single_failure_fraction(&build_three_tier(2, 2, 2, 1).unwrap());
        assert!((worst - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn failure_model_bounds() {
        assert!(FailureModel::uniform(1.5).is_err());
        assert!(FailureModel::new().with(Role::Spine, -0.1).is_err());
        let fm = FailureModel::new().with(Role::Spine, 0.3).unwrap();
        assert_eq!(fm.probability(Role::Spine), 0.3);
        assert_eq!(fm.probability(Role::Leaf), 0.0);
    }

    #[test]
    fn failure_harm_extremes() {
        let t = build_three_tier(2, 2, 2, 1).unwrap();
        let h = HarmParams::new(2.5, 1.5).unwrap();
        let none = failure_harm_mc(&t, &FailureModel::uniform(0.0).unwrap(), &h, 500, 1).unwrap();
        assert_eq!(none.expected_harm, 0.0);
        let all = failure_harm_mc(&t, &FailureModel::uniform(1.0).unwrap(), &h, 500, 1).unwrap();
        assert_eq!(all.expected_harm, -2.5);
        assert_eq!(all.quantiles.p99, -2.5);
        assert!(failure_harm_mc(&t, &FailureModel::new(), &h, 0, 1).is_err());
    }

    #[test]
    fn failure_harm_deterministic() {
        let t = build_spine_leaf(2, 4, 1).unwrap();
        let h = HarmParams::new(1.0, 1.5).unwrap();
        let fm = FailureModel::uniform(0.1).unwrap();
        assert_eq!(
            failure_harm_mc(&t, &fm, &h, 2000, 77).unwrap(),
            failure_harm_mc(&t, &fm, &h, 2000, 77).unwrap()
        );
    }
}
