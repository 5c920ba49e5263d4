//! Scenario configuration: defaults, the key-value file format, and the
//! canonical form that feeds the report's config hash.
//!
//! File grammar, one entry per line:
//!
//! ```text
//! # comment
//! harm.k = 1
//! fragments.weights = 0.5, 0.5
//! topology.kind = spine-leaf
//! ```
//!
//! Keys are dotted names from [`KEYS`]; unknown keys are rejected, a key may
//! appear at most once, and every value is validated on load.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use crate::costing::CostAssumptions;
use crate::growth::{LinearGrowth, SigmoidGrowth};
use crate::harm::{FragmentWeights, HarmParams};
use crate::pareto::{FragmentCount, ParetoParams};
use crate::rng::DEFAULT_SEED;
use crate::topology::{
    build_spine_leaf, build_three_tier_with, Fabric, FailureModel, Role, ThreeTierOptions, Topology,
};

pub const KEYS: &[&str] = &[
    "harm.k",
    "harm.beta",
    "pareto.alpha",
    "pareto.L",
    "fragments.N",
    "fragments.weights",
    "jensen.x",
    "jensen.unit_value",
    "topology.kind",
    "topology.cores",
    "topology.distributions",
    "topology.access_per_distribution",
    "topology.hosts_per_access",
    "topology.dual_homed",
    "topology.spines",
    "topology.leaves",
    "topology.hosts_per_leaf",
    "failure.core",
    "failure.distribution",
    "failure.access",
    "failure.spine",
    "failure.leaf",
    "failure.core_silent_drop",
    "cost.modular_price_per_port",
    "cost.modular_watts_per_port",
    "cost.fixed_price_ratio",
    "cost.fixed_watts_ratio",
    "ports.core",
    "ports.distribution",
    "ports.access",
    "ports.spine",
    "ports.leaf",
    "growth.saturation",
    "growth.ports_per_switch",
    "trials",
    "seed",
    "output.format",
    "output.digits",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => bail!("unknown output format `{other}` (expected csv or json)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub kind: Fabric,
    pub cores: usize,
    pub distributions: usize,
    pub access_per_distribution: usize,
    pub hosts_per_access: usize,
    pub dual_homed: bool,
    pub spines: usize,
    pub leaves: usize,
    pub hosts_per_leaf: usize,
}

impl TopologySpec {
    pub fn build(&self) -> crate::Result<Topology> {
        match self.kind {
            Fabric::ThreeTier => build_three_tier_with(
                self.cores,
                self.distributions,
                self.access_per_distribution,
                self.hosts_per_access,
                ThreeTierOptions {
                    dual_homed: self.dual_homed,
                },
            ),
            Fabric::SpineLeaf => build_spine_leaf(self.spines, self.leaves, self.hosts_per_leaf),
        }
    }
}

/// Every tunable of every subcommand, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub harm_k: f64,
    pub harm_beta: f64,
    pub pareto_alpha: f64,
    pub pareto_scale: f64,
    pub fragments: u64,
    pub weights: Vec<f64>,
    pub jensen_x: f64,
    pub unit_value: f64,
    pub topology: TopologySpec,
    pub failure: BTreeMap<Role, f64>,
    /// Per-core silent packet drop probability; reported, never simulated.
    pub core_silent_drop: Option<f64>,
    pub cost: CostAssumptions,
    pub ports: BTreeMap<Role, u32>,
    pub growth_saturation: f64,
    pub growth_ports_per_switch: u32,
    pub trials: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub digits: Option<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            harm_k: 1.0,
            harm_beta: 1.5,
            pareto_alpha: 4.0,
            pareto_scale: 1.0,
            fragments: 1,
            weights: vec![0.5, 0.5],
            jensen_x: 1.0,
            unit_value: 10.0,
            topology: TopologySpec {
                kind: Fabric::SpineLeaf,
                cores: 2,
                distributions: 2,
                access_per_distribution: 2,
                hosts_per_access: 1,
                dual_homed: false,
                spines: 2,
                leaves: 4,
                hosts_per_leaf: 1,
            },
            failure: Role::ALL.into_iter().map(|r| (r, 0.05)).collect(),
            core_silent_drop: None,
            cost: CostAssumptions::default(),
            ports: Role::ALL.into_iter().map(|r| (r, 48)).collect(),
            growth_saturation: 100.0,
            growth_ports_per_switch: 48,
            trials: 100_000,
            seed: DEFAULT_SEED,
            format: OutputFormat::Csv,
            digits: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| anyhow!("invalid value `{raw}` for `{key}`: {e}"))
}

pub fn parse_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value::<f64>("list", s))
        .collect()
}

impl ScenarioConfig {
    /// Defaults overlaid with the entries of a config file.
    pub fn from_file_text(text: &str) -> Result<Self> {
        Self::load(text).map(|(cfg, _)| cfg)
    }

    /// Like [`from_file_text`](Self::from_file_text), also returning the keys the file set.
    pub fn load(text: &str) -> Result<(Self, BTreeSet<String>)> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                bail!("line {}: duplicate key `{key}`", i + 1);
            }
            cfg.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        cfg.validate()?;
        Ok((cfg, seen))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "harm.k" => self.harm_k = parse_value(key, value)?,
            "harm.beta" => self.harm_beta = parse_value(key, value)?,
            "pareto.alpha" => self.pareto_alpha = parse_value(key, value)?,
            "pareto.L" => self.pareto_scale = parse_value(key, value)?,
            "fragments.N" => self.fragments = parse_value(key, value)?,
            "fragments.weights" => self.weights = parse_list(value)?,
            "jensen.x" => self.jensen_x = parse_value(key, value)?,
            "jensen.unit_value" => self.unit_value = parse_value(key, value)?,
            "topology.kind" => self.topology.kind = value.parse().map_err(|e: String| anyhow!(e))?,
            "topology.cores" => self.topology.cores = parse_value(key, value)?,
            "topology.distributions" => self.topology.distributions = parse_value(key, value)?,
            "topology.access_per_distribution" => self.topology.access_per_distribution = parse_value(key, value)?,
            "topology.hosts_per_access" => self.topology.hosts_per_access = parse_value(key, value)?,
            "topology.dual_homed" => self.topology.dual_homed = parse_value(key, value)?,
            "topology.spines" => self.topology.spines = parse_value(key, value)?,
            "topology.leaves" => self.topology.leaves = parse_value(key, value)?,
            "topology.hosts_per_leaf" => self.topology.hosts_per_leaf = parse_value(key, value)?,
            "failure.core_silent_drop" => self.core_silent_drop = Some(parse_value(key, value)?),
            "cost.modular_price_per_port" => self.cost.modular_price_per_port = parse_value(key, value)?,
            "cost.modular_watts_per_port" => self.cost.modular_watts_per_port = parse_value(key, value)?,
            "cost.fixed_price_ratio" => self.cost.fixed_price_ratio = parse_value(key, value)?,
            "cost.fixed_watts_ratio" => self.cost.fixed_watts_ratio = parse_value(key, value)?,
            "growth.saturation" => self.growth_saturation = parse_value(key, value)?,
            "growth.ports_per_switch" => self.growth_ports_per_switch = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "output.format" => self.format = value.parse()?,
            "output.digits" => self.digits = Some(parse_value(key, value)?),
            other => {
                if let Some(role) = other.strip_prefix("failure.") {
                    let role: Role = role.parse().map_err(|e: String| anyhow!(e))?;
                    self.failure.insert(role, parse_value(key, value)?);
                } else if let Some(role) = other.strip_prefix("ports.") {
                    let role: Role = role.parse().map_err(|e: String| anyhow!(e))?;
                    self.ports.insert(role, parse_value(key, value)?);
                } else {
                    bail!("unknown key `{other}`");
                }
            }
        }
        Ok(())
    }

    /// Checks every component invariant the configured values touch.
    pub fn validate(&self) -> Result<()> {
        let harm = self.harm()?;
        self.pareto()?;
        FragmentCount::new(self.fragments)?;
        self.weights()?;
        harm.harm(self.jensen_x)?;
        if !(self.unit_value.is_finite() && self.unit_value > 0.0) {
            bail!("jensen.unit_value must be positive");
        }
        self.topology.build()?;
        self.failure_model()?;
        if let Some(p) = self.core_silent_drop {
            if !(0.0..=1.0).contains(&p) {
                bail!("failure.core_silent_drop must lie in [0, 1]");
            }
        }
        self.cost.validate()?;
        SigmoidGrowth::new(self.growth_saturation)?;
        LinearGrowth::new(self.growth_ports_per_switch)?;
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        Ok(())
    }

    pub fn harm(&self) -> crate::Result<HarmParams> {
        HarmParams::new(self.harm_k, self.harm_beta)
    }

    pub fn pareto(&self) -> crate::Result<ParetoParams> {
        ParetoParams::new(self.pareto_alpha, self.pareto_scale)
    }

    pub fn fragment_count(&self) -> crate::Result<FragmentCount> {
        FragmentCount::new(self.fragments)
    }

    pub fn weights(&self) -> crate::Result<FragmentWeights> {
        FragmentWeights::new(self.weights.clone())
    }

    pub fn failure_model(&self) -> crate::Result<FailureModel> {
        let mut fm = FailureModel::new();
        for (&role, &p) in &self.failure {
            fm.set(role, p)?;
        }
        Ok(fm)
    }

    /// One `key = value` line per key in [`KEYS`] order.
    pub fn canonical(&self) -> String {
        let t = &self.topology;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        for key in KEYS {
            let value = match *key {
                "harm.k" => format!("{:?}", self.harm_k),
                "harm.beta" => format!("{:?}", self.harm_beta),
                "pareto.alpha" => format!("{:?}", self.pareto_alpha),
                "pareto.L" => format!("{:?}", self.pareto_scale),
                "fragments.N" => self.fragments.to_string(),
                "fragments.weights" => list(&self.weights),
                "jensen.x" => format!("{:?}", self.jensen_x),
                "jensen.unit_value" => format!("{:?}", self.unit_value),
                "topology.kind" => t.kind.as_str().to_string(),
                "topology.cores" => t.cores.to_string(),
                "topology.distributions" => t.distributions.to_string(),
                "topology.access_per_distribution" => t.access_per_distribution.to_string(),
                "topology.hosts_per_access" => t.hosts_per_access.to_string(),
                "topology.dual_homed" => t.dual_homed.to_string(),
                "topology.spines" => t.spines.to_string(),
                "topology.leaves" => t.leaves.to_string(),
                "topology.hosts_per_leaf" => t.hosts_per_leaf.to_string(),
                "failure.core_silent_drop" => match self.core_silent_drop {
                    Some(p) => format!("{p:?}"),
                    None => continue,
                },
                "cost.modular_price_per_port" => format!("{:?}", self.cost.modular_price_per_port),
                "cost.modular_watts_per_port" => format!("{:?}", self.cost.modular_watts_per_port),
                "cost.fixed_price_ratio" => format!("{:?}", self.cost.fixed_price_ratio),
                "cost.fixed_watts_ratio" => format!("{:?}", self.cost.fixed_watts_ratio),
                "growth.saturation" => format!("{:?}", self.growth_saturation),
                "growth.ports_per_switch" => self.growth_ports_per_switch.to_string(),
                "trials" => self.trials.to_string(),
                "seed" => self.seed.to_string(),
                "output.format" => self.format.as_str().to_string(),
                "output.digits" => match self.digits {
                    Some(d) => d.to_string(),
                    None => continue,
                },
                other => {
                    if let Some(role) = other.strip_prefix("failure.") {
                        let role: Role = role.parse().expect("known role");
                        format!("{:?}", self.failure.get(&role).copied().unwrap_or(0.0))
                    } else if let Some(role) = other.strip_prefix("ports.") {
                        let role: Role = role.parse().expect("known role");
                        match self.ports.get(&role) {
                            Some(n) => n.to_string(),
                            None => continue,
                        }
                    } else {
                        unreachable!("key list and canonical form out of sync: {other}")
                    }
                }
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn canonical_round_trips() {
        let mut cfg = ScenarioConfig {
            harm_beta: 2.0,
            weights: vec![0.25, 0.75],
            ..Default::default()
        };
        cfg.topology.kind = Fabric::ThreeTier;
        cfg.digits = Some(4);
        let again = ScenarioConfig::from_file_text(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
        assert_ne!(ScenarioConfig::default().hash(), cfg.hash());
    }

    #[test]
    fn file_overrides_defaults() {
        let cfg = ScenarioConfig::from_file_text(
            "# scenario\nharm.beta = 2\n\nfailure.spine = 0.2\nports.leaf = 32\ntopology.kind = three-tier\n",
        )
        .unwrap();
        assert_eq!(cfg.harm_beta, 2.0);
        assert_eq!(cfg.failure[&Role::Spine], 0.2);
        assert_eq!(cfg.ports[&Role::Leaf], 32);
        assert_eq!(cfg.topology.kind, Fabric::ThreeTier);
    }

    #[test]
    fn rejects_unknown_duplicate_and_invalid() {
        assert!(ScenarioConfig::from_file_text("harm.q = 1\n").is_err());
        assert!(ScenarioConfig::from_file_text("failure.router = 0.1\n").is_err());
        assert!(ScenarioConfig::from_file_text("harm.k = 1\nharm.k = 2\n").is_err());
        assert!(ScenarioConfig::from_file_text("harm.k = -1\n").is_err());
        assert!(ScenarioConfig::from_file_text("fragments.weights = 0.5, 0.6\n").is_err());
        assert!(ScenarioConfig::from_file_text("topology.kind = three-tier\ntopology.cores = 3\n").is_err());
        assert!(ScenarioConfig::from_file_text("harm.k 1\n").is_err());
        assert!(ScenarioConfig::from_file_text("failure.leaf = 2\n").is_err());
    }
}
