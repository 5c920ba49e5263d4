//! 3-tier and spine-leaf fabrics, hop counts, and device-failure fault domains.
//!
//! A [`Topology`] can only be obtained from [`build_three_tier`],
//! [`build_spine_leaf`], [`parse`](text::parse), or by failing devices of an
//! existing one; each path checks the invariants of its fabric.

mod analysis;
pub mod text;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{check_count, Error, Result};

pub use analysis::{
    affected_fraction, failure_harm_mc, hop_histogram, inject_failures, max_single_failure_fraction, FailureHarm,
    FailureModel, HopBucket,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Core,
    Distribution,
    Access,
    Spine,
    Leaf,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Core, Role::Distribution, Role::Access, Role::Spine, Role::Leaf];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Core => "core",
            Role::Distribution => "distribution",
            Role::Access => "access",
            Role::Spine => "spine",
            Role::Leaf => "leaf",
        }
    }

    /// Fixed-port roles of a spine-leaf fabric, as opposed to modular chassis.
    pub fn is_fixed_port(&self) -> bool {
        matches!(self, Role::Spine | Role::Leaf)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown role `{s}`"))
    }
}

/// Descriptive function of a leaf; carries no behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafTag {
    DataCenter,
    Border,
    Dmz,
    Sdn,
    Campus,
}

impl LeafTag {
    pub const ALL: [LeafTag; 5] = [
        LeafTag::DataCenter,
        LeafTag::Border,
        LeafTag::Dmz,
        LeafTag::Sdn,
        LeafTag::Campus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LeafTag::DataCenter => "data-center",
            LeafTag::Border => "border",
            LeafTag::Dmz => "dmz",
            LeafTag::Sdn => "sdn",
            LeafTag::Campus => "campus",
        }
    }
}

impl FromStr for LeafTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        LeafTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown leaf tag `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fabric {
    ThreeTier,
    SpineLeaf,
}

impl Fabric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Fabric::ThreeTier => "three-tier",
            Fabric::SpineLeaf => "spine-leaf",
        }
    }

    fn allows_role(&self, role: Role) -> bool {
        match self {
            Fabric::ThreeTier => matches!(role, Role::Core | Role::Distribution | Role::Access),
            Fabric::SpineLeaf => matches!(role, Role::Spine | Role::Leaf),
        }
    }

    fn host_role(&self) -> Role {
        match self {
            Fabric::ThreeTier => Role::Access,
            Fabric::SpineLeaf => Role::Leaf,
        }
    }

    fn allows_link(&self, a: Role, b: Role) -> bool {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match self {
            Fabric::ThreeTier => matches!(
                (lo, hi),
                (Role::Core, Role::Core) | (Role::Core, Role::Distribution) | (Role::Distribution, Role::Access)
            ),
            Fabric::SpineLeaf => matches!((lo, hi), (Role::Spine, Role::Leaf)),
        }
    }
}

impl FromStr for Fabric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "three-tier" | "3-tier" => Ok(Fabric::ThreeTier),
            "spine-leaf" => Ok(Fabric::SpineLeaf),
            other => Err(format!("unknown topology kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Device {
    pub id: String,
    pub role: Role,
    pub tag: Option<LeafTag>,
}

/// An end host and the device it hangs off; `None` once that device failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Host {
    pub id: String,
    pub attachment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    fabric: Fabric,
    devices: Vec<Device>,
    links: Vec<(String, String)>,
    hosts: Vec<Host>,
    index: HashMap<String, usize>,
}

const RESERVED_IDS: [&str; 4] = ["--", "@", "-", "host"];

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) || id.starts_with('#') || RESERVED_IDS.contains(&id) {
        return Err(Error::InvalidTopology(format!("`{id}` is not a valid identifier")));
    }
    Ok(())
}

impl Topology {
    /// Assembles and validates a topology from raw parts.
    pub(crate) fn from_parts(
        fabric: Fabric,
        devices: Vec<Device>,
        links: Vec<(String, String)>,
        hosts: Vec<Host>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(devices.len());
        for (i, d) in devices.iter().enumerate() {
            check_id(&d.id)?;
            if index.insert(d.id.clone(), i).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate device id `{}`", d.id)));
            }
            if !fabric.allows_role(d.role) {
                return Err(Error::InvalidTopology(format!(
                    "role `{}` is not allowed in a {} fabric",
                    d.role,
                    fabric.as_str()
                )));
            }
            if d.tag.is_some() && d.role != Role::Leaf {
                return Err(Error::InvalidTopology(format!("only leaves carry a tag (`{}`)", d.id)));
            }
        }

        let role_of = |id: &str| -> Result<Role> {
            index
                .get(id)
                .map(|&i| devices[i].role)
                .ok_or_else(|| Error::UnknownDevice(id.to_string()))
        };

        let mut seen = BTreeSet::new();
        for (a, b) in &links {
            if a == b {
                return Err(Error::InvalidTopology(format!("self-link on `{a}`")));
            }
            let (ra, rb) = (role_of(a)?, role_of(b)?);
            if !fabric.allows_link(ra, rb) {
                return Err(Error::InvalidTopology(format!(
                    "a {} fabric cannot link {ra} `{a}` to {rb} `{b}`",
                    fabric.as_str()
                )));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(Error::InvalidTopology(format!("duplicate link `{a} -- {b}`")));
            }
        }

        if fabric == Fabric::ThreeTier {
            let cores: Vec<&str> = devices
                .iter()
                .filter(|d| d.role == Role::Core)
                .map(|d| d.id.as_str())
                .collect();
            if cores.len() > 2 {
                return Err(Error::TooManyCores(cores.len()));
            }
            if cores.len() == 2 {
                let key = if cores[0] < cores[1] {
                    (cores[0], cores[1])
                } else {
                    (cores[1], cores[0])
                };
                if !seen.iter().any(|(a, b)| (a.as_str(), b.as_str()) == key) {
                    return Err(Error::InvalidTopology("the two core switches must be linked".into()));
                }
            }
        }

        let mut host_ids = BTreeSet::new();
        for h in &hosts {
            check_id(&h.id)?;
            if !host_ids.insert(h.id.as_str()) {
                return Err(Error::InvalidTopology(format!("duplicate host id `{}`", h.id)));
            }
            if let Some(dev) = &h.attachment {
                let role = role_of(dev)?;
                if role != fabric.host_role() {
                    return Err(Error::InvalidTopology(format!(
                        "host `{}` attaches to {role} `{dev}`; a {} fabric attaches hosts to {} devices",
                        h.id,
                        fabric.as_str(),
                        fabric.host_role()
                    )));
                }
            }
        }

        Ok(Self {
            fabric,
            devices,
            links,
            hosts,
            index,
        })
    }

    pub fn fabric(&self) -> Fabric {
        self.fabric
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn links(&self) -> &[(String, String)] {
        &self.links
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn device(&self, id: &str) -> Option<&Device> {
        self.index.get(id).map(|&i| &self.devices[i])
    }

    pub(crate) fn device_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.devices.iter().filter(|d| d.role == role).count()
    }

    /// Sets the descriptive tag of a leaf.
    pub fn set_leaf_tag(&mut self, id: &str, tag: Option<LeafTag>) -> Result<()> {
        let i = self
            .device_index(id)
            .ok_or_else(|| Error::UnknownDevice(id.to_string()))?;
        if self.devices[i].role != Role::Leaf {
            return Err(Error::InvalidTopology(format!("`{id}` is not a leaf")));
        }
        self.devices[i].tag = tag;
        Ok(())
    }
}

/// Options for [`build_three_tier_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThreeTierOptions {
    /// Also link every access switch to the next distribution switch.
    pub dual_homed: bool,
}

/// Core/distribution/access tree with single-homed access switches.
///
/// Every distribution switch uplinks to every core, access switch `j`
/// hangs off distribution `j / access_per_distribution`, and two cores are
/// linked to each other.
pub fn build_three_tier(
    cores: usize,
    distributions: usize,
    access_per_distribution: usize,
    hosts_per_access: usize,
) -> Result<Topology> {
    build_three_tier_with(
        cores,
        distributions,
        access_per_distribution,
        hosts_per_access,
        ThreeTierOptions::default(),
    )
}

pub fn build_three_tier_with(
    cores: usize,
    distributions: usize,
    access_per_distribution: usize,
    hosts_per_access: usize,
    options: ThreeTierOptions,
) -> Result<Topology> {
    check_count("cores", cores)?;
    if cores > 2 {
        return Err(Error::TooManyCores(cores));
    }
    check_count("distributions", distributions)?;
    check_count("access_per_distribution", access_per_distribution)?;
    check_count("hosts_per_access", hosts_per_access)?;

    let core_ids: Vec<String> = (0..cores).map(|i| format!("c{i}")).collect();
    let dist_ids: Vec<String> = (0..distributions).map(|i| format!("d{i}")).collect();
    let access_count = distributions * access_per_distribution;
    let access_ids: Vec<String> = (0..access_count).map(|i| format!("a{i}")).collect();

    let device = |id: &String, role| Device {
        id: id.clone(),
        role,
        tag: None,
    };
    let mut devices: Vec<Device> = core_ids.iter().map(|id| device(id, Role::Core)).collect();
    devices.extend(dist_ids.iter().map(|id| device(id, Role::Distribution)));
    devices.extend(access_ids.iter().map(|id| device(id, Role::Access)));

    let mut links = Vec::new();
    if cores == 2 {
        links.push((core_ids[0].clone(), core_ids[1].clone()));
    }
    for d in &dist_ids {
        for c in &core_ids {
            links.push((c.clone(), d.clone()));
        }
    }
    for (j, a) in access_ids.iter().enumerate() {
        let home = j / access_per_distribution;
        links.push((dist_ids[home].clone(), a.clone()));
        if options.dual_homed && distributions > 1 {
            links.push((dist_ids[(home + 1) % distributions].clone(), a.clone()));
        }
    }

    let hosts = attach_hosts(&access_ids, hosts_per_access);
    Topology::from_parts(Fabric::ThreeTier, devices, links, hosts)
}

/// Complete bipartite spine/leaf fabric with `hosts_per_leaf` hosts on each leaf.
pub fn build_spine_leaf(spines: usize, leaves: usize, hosts_per_leaf: usize) -> Result<Topology> {
    check_count("spines", spines)?;
    check_count("leaves", leaves)?;
    check_count("hosts_per_leaf", hosts_per_leaf)?;

    let spine_ids: Vec<String> = (0..spines).map(|i| format!("s{i}")).collect();
    let leaf_ids: Vec<String> = (0..leaves).map(|i| format!("l{i}")).collect();
    let mut devices: Vec<Device> = spine_ids
        .iter()
        .map(|id| Device {
            id: id.clone(),
            role: Role::Spine,
            tag: None,
        })
        .collect();
    devices.extend(leaf_ids.iter().map(|id| Device {
        id: id.clone(),
        role: Role::Leaf,
        tag: None,
    }));
    let links = spine_ids
        .iter()
        .flat_map(|s| leaf_ids.iter().map(move |l| (s.clone(), l.clone())))
        .collect();
    let hosts = attach_hosts(&leaf_ids, hosts_per_leaf);
    Topology::from_parts(Fabric::SpineLeaf, devices, links, hosts)
}

fn attach_hosts(edge: &[String], per_device: usize) -> Vec<Host> {
    edge.iter()
        .flat_map(|dev| std::iter::repeat_n(dev, per_device))
        .enumerate()
        .map(|(i, dev)| Host {
            id: format!("h{i}"),
            attachment: Some(dev.clone()),
        })
        .collect()
}
