//! Price, power and fault-domain comparison of two fabrics.
//!
//! Fixed-port roles (spine, leaf) are priced at a fraction of the modular
//! per-port figures; the defaults put both fractions at 0.25.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{check_positive, Error, Result};
use crate::report::ScenarioReport;
use crate::topology::{max_single_failure_fraction, Role, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostAssumptions {
    pub modular_price_per_port: f64,
    pub modular_watts_per_port: f64,
    pub fixed_price_ratio: f64,
    pub fixed_watts_ratio: f64,
}

impl Default for CostAssumptions {
    fn default() -> Self {
        Self {
            modular_price_per_port: 1.0,
            modular_watts_per_port: 1.0,
            fixed_price_ratio: 0.25,
            fixed_watts_ratio: 0.25,
        }
    }
}

impl CostAssumptions {
    pub fn validate(&self) -> Result<()> {
        check_positive("modular_price_per_port", self.modular_price_per_port)?;
        check_positive("modular_watts_per_port", self.modular_watts_per_port)?;
        for (name, r) in [
            ("fixed_price_ratio", self.fixed_price_ratio),
            ("fixed_watts_ratio", self.fixed_watts_ratio),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Domain {
                    name,
                    value: r,
                    reason: "must lie in (0, 1]",
                });
            }
        }
        Ok(())
    }

    fn price_per_port(&self, role: Role) -> f64 {
        if role.is_fixed_port() {
            self.modular_price_per_port * self.fixed_price_ratio
        } else {
            self.modular_price_per_port
        }
    }

    fn watts_per_port(&self, role: Role) -> f64 {
        if role.is_fixed_port() {
            self.modular_watts_per_port * self.fixed_watts_ratio
        } else {
            self.modular_watts_per_port
        }
    }
}

/// Totals for one fabric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignMetrics {
    pub total_ports: f64,
    pub total_price: f64,
    pub total_watts: f64,
    pub price_per_port: f64,
    pub watts_per_port: f64,
    /// Worst affected fraction of host pairs over single-device failures.
    pub max_fault_domain: f64,
}

impl DesignMetrics {
    fn values(&self) -> [f64; 6] {
        [
            self.total_ports,
            self.total_price,
            self.total_watts,
            self.price_per_port,
            self.watts_per_port,
            self.max_fault_domain,
        ]
    }
}

pub const METRIC_COLUMNS: [&str; 6] = [
    "total_ports",
    "total_price",
    "total_watts",
    "price_per_port",
    "watts_per_port",
    "max_fault_domain",
];

pub fn design_metrics(
    t: &Topology,
    c: &CostAssumptions,
    ports_per_device: &BTreeMap<Role, u32>,
) -> Result<DesignMetrics> {
    c.validate()?;
    let (mut ports, mut price, mut watts) = (0.0, 0.0, 0.0);
    for d in t.devices() {
        let n = ports_per_device
            .get(&d.role)
            .copied()
            .ok_or_else(|| Error::MissingPortCount(d.role.to_string()))?;
        let n = f64::from(n);
        ports += n;
        price += n * c.price_per_port(d.role);
        watts += n * c.watts_per_port(d.role);
    }
    let per_port = |total: f64| if ports > 0.0 { total / ports } else { 0.0 };
    Ok(DesignMetrics {
        total_ports: ports,
        total_price: price,
        total_watts: watts,
        price_per_port: per_port(price),
        watts_per_port: per_port(watts),
        max_fault_domain: max_single_failure_fraction(t),
    })
}

/// `b / a`, taking `0 / 0` as 1 so identical designs always compare as 1.
fn ratio(b: f64, a: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        b / a
    }
}

/// Rows `a`, `b` and `b/a` over [`METRIC_COLUMNS`].
pub fn compare_designs(
    a: &Topology,
    b: &Topology,
    c: &CostAssumptions,
    ports_per_device: &BTreeMap<Role, u32>,
) -> Result<ScenarioReport> {
    let ma = design_metrics(a, c, ports_per_device)?;
    let mb = design_metrics(b, c, ports_per_device)?;
    let ratios: Vec<f64> = mb.values().iter().zip(ma.values()).map(|(&y, x)| ratio(y, x)).collect();
    let mut report = ScenarioReport::new("compare", METRIC_COLUMNS).with_label_column("design");
    report.push_labeled_row("a", ma.values().to_vec());
    report.push_labeled_row("b", mb.values().to_vec());
    report.push_labeled_row("b/a", ratios);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_spine_leaf, build_three_tier};

    fn ports(n: u32) -> BTreeMap<Role, u32> {
        Role::ALL.into_iter().map(|r| (r, n)).collect()
    }

    fn row<'a>(r: &'a ScenarioReport, label: &str) -> &'a [f64] {
        &r.rows()
            .iter()
            .find(|row| row.label.as_deref() == Some(label))
            .unwrap()
            .values
    }

    #[test]
    fn identical_designs_ratio_one() {
        let t = build_three_tier(2, 2, 2, 1).unwrap();
        let r = compare_designs(&t, &t, &CostAssumptions::default(), &ports(48)).unwrap();
        assert!(row(&r, "b/a").iter().all(|&v| v == 1.0));
    }

    #[test]
    fn default_ratios_are_a_quarter() {
        let a = build_three_tier(2, 2, 2, 1).unwrap();
        let b = build_spine_leaf(2, 4, 1).unwrap();
        let r = compare_designs(&a, &b, &CostAssumptions::default(), &ports(48)).unwrap();
        let ratios = row(&r, "b/a");
        assert_eq!(ratios[3], 0.25);
        assert_eq!(ratios[4], 0.25);
        assert_eq!(row(&r, "b")[3], 0.25 * row(&r, "a")[3]);
        // spine-leaf worst case is a leaf (1/2), 3-tier a distribution (5/6)
        assert_eq!(row(&r, "b")[5], 0.5);
    }

    #[test]
    fn missing_port_count() {
        let a = build_three_tier(1, 1, 1, 1).unwrap();
        let mut p = ports(24);
        p.remove(&Role::Access);
        assert_eq!(
            design_metrics(&a, &CostAssumptions::default(), &p).unwrap_err(),
            Error::MissingPortCount("access".into())
        );
    }

    #[test]
    fn assumptions_validated() {
        let bad = CostAssumptions {
            fixed_price_ratio: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CostAssumptions {
            modular_watts_per_port: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
