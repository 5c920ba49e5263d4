//! The `verify` subcommand: every analytic result against its independent
//! reference, at fixed seeds and fixed tolerances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::costing::{compare_designs, CostAssumptions};
use crate::growth::{capacity_at, crossover, erf_value, GrowthSpec, LinearGrowth, SigmoidGrowth};
use crate::harm::{survival_comparison, FragmentWeights, HarmParams};
use crate::oracle;
use crate::pareto::{degradation_curve, degradation_ratio, mc_tail_mean, tail_mean, FragmentCount, ParetoParams};
use crate::rng::seeded_rng;
use crate::topology::{
    affected_fraction, build_spine_leaf, build_three_tier, build_three_tier_with, failure_harm_mc, hop_histogram,
    FailureModel, HopBucket, Role, ThreeTierOptions, Topology,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Observed discrepancy (or count of violations) compared to `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} (value {:.3e}, tolerance {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

const SEED: u64 = 20_240_601;

fn pareto(alpha: f64, l: f64) -> ParetoParams {
    ParetoParams::new(alpha, l).expect("valid pareto")
}

fn harm(k: f64, beta: f64) -> HarmParams {
    HarmParams::new(k, beta).expect("valid harm")
}

fn frag(n: u64) -> FragmentCount {
    FragmentCount::new(n).expect("valid N")
}

pub fn tail_mean_checks() -> Vec<Check> {
    let (p, h) = (pareto(4.0, 1.0), harm(1.0, 1.5));
    [1, 2, 5]
        .into_iter()
        .map(|n| {
            let exact = tail_mean(&p, &h, frag(n)).expect("converges");
            let mc = mc_tail_mean(&p, &h, frag(n), 1_000_000, SEED + n).expect("converges");
            Check::within(
                format!("tail mean N={n}: Monte Carlo relative error"),
                ((mc.mean - exact) / exact).abs(),
                0.02,
            )
        })
        .chain([1, 2, 5].into_iter().map(|n| {
            let exact = tail_mean(&p, &h, frag(n)).expect("converges");
            let quad = oracle::tail_mean_by_quadrature(&p, &h, frag(n)).expect("valid");
            Check::within(
                format!("tail mean N={n}: quadrature relative error"),
                ((quad - exact) / exact).abs(),
                1e-8,
            )
        }))
        .collect()
}

pub fn density_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    for alpha in [1.5, 2.0, 4.0] {
        for beta in [1.0, 1.5, 2.0, 3.0] {
            if alpha <= beta {
                continue;
            }
            for n in [1, 2, 5] {
                let mass = oracle::density_mass(&pareto(alpha, 1.0), &harm(1.0, beta), frag(n))
                    .expect("valid")
                    .value;
                checks.push(Check::within(
                    format!("density mass alpha={alpha} beta={beta} N={n}"),
                    (mass - 1.0).abs(),
                    1e-6,
                ));
            }
        }
    }
    let (p, h, f) = (pareto(4.0, 1.0), harm(1.0, 1.5), frag(2));
    let samples = oracle::sample_fragment_harm(&p, &h, f, 100_000, SEED);
    let l1 = oracle::histogram_l1(&p, &h, f, &samples, 50).expect("valid");
    checks.push(Check::within("density histogram L1 (10^5 samples, 50 bins)", l1, 0.05));
    checks
}

pub fn ratio_checks() -> Vec<Check> {
    let (p, h) = (pareto(2.0, 1.0), harm(1.0, 1.5));
    let mut checks = Vec::new();
    for k in [2u64, 3, 4] {
        for n in [1u64, 2] {
            let ratio = degradation_ratio(&p, &h, k as f64, frag(n)).expect("valid");
            let identity =
                k as f64 * tail_mean(&p, &h, frag(k * n)).expect("valid") / tail_mean(&p, &h, frag(n)).expect("valid");
            checks.push(Check::within(
                format!("degradation identity K={k} N={n}"),
                ((identity - ratio) / ratio).abs(),
                1e-12,
            ));
        }
    }
    let ks: Vec<f64> = (1..=16).map(f64::from).collect();
    let curve = degradation_curve(&p, &h, &ks).expect("valid");
    checks.push(Check::flag(
        "degradation curve decreasing (alpha=2, beta=1.5)",
        curve.windows(2).all(|w| w[1].1 < w[0].1),
    ));
    checks.push(Check::within(
        "degradation curve at K=2 vs 2^(-2/3)",
        (curve[1].1 - 2f64.powf(-2.0 / 3.0)).abs(),
        1e-6,
    ));
    checks.push(Check::within(
        "degradation curve at K=2 vs 0.63",
        (curve[1].1 - 0.63).abs(),
        5e-4,
    ));
    checks
}

fn random_simplex<R: Rng>(rng: &mut R, len: usize) -> FragmentWeights {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let tail: f64 = w[..len - 1].iter().sum();
    w[len - 1] = (1.0 - tail).max(0.0);
    FragmentWeights::new(w).expect("simplex weights")
}

pub fn jensen_checks() -> Vec<Check> {
    let mut rng = seeded_rng(SEED);
    let (mut convex_violations, mut concave_violations) = (0u32, 0u32);
    for _ in 0..1000 {
        let h = harm(rng.gen_range(f64::EPSILON..=10.0), rng.gen_range(1.0..=4.0));
        let w = {
            let n = rng.gen_range(1..=8);
            random_simplex(&mut rng, n)
        };
        let x = rng.gen_range(f64::EPSILON..=100.0);
        if h.jensen_gap(&w, x).expect("valid") < -1e-12 {
            convex_violations += 1;
        }
    }
    for _ in 0..1000 {
        let h = harm(rng.gen_range(f64::EPSILON..=10.0), rng.gen_range(f64::EPSILON..1.0));
        let w = {
            let n = rng.gen_range(1..=8);
            random_simplex(&mut rng, n)
        };
        let x = rng.gen_range(f64::EPSILON..=100.0);
        if h.jensen_gap(&w, x).expect("valid") > 1e-12 {
            concave_violations += 1;
        }
    }
    vec![
        Check::within(
            "jensen gap >= 0 for beta in [1,4] (violations)",
            convex_violations.into(),
            0.0,
        ),
        Check::within(
            "jensen gap <= 0 for beta in (0,1) (violations)",
            concave_violations.into(),
            0.0,
        ),
    ]
}

pub fn survival_checks() -> Vec<Check> {
    let w = FragmentWeights::new(vec![0.5, 0.5]).expect("valid");
    let r = survival_comparison(&harm(1.0, 2.0), 10.0, &w, &pareto(4.0, 1.0), 1_000_000, SEED).expect("converges");
    vec![Check::within(
        "survival difference vs 1.0 (standard errors)",
        (r.difference() - 1.0).abs() / r.difference_std_error,
        3.0,
    )]
}

/// A random topology of at most 50 devices, built through the constructors.
pub fn random_topology<R: Rng>(rng: &mut R) -> Topology {
    if rng.gen_bool(0.5) {
        let spines = rng.gen_range(1..=8);
        let leaves = rng.gen_range(1..=50 - spines);
        build_spine_leaf(spines, leaves, rng.gen_range(1..=3)).expect("valid sizes")
    } else {
        let cores = rng.gen_range(1..=2);
        let distributions = rng.gen_range(1..=6);
        let per = rng.gen_range(1..=(50 - cores - distributions) / distributions).min(8);
        let opts = ThreeTierOptions {
            dual_homed: rng.gen_bool(0.3),
        };
        build_three_tier_with(cores, distributions, per, rng.gen_range(1..=3), opts).expect("valid sizes")
    }
}

pub fn random_failures<'t, R: Rng>(rng: &mut R, t: &'t Topology) -> Vec<&'t str> {
    let p = rng.gen_range(0.0..0.5);
    let mut failed: Vec<&str> = t
        .devices()
        .iter()
        .filter(|_| rng.gen_bool(p))
        .map(|d| d.id.as_str())
        .collect();
    failed.shuffle(rng);
    failed
}

pub fn topology_checks() -> Vec<Check> {
    let mut rng = seeded_rng(SEED);
    let mut mismatches = 0u32;
    for _ in 0..200 {
        let t = random_topology(&mut rng);
        let failed = random_failures(&mut rng, &t);
        let fast = affected_fraction(&t, failed.iter().copied()).expect("known ids");
        let slow = oracle::affected_fraction_bruteforce(&t, &failed).expect("known ids");
        if (fast - slow).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    let mut checks = vec![Check::within(
        "affected fraction vs per-pair BFS on 200 random topologies (mismatches)",
        mismatches.into(),
        0.0,
    )];
    let h = harm(1.0, 1.5);
    let fm = FailureModel::uniform(0.05).expect("valid");
    for (name, t) in [
        ("spine_leaf(2,4,1)", build_spine_leaf(2, 4, 1).expect("valid")),
        ("three_tier(2,2,2,1)", build_three_tier(2, 2, 2, 1).expect("valid")),
    ] {
        let mc = failure_harm_mc(&t, &fm, &h, 100_000, SEED).expect("valid");
        let exact = oracle::exhaustive_failure_harm(&t, &fm, &h).expect("small topology");
        checks.push(Check::within(
            format!("failure harm {name}: Monte Carlo vs exhaustive (standard errors)"),
            (mc.expected_harm - exact).abs() / mc.std_error,
            3.0,
        ));
    }
    let sl = oracle::exhaustive_failure_harm(&build_spine_leaf(2, 4, 1).expect("valid"), &fm, &h).expect("small");
    let tt = oracle::exhaustive_failure_harm(&build_three_tier(2, 2, 2, 1).expect("valid"), &fm, &h).expect("small");
    checks.push(Check::flag(
        "spine-leaf expected harm magnitude below 3-tier",
        sl.abs() < tt.abs(),
    ));
    checks
}

pub fn hop_checks() -> Vec<Check> {
    let sl = build_spine_leaf(2, 4, 1).expect("valid");
    let tt = build_three_tier(2, 2, 2, 1).expect("valid");
    let sl_hist = hop_histogram(&sl);
    let tt_hist = hop_histogram(&tt);
    // a0,a1 share d0 and a2,a3 share d1: the other 4 pairs cross distributions
    let cross = tt_hist.get(&HopBucket::Hops(4)).copied().unwrap_or(0);
    let dual_core = affected_fraction(&tt, ["c0", "c1"]).expect("known ids");
    vec![
        Check::flag(
            "spine-leaf inter-leaf pairs all at 2 hops",
            sl_hist.len() == 1 && sl_hist.get(&HopBucket::Hops(2)) == Some(&6),
        ),
        Check::flag("3-tier cross-distribution pairs at 4 hops", cross == 4),
        Check::within(
            "single-spine failure affected fraction",
            affected_fraction(&sl, ["s0"]).expect("known ids"),
            0.0,
        ),
        Check::within(
            "dual-core failure cuts all cross-distribution pairs",
            (dual_core - 4.0 / 6.0).abs(),
            1e-15,
        ),
    ]
}

pub fn growth_checks() -> Vec<Check> {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = -6.0 + 12.0 * i as f64 / 999.0;
        let reference = oracle::erf_reference(x);
        let got = erf_value(x);
        let rel = if reference == 0.0 {
            got.abs()
        } else {
            ((got - reference) / reference).abs()
        };
        worst = worst.max(rel);
    }
    let sig = SigmoidGrowth::new(100.0).expect("valid");
    let spec = GrowthSpec::from(sig);
    let mut rng = seeded_rng(SEED);
    let exceed = (0..10_000)
        .filter(|_| {
            let u = rng.gen_range(0.0..1000.0);
            capacity_at(&spec, u).expect("nonnegative") > 100.0
        })
        .count();
    let u = crossover(&sig, &LinearGrowth::new(1).expect("valid"));
    vec![
        Check::within("erf relative error on 1000 points in [-6, 6]", worst, 1e-7),
        Check::within("sigmoid capacity above saturation (count)", exceed as f64, 0.0),
        Check::flag(
            "crossover sat=100 ports=1 within [99, 101]",
            (99.0..=101.0).contains(&u),
        ),
    ]
}

pub fn costing_checks() -> Vec<Check> {
    let a = build_three_tier(2, 2, 2, 1).expect("valid");
    let b = build_spine_leaf(2, 4, 1).expect("valid");
    let ports = Role::ALL.into_iter().map(|r| (r, 48)).collect();
    let report = compare_designs(&a, &b, &CostAssumptions::default(), &ports).expect("ports given");
    let ratios = &report
        .rows()
        .iter()
        .find(|r| r.label.as_deref() == Some("b/a"))
        .expect("ratio row")
        .values;
    let price = report
        .columns()
        .iter()
        .position(|c| c == "price_per_port")
        .expect("column");
    let watts = report
        .columns()
        .iter()
        .position(|c| c == "watts_per_port")
        .expect("column");
    vec![
        Check::within("price per port ratio vs 0.25", (ratios[price] - 0.25).abs(), 0.0),
        Check::within("watts per port ratio vs 0.25", (ratios[watts] - 0.25).abs(), 0.0),
    ]
}

/// All checks in a fixed order.
pub fn run_all() -> Vec<Check> {
    [
        tail_mean_checks(),
        density_checks(),
        ratio_checks(),
        jensen_checks(),
        survival_checks(),
        topology_checks(),
        hop_checks(),
        growth_checks(),
        costing_checks(),
    ]
    .into_iter()
    .flatten()
    .collect()
}
