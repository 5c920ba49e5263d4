//! Values computed independently at 40-digit precision and frozen here.

use fragrisk::growth::{crossover, erf_value, LinearGrowth, SigmoidGrowth};
use fragrisk::oracle::{exhaustive_failure_harm, tail_mean_by_quadrature};
use fragrisk::pareto::{fragment_harm_density, tail_mean};
use fragrisk::topology::{build_spine_leaf, build_three_tier, FailureModel};
use fragrisk::{FragmentCount, HarmParams, ParetoParams};

fn close(got: f64, want: f64, rel: f64) {
    assert!(
        (got - want).abs() <= rel * want.abs(),
        "got {got:e}, want {want:e} (relative tolerance {rel:e})"
    );
}

#[test]
fn tail_means() {
    let p = ParetoParams::new(4.0, 1.0).unwrap();
    let h = HarmParams::new(1.0, 1.5).unwrap();
    for (n, want) in [
        (1, -1.6),
        (2, -0.317_480_210_393_639_89),
        (5, -0.037_427_427_049_124_686),
    ] {
        let frag = FragmentCount::new(n).unwrap();
        close(tail_mean(&p, &h, frag).unwrap(), want, 1e-14);
        close(tail_mean_by_quadrature(&p, &h, frag).unwrap(), want, 1e-9);
    }
}

#[test]
fn fragment_density_point() {
    let p = ParetoParams::new(4.0, 1.0).unwrap();
    let h = HarmParams::new(1.0, 1.5).unwrap();
    let g = fragment_harm_density(&p, &h, FragmentCount::new(2).unwrap(), -2.0).unwrap();
    close(g, 0.013_124_177_603_071_595, 1e-14);
}

#[test]
fn erf_points() {
    for (x, want) in [
        (0.5, 0.520_499_877_813_046_54),
        (1.0, 0.842_700_792_949_714_87),
        (-2.5, -0.999_593_047_982_555_04),
        (3.0, 0.999_977_909_503_001_41),
    ] {
        close(erf_value(x), want, 1e-15);
    }
}

#[test]
fn crossovers() {
    let sig = SigmoidGrowth::new(100.0).unwrap();
    for (ports, want) in [(48, 2.076_417_904_723_041_7), (10, 10.0), (1, 100.0)] {
        let u = crossover(&sig, &LinearGrowth::new(ports).unwrap());
        assert!((u - want).abs() <= 2e-9, "ports {ports}: {u} vs {want}");
    }
}

#[test]
fn exhaustive_failure_harm_fixtures() {
    let h = HarmParams::new(1.0, 1.5).unwrap();
    let fm = FailureModel::uniform(0.05).unwrap();
    close(
        exhaustive_failure_harm(&build_spine_leaf(2, 4, 1).unwrap(), &fm, &h).unwrap(),
        -0.073_726_629_964_685_860,
        1e-13,
    );
    close(
        exhaustive_failure_harm(&build_three_tier(2, 2, 2, 1).unwrap(), &fm, &h).unwrap(),
        -0.142_591_104_203_903_07,
        1e-13,
    );
}
