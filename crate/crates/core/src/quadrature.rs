//! Adaptive Gauss–Kronrod (7/15-point) quadrature.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 60;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting until each panel's Kronrod/Gauss
/// discrepancy is within its share of `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let (whole, whole_err) = kronrod(&f, a, b);
    let mut evaluations = 15;
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let tol = abs_tol.max(rel_tol * whole.abs());
    let width = (b - a).abs();
    let mut stack = vec![(a, b, whole, whole_err, 0u32)];
    while let Some((lo, hi, est, err, depth)) = stack.pop() {
        let share = tol * ((hi - lo).abs() / width).max(f64::EPSILON);
        if err <= share || depth >= MAX_DEPTH {
            value += est;
            error_estimate += err;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (left, left_err) = kronrod(&f, lo, mid);
        let (right, right_err) = kronrod(&f, mid, hi);
        evaluations += 30;
        stack.push((mid, hi, right, right_err, depth + 1));
        stack.push((lo, mid, left, left_err, depth + 1));
    }
    Integral {
        value,
        error_estimate,
        evaluations,
    }
}

/// Integrates `f` over `(-∞, upper]` through `ξ = upper - (1 - t)/t`, `t ∈ (0, 1]`.
pub fn integrate_to_upper<F: Fn(f64) -> f64>(f: F, upper: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate(
        |t| {
            let xi = upper - (1.0 - t) / t;
            f(xi) / (t * t)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
