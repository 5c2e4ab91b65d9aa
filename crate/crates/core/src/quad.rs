//! Composite Gauss-Legendre quadrature with bisection-based panel refinement.
//!
//! Panels are refined independently and the results are reduced in panel
//! order, so a run with any number of worker threads produces bit-identical
//! sums. Nodes are interior to each panel, which keeps abscissas off panel
//! endpoints where integrands of traced bodies may be discontinuous.

use crate::parallel;
use rayon::prelude::*;

/// 8-point Gauss-Legendre abscissas on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)] // standard tables carry extra digits
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_80,
    0.525_532_409_916_329_00,
    0.796_666_477_413_626_70,
    0.960_289_856_497_536_30,
];
#[allow(clippy::excessive_precision)]
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_98,
    0.313_706_645_877_887_20,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// 16-point Gauss-Legendre abscissas on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)]
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_91,
    0.458_016_777_657_227_39,
    0.617_876_244_402_643_75,
    0.755_404_408_355_003_03,
    0.865_631_202_387_831_74,
    0.944_575_023_073_232_58,
    0.989_400_934_991_649_93,
];
#[allow(clippy::excessive_precision)]
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_50,
    0.182_603_415_044_923_59,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_09,
];

/// Single-panel 8-point rule on [a, b].
pub fn gl8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..4 {
        let dx = half * GL8_X[i];
        s += GL8_W[i] * (f(mid - dx) + f(mid + dx));
    }
    s * half
}

/// Single-panel 16-point rule on [a, b].
pub fn gl16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..8 {
        let dx = half * GL16_X[i];
        s += GL16_W[i] * (f(mid - dx) + f(mid + dx));
    }
    s * half
}

/// Parameters for composite adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Initial number of equal panels.
    pub base_panels: usize,
    /// A panel is split while |one-shot - two-halves| exceeds this.
    pub panel_tol: f64,
    /// Hard cap on the total number of leaf panels.
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_panels: 256,
            panel_tol: 1e-8,
            max_panels: 1 << 14,
        }
    }
}

/// Integral value with its refinement residual.
#[derive(Debug, Clone, Copy)]
pub struct Quadrated {
    pub value: f64,
    pub error_estimate: f64,
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    budget: &mut usize,
) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let left = gl8(f, a, mid);
    let right = gl8(f, mid, b);
    let diff = (whole - (left + right)).abs();
    if diff <= tol || *budget == 0 {
        return (left + right, diff);
    }
    *budget -= 1;
    let (lv, le) = refine(f, a, mid, left, tol, budget);
    let (rv, re) = refine(f, mid, b, right, tol, budget);
    (lv + rv, le + re)
}

/// Composite adaptive Gauss-Legendre integration of `f` over [a, b].
///
/// Base panels are evaluated in parallel; the reduction is ordered by panel
/// index, so results do not depend on the worker count.
pub fn integrate<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Quadrated {
    assert!(b >= a, "integration bounds out of order");
    if a == b {
        return Quadrated {
            value: 0.0,
            error_estimate: 0.0,
        };
    }
    let n = spec.base_panels.max(1);
    let width = (b - a) / n as f64;
    let extra_per_panel = (spec.max_panels.saturating_sub(n)) / n;
    let parts: Vec<(f64, f64)> = parallel::pool().install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let pa = a + i as f64 * width;
                let pb = if i + 1 == n {
                    b
                } else {
                    a + (i + 1) as f64 * width
                };
                let whole = gl8(f, pa, pb);
                let mut budget = extra_per_panel;
                refine(f, pa, pb, whole, spec.panel_tol, &mut budget)
            })
            .collect()
    });
    let mut value = 0.0;
    let mut err = 0.0;
    for (v, e) in parts {
        value += v;
        err += e;
    }
    Quadrated {
        value,
        error_estimate: err,
    }
}
