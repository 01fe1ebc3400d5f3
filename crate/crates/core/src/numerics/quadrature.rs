//! Adaptive Gauss–Kronrod quadrature (21-point Kronrod extension of the
//! 10-point Gauss rule) with global bisection of the worst interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Map integrable endpoint singularities away with a change of variables.
    pub singularity_substitution: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            singularity_substitution: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 10".into(),
            ));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Same relative tolerance, absolute floor pushed to the bottom of the
    /// double range so that tiny tail probabilities keep relative accuracy.
    pub fn relative_only(mut self) -> Self {
        self.abs_tol = 1e-300;
        self
    }

    pub(crate) fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Integral {
    pub const ZERO: Integral = Integral {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
        converged: true,
    };

    pub fn into_result(self, cfg: &QuadratureConfig) -> Result<Integral> {
        if self.converged && self.value.is_finite() {
            Ok(self)
        } else {
            Err(Error::QuadratureFailure {
                value: self.value,
                abs_error: self.abs_error,
                tolerance: cfg.tolerance_for(self.value),
            })
        }
    }

    /// Combine integrals over disjoint pieces.
    pub fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Integral {
        Integral {
            value: self.value * factor,
            abs_error: self.abs_error * factor.abs(),
            ..self
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_735_455,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_abs = f_center.abs() * WGK[10];
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Integrate `f` over the finite interval `[a, b]` by adaptive bisection.
///
/// Never fails: the returned `converged` flag says whether the tolerance of
/// `cfg` was met. Use [`Integral::into_result`] to turn a miss into an error.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Integral {
    if a == b {
        return Integral::ZERO;
    }
    let first = kronrod21(&mut f, a, b);
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    // Segments too narrow to bisect further leave the heap but keep contributing.
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(first);
    let mut subdivisions = 1;

    while total_err > cfg.tolerance_for(total) && subdivisions < cfg.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 1e3 * f64::EPSILON * mid.abs() || mid == worst.a || mid == worst.b {
            frozen.push(worst);
            continue;
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the rounding accumulated in the running totals.
    let value: f64 = heap.iter().chain(frozen.iter()).map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().chain(frozen.iter()).map(|s| s.error).sum();
    Integral {
        value,
        abs_error,
        evaluations,
        converged: abs_error <= cfg.tolerance_for(value) && value.is_finite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, &cfg);
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
        assert!(r.converged);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg);
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn oscillatory_and_reversed() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let r = integrate(|x| (20.0 * x).sin(), 0.0, PI, &cfg);
        assert!(r.value.abs() < 1e-12);
        let r = integrate(|x| x.exp(), 1.0, 0.0, &cfg);
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn relative_only_resolves_tiny_values() {
        let cfg = QuadratureConfig::default().relative_only();
        let r = integrate(|x| (-x * x).exp() * 1e-200, 0.0, 10.0, &cfg);
        let exact = 0.5 * PI.sqrt() * 1e-200;
        assert!(((r.value - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn failure_reported() {
        let cfg = QuadratureConfig {
            max_subdivisions: 10,
            ..QuadratureConfig::default()
        };
        let r = integrate(|x| (1.0 / x).sin() / x, 1e-6, 1.0, &cfg);
        assert!(!r.converged);
        assert!(matches!(r.into_result(&cfg), Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            max_subdivisions: 3,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
