//! Spherically symmetric laws described by their radial survival function
//! `F(x) = P(|X| >= x)`, with exact samplers for radii and points.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta_reg, gamma_ur, ln_beta, ln_gamma, ln_sphere_area};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function `L` with `L(lambda s) / L(s) -> 1` as `s -> infinity`.
#[derive(Clone)]
pub struct SlowlyVaryingFn {
    eval: RealFn,
    log_derivative: Option<RealFn>,
    description: String,
}

impl SlowlyVaryingFn {
    pub fn new(description: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            log_derivative: None,
            description: description.into(),
        }
    }

    /// Attach an analytic `(log L)'`, replacing the finite-difference default.
    pub fn with_log_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.log_derivative = Some(Arc::new(d));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c).with_log_derivative(|_| 0.0)
    }

    /// `sqrt(2 log s)`, the Gaussian tail.
    pub fn sqrt_two_log() -> Self {
        Self::new("sqrt(2 log s)", |s: f64| (2.0 * s.ln()).sqrt())
            .with_log_derivative(|s: f64| 1.0 / (2.0 * s * s.ln()))
    }

    /// `(log s)^alpha`.
    pub fn log_power(alpha: f64) -> Self {
        Self::new(format!("(log s)^{alpha}"), move |s: f64| s.ln().powf(alpha))
            .with_log_derivative(move |s: f64| alpha / (s * s.ln()))
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// `(log L(s))'`; central difference with step `s * 1e-6` unless an
    /// analytic form was supplied.
    pub fn log_derivative(&self, s: f64) -> f64 {
        match &self.log_derivative {
            Some(d) => d(s),
            None => {
                let h = s * 1e-6;
                ((self.eval)(s + h).ln() - (self.eval)(s - h).ln()) / (2.0 * h)
            }
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.log_derivative.is_some()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `c * L(s)`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |s| c * inner(s)),
            log_derivative: self.log_derivative.clone(),
            description: if c == 1.0 {
                self.description.clone()
            } else {
                format!("{c} * {}", self.description)
            },
        }
    }
}

impl fmt::Debug for SlowlyVaryingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlowlyVaryingFn({})", self.description)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailKind {
    Polynomial,
    Exponential,
    Truncated,
}

impl fmt::Display for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailKind::Polynomial => "polynomial",
            TailKind::Exponential => "exponential",
            TailKind::Truncated => "truncated",
        })
    }
}

/// Tail classification of a radial law.
///
/// * `Polynomial`: `F(x) = x^{-k} L(x)`, `k >= 0`.
/// * `Exponential`: `x = L(1 / F(x))`.
/// * `Truncated`: support ends at 1 and `F(1 - x) ~ x^k L(1/x)`, `k > 0`.
#[derive(Debug, Clone)]
pub enum TailFamily {
    Polynomial { k: f64, l: SlowlyVaryingFn },
    Exponential { l: SlowlyVaryingFn },
    Truncated { k: f64, l: SlowlyVaryingFn },
}

impl TailFamily {
    pub fn polynomial(k: f64, l: SlowlyVaryingFn) -> Result<Self> {
        if !(k >= 0.0) {
            return Err(Error::InvalidParameter(format!("polynomial tail needs k >= 0, got {k}")));
        }
        Ok(TailFamily::Polynomial { k, l })
    }

    pub fn exponential(l: SlowlyVaryingFn) -> Self {
        TailFamily::Exponential { l }
    }

    pub fn truncated(k: f64, l: SlowlyVaryingFn) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("truncated tail needs k > 0, got {k}")));
        }
        Ok(TailFamily::Truncated { k, l })
    }

    pub fn kind(&self) -> TailKind {
        match self {
            TailFamily::Polynomial { .. } => TailKind::Polynomial,
            TailFamily::Exponential { .. } => TailKind::Exponential,
            TailFamily::Truncated { .. } => TailKind::Truncated,
        }
    }

    pub fn slowly_varying(&self) -> &SlowlyVaryingFn {
        match self {
            TailFamily::Polynomial { l, .. } | TailFamily::Exponential { l } | TailFamily::Truncated { l, .. } => l,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            TailFamily::Polynomial { k, .. } | TailFamily::Truncated { k, .. } => Some(*k),
            TailFamily::Exponential { .. } => None,
        }
    }
}

/// A user-supplied law.
#[derive(Clone)]
pub struct CustomLaw {
    name: String,
    survival: RealFn,
    density: Option<RealFn>,
    support_upper: f64,
}

impl CustomLaw {
    pub fn new(
        name: impl Into<String>,
        survival: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_upper: f64,
    ) -> Self {
        Self {
            name: name.into(),
            survival: Arc::new(survival),
            density: None,
            support_upper,
        }
    }

    pub fn with_density(mut self, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(density));
        self
    }
}

#[derive(Clone)]
enum Family {
    Gaussian { log_norm: f64 },
    StudentT { k: f64, log_norm: f64 },
    UniformBall,
    BetaType { q: f64, log_norm: f64 },
    Custom(Arc<CustomLaw>),
}

/// Spherically symmetric law in `R^d`, described radially.
#[derive(Clone)]
pub struct RadialModel {
    family: Family,
    dim: usize,
    scale: f64,
    tail: TailFamily,
    median: f64,
}

impl fmt::Debug for RadialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialModel")
            .field("id", &self.id())
            .field("dim", &self.dim)
            .field("scale", &self.scale)
            .field("tail", &self.tail)
            .finish()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

impl RadialModel {
    fn from_family(family: Family, dim: usize, tail: TailFamily) -> Result<Self> {
        let mut model = Self {
            family,
            dim,
            scale: 1.0,
            tail,
            median: 1.0,
        };
        model.median = sample_radius(&model, 0.5)?;
        Ok(model)
    }

    /// Standard Gaussian in `R^d`: `F(x) = Q(d/2, x^2/2)`.
    pub fn gaussian(d: usize) -> Result<Self> {
        check_dim(d)?;
        let half = d as f64 / 2.0;
        let log_norm = -(half - 1.0) * std::f64::consts::LN_2 - ln_gamma(half);
        Self::from_family(
            Family::Gaussian { log_norm },
            d,
            TailFamily::exponential(SlowlyVaryingFn::sqrt_two_log()),
        )
    }

    /// Multivariate t with `k` degrees of freedom.
    pub fn student_t(k: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("t model needs k > 0, got {k}")));
        }
        let df = d as f64;
        // S_{d-1} * Gamma((k+d)/2) / (Gamma(k/2) (k pi)^{d/2})
        let log_norm = ln_sphere_area(d) + ln_gamma((k + df) / 2.0)
            - ln_gamma(k / 2.0)
            - df / 2.0 * (k * std::f64::consts::PI).ln();
        let tail_const = (std::f64::consts::LN_2 + ln_gamma((k + df) / 2.0)
            - ln_gamma(k / 2.0)
            - ln_gamma(df / 2.0)
            + (k / 2.0 - 1.0) * k.ln())
        .exp();
        Self::from_family(
            Family::StudentT { k, log_norm },
            d,
            TailFamily::polynomial(k, SlowlyVaryingFn::constant(tail_const))?,
        )
    }

    /// Uniform law on the unit ball: `F(x) = 1 - x^d`.
    pub fn uniform_ball(d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::from_family(
            Family::UniformBall,
            d,
            TailFamily::truncated(1.0, SlowlyVaryingFn::constant(d as f64))?,
        )
    }

    /// Beta-type law with density proportional to `(1 - |x|^2)^q` on the unit ball.
    pub fn beta_type(q: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        if !(q > -1.0) {
            return Err(Error::InvalidParameter(format!("beta-type model needs q > -1, got {q}")));
        }
        let half = d as f64 / 2.0;
        let lb = ln_beta(half, q + 1.0);
        let log_norm = std::f64::consts::LN_2 - lb;
        let l = ((q + 1.0) * std::f64::consts::LN_2 - (q + 1.0).ln() - lb).exp();
        Self::from_family(
            Family::BetaType { q, log_norm },
            d,
            TailFamily::truncated(q + 1.0, SlowlyVaryingFn::constant(l))?,
        )
    }

    /// A law given by a survival callable and its tail classification.
    pub fn custom(law: CustomLaw, d: usize, tail: TailFamily) -> Result<Self> {
        check_dim(d)?;
        if !(law.support_upper > 0.0) {
            return Err(Error::InvalidParameter("support_upper must be positive".into()));
        }
        Self::from_family(Family::Custom(Arc::new(law)), d, tail)
    }

    /// The law of `c X`: survival `F(x / c)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        let tail = match &self.tail {
            TailFamily::Polynomial { k, l } => TailFamily::Polynomial {
                k: *k,
                l: l.scaled(c.powf(*k)),
            },
            TailFamily::Exponential { l } => TailFamily::Exponential { l: l.scaled(c) },
            t @ TailFamily::Truncated { .. } => t.clone(),
        };
        Ok(Self {
            family: self.family.clone(),
            dim: self.dim,
            scale: self.scale * c,
            tail,
            median: self.median * c,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> &TailFamily {
        &self.tail
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Median radius, used as the natural length scale of the law.
    pub fn median_radius(&self) -> f64 {
        self.median
    }

    pub fn id(&self) -> String {
        let base = match &self.family {
            Family::Gaussian { .. } => "gaussian".to_string(),
            Family::StudentT { k, .. } => format!("t(k={k})"),
            Family::UniformBall => "uniform_ball".to_string(),
            Family::BetaType { q, .. } => format!("beta_type(q={q})"),
            Family::Custom(c) => format!("custom({})", c.name),
        };
        if self.scale == 1.0 {
            format!("{base},d={}", self.dim)
        } else {
            format!("{base},d={},scale={}", self.dim, self.scale)
        }
    }

    pub fn support_upper(&self) -> f64 {
        let unit = match &self.family {
            Family::Gaussian { .. } | Family::StudentT { .. } => f64::INFINITY,
            Family::UniformBall | Family::BetaType { .. } => 1.0,
            Family::Custom(c) => c.support_upper,
        };
        unit * self.scale
    }

    pub fn is_bounded(&self) -> bool {
        self.support_upper().is_finite()
    }

    /// `F(x) = P(|X| >= x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let r = x / self.scale;
        let d = self.dim as f64;
        match &self.family {
            Family::Gaussian { .. } => gamma_ur(d / 2.0, 0.5 * r * r),
            Family::StudentT { k, .. } => beta_reg(k / 2.0, d / 2.0, k / (k + r * r)),
            Family::UniformBall => {
                if r >= 1.0 {
                    0.0
                } else {
                    -(d * r.ln()).exp_m1()
                }
            }
            Family::BetaType { q, .. } => {
                if r >= 1.0 {
                    0.0
                } else {
                    beta_reg(q + 1.0, d / 2.0, (1.0 - r) * (1.0 + r))
                }
            }
            Family::Custom(c) => {
                if r >= c.support_upper {
                    0.0
                } else {
                    (c.survival)(r).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Radial density `-dF/dx`.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = x / self.scale;
        let d = self.dim as f64;
        let unit = match &self.family {
            Family::Gaussian { log_norm } => ((d - 1.0) * r.ln() - 0.5 * r * r + log_norm).exp(),
            Family::StudentT { k, log_norm } => {
                (log_norm + (d - 1.0) * r.ln() - 0.5 * (k + d) * (r * r / k).ln_1p()).exp()
            }
            Family::UniformBall => {
                if r >= 1.0 {
                    0.0
                } else {
                    d * r.powi(self.dim as i32 - 1)
                }
            }
            Family::BetaType { q, log_norm } => {
                if r >= 1.0 {
                    0.0
                } else {
                    (log_norm + (d - 1.0) * r.ln() + q * ((1.0 - r) * (1.0 + r)).ln()).exp()
                }
            }
            Family::Custom(c) => {
                if r >= c.support_upper {
                    0.0
                } else if let Some(p) = &c.density {
                    p(r)
                } else {
                    let h = 1e-6 * r.max(1e-3);
                    let lo = (r - h).max(0.0);
                    let hi = (r + h).min(c.support_upper);
                    ((c.survival)(lo) - (c.survival)(hi)) / (hi - lo)
                }
            }
        };
        unit / self.scale
    }

    /// Closed-form inverse of the survival function where one exists.
    fn closed_quantile(&self, u: f64) -> Option<f64> {
        let r = match &self.family {
            Family::UniformBall => (1.0 - u).powf(1.0 / self.dim as f64),
            Family::Gaussian { .. } if self.dim == 2 => (-2.0 * u.ln()).sqrt(),
            _ => return None,
        };
        Some(r * self.scale)
    }
}

/// Which builtin family a specification file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinFamily {
    Gaussian,
    T,
    UniformBall,
    BetaType,
    Custom,
}

/// On-disk model specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: BuiltinFamily,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ModelSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }

    pub fn build(&self) -> Result<RadialModel> {
        match self.family {
            BuiltinFamily::Gaussian => RadialModel::gaussian(self.d),
            BuiltinFamily::T => {
                let k = self
                    .k
                    .ok_or_else(|| Error::ModelSpec("t family needs \"k\"".into()))?;
                RadialModel::student_t(k, self.d)
            }
            BuiltinFamily::UniformBall => RadialModel::uniform_ball(self.d),
            BuiltinFamily::BetaType => {
                let q = self
                    .q
                    .ok_or_else(|| Error::ModelSpec("beta_type family needs \"q\"".into()))?;
                RadialModel::beta_type(q, self.d)
            }
            BuiltinFamily::Custom => Err(Error::ModelSpec(
                "custom models can only be registered programmatically".into(),
            )),
        }
    }
}

/// The builtin catalog at dimension `d`: Gaussian, t with `k = 3`, uniform
/// ball, and beta-type with `q = 1`.
pub fn builtin_models(d: usize) -> Result<Vec<RadialModel>> {
    Ok(vec![
        RadialModel::gaussian(d)?,
        RadialModel::student_t(3.0, d)?,
        RadialModel::uniform_ball(d)?,
        RadialModel::beta_type(1.0, d)?,
    ])
}

const NEWTON_MAX_ITER: usize = 200;

/// Radius `x` with `F(x) = u`, by closed form when available and otherwise
/// by bracketing followed by safeguarded Newton steps.
pub fn sample_radius(model: &RadialModel, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::DomainError(format!("uniform variate must lie in (0, 1], got {u}")));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    if let Some(x) = model.closed_quantile(u) {
        return Ok(x);
    }
    let sup = model.support_upper();
    let mut lo = 0.0;
    let mut f_lo = 1.0;
    let mut hi = if sup.is_finite() { 0.5 * sup } else { model.median };
    let mut f_hi = model.survival(hi);
    let mut expansions = 0;
    while f_hi > u {
        if f_hi > f_lo {
            return Err(Error::NonMonotoneSurvival { lo, hi });
        }
        lo = hi;
        f_lo = f_hi;
        hi = if sup.is_finite() { 0.5 * (hi + sup) } else { 2.0 * hi };
        f_hi = model.survival(hi);
        expansions += 1;
        if expansions > 2000 {
            return Err(Error::ConvergenceFailure { iterations: expansions });
        }
    }
    if f_hi > f_lo {
        return Err(Error::NonMonotoneSurvival { lo, hi });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_MAX_ITER {
        let fx = model.survival(x) - u;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let p = model.density(x);
        let mut next = if p > 0.0 { x + fx / p } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-12 * x.abs() || hi - lo <= 1e-12 * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::ConvergenceFailure { iterations: NEWTON_MAX_ITER })
}

const DIRECTION_RETRIES: usize = 64;

/// One point `r * u` with `r` drawn by inversion and `u` uniform on the sphere.
pub fn sample_point<R: Rng + ?Sized>(model: &RadialModel, rng: &mut R, out: &mut [f64]) -> Result<()> {
    let d = model.dim;
    assert_eq!(out.len(), d, "output slice must have length d");
    let mut norm2 = 0.0;
    for _ in 0..DIRECTION_RETRIES {
        norm2 = 0.0;
        for v in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z;
            norm2 += z * z;
        }
        if norm2 > 1e-200 {
            break;
        }
    }
    if !(norm2 > 1e-200) {
        return Err(Error::ZeroVector);
    }
    // `random` lies in [0, 1); the survival variate must avoid 0.
    let u = 1.0 - rng.random::<f64>();
    let r = sample_radius(model, u)?;
    let f = r / norm2.sqrt();
    out.iter_mut().for_each(|v| *v *= f);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_models() -> Vec<RadialModel> {
        let mut v = Vec::new();
        for d in [2, 3, 5] {
            v.extend(builtin_models(d).unwrap());
            v.push(RadialModel::student_t(1.0, d).unwrap());
            v.push(RadialModel::beta_type(-0.5, d).unwrap());
        }
        v
    }

    #[test]
    fn gaussian_two_dim_is_rayleigh() {
        let m = RadialModel::gaussian(2).unwrap();
        for x in [0.1, 1.0, 2.5, 6.0] {
            assert!((m.survival(x) - (-x * x / 2.0).exp()).abs() < 1e-14);
        }
        assert_eq!(sample_radius(&m, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_ball_values() {
        let m = RadialModel::uniform_ball(5).unwrap();
        assert!((m.survival(0.5) - 0.96875).abs() < 1e-15);
        let m2 = RadialModel::uniform_ball(2).unwrap();
        assert!((sample_radius(&m2, 0.75).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(RadialModel::student_t(0.0, 2).is_err());
        assert!(RadialModel::beta_type(-1.0, 2).is_err());
        assert!(RadialModel::gaussian(1).is_err());
        assert!(TailFamily::truncated(0.0, SlowlyVaryingFn::constant(1.0)).is_err());
        assert!(TailFamily::polynomial(0.0, SlowlyVaryingFn::constant(1.0)).is_ok());
        assert!(sample_radius(&RadialModel::gaussian(3).unwrap(), 0.0).is_err());
    }

    #[test]
    fn t_tail_constant_at_k1_d2() {
        // F(x) ~ x^{-1} for k = 1, d = 2; checked against quadrature of the density.
        let m = RadialModel::student_t(1.0, 2).unwrap();
        let TailFamily::Polynomial { k, l } = m.tail() else { panic!() };
        assert_eq!(*k, 1.0);
        assert!((l.eval(1.0) - 1.0).abs() < 1e-12);
        let cfg = QuadratureConfig::default().relative_only();
        let tail = integrate(|t: f64| if t == 0.0 { 0.0 } else { m.density(100.0 / t) * 100.0 / (t * t) }, 0.0, 1.0, &cfg);
        assert!((tail.value * 100.0 - 1.0).abs() < 0.02, "{}", tail.value * 100.0);
    }

    #[test]
    fn survival_is_monotone_on_grid() {
        for m in all_models() {
            assert_eq!(m.survival(0.0), 1.0);
            let top = if m.is_bounded() { m.support_upper() } else { 20.0 * m.median_radius() };
            let mut prev = 1.0;
            for i in 1..=1000 {
                let v = m.survival(top * i as f64 / 1000.0);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev + 1e-15, "{m:?} at {i}");
                prev = v;
            }
        }
    }

    #[test]
    fn density_integrates_to_one_and_matches_survival() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-11);
        for m in all_models() {
            let med = m.median_radius();
            let head = integrate(|x| m.density(x), 0.0, med, &cfg).value;
            assert!((1.0 - head - 0.5).abs() < 1e-8, "{m:?}: {head}");
            let tail = if m.is_bounded() {
                let s = m.support_upper();
                // x = s - u^2 removes the (1 - x)^q edge behaviour.
                integrate(|u| 2.0 * u * m.density(s - u * u), 0.0, (s - med).sqrt(), &cfg).value
            } else {
                integrate(|t: f64| if t == 0.0 { 0.0 } else { m.density(med / t) * med / (t * t) }, 0.0, 1.0, &cfg).value
            };
            assert!((head + tail - 1.0).abs() < 1e-7, "{m:?}: {}", head + tail);
        }
    }

    #[test]
    fn radius_inversion_round_trip() {
        for m in all_models() {
            let top = if m.is_bounded() { m.support_upper() } else { 10.0 * m.median_radius() };
            for i in 1..40 {
                let x = top * i as f64 / 40.0;
                let u = m.survival(x);
                if u <= 1e-300 || u >= 1.0 {
                    continue;
                }
                let back = sample_radius(&m, u).unwrap();
                // u carries a rounding error of order 1e-16, amplified by 1 / (x p(x)).
                let tol = 1e-10f64.max(1e-15 / (x * m.density(x)));
                assert!(((back - x) / x).abs() < tol, "{m:?} x={x} back={back}");
            }
        }
    }

    #[test]
    fn t_quantile_against_density_quadrature() {
        // Oracle: integrate the density outward from x and solve F(x) = 0.01 by bisection.
        let m = RadialModel::student_t(3.0, 2).unwrap();
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12).relative_only();
        let f_by_quad = |x: f64| integrate(|t: f64| if t == 0.0 { 0.0 } else { m.density(x / t) * x / (t * t) }, 0.0, 1.0, &cfg).value;
        let (mut lo, mut hi) = (1.0, 100.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_by_quad(mid) > 0.01 { lo = mid } else { hi = mid }
        }
        let x = sample_radius(&m, 0.01).unwrap();
        assert!(((x - lo) / lo).abs() < 1e-9, "{x} vs {lo}");
    }

    #[test]
    fn scaled_model_survival() {
        let m = RadialModel::student_t(2.0, 3).unwrap();
        let s = m.scaled(2.0).unwrap();
        for x in [0.3, 1.0, 7.0] {
            assert!((s.survival(2.0 * x) - m.survival(x)).abs() < 1e-15);
            assert!((s.density(2.0 * x) - m.density(x) / 2.0).abs() < 1e-15);
        }
        assert!((s.median_radius() - 2.0 * m.median_radius()).abs() < 1e-12);
    }

    #[test]
    fn slowly_varying_smoke() {
        for l in [SlowlyVaryingFn::sqrt_two_log(), SlowlyVaryingFn::log_power(0.7)] {
            for lambda in [0.5, 2.0, 10.0] {
                let dev = |s: f64| (l.eval(lambda * s) / l.eval(s) - 1.0).abs();
                let mut prev = f64::INFINITY;
                for e in [2, 4, 6, 8, 10, 12] {
                    let v = dev(10f64.powi(e));
                    assert!(v < prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn finite_difference_log_derivative() {
        let analytic = SlowlyVaryingFn::sqrt_two_log();
        let numeric = SlowlyVaryingFn::new("fd", |s: f64| (2.0 * s.ln()).sqrt());
        for s in [10.0, 1e3, 1e8] {
            let a = analytic.log_derivative(s);
            let n = numeric.log_derivative(s);
            assert!(((a - n) / a).abs() < 1e-6);
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ModelSpec::from_json(r#"{"family":"t","d":3,"k":2.5}"#).unwrap();
        assert_eq!(spec.family, BuiltinFamily::T);
        let m = spec.build().unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(ModelSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(ModelSpec::from_json(r#"{"family":"custom","d":2}"#).unwrap().build().is_err());
        assert!(ModelSpec::from_json(r#"{"family":"beta_type","d":2}"#).unwrap().build().is_err());
    }

    #[test]
    fn custom_model_with_fd_density() {
        let law = CustomLaw::new("exp", |x: f64| (-x).exp(), f64::INFINITY);
        let tail = TailFamily::exponential(SlowlyVaryingFn::new("log", |s: f64| s.ln()));
        let m = RadialModel::custom(law, 3, tail).unwrap();
        assert!((m.density(1.3) - (-1.3f64).exp()).abs() < 1e-8);
        assert!((m.median_radius() - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn mean_is_zero_and_ball_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let m = RadialModel::uniform_ball(3).unwrap();
        let mut p = [0.0; 3];
        let mut sum = [0.0; 3];
        let mut sum2 = [0.0; 3];
        let mut inside = 0usize;
        for _ in 0..n {
            sample_point(&m, &mut rng, &mut p).unwrap();
            for j in 0..3 {
                sum[j] += p[j];
                sum2[j] += p[j] * p[j];
            }
            if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.5 {
                inside += 1;
            }
        }
        for j in 0..3 {
            let mean = sum[j] / n as f64;
            let se = ((sum2[j] / n as f64 - mean * mean) / n as f64).sqrt();
            assert!(mean.abs() < 4.0 * se);
        }
        let frac = inside as f64 / n as f64;
        let se = (0.125 * 0.875 / n as f64).sqrt();
        assert!((frac - 0.125).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn gaussian_marginal_tail_by_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = RadialModel::gaussian(2).unwrap();
        let n = 1_000_000;
        let mut p = [0.0; 2];
        let mut hits = 0usize;
        for _ in 0..n {
            sample_point(&m, &mut rng, &mut p).unwrap();
            if p[0] >= 1.0 {
                hits += 1;
            }
        }
        let target = crate::special::normal_sf(1.0);
        assert!((target - 0.158655).abs() < 1e-6);
        let se = (target * (1.0 - target) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - target).abs() < 4.0 * se);
    }

    #[test]
    fn kolmogorov_smirnov_radii() {
        let n = 100_000;
        let band = 1.63 / (n as f64).sqrt() * 1.5;
        for m in builtin_models(3).unwrap() {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut r: Vec<f64> = (0..n)
                .map(|_| sample_radius(&m, 1.0 - rng.random::<f64>()).unwrap())
                .collect();
            r.sort_by(f64::total_cmp);
            let mut ks: f64 = 0.0;
            for (i, x) in r.iter().enumerate() {
                let cdf = 1.0 - m.survival(*x);
                ks = ks.max((cdf - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - cdf).abs());
            }
            assert!(ks < band, "{m:?}: {ks}");
        }
    }
}
