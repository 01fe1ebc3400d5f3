//! Geometric survival kernels of a spherically symmetric law.
//!
//! * `G(x)`: survival of one coordinate.
//! * `K(x)`: survival of the norm of two coordinates.
//! * `H(x)`: survival of the distance from the origin to the hyperplane
//!   through `d` samples.
//! * `F0(x)`: survival of the distance from the origin to the line through
//!   two samples.
//!
//! All of them are Stieltjes integrals against `|dF|`, evaluated as
//! integrals against the radial density.

mod layout;

use serde::Serialize;

use crate::distributions::RadialModel;
use crate::error::{Error, Result};
use crate::numerics::{integrate, Integral, QuadratureConfig};
use crate::special::{beta_fn, beta_reg, ln_gamma};

pub(crate) use layout::Layout;

/// An evaluated kernel with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl KernelValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn from_integral(r: Integral, cfg: &QuadratureConfig) -> Result<Self> {
        let r = r.into_result(cfg)?;
        Ok(Self {
            value: r.value,
            abs_error_estimate: r.abs_error,
            evaluations: r.evaluations,
        })
    }
}

/// Which kernel to evaluate, for callers dispatching on a name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KernelKind {
    G,
    K,
    H,
    F0,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(KernelKind::G),
            "K" | "k" => Ok(KernelKind::K),
            "H" | "h" => Ok(KernelKind::H),
            "F0" | "f0" => Ok(KernelKind::F0),
            other => Err(Error::InvalidArgs(format!("unknown kernel {other:?}"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::G => "G",
            KernelKind::K => "K",
            KernelKind::H => "H",
            KernelKind::F0 => "F0",
        })
    }
}

pub fn evaluate(kind: KernelKind, model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    match kind {
        KernelKind::G => marginal_survival(model, x, cfg),
        KernelKind::K => pair_norm_survival(model, x, cfg),
        KernelKind::H => plane_distance_survival(model, x, cfg),
        KernelKind::F0 => pair_plane_survival(model, x, cfg),
    }
}

fn check_unit(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("ratio must lie in [0, 1], got {r}")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Fraction of the unit sphere in `R^d` cut off by a plane at distance `r`.
pub fn kappa(d: usize, r: f64) -> Result<f64> {
    check_dim(d)?;
    check_unit(r)?;
    Ok(cap_from_sin2(d, (1.0 - r) * (1.0 + r)))
}

/// `kappa` as a function of `1 - r^2`, which callers often know more accurately.
fn cap_from_sin2(d: usize, sin2: f64) -> f64 {
    0.5 * beta_reg(0.5 * (d as f64 - 1.0), 0.5, sin2)
}

/// Fraction of the sphere within geodesic angle `phi in [0, pi]` of a pole.
fn cap_angle(d: usize, phi: f64) -> f64 {
    if phi <= 0.0 {
        return 0.0;
    }
    if phi >= std::f64::consts::PI {
        return 1.0;
    }
    let s = phi.sin();
    let c = cap_from_sin2(d, s * s);
    if phi <= std::f64::consts::FRAC_PI_2 {
        c
    } else {
        1.0 - c
    }
}

/// Fraction of the unit sphere in `R^d` where `x1^2 + x2^2 >= r^2`: `(1 - r^2)^{(d-2)/2}`.
pub fn lambda_d(d: usize, r: f64) -> Result<f64> {
    check_dim(d)?;
    check_unit(r)?;
    Ok(lambda_from_sin2(d, (1.0 - r) * (1.0 + r)))
}

fn lambda_from_sin2(d: usize, sin2: f64) -> f64 {
    if d == 2 {
        1.0
    } else if d == 4 {
        sin2
    } else {
        sin2.powf(0.5 * (d as f64 - 2.0))
    }
}

/// `1 - (x/y)^2` from `delta = y - x`, without cancellation.
#[inline]
fn sin2_theta(x: f64, y: f64, delta: f64) -> f64 {
    (delta * (2.0 * x + delta) / (y * y)).min(1.0)
}

fn validate(x: f64, cfg: &QuadratureConfig) -> Result<()> {
    cfg.validate()?;
    if !(x >= 0.0) {
        return Err(Error::DomainError(format!("x must be nonnegative, got {x}")));
    }
    Ok(())
}

/// `G(x) = P(X^{(1)} >= x) = int kappa(x/y) |dF(y)|`.
pub fn marginal_survival(model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    validate(x, cfg)?;
    if x == 0.0 {
        return Ok(KernelValue::exact(0.5));
    }
    let sup = model.support_upper();
    if x >= sup {
        return Ok(KernelValue::exact(0.0));
    }
    let d = model.dim();
    let layout = Layout::for_model(model, x, sup);
    let r = layout.integrate(|y, delta| cap_from_sin2(d, sin2_theta(x, y, delta)) * model.density(y), cfg);
    KernelValue::from_integral(r, cfg)
}

/// `K(x) = P(|(X^{(1)}, X^{(2)})| > x) = int lambda_d(x/y) |dF(y)|`.
pub fn pair_norm_survival(model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    validate(x, cfg)?;
    if x == 0.0 {
        return Ok(KernelValue::exact(1.0));
    }
    let sup = model.support_upper();
    if x >= sup {
        return Ok(KernelValue::exact(0.0));
    }
    let d = model.dim();
    if d == 2 {
        return Ok(KernelValue::exact(model.survival(x)));
    }
    let layout = Layout::for_model(model, x, sup);
    let r = layout.integrate(|y, delta| lambda_from_sin2(d, sin2_theta(x, y, delta)) * model.density(y), cfg);
    KernelValue::from_integral(r, cfg)
}

/// `H(x) = (2/pi) int arccos(x/y) |d(K^d)(y)|`, integrated by parts to
/// `(2/pi) int_0^{theta_max} K(x / cos theta)^d dtheta`.
pub fn plane_distance_survival(model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    validate(x, cfg)?;
    if x == 0.0 {
        return Ok(KernelValue::exact(1.0));
    }
    let sup = model.support_upper();
    if x >= sup {
        return Ok(KernelValue::exact(0.0));
    }
    let d = model.dim() as i32;
    let mut failure: Option<Error> = None;
    let mut inner_evals = 0usize;
    let mut k_pow = |y: f64| -> f64 {
        if y >= sup {
            return 0.0;
        }
        match pair_norm_survival(model, y, cfg) {
            Ok(k) => {
                inner_evals += k.evaluations;
                k.value.max(0.0).powi(d)
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let layout = Layout::for_model(model, x, sup);
    let r = if cfg.singularity_substitution {
        integrate_theta(&layout, &mut k_pow, cfg)
    } else {
        layout.integrate(|y, delta| k_pow(y) * x / (y * (delta * (y + x)).sqrt()), cfg)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let mut v = KernelValue::from_integral(r.scale(std::f64::consts::FRAC_2_PI), cfg)?;
    v.evaluations += inner_evals;
    Ok(v)
}

fn theta_of(x: f64, delta: f64) -> f64 {
    (delta * (2.0 * x + delta)).sqrt().atan2(x)
}

/// The layout of `y` pieces carried over to `theta = arccos(x/y)`.
fn integrate_theta<F: FnMut(f64) -> f64>(layout: &Layout, k_pow: &mut F, cfg: &QuadratureConfig) -> Integral {
    use layout::PieceKind;
    let x = layout.x;
    let n = layout.piece_count().max(1) as f64;
    let piece_cfg = cfg.with_abs_tol(cfg.abs_tol / n);
    let mut total = Integral::ZERO;
    for piece in &layout.pieces {
        let (t_lo, t_hi) = (theta_of(x, piece.lo), theta_of(x, piece.hi));
        let r = match piece.kind {
            PieceKind::End => integrate(
                |s| 2.0 * s * k_pow(x / (t_hi - s * s).cos()),
                0.0,
                (t_hi - t_lo).sqrt(),
                &piece_cfg,
            ),
            PieceKind::Whole => {
                let span = t_hi - t_lo;
                let half_pi = 0.5 * std::f64::consts::PI;
                integrate(
                    |t| {
                        let s = (half_pi * t).sin();
                        span * half_pi * (std::f64::consts::PI * t).sin() * k_pow(x / (t_lo + span * s * s).cos())
                    },
                    0.0,
                    1.0,
                    &piece_cfg,
                )
            }
            _ => integrate(|t| k_pow(x / t.cos()), t_lo, t_hi, &piece_cfg),
        };
        total = total.add(r);
    }
    if let Some(c) = layout.tail_from {
        // y = c / t; dtheta = x dt / sqrt(c^2 - x^2 t^2)
        let r = integrate(
            |t| if t == 0.0 { 0.0 } else { k_pow(c / t) * x / ((c - x * t) * (c + x * t)).sqrt() },
            0.0,
            1.0,
            &piece_cfg,
        );
        total = total.add(r);
    }
    total
}

/// Angles and plane cuts for the line through points at radii `z <= y`,
/// seen at distance `x` from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Integrand {
    pub a1: f64,
    pub a2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl F0Integrand {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(0.0 <= x && x <= z && z <= y) {
            return Err(Error::DomainError(format!("need 0 <= x <= z <= y, got x={x}, z={z}, y={y}")));
        }
        let theta1 = theta_of(x, z - x);
        let theta2 = theta_of(x, y - x);
        let root = ((z - x) * (z + x)).sqrt() * ((y - x) * (y + x)).sqrt() / y;
        Ok(Self {
            a1: x * x / y + root,
            a2: x * x / y - root,
            theta1,
            theta2,
        })
    }

    /// `kappa(a2/z) - kappa(a1/z)` for dimension `d`.
    pub fn band(&self, d: usize) -> f64 {
        cap_angle(d, self.theta2 + self.theta1) - cap_angle(d, self.theta2 - self.theta1)
    }
}

/// `F0(x)`: survival of the distance from the origin to the line through two
/// independent samples.
pub fn pair_plane_survival(model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    validate(x, cfg)?;
    if x == 0.0 {
        return Ok(KernelValue::exact(1.0));
    }
    let sup = model.support_upper();
    if x >= sup {
        return Ok(KernelValue::exact(0.0));
    }
    let d = model.dim();
    let width = layout::feature_width(model, x);
    let scale = model.median_radius();
    let mut failure: Option<Error> = None;
    let mut inner_evals = 0usize;
    let outer = Layout::new(x, sup, width, scale);
    let r = outer.integrate(
        |y, dy| {
            let py = model.density(y);
            if py == 0.0 {
                return 0.0;
            }
            let theta2 = theta_of(x, dy);
            let inner = Layout::new(x, y, width.min(dy), scale);
            let r = inner.integrate(
                |z, dz| {
                    let theta1 = theta_of(x, dz);
                    model.density(z) * (cap_angle(d, theta2 + theta1) - cap_angle(d, theta2 - theta1))
                },
                &cfg.relative_only(),
            );
            inner_evals += r.evaluations;
            if !r.converged && failure.is_none() {
                failure = r.into_result(cfg).err();
            }
            py * r.value
        },
        cfg,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut v = KernelValue::from_integral(r.scale(2.0), cfg)?;
    v.evaluations += inner_evals;
    Ok(v)
}

/// `J(x, y, z) = c_d int_x^z (1 - x^2/s^2)^{(d-3)/2} |dF0-integrand/ds| ds`,
/// the inner integral of the derivative of `F0` weighted as in the identity
/// `int_x (1 - x^2/s^2)^{(d-3)/2} |dF0(s)| = K(x)^2`.
///
/// Equals `lambda_d(x/y) lambda_d(x/z)`.
pub fn pair_plane_weight(d: usize, x: f64, y: f64, z: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    check_dim(d)?;
    if !(0.0 < x && x <= z && z <= y) {
        return Err(Error::DomainError(format!("need 0 < x <= z <= y, got x={x}, z={z}, y={y}")));
    }
    if z == x {
        return Ok(KernelValue::exact(0.0));
    }
    let r = integrate(|t| weight_integrand(d, x, y, z, t), 0.0, 1.0, cfg);
    KernelValue::from_integral(r, cfg)
}

fn sphere_density_const(d: usize) -> f64 {
    let df = d as f64;
    (ln_gamma(0.5 * df) - ln_gamma(0.5 * (df - 1.0))).exp() / std::f64::consts::PI.sqrt()
}

/// Integrand of [`pair_plane_weight`] after the cosine map `s = x + (z - x) sin^2(pi t / 2)`.
#[inline]
fn weight_integrand(d: usize, x: f64, y: f64, z: f64, t: f64) -> f64 {
    let half_pi = 0.5 * std::f64::consts::PI;
    let span = z - x;
    let sn = (half_pi * t).sin();
    let cs = (half_pi * t).cos();
    let ds = span * sn * sn;
    let s = x + ds;
    // z - s = span cos^2
    let dz = span * cs * cs;
    let jac = span * half_pi * (std::f64::consts::PI * t).sin();
    let rz = (dz * (z + s)).sqrt();
    let ry = ((y - s) * (y + s)).sqrt();
    if rz == 0.0 || s == 0.0 {
        return 0.0;
    }
    let pw = d as f64 - 2.0;
    let plus = (s * (ry + rz) / (y * z)).powf(pw);
    let minus = (s * (ry - rz).max(0.0) / (y * z)).powf(pw);
    let alpha = 1.0 / rz;
    let beta = 1.0 / ry;
    let g = if d == 3 { 1.0 } else { (ds * (s + x) / (s * s)).powf(0.5 * (d as f64 - 3.0)) };
    sphere_density_const(d) * jac * g * (plus * (alpha + beta) + minus * (alpha - beta))
}

/// Left side of `int_x^sup (1 - x^2/y^2)^{(d-3)/2} |dF0(y)| = K(x)^2`, by the
/// triple integral over `x < z < y` with `|dF0|` differentiated under the
/// integral sign.
pub fn pair_plane_identity_lhs(model: &RadialModel, x: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    validate(x, cfg)?;
    let sup = model.support_upper();
    if x >= sup {
        return Ok(KernelValue::exact(0.0));
    }
    if x == 0.0 {
        return Ok(KernelValue::exact(1.0));
    }
    let d = model.dim();
    let width = layout::feature_width(model, x);
    let scale = model.median_radius();
    let mut evaluations = 0usize;
    let mut worst: Option<Error> = None;
    let outer = Layout::new(x, sup, width, scale);
    let inner_cfg = cfg.relative_only();
    let r = outer.integrate(
        |y, dy| {
            let py = model.density(y);
            if py == 0.0 {
                return 0.0;
            }
            let middle = Layout::new(x, y, width.min(dy), scale);
            let m = middle.integrate(
                |z, _| {
                    let pz = model.density(z);
                    if pz == 0.0 || z <= x {
                        return 0.0;
                    }
                    let j = integrate(|t| weight_integrand(d, x, y, z, t), 0.0, 1.0, &inner_cfg);
                    evaluations += j.evaluations;
                    if !j.converged && worst.is_none() {
                        worst = j.into_result(&inner_cfg).err();
                    }
                    pz * j.value
                },
                &inner_cfg,
            );
            evaluations += m.evaluations;
            if !m.converged && worst.is_none() {
                worst = m.into_result(&inner_cfg).err();
            }
            py * m.value
        },
        cfg,
    );
    if let Some(e) = worst {
        return Err(e);
    }
    let mut v = KernelValue::from_integral(r.scale(2.0), cfg)?;
    v.evaluations += evaluations;
    Ok(v)
}

fn check_h_args(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        Err(Error::DomainError(format!("c must lie in (0, 1), got {c}")))
    } else {
        Ok(())
    }
}

/// `h(n, c) = B((n+1)/2, 1/2) c^n / (1 - c^2)^{(n+1)/2}`.
pub fn h_closed_form(n: u32, c: f64) -> Result<f64> {
    check_h_args(c)?;
    let nf = n as f64;
    Ok(beta_fn(0.5 * (nf + 1.0), 0.5) * c.powi(n as i32) / ((1.0 - c) * (1.0 + c)).powf(0.5 * (nf + 1.0)))
}

/// `h(n, c) = int_0^c [(1-t)^{-(n+1)} + (1+t)^{-(n+1)}] (c^2 - t^2)^{(n-1)/2} dt`
/// by quadrature in `t = c sin(theta)`.
pub fn h_quadrature(n: u32, c: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_h_args(c)?;
    cfg.validate()?;
    let m = -(n as i32 + 1);
    let cn = c.powi(n as i32);
    let r = if cfg.singularity_substitution {
        integrate(
            |th| {
                let t = c * th.sin();
                ((1.0 - t).powi(m) + (1.0 + t).powi(m)) * cn * th.cos().powi(n as i32)
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            cfg,
        )
    } else {
        let e = 0.5 * (n as f64 - 1.0);
        integrate(
            |t| ((1.0 - t).powi(m) + (1.0 + t).powi(m)) * ((c - t) * (c + t)).powf(e),
            0.0,
            c,
            cfg,
        )
    };
    Ok(r.into_result(cfg)?.value)
}

#[cfg(test)]
mod tests;
