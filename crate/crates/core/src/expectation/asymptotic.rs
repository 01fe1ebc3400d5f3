//! Closed-form asymptotics of `E[F_N]` for the three tail families.

use serde::Serialize;

use crate::distributions::{RadialModel, SlowlyVaryingFn, TailFamily, TailKind};
use crate::error::{Error, Result};
use crate::special::{ln_beta, ln_gamma};

use std::f64::consts::{LN_2, PI};

/// Which limit a formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `d` fixed, `N -> infinity`.
    FixedD,
    /// `d -> infinity` with `N / d^2 -> infinity`.
    HighDim,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-d" | "fixed_d" | "fixed" => Ok(Regime::FixedD),
            "high-dim" | "high_dim" | "highdim" => Ok(Regime::HighDim),
            other => Err(Error::InvalidArgs(format!("unknown regime {other:?}"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::FixedD => "fixed-d",
            Regime::HighDim => "high-dim",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub ln_value: f64,
    pub regime: Regime,
    pub family: TailKind,
    pub leading_term: String,
}

impl AsymptoticValue {
    fn from_ln(ln_value: f64, regime: Regime, family: TailKind, leading_term: String) -> Result<Self> {
        let value = ln_value.exp();
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::DomainError(format!(
                "asymptotic value exp({ln_value}) is not a positive finite double"
            )));
        }
        Ok(Self {
            value,
            ln_value,
            regime,
            family,
            leading_term,
        })
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidArgs(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// `ln` of the polynomial-tail constant for fixed `d`:
/// `2^d pi^{(d-1)/2} Gamma^d(k/2+1) Gamma((dk+1)/2) / (Gamma^d((k+1)/2) Gamma(dk/2+1))`.
pub fn ln_poly_constant(k: f64, d: usize) -> f64 {
    let df = d as f64;
    df * LN_2 + 0.5 * (df - 1.0) * PI.ln() + df * ln_gamma(0.5 * k + 1.0) + ln_gamma(0.5 * (df * k + 1.0))
        - df * ln_gamma(0.5 * (k + 1.0))
        - ln_gamma(0.5 * df * k + 1.0)
}

/// `ln` of `sqrt(2 / (pi d k)) c^d` with `c = sqrt(pi) k Gamma(k/2) / Gamma((k+1)/2)`.
pub fn ln_poly_highdim(k: f64, d: usize) -> f64 {
    let df = d as f64;
    0.5 * (2.0 / (PI * df * k)).ln() + df * ln_poly_base(k)
}

/// `ln c`, `c = sqrt(pi) k Gamma(k/2) / Gamma((k+1)/2)`.
pub fn ln_poly_base(k: f64) -> f64 {
    0.5 * PI.ln() + k.ln() + ln_gamma(0.5 * k) - ln_gamma(0.5 * (k + 1.0))
}

pub fn asymptotic_poly(k: f64, d: usize, regime: Regime) -> Result<AsymptoticValue> {
    check_d(d)?;
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgs(format!("polynomial tail needs k >= 0, got {k}")));
    }
    match regime {
        Regime::FixedD => AsymptoticValue::from_ln(
            ln_poly_constant(k, d),
            regime,
            TailKind::Polynomial,
            "2^d pi^((d-1)/2) G(k/2+1)^d G((dk+1)/2) / (G((k+1)/2)^d G(dk/2+1))".into(),
        ),
        Regime::HighDim => {
            if k == 0.0 {
                return Err(Error::InvalidArgs("the high-dimensional polynomial formula needs k > 0".into()));
            }
            AsymptoticValue::from_ln(
                ln_poly_highdim(k, d),
                regime,
                TailKind::Polynomial,
                "sqrt(2/(pi d k)) (sqrt(pi) k G(k/2) / G((k+1)/2))^d".into(),
            )
        }
    }
}

/// `epsilon(s) = s (log L(s))'`.
pub fn epsilon_fn(l: &SlowlyVaryingFn, s: f64) -> f64 {
    s * l.log_derivative(s)
}

/// `ln` of `pi^{(d-1)/2} 2^{(d+1)/2} / sqrt(d) eps^{-(d-1)/2}`.
pub fn ln_exp_formula(eps: f64, d: usize) -> f64 {
    let df = d as f64;
    0.5 * (df - 1.0) * PI.ln() + 0.5 * (df + 1.0) * LN_2 - 0.5 * df.ln() - 0.5 * (df - 1.0) * eps.ln()
}

/// Exponential-tail asymptotic at `N` (real, so that huge `N` are expressible).
pub fn asymptotic_exp(tail: &TailFamily, n_points: f64, d: usize, regime: Regime) -> Result<AsymptoticValue> {
    check_d(d)?;
    let TailFamily::Exponential { l } = tail else {
        return Err(Error::InvalidArgs(format!("exponential asymptotics need an exponential tail, got {}", tail.kind())));
    };
    if !(n_points > d as f64) {
        return Err(Error::InvalidArgs(format!("need N > d, got N={n_points}, d={d}")));
    }
    let eps = epsilon_fn(l, n_points);
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEpsilon(eps));
    }
    AsymptoticValue::from_ln(
        ln_exp_formula(eps, d),
        regime,
        TailKind::Exponential,
        format!("pi^((d-1)/2) 2^((d+1)/2) / sqrt(d) eps(N)^(-(d-1)/2), eps(N)={eps:e}"),
    )
}

/// `a = 2^{(d-3)/2} k Gamma(d/2) Gamma(k) / (sqrt(pi) Gamma(k + (d+1)/2))`.
pub fn coefficient_a(k: f64, d: usize) -> f64 {
    ln_coefficient_a(k, d).exp()
}

pub fn ln_coefficient_a(k: f64, d: usize) -> f64 {
    let df = d as f64;
    0.5 * (df - 3.0) * LN_2 + k.ln() + ln_gamma(0.5 * df) + ln_gamma(k) - 0.5 * PI.ln() - ln_gamma(k + 0.5 * (df + 1.0))
}

/// The Beta form of `a`:
/// `2^{(d-1)/2} k Gamma(d/2) B(k, (d+1)/2) / ((d-1) sqrt(pi) Gamma((d-1)/2))`.
pub fn coefficient_a_beta_form(k: f64, d: usize) -> f64 {
    let df = d as f64;
    (0.5 * (df - 1.0) * LN_2 + k.ln() + ln_gamma(0.5 * df) + ln_beta(k, 0.5 * (df + 1.0))
        - (df - 1.0).ln()
        - 0.5 * PI.ln()
        - ln_gamma(0.5 * (df - 1.0)))
    .exp()
}

/// `b = (k^d / pi) 2^{1/2 + d(d/2-1)} B^d(k, d/2) B(1/2, d(k+d/2-1)+1)`.
pub fn coefficient_b(k: f64, d: usize) -> f64 {
    ln_coefficient_b(k, d).exp()
}

pub fn ln_coefficient_b(k: f64, d: usize) -> f64 {
    let df = d as f64;
    df * k.ln() - PI.ln() + (0.5 + df * (0.5 * df - 1.0)) * LN_2 + df * ln_beta(k, 0.5 * df)
        + ln_beta(0.5, df * (k + 0.5 * df - 1.0) + 1.0)
}

/// Exponent `(d-1)/(2k+d-1)` of `N` in the truncated-tail law.
pub fn trunc_exponent(k: f64, d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) / (2.0 * k + df - 1.0)
}

/// `ln` of the high-dimensional truncated-tail law, with `N` and `L(N)` in log form.
pub fn ln_trunc_highdim(k: f64, ln_l: f64, ln_n: f64, d: usize) -> f64 {
    let df = d as f64;
    0.5 * (df + 2.0 * k) * LN_2 + 0.5 * (df - 2.0) * PI.ln() + k.ln() + ln_gamma(k) + k
        + (0.5 * (df - 3.0) - k) * df.ln()
        + trunc_exponent(k, d) * (ln_n + ln_l)
}

pub fn asymptotic_trunc(k: f64, l: &SlowlyVaryingFn, n_points: f64, d: usize, regime: Regime) -> Result<AsymptoticValue> {
    check_d(d)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgs(format!("truncated tail needs k > 0, got {k}")));
    }
    if !(n_points > d as f64) {
        return Err(Error::InvalidArgs(format!("need N > d, got N={n_points}, d={d}")));
    }
    let ln_l = l.eval(n_points).ln();
    if !ln_l.is_finite() {
        return Err(Error::InvalidArgs(format!("L(N) must be positive, got {}", l.eval(n_points))));
    }
    let df = d as f64;
    let e = trunc_exponent(k, d);
    let growth = e * (n_points.ln() + ln_l);
    let (ln_v, term) = match regime {
        Regime::FixedD => (
            ln_coefficient_b(k, d) - ln_gamma(df + 1.0) + (e - df) * ln_coefficient_a(k, d) + ln_gamma(df + 1.0 - e)
                + growth,
            "(b/d!) a^(-d+e) G(d+1-e) (N L(N))^e",
        ),
        Regime::HighDim => (
            ln_trunc_highdim(k, ln_l, n_points.ln(), d),
            "2^((d+2k)/2) pi^((d-2)/2) k G(k) e^k d^((d-3)/2-k) (N L(N))^e",
        ),
    };
    AsymptoticValue::from_ln(ln_v, regime, TailKind::Truncated, format!("{term}, e={e}"))
}

/// Dispatch on the tail family of `model`.
pub fn asymptotic_for_model(model: &RadialModel, n_points: f64, regime: Regime) -> Result<AsymptoticValue> {
    let d = model.dim();
    match model.tail() {
        TailFamily::Polynomial { k, .. } => asymptotic_poly(*k, d, regime),
        t @ TailFamily::Exponential { .. } => asymptotic_exp(t, n_points, d, regime),
        TailFamily::Truncated { k, l } => asymptotic_trunc(*k, l, n_points, d, regime),
    }
}

/// `v(u) = -1 / (u (log F(u))')`, from the model's own density.
pub fn v_diagnostic(model: &RadialModel, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::DomainError(format!("u must be positive, got {u}")));
    }
    let f = model.survival(u);
    let p = model.density(u);
    if !(f > 0.0 && p > 0.0) {
        return Err(Error::DomainError(format!("F or its density vanishes at u={u}")));
    }
    Ok(f / (u * p))
}

/// `Gamma(n + v) / (Gamma(n) n^v)`, which tends to 1.
pub fn gamma_ratio(n: f64, v: f64) -> f64 {
    (ln_gamma(n + v) - ln_gamma(n) - v * n.ln()).exp()
}

/// `N! / ((N-d)! (N-d)^d)`, which tends to 1 for `N >> d^2`.
pub fn falling_factorial_ratio(n_points: f64, d: usize) -> f64 {
    let m = n_points - d as f64;
    (0..d).map(|i| ((n_points - i as f64) / m).ln()).sum::<f64>().exp()
}
