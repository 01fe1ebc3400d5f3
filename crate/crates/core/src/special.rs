//! Special functions used by the kernels and asymptotic formulas.
//!
//! Thin wrappers over `statrs` so the rest of the crate has one place to
//! look for argument conventions.

use statrs::function::{beta, erf, gamma};

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta_fn(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}

/// Regularized incomplete beta `I_x(a, b)`, clamped to `[0, 1]` outside the unit interval.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta::beta_reg(a, b, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_ur(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma::gamma_ur(a, x)
    }
}

pub fn erfc(x: f64) -> f64 {
    erf::erfc(x)
}

/// Standard normal survival `P(Z >= x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `ln C(n, k)` for real `n >= k >= 0`, with the falling factorial summed
/// term by term when `k` is a small integer.
pub fn ln_binomial(n: f64, k: usize) -> f64 {
    if k <= 64 {
        let falling: f64 = (0..k).map(|i| (n - i as f64).ln()).sum();
        falling - ln_gamma(k as f64 + 1.0)
    } else {
        ln_gamma(n + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(n - k as f64 + 1.0)
    }
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn ln_sphere_area(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - ln_gamma(half)
}
