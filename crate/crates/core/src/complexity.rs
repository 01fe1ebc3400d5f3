//! Sample-complexity conditions for the outside probability `p_{N,d}`:
//! the upper bound `E[F_N] / (dN)` and the per-family thresholds on `N`.
//!
//! Everything is evaluated in log space; `N` enters as `ln N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distributions::{SlowlyVaryingFn, TailFamily, TailKind};
use crate::error::{Error, Result};
use crate::expectation::{epsilon_fn, ln_exp_formula, ln_poly_highdim, ln_trunc_highdim};
use crate::parallel::{map_indexed, Parallelism};
use crate::special::{ln_beta, ln_gamma};

/// Largest `ln N` searched by [`minimal_log_n`].
pub const MAX_LOG_N: f64 = 690.0;

pub const DEFAULT_MARGIN: f64 = 10.0;

/// `min(1, E[F_N] / (dN))`.
pub fn p_upper_bound(e_fn: f64, n_points: f64, d: usize) -> Result<f64> {
    if !(e_fn > 0.0) {
        return Err(Error::InvalidArgs(format!("E[F_N] must be positive, got {e_fn}")));
    }
    if d < 2 || !(n_points > d as f64) {
        return Err(Error::InvalidArgs(format!("need N > d >= 2, got N={n_points}, d={d}")));
    }
    Ok((e_fn / (d as f64 * n_points)).min(1.0))
}

fn ln_p_bound(ln_e: f64, ln_n: f64, d: usize) -> f64 {
    (ln_e - (d as f64).ln() - ln_n).min(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub family: TailKind,
    pub d: usize,
    pub log_n: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// High-dimensional asymptotic `E[F_N] / (dN)`, capped at 1.
    pub p_bound: f64,
}

impl ComplexityReport {
    pub fn ln_ratio(&self) -> f64 {
        self.ln_lhs - self.ln_rhs
    }

    pub fn ratio(&self) -> f64 {
        self.ln_ratio().exp()
    }

    /// Integer `N` when it fits in 63 bits.
    pub fn n_points(&self) -> Option<u64> {
        let n = self.log_n.exp().round();
        (n < 2f64.powi(63)).then_some(n as u64)
    }
}

/// `c = sqrt(pi) k Gamma(k/2) / Gamma((k+1)/2)` of the algebraic row.
pub fn algebraic_base(k: f64) -> Result<f64> {
    let ln_c = 0.5 * PI.ln() + k.ln() + ln_gamma(0.5 * k) - ln_gamma(0.5 * (k + 1.0));
    let c = ln_c.exp();
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::InvalidArgs(format!("algebraic row needs c > 1, got c = {c} at k = {k}")));
    }
    Ok(c)
}

/// `(ln lhs, ln rhs, ln E[F_N])` for one family row.
fn row_terms(family: &TailFamily, d: usize, ln_n: f64) -> Result<(f64, f64, f64)> {
    let df = d as f64;
    let n = ln_n.exp();
    match family {
        TailFamily::Polynomial { k, .. } => {
            let c = algebraic_base(*k)?;
            Ok((ln_n, df * c.ln() - 1.5 * df.ln(), ln_poly_highdim(*k, d)))
        }
        TailFamily::Exponential { l } => {
            let eps = epsilon_fn(l, n);
            if !(eps > 0.0) {
                return Err(Error::NonPositiveEpsilon(eps));
            }
            let lhs = ln_n + 0.5 * (df - 1.0) * eps.ln();
            let rhs = 0.5 * df * (2.0 * PI).ln() - 1.5 * df.ln();
            Ok((lhs, rhs, ln_exp_formula(eps, d)))
        }
        TailFamily::Truncated { k, l } => {
            let ln_l = l.eval(n).ln();
            if !ln_l.is_finite() {
                return Err(Error::InvalidArgs(format!("L(N) must be positive, got {}", l.eval(n))));
            }
            let lhs = 2.0 * k / df * ln_n - (df - 1.0) / (2.0 * k + df - 1.0) * ln_l;
            let rhs = 0.5 * df * (2.0 * PI).ln() + 0.5 * (df - 5.0) * df.ln();
            Ok((lhs, rhs, ln_trunc_highdim(*k, ln_l, ln_n, d)))
        }
    }
}

/// Table row for `family` at `(d, N)` with `N` given as `ln N`.
pub fn table1_condition_log(family: &TailFamily, d: usize, ln_n: f64) -> Result<ComplexityReport> {
    if d < 2 {
        return Err(Error::InvalidArgs(format!("need d >= 2, got {d}")));
    }
    if !(ln_n > (d as f64).ln()) || !ln_n.is_finite() {
        return Err(Error::InvalidArgs(format!("need N > d, got ln N = {ln_n}, d = {d}")));
    }
    let (ln_lhs, ln_rhs, ln_e) = row_terms(family, d, ln_n)?;
    Ok(ComplexityReport {
        family: family.kind(),
        d,
        log_n: ln_n,
        ln_lhs,
        ln_rhs,
        lhs: ln_lhs.exp(),
        rhs: ln_rhs.exp(),
        satisfied: ln_lhs > ln_rhs,
        p_bound: ln_p_bound(ln_e, ln_n, d).exp(),
    })
}

pub fn table1_condition(family: &TailFamily, d: usize, n_points: u64) -> Result<ComplexityReport> {
    table1_condition_log(family, d, (n_points as f64).ln())
}

const SCAN_STEPS: usize = 4000;

/// Smallest `ln N` with `lhs >= margin * rhs`, by a coarse scan for the first
/// crossing followed by bisection.
pub fn minimal_log_n(family: &TailFamily, d: usize, margin: f64) -> Result<f64> {
    if !(margin > 0.0) {
        return Err(Error::InvalidArgs(format!("margin must be positive, got {margin}")));
    }
    let ln_margin = margin.ln();
    let gap = |s: f64| -> Result<f64> {
        let (l, r, _) = row_terms(family, d, s)?;
        Ok(l - r - ln_margin)
    };
    let start = ((d + 1) as f64).ln();
    let step = (MAX_LOG_N - start) / SCAN_STEPS as f64;
    let mut lo = start;
    if gap(lo)? >= 0.0 {
        return Ok(lo);
    }
    for i in 1..=SCAN_STEPS {
        let hi = start + step * i as f64;
        if gap(hi)? >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-12 * b {
                let m = 0.5 * (a + b);
                if gap(m)? >= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(b);
        }
        lo = hi;
    }
    Err(Error::NoSolutionInRange { max_log_n: MAX_LOG_N })
}

/// Family selector for tables over a grid of dimensions, where the
/// slowly varying part may depend on `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableFamily {
    /// `F(x) ~ x^{-k}`.
    Poly { k: f64 },
    /// `F(x) ~ exp(-x^k)`, so `L(s) = (log s)^{1/k}`.
    Exp { k: f64 },
    /// Beta-type density `(1 - r^2)^{k-1}` on the unit ball.
    Trunc { k: f64 },
    Gaussian,
    UniformBall,
}

impl TableFamily {
    pub fn tail(&self, d: usize) -> Result<TailFamily> {
        let df = d as f64;
        match *self {
            TableFamily::Poly { k } => TailFamily::polynomial(k, SlowlyVaryingFn::constant(1.0)),
            TableFamily::Exp { k } => {
                if !(k > 0.0) {
                    return Err(Error::InvalidParameter(format!("exponential tail needs k > 0, got {k}")));
                }
                Ok(TailFamily::exponential(SlowlyVaryingFn::log_power(1.0 / k)))
            }
            TableFamily::Trunc { k } => {
                let ln_l = k * std::f64::consts::LN_2 - k.ln() - ln_beta(0.5 * df, k);
                TailFamily::truncated(k, SlowlyVaryingFn::constant(ln_l.exp()))
            }
            TableFamily::Gaussian => Ok(TailFamily::exponential(SlowlyVaryingFn::sqrt_two_log())),
            TableFamily::UniformBall => TailFamily::truncated(1.0, SlowlyVaryingFn::constant(df)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TableFamily::Poly { k } => format!("poly(k={k})"),
            TableFamily::Exp { k } => format!("exp(k={k})"),
            TableFamily::Trunc { k } => format!("trunc(k={k})"),
            TableFamily::Gaussian => "gaussian".into(),
            TableFamily::UniformBall => "uniform-ball".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub family: String,
    pub d: usize,
    /// `None` when no `ln N <= MAX_LOG_N` meets the margin.
    pub min_log_n: Option<f64>,
    pub report: Option<ComplexityReport>,
}

impl ComplexityRow {
    pub fn log10_min_n(&self) -> Option<f64> {
        self.min_log_n.map(|s| s / std::f64::consts::LN_10)
    }
}

/// Minimal `N` for every `(family, d)`.
pub fn complexity_table(families: &[TableFamily], d_grid: &[usize], margin: f64) -> Result<Vec<ComplexityRow>> {
    complexity_table_with(families, d_grid, margin, Parallelism::Sequential)
}

pub fn complexity_table_with(
    families: &[TableFamily],
    d_grid: &[usize],
    margin: f64,
    parallelism: Parallelism,
) -> Result<Vec<ComplexityRow>> {
    if families.is_empty() || d_grid.is_empty() {
        return Err(Error::InvalidArgs("family and dimension grids must be nonempty".into()));
    }
    let cells = map_indexed(families.len() * d_grid.len(), parallelism, |i| -> Result<ComplexityRow> {
        let fam = &families[i / d_grid.len()];
        let d = d_grid[i % d_grid.len()];
        let tail = fam.tail(d)?;
        let (min_log_n, report) = match minimal_log_n(&tail, d, margin) {
            Ok(s) => (Some(s), Some(table1_condition_log(&tail, d, s)?)),
            Err(Error::NoSolutionInRange { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(ComplexityRow {
            family: fam.label(),
            d,
            min_log_n,
            report,
        })
    });
    cells.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_n(f: TableFamily, d: usize) -> f64 {
        minimal_log_n(&f.tail(d).unwrap(), d, DEFAULT_MARGIN).unwrap_or(f64::INFINITY)
    }

    #[test]
    fn bound_is_capped() {
        assert_eq!(p_upper_bound(20.0, 10.0, 2).unwrap(), 1.0);
        assert_eq!(p_upper_bound(5.0, 10.0, 2).unwrap(), 0.25);
        assert!(p_upper_bound(0.0, 10.0, 2).is_err());
    }

    #[test]
    fn algebraic_row() {
        assert!((algebraic_base(2.0).unwrap() - 4.0).abs() < 1e-13);
        assert!((algebraic_base(1.0).unwrap() - PI).abs() < 1e-13);
        assert!(algebraic_base(0.0).is_err());
        let tail = TableFamily::Poly { k: 2.0 }.tail(10).unwrap();
        let r = table1_condition(&tail, 10, 1000).unwrap();
        assert!((r.rhs - 4f64.powi(10) / 10f64.powf(1.5)).abs() < 1e-8);
        let s = minimal_log_n(&tail, 10, 10.0).unwrap();
        let expect = 10.0 * 4f64.powi(10) / 10f64.powf(1.5);
        assert!((s.exp() / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_row() {
        let tail = TableFamily::Gaussian.tail(10).unwrap();
        let r = table1_condition(&tail, 10, 1_000_000).unwrap();
        let ln_n = 1e6f64.ln();
        let lhs = 1e6 * (2.0 * ln_n).powf(-4.5);
        let rhs = (2.0 * PI).powi(5) / 10f64.powf(1.5);
        assert!((r.lhs / lhs - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.rhs / rhs - 1.0).abs() < 1e-12);
        assert_eq!(r.satisfied, lhs > rhs);
    }

    #[test]
    fn uniform_ball_row() {
        let tail = TableFamily::UniformBall.tail(4).unwrap();
        let r = table1_condition(&tail, 4, 100_000_000).unwrap();
        assert!((r.lhs - 1e4 / 4f64.powf(0.6)).abs() < 1e-8);
        assert!((r.rhs - (2.0 * PI).powi(2) / 2.0).abs() < 1e-10);
        // same law as the beta-type family with exponent 1
        let beta = TableFamily::Trunc { k: 1.0 }.tail(4).unwrap();
        let b = table1_condition(&beta, 4, 100_000_000).unwrap();
        assert!((b.ln_lhs - r.ln_lhs).abs() < 1e-12 && (b.p_bound / r.p_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_by_tail_weight() {
        for d in [5, 10, 20] {
            let a = min_n(TableFamily::Poly { k: 1.0 }, d);
            let g = min_n(TableFamily::Gaussian, d);
            let u = min_n(TableFamily::UniformBall, d);
            assert!(a <= g && g <= u, "d={d}: {a} {g} {u}");
        }
    }

    #[test]
    fn gaussian_growth() {
        let s10 = min_n(TableFamily::Gaussian, 10);
        let s20 = min_n(TableFamily::Gaussian, 20);
        assert!(s20 > 2.0 * s10);
        assert!(s20 / 400.0 < 0.5);
    }

    #[test]
    fn monotone_in_d() {
        for fam in [
            TableFamily::Poly { k: 1.0 },
            TableFamily::Poly { k: 3.0 },
            TableFamily::Gaussian,
            TableFamily::Exp { k: 1.0 },
            TableFamily::UniformBall,
            TableFamily::Trunc { k: 2.0 },
        ] {
            let mut prev = 0.0;
            for d in 3..=50 {
                let s = min_n(fam, d);
                assert!(s >= prev, "{fam:?} d={d}: {s} < {prev}");
                prev = s;
            }
        }
    }

    #[test]
    fn finite_up_to_d_200() {
        for fam in [TableFamily::Poly { k: 2.0 }, TableFamily::Gaussian, TableFamily::UniformBall] {
            for d in [2, 50, 200] {
                let r = table1_condition_log(&fam.tail(d).unwrap(), d, 600.0).unwrap();
                assert!(r.ln_lhs.is_finite() && r.ln_rhs.is_finite() && r.p_bound.is_finite());
            }
        }
    }

    #[test]
    fn no_solution_rows() {
        let rows = complexity_table(&[TableFamily::UniformBall], &[5, 40], 10.0).unwrap();
        assert!(rows[0].min_log_n.is_some());
        assert!(rows[1].min_log_n.is_none());
        let tail = TableFamily::UniformBall.tail(40).unwrap();
        assert!(matches!(minimal_log_n(&tail, 40, 10.0), Err(Error::NoSolutionInRange { .. })));
    }

    #[test]
    fn satisfied_rows_bound_p() {
        for fam in [TableFamily::Poly { k: 1.0 }, TableFamily::Poly { k: 4.0 }, TableFamily::Gaussian, TableFamily::Exp { k: 1.0 }] {
            for d in [3, 5, 10, 20, 40] {
                let tail = fam.tail(d).unwrap();
                if let Ok(s) = minimal_log_n(&tail, d, 100.0) {
                    let r = table1_condition_log(&tail, d, s).unwrap();
                    assert!(r.p_bound < 0.1, "{fam:?} d={d}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn truncated_row_against_bound() {
        for d in [3, 5, 10, 20] {
            let tail = TableFamily::UniformBall.tail(d).unwrap();
            let s = minimal_log_n(&tail, d, 100.0).unwrap();
            assert!(table1_condition_log(&tail, d, s).unwrap().p_bound < 0.1);
        }
        // exponent 2k/d on N exceeds the 2k/(2k+d-1) implied by the bound
        for d in [5, 10, 20] {
            let tail = TableFamily::Trunc { k: 2.0 }.tail(d).unwrap();
            let s = minimal_log_n(&tail, d, 100.0).unwrap();
            assert!(table1_condition_log(&tail, d, s).unwrap().p_bound > 0.1);
        }
    }
}
