//! `E[F_N] = C(N, d) int [G^{N-d} + (1 - G)^{N-d}] |dH|` by quadrature.
//!
//! With `w = G(x)` and `psi(w) = H(G^{-1}(w))`, integration by parts gives
//!
//! `E[F_N] / C(N, d) = 2^{1-n} + int_0^{1/2} n [(1-w)^{n-1} - w^{n-1}] psi(w) dw`
//!
//! with `n = N - d`. `psi` is tabulated on a log-spaced grid in `w` and
//! interpolated in `(log w, log psi)`.

use std::cell::RefCell;

use serde::Serialize;

use crate::distributions::RadialModel;
use crate::error::{Error, Result};
use crate::kernels::{marginal_survival, plane_distance_survival};
use crate::numerics::{brent, integrate, Integral, MonotoneCubic, QuadratureConfig};
use crate::parallel::{map_indexed, Parallelism};
use crate::special::ln_binomial;

const NODES_PER_DECADE: f64 = 16.0;
const UNDERFLOW_LOG: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactExpectation {
    pub value: f64,
    pub n_points: u64,
    pub d: usize,
    pub quadrature_error: f64,
    pub used_simplified_form: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableNode {
    pub x: f64,
    pub log_w: f64,
    pub psi: f64,
    pub psi_error: f64,
}

/// `psi(w) = H(G^{-1}(w))` on `w in [w_floor, 1/2]`.
#[derive(Debug, Clone)]
pub struct HTable {
    d: usize,
    nodes: Vec<TableNode>,
    interp: MonotoneCubic,
    max_rel_error: f64,
}

fn ln_g(model: &RadialModel, x: f64, cfg: &QuadratureConfig, err: &RefCell<Option<Error>>) -> f64 {
    match marginal_survival(model, x, cfg) {
        Ok(g) if g.value > 0.0 => g.value.ln(),
        Ok(_) => -1e4,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    }
}

impl HTable {
    /// Tabulate down to `w_floor`; below it `psi` is continued as a power law.
    pub fn build(model: &RadialModel, cfg: &QuadratureConfig, w_floor: f64, mode: Parallelism) -> Result<Self> {
        cfg.validate()?;
        if !(w_floor > 0.0 && w_floor < 0.5) {
            return Err(Error::InvalidArgs(format!("w_floor must lie in (0, 1/2), got {w_floor}")));
        }
        let kcfg = cfg.relative_only();
        let sup = model.support_upper();
        let step = std::f64::consts::LN_10 / NODES_PER_DECADE;
        let top = 0.5f64.ln();
        let count = ((top - w_floor.ln()) / step).ceil() as usize;

        let mut xs = vec![0.0];
        let mut log_ws = vec![top];
        let mut lo = 0.0;
        let err = RefCell::new(None);
        for j in 1..=count {
            let target = top - j as f64 * step;
            let mut phi = |x: f64| ln_g(model, x, &kcfg, &err) - target;
            let mut hi = if sup.is_finite() { 0.5 * (lo + sup) } else { (2.0 * lo).max(model.median_radius()) };
            let mut guard = 0;
            loop {
                let v = phi(hi);
                if v.is_nan() {
                    break;
                }
                if v <= 0.0 {
                    break;
                }
                lo = hi;
                hi = if sup.is_finite() { 0.5 * (hi + sup) } else { 2.0 * hi };
                guard += 1;
                if guard > 200 || hi == lo {
                    return Err(Error::ConvergenceFailure { iterations: guard });
                }
            }
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            let x = brent(&mut phi, lo, hi, 1e-14 * hi, 1e-13, 200)?;
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            let lw = ln_g(model, x, &kcfg, &err);
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            if lw < *log_ws.last().unwrap() {
                xs.push(x);
                log_ws.push(lw);
            }
            lo = x;
        }

        let hs = map_indexed(xs.len(), mode, |i| plane_distance_survival(model, xs[i], &kcfg));
        let mut nodes = Vec::with_capacity(xs.len());
        let mut max_rel_error: f64 = 0.0;
        for ((x, lw), h) in xs.iter().zip(&log_ws).zip(hs) {
            let h = h?;
            if !(h.value > 0.0) {
                break;
            }
            max_rel_error = max_rel_error.max(h.abs_error_estimate / h.value);
            nodes.push(TableNode {
                x: *x,
                log_w: *lw,
                psi: h.value.min(1.0),
                psi_error: h.abs_error_estimate,
            });
        }
        if nodes.len() < 3 {
            return Err(Error::DomainError("H vanishes too close to the origin to tabulate".into()));
        }
        let lx: Vec<f64> = nodes.iter().rev().map(|n| n.log_w).collect();
        let ly: Vec<f64> = nodes.iter().rev().map(|n| n.psi.ln()).collect();
        Ok(Self {
            d: model.dim(),
            nodes,
            interp: MonotoneCubic::new(lx, ly),
            max_rel_error,
        })
    }

    pub fn nodes(&self) -> &[TableNode] {
        &self.nodes
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `log psi` at `log w`.
    pub fn ln_psi(&self, log_w: f64) -> f64 {
        self.interp.eval(log_w).min(0.0)
    }

    pub fn expected_facets(&self, n_points: u64, cfg: &QuadratureConfig) -> Result<ExactExpectation> {
        let d = self.d;
        if n_points <= d as u64 {
            return Err(Error::InvalidArgs(format!("need N >= d + 1, got N={n_points}, d={d}")));
        }
        let n = (n_points - d as u64) as f64;
        let ln_c = ln_binomial(n_points as f64, d);
        let simplified = n * std::f64::consts::LN_2 > UNDERFLOW_LOG;
        let boundary = if simplified {
            0.0
        } else {
            (ln_c + std::f64::consts::LN_2 - n * std::f64::consts::LN_2).exp()
        };
        let ln_n = n.ln();
        let integrand = |lw: f64| -> f64 {
            let w = lw.exp();
            let l1w = (-w).ln_1p();
            let base = (ln_c + ln_n + (n - 1.0) * l1w + self.ln_psi(lw) + lw).exp();
            if simplified || n == 1.0 {
                if n == 1.0 {
                    0.0
                } else {
                    base
                }
            } else {
                base * -((n - 1.0) * (lw - l1w)).exp_m1()
            }
        };
        let lo_end = self.interp.x_min();
        let (slope_lo, _) = self.interp.end_slopes();
        let alpha = slope_lo.max(0.0);
        let extra = 40.0 / (alpha + 1.0);
        let (xs, _) = self.interp.nodes();
        let mut total = integrate(integrand, lo_end - extra, lo_end, cfg);
        for pair in xs.windows(2) {
            total = total.add(integrate(integrand, pair[0], pair[1], cfg));
        }
        let value = boundary + total.value;
        let quadrature_error = total_error(&total, value, self.max_rel_error);
        if !total.converged || !value.is_finite() {
            return Err(Error::QuadratureFailure {
                value,
                abs_error: quadrature_error,
                tolerance: cfg.tolerance_for(value),
            });
        }
        Ok(ExactExpectation {
            value,
            n_points,
            d,
            quadrature_error,
            used_simplified_form: simplified,
        })
    }
}

fn total_error(total: &Integral, value: f64, psi_rel: f64) -> f64 {
    total.abs_error + psi_rel * value.abs()
}

/// Table floor adequate for `N`: the integrand below it is `O((N w)^{d+1})`.
pub fn default_w_floor(n_points: u64) -> f64 {
    (1e-4 / n_points as f64).min(1e-3)
}

/// `E[F_N]` for `N` i.i.d. samples of `model` in `R^d`.
pub fn expected_facets_exact(
    model: &RadialModel,
    n_points: u64,
    d: usize,
    cfg: &QuadratureConfig,
) -> Result<ExactExpectation> {
    if model.dim() != d {
        return Err(Error::InvalidArgs(format!("model lives in R^{} but d={d}", model.dim())));
    }
    if n_points <= d as u64 {
        return Err(Error::InvalidArgs(format!("need N >= d + 1, got N={n_points}, d={d}")));
    }
    let table = HTable::build(model, cfg, default_w_floor(n_points), Parallelism::default())?;
    table.expected_facets(n_points, cfg)
}
