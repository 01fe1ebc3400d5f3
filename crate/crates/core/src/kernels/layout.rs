//! Splitting of a radial integral `y in (x, upper)` into pieces whose widths
//! grow geometrically away from `x`, with endpoint maps suited to each piece.

use crate::distributions::RadialModel;
use crate::numerics::{integrate, Integral, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PieceKind {
    /// Touches `y = x`; square-root map `delta = s^2`.
    Start,
    Inner,
    /// Touches a finite `upper`; map `delta = hi - s^2`.
    End,
    /// Whole finite range in one piece; cosine map.
    Whole,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub x: f64,
    pub upper: f64,
    pub pieces: Vec<Piece>,
    /// Start of the `[c, inf)` piece, for unbounded ranges.
    pub tail_from: Option<f64>,
}

/// Feature width near `x`: `min(x, F/p)`, clipped below at a tiny multiple
/// of the model's median radius.
pub(crate) fn feature_width(model: &RadialModel, x: f64) -> f64 {
    let scale = model.median_radius();
    let p = model.density(x);
    let f = model.survival(x);
    let hazard = if p > 0.0 && f > 0.0 { f / p } else { scale };
    x.min(hazard).min(scale).max(1e-10 * scale)
}

impl Layout {
    pub(crate) fn new(x: f64, upper: f64, width: f64, scale: f64) -> Self {
        let span = upper - x;
        let bounded = span.is_finite();
        let reach = if bounded { span } else { scale.max(x) };
        let mut pieces = Vec::new();
        if span <= 0.0 {
            return Self { x, upper, pieces, tail_from: None };
        }
        if width >= 0.25 * reach {
            if bounded {
                pieces.push(Piece { lo: 0.0, hi: span, kind: PieceKind::Whole });
            } else {
                pieces.push(Piece { lo: 0.0, hi: reach, kind: PieceKind::Start });
            }
        } else {
            pieces.push(Piece { lo: 0.0, hi: width, kind: PieceKind::Start });
            let mut lo = width;
            while lo < reach {
                let mut hi = 4.0 * lo;
                if hi > 0.5 * reach {
                    hi = reach;
                }
                pieces.push(Piece { lo, hi, kind: PieceKind::Inner });
                lo = hi;
            }
            if bounded {
                if let Some(last) = pieces.last_mut() {
                    last.kind = PieceKind::End;
                }
            }
        }
        let tail_from = if bounded { None } else { Some(x + reach) };
        Self { x, upper, pieces, tail_from }
    }

    pub(crate) fn for_model(model: &RadialModel, x: f64, upper: f64) -> Self {
        Self::new(x, upper, feature_width(model, x), model.median_radius())
    }

    pub(crate) fn piece_count(&self) -> usize {
        self.pieces.len() + usize::from(self.tail_from.is_some())
    }

    /// `int f(y, y - x) dy` over `(x, upper)`.
    pub(crate) fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F, cfg: &QuadratureConfig) -> Integral {
        let n = self.piece_count().max(1) as f64;
        let piece_cfg = cfg.with_abs_tol(cfg.abs_tol / n);
        let x = self.x;
        let sub = cfg.singularity_substitution;
        let mut total = Integral::ZERO;
        for piece in &self.pieces {
            let r = match piece.kind {
                PieceKind::Start if sub => integrate(
                    |s| {
                        let d = s * s;
                        2.0 * s * f(x + d, d)
                    },
                    0.0,
                    piece.hi.sqrt(),
                    &piece_cfg,
                ),
                PieceKind::End if sub => {
                    let (hi, upper) = (piece.hi, self.upper);
                    integrate(
                        |s| {
                            let d = hi - s * s;
                            let y = (x + d).min(upper);
                            2.0 * s * f(y, d)
                        },
                        0.0,
                        (piece.hi - piece.lo).sqrt(),
                        &piece_cfg,
                    )
                }
                PieceKind::Whole if sub => {
                    let span = piece.hi;
                    let half_pi = 0.5 * std::f64::consts::PI;
                    integrate(
                        |t| {
                            let s = (half_pi * t).sin();
                            let d = span * s * s;
                            span * half_pi * (std::f64::consts::PI * t).sin() * f(x + d, d)
                        },
                        0.0,
                        1.0,
                        &piece_cfg,
                    )
                }
                _ => integrate(|d| f(x + d, d), piece.lo, piece.hi, &piece_cfg),
            };
            total = total.add(r);
        }
        if let Some(c) = self.tail_from {
            let r = integrate(
                |t| {
                    if t == 0.0 {
                        0.0
                    } else {
                        let y = c / t;
                        c / (t * t) * f(y, y - x)
                    }
                },
                0.0,
                1.0,
                &piece_cfg,
            );
            total = total.add(r);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pieces_cover_range() {
        let l = Layout::new(1e-6, 1.0, 1e-6, 0.7);
        let mut prev = 0.0;
        for p in &l.pieces {
            assert_eq!(p.lo, prev);
            assert!(p.hi > p.lo);
            prev = p.hi;
        }
        assert!((prev - (1.0 - 1e-6)).abs() < 1e-15);
        assert_eq!(l.pieces.first().unwrap().kind, PieceKind::Start);
        assert_eq!(l.pieces.last().unwrap().kind, PieceKind::End);
        assert!(l.tail_from.is_none());
    }

    #[test]
    fn unbounded_integral() {
        let cfg = QuadratureConfig::default().relative_only();
        for x in [1e-4, 0.5, 3.0, 40.0] {
            let l = Layout::new(x, f64::INFINITY, x.min(1.0 / x), 1.0);
            // int_x^inf e^{-y} / sqrt(y - x) dy = sqrt(pi) e^{-x}
            let r = l.integrate(|y, d| (-y).exp() / d.sqrt(), &cfg);
            let exact = std::f64::consts::PI.sqrt() * (-x).exp();
            assert!(((r.value - exact) / exact).abs() < 1e-9, "x={x}: {r:?}");
        }
    }

    #[test]
    fn bounded_both_ends_singular() {
        let cfg = QuadratureConfig::default();
        for (x, w) in [(0.2, 0.05), (0.9, 0.1)] {
            let l = Layout::new(x, 1.0, w, 1.0);
            // int_x^1 dy / sqrt((y - x)(1 - y)) = pi
            let r = l.integrate(|y, d| 1.0 / (d * (1.0 - y)).sqrt(), &cfg);
            assert!((r.value - std::f64::consts::PI).abs() < 1e-8, "{r:?}");
        }
    }
}
