//! Empirical estimates of the kernels `G`, `K`, `H`, `F0`.

use serde::{Deserialize, Serialize};

use super::hull::NormalSolver;
use super::stream_rng;
use crate::distributions::{sample_point, RadialModel};
use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::parallel::{map_indexed, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub x: f64,
    pub p_hat: f64,
    pub std_error: f64,
}

const BATCH: usize = 4096;

/// Statistic whose survival function is the kernel.
fn statistic(kind: KernelKind, pts: &[f64], d: usize, solver: &mut NormalSolver, normal: &mut [f64]) -> f64 {
    match kind {
        KernelKind::G => pts[0],
        KernelKind::K => pts[0].hypot(pts[1]),
        KernelKind::H => {
            if solver.normal(|j| &pts[j * d..(j + 1) * d], normal) {
                normal.iter().zip(&pts[..d]).map(|(a, b)| a * b).sum::<f64>().abs()
            } else {
                f64::NAN
            }
        }
        KernelKind::F0 => {
            let (p, q) = (&pts[..d], &pts[d..2 * d]);
            let dir: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let t: f64 = p.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() / (len * len);
            p.iter().zip(&dir).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt()
        }
    }
}

/// Survival estimates with binomial standard errors at each grid point.
/// Samples are drawn in fixed batches, each from its own ChaCha8 stream.
pub fn empirical_kernel(
    model: &RadialModel,
    d: usize,
    kind: KernelKind,
    x_grid: &[f64],
    samples: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<Vec<SurvivalEstimate>> {
    if model.dim() != d {
        return Err(Error::InvalidArgs(format!("model has dimension {}, requested d = {d}", model.dim())));
    }
    let points_per_sample = match kind {
        KernelKind::G | KernelKind::K => 1,
        KernelKind::H => d,
        KernelKind::F0 => 2,
    };
    let batches = samples.div_ceil(BATCH);
    let counts = map_indexed(batches, parallelism, |b| -> Result<Vec<u64>> {
        let mut rng = stream_rng(seed, b as u64);
        let mut solver = NormalSolver::new(d);
        let mut normal = vec![0.0; d];
        let mut pts = vec![0.0; points_per_sample * d];
        let mut hits = vec![0u64; x_grid.len()];
        let size = BATCH.min(samples - b * BATCH);
        for _ in 0..size {
            for p in pts.chunks_exact_mut(d) {
                sample_point(model, &mut rng, p)?;
            }
            let s = statistic(kind, &pts, d, &mut solver, &mut normal);
            for (h, &x) in hits.iter_mut().zip(x_grid) {
                if s >= x {
                    *h += 1;
                }
            }
        }
        Ok(hits)
    });
    let mut total = vec![0u64; x_grid.len()];
    for c in counts {
        for (t, h) in total.iter_mut().zip(c?) {
            *t += h;
        }
    }
    let n = samples as f64;
    Ok(x_grid
        .iter()
        .zip(total)
        .map(|(&x, h)| {
            let p = h as f64 / n;
            SurvivalEstimate {
                x,
                p_hat: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_k_and_g() {
        let model = RadialModel::gaussian(3).unwrap();
        let k = empirical_kernel(&model, 3, KernelKind::K, &[1.0], 40_000, 1, Parallelism::Parallel).unwrap();
        assert!((k[0].p_hat - (-0.5f64).exp()).abs() < 4.0 * k[0].std_error, "{k:?}");
        let g = empirical_kernel(&model, 3, KernelKind::G, &[0.0], 40_000, 2, Parallelism::Parallel).unwrap();
        assert!((g[0].p_hat - 0.5).abs() < 4.0 * g[0].std_error);
    }

    #[test]
    fn f0_gaussian_d3() {
        let model = RadialModel::gaussian(3).unwrap();
        let e = empirical_kernel(&model, 3, KernelKind::F0, &[0.7], 40_000, 3, Parallelism::Parallel).unwrap();
        assert!((e[0].p_hat - (-0.49f64).exp()).abs() < 4.0 * e[0].std_error, "{e:?}");
    }
}
