//! Monte Carlo oracle: sampled point clouds, exact hull facet counts, and
//! estimates of `E[F_N]`, `E[V_N]` and the outside probability.

mod hull;
mod kernel;

pub use hull::{facet_count, facet_count_2d, hull, Facet, Hull, PointCloud};
pub use kernel::{empirical_kernel, SurvivalEstimate};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_point, RadialModel};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Parallelism};

/// Resample attempts per replicate before a degeneracy is reported.
pub const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub per_replicate_counts: Vec<u64>,
    pub per_replicate_vertices: Vec<u64>,
    pub n_points: usize,
    pub d: usize,
    pub model_id: String,
    pub seed: u64,
}

impl FacetEstimate {
    pub fn vertex_mean(&self) -> f64 {
        mean_se(&self.per_replicate_vertices).0
    }

    pub fn vertex_std_error(&self) -> f64 {
        mean_se(&self.per_replicate_vertices).1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipEstimate {
    pub p_hat: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Mean of `V_{N+1} / (N+1)` over the same trials.
    pub vertex_estimate: f64,
    pub vertex_std_error: f64,
    /// Standard error of the per-trial difference of the two estimators.
    pub paired_std_error: f64,
}

/// Mean and standard error from integer counts, summed exactly.
fn mean_se(counts: &[u64]) -> (f64, f64) {
    let n = counts.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let sum: u128 = counts.iter().map(|&c| c as u128).sum();
    let sum2: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n < 2 {
        return (mean, f64::NAN);
    }
    // n * sum2 - sum^2 is exact in integers.
    let spread = (n as u128) * sum2 - sum * sum;
    let var = spread as f64 / (nf * (nf - 1.0));
    (mean, (var / nf).sqrt())
}

fn mean_se_f64(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. points from `model`.
pub fn sample_cloud<R: Rng + ?Sized>(model: &RadialModel, n: usize, rng: &mut R) -> Result<PointCloud> {
    let d = model.dim();
    let mut coords = vec![0.0; n * d];
    for p in coords.chunks_exact_mut(d) {
        sample_point(model, rng, p)?;
    }
    PointCloud::new(d, coords)
}

fn check_args(model: &RadialModel, n: usize, d: usize) -> Result<()> {
    if model.dim() != d {
        return Err(Error::InvalidArgs(format!("model has dimension {}, requested d = {d}", model.dim())));
    }
    if n < d + 1 {
        return Err(Error::InvalidArgs(format!("need N >= d + 1 = {}, got {n}", d + 1)));
    }
    Ok(())
}

/// Sample a cloud and build its hull, resampling after degeneracies.
fn sampled_hull(model: &RadialModel, n: usize, rng: &mut ChaCha8Rng) -> Result<(PointCloud, Hull)> {
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let cloud = sample_cloud(model, n, rng)?;
        let built = cloud.check_distinct().and_then(|_| hull(&cloud));
        match built {
            Ok(h) => return Ok((cloud, h)),
            Err(e @ Error::DegenerateInput(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::DegenerateInput("resampling exhausted".into())))
}

/// Average facet count over independent clouds. Replicate `i` draws from
/// the ChaCha8 stream `(seed, i)`, so the result does not depend on
/// `parallelism`.
pub fn estimate_expected_facets(
    model: &RadialModel,
    n_points: usize,
    d: usize,
    replicates: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<FacetEstimate> {
    check_args(model, n_points, d)?;
    if replicates < 2 {
        return Err(Error::InvalidArgs(format!("need at least 2 replicates, got {replicates}")));
    }
    let runs = map_indexed(replicates, parallelism, |i| {
        let mut rng = stream_rng(seed, i as u64);
        sampled_hull(model, n_points, &mut rng).map(|(_, h)| (h.facet_count() as u64, h.vertex_count() as u64))
    });
    let mut facets = Vec::with_capacity(replicates);
    let mut vertices = Vec::with_capacity(replicates);
    for r in runs {
        let (f, v) = r?;
        facets.push(f);
        vertices.push(v);
    }
    let (mean, std_error) = mean_se(&facets);
    Ok(FacetEstimate {
        mean,
        std_error,
        replicates,
        per_replicate_counts: facets,
        per_replicate_vertices: vertices,
        n_points,
        d,
        model_id: model.id(),
        seed,
    })
}

/// Fraction of trials in which an extra point falls outside the hull of
/// `n_points` others, alongside the vertex-count estimate
/// `E[V_{N+1}] / (N+1)` from the same `N+1` points.
pub fn estimate_outside_probability(
    model: &RadialModel,
    n_points: usize,
    d: usize,
    trials: usize,
    seed: u64,
    parallelism: Parallelism,
) -> Result<MembershipEstimate> {
    check_args(model, n_points, d)?;
    if trials < 2 {
        return Err(Error::InvalidArgs(format!("need at least 2 trials, got {trials}")));
    }
    let runs = map_indexed(trials, parallelism, |i| -> Result<(f64, f64)> {
        let mut rng = stream_rng(seed, i as u64);
        let mut last = None;
        for _ in 0..MAX_RESAMPLES {
            let all = sample_cloud(model, n_points + 1, &mut rng)?;
            let first = PointCloud::new(d, all.coords[..n_points * d].to_vec())?;
            let attempt = all.check_distinct().and_then(|_| {
                let h = hull(&first)?;
                let outside = !h.contains(all.point(n_points));
                let v = hull(&all)?.vertex_count();
                Ok((f64::from(u8::from(outside)), v as f64 / (n_points + 1) as f64))
            });
            match attempt {
                Ok(r) => return Ok(r),
                Err(e @ Error::DegenerateInput(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::DegenerateInput("resampling exhausted".into())))
    });
    let mut outside = Vec::with_capacity(trials);
    let mut ratio = Vec::with_capacity(trials);
    for r in runs {
        let (o, v) = r?;
        outside.push(o);
        ratio.push(v);
    }
    let hits = outside.iter().filter(|&&o| o > 0.0).count();
    let p_hat = hits as f64 / trials as f64;
    let std_error = (p_hat * (1.0 - p_hat) / (trials as f64 - 1.0)).sqrt();
    let (vertex_estimate, vertex_std_error) = mean_se_f64(&ratio);
    let diff: Vec<f64> = outside.iter().zip(&ratio).map(|(o, v)| o - v).collect();
    let (_, paired_std_error) = mean_se_f64(&diff);
    Ok(MembershipEstimate {
        p_hat,
        std_error,
        trials,
        vertex_estimate,
        vertex_std_error,
        paired_std_error,
    })
}
