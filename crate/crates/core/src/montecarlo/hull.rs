//! Exact convex hulls of small point clouds by brute-force enumeration of
//! candidate facets, plus a monotone-chain hull for the plane.

use crate::error::{Error, Result};

/// `n` points in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub d: usize,
    pub coords: Vec<f64>,
    pub seed: u64,
}

impl PointCloud {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}")));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::InvalidArgs(format!("{} coordinates do not split into points of dimension {d}", coords.len())));
        }
        Ok(Self { d, coords, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn scale(&self) -> f64 {
        self.coords.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Tie tolerance for signed distances.
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.scale()
    }

    /// Err if two points coincide to within `1e-12` of the cloud scale.
    pub fn check_distinct(&self) -> Result<()> {
        let tol = 1e-12 * self.scale();
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let dist2: f64 = self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist2.sqrt() <= tol {
                    return Err(Error::DegenerateInput(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }
}

/// Supporting hyperplane `normal . p = offset` with the cloud on the side `<= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub indices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub facets: Vec<Facet>,
    /// Sorted indices of points appearing on some facet.
    pub vertices: Vec<usize>,
    pub tolerance: f64,
}

impl Hull {
    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Weakly inside every facet half-space.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.facets
            .iter()
            .all(|f| dot(&f.normal, p) <= f.offset + self.tolerance)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit normal of the hyperplane through `d` points by Householder QR of the
/// `d x (d-1)` matrix of differences. Returns `None` when the points are
/// affinely dependent.
pub(crate) struct NormalSolver {
    d: usize,
    a: Vec<f64>,
    v: Vec<f64>,
}

impl NormalSolver {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            d,
            a: vec![0.0; d * (d - 1)],
            v: vec![0.0; d * (d - 1)],
        }
    }

    pub(crate) fn normal<'a>(&mut self, points: impl Fn(usize) -> &'a [f64], out: &mut [f64]) -> bool {
        let d = self.d;
        let m = d - 1;
        let p0 = points(0);
        let mut col_scale: f64 = 0.0;
        for j in 0..m {
            let pj = points(j + 1);
            for i in 0..d {
                let v = pj[i] - p0[i];
                self.a[j * d + i] = v;
                col_scale = col_scale.max(v.abs());
            }
        }
        for j in 0..m {
            let norm = (j..d).map(|i| self.a[j * d + i].powi(2)).sum::<f64>().sqrt();
            if norm <= 1e-13 * col_scale {
                return false;
            }
            let x0 = self.a[j * d + j];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let v = &mut self.v[j * d..(j + 1) * d];
            v.iter_mut().for_each(|e| *e = 0.0);
            for i in j..d {
                v[i] = self.a[j * d + i];
            }
            v[j] -= alpha;
            let vn = (j..d).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
            for e in v[j..].iter_mut() {
                *e /= vn;
            }
            for c in j..m {
                let proj: f64 = (j..d).map(|i| self.v[j * d + i] * self.a[c * d + i]).sum();
                for i in j..d {
                    self.a[c * d + i] -= 2.0 * self.v[j * d + i] * proj;
                }
            }
        }
        out.iter_mut().for_each(|e| *e = 0.0);
        out[d - 1] = 1.0;
        for j in (0..m).rev() {
            let v = &self.v[j * d..(j + 1) * d];
            let proj: f64 = (j..d).map(|i| v[i] * out[i]).sum();
            for i in j..d {
                out[i] -= 2.0 * v[i] * proj;
            }
        }
        true
    }
}

/// Advance a sorted `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All facets of the hull, by testing every `d`-subset.
pub fn hull(cloud: &PointCloud) -> Result<Hull> {
    let d = cloud.d;
    let n = cloud.len();
    if n < d + 1 {
        return Err(Error::InvalidArgs(format!("need at least d + 1 = {} points, got {n}", d + 1)));
    }
    let tau = cloud.tolerance();
    let mut solver = NormalSolver::new(d);
    let mut normal = vec![0.0; d];
    let mut in_subset = vec![false; n];
    let mut idx: Vec<usize> = (0..d).collect();
    let mut facets = Vec::new();
    loop {
        for &i in &idx {
            in_subset[i] = true;
        }
        if !solver.normal(|j| cloud.point(idx[j]), &mut normal) {
            return Err(Error::DegenerateInput(format!("points {idx:?} are affinely dependent")));
        }
        let offset = dot(&normal, cloud.point(idx[0]));
        let (mut pos, mut neg, mut tie) = (false, false, false);
        for q in 0..n {
            if in_subset[q] {
                continue;
            }
            let s = dot(&normal, cloud.point(q)) - offset;
            if s > tau {
                pos = true;
            } else if s < -tau {
                neg = true;
            } else {
                tie = true;
            }
            if pos && neg {
                break;
            }
        }
        if !(pos && neg) {
            if tie {
                return Err(Error::DegenerateInput(format!("a point lies on the candidate facet {idx:?}")));
            }
            let (normal, offset) = if pos {
                (normal.iter().map(|v| -v).collect(), -offset)
            } else {
                (normal.clone(), offset)
            };
            facets.push(Facet {
                indices: idx.clone(),
                normal,
                offset,
            });
        }
        for &i in &idx {
            in_subset[i] = false;
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    let mut on_hull = vec![false; n];
    for f in &facets {
        for &i in &f.indices {
            on_hull[i] = true;
        }
    }
    let vertices = (0..n).filter(|&i| on_hull[i]).collect();
    Ok(Hull {
        facets,
        vertices,
        tolerance: tau,
    })
}

pub fn facet_count(cloud: &PointCloud) -> Result<usize> {
    hull(cloud).map(|h| h.facet_count())
}

/// Vertex count of a planar hull by Andrew's monotone chain.
pub fn facet_count_2d(cloud: &PointCloud) -> Result<usize> {
    if cloud.d != 2 {
        return Err(Error::InvalidArgs(format!("monotone chain needs d = 2, got {}", cloud.d)));
    }
    let n = cloud.len();
    if n < 3 {
        return Err(Error::InvalidArgs(format!("need at least 3 points, got {n}")));
    }
    let mut pts: Vec<[f64; 2]> = (0..n).map(|i| [cloud.coords[2 * i], cloud.coords[2 * i + 1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let s = cloud.scale();
    let tol = 1e-12 * s * s;
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut chain: Vec<[f64; 2]> = Vec::with_capacity(2 * n);
    let build = |iter: &mut dyn Iterator<Item = &[f64; 2]>, chain: &mut Vec<[f64; 2]>, floor: usize| -> Result<()> {
        for p in iter {
            while chain.len() >= floor + 2 {
                let c = cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p);
                if c.abs() <= tol {
                    return Err(Error::DegenerateInput("collinear points on the hull boundary".into()));
                }
                if c < 0.0 {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(*p);
        }
        Ok(())
    };
    build(&mut pts.iter(), &mut chain, 0)?;
    let lower = chain.len();
    chain.pop();
    build(&mut pts.iter().rev(), &mut chain, lower - 1)?;
    chain.pop();
    Ok(chain.len())
}
