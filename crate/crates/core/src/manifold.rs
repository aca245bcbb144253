//! Synthetic style vectors on a circle embedded in R^n, with closed-form
//! oracles for checking a learned plane.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DomainChart, LabeledStyleDataset};
use crate::error::{Error, Result};
use crate::linalg::{axpy, check_dim, dot, norm};
use crate::plane::{gram_schmidt, RotationPlane, StyleVector};

pub const DEFAULT_JITTER: f64 = 0.05;

const POWER_ITERATIONS: usize = 1000;
const POWER_TOLERANCE: f64 = 1e-12;

/// Fully resolved description of a circular fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub dim: usize,
    pub radius: f64,
    pub center: Vec<f64>,
    pub true_mu: Vec<f64>,
    pub true_nu: Vec<f64>,
    pub noise_sigma: f64,
    /// Half-width of the uniform angular jitter around each domain angle.
    pub jitter: f64,
    pub samples_per_domain: usize,
    pub seed: u64,
}

/// Partial fixture description as read from a config file. Missing vectors
/// are drawn from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldConfig {
    pub dim: usize,
    pub radius: f64,
    /// Length of the default center, which is orthogonal to the true plane.
    pub center_offset: f64,
    pub center: Option<Vec<f64>>,
    pub true_mu: Option<Vec<f64>>,
    pub true_nu: Option<Vec<f64>>,
    pub noise_sigma: f64,
    pub jitter: f64,
    pub samples_per_domain: usize,
    pub seed: u64,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            dim: 64,
            radius: 1.0,
            center_offset: 0.5,
            center: None,
            true_mu: None,
            true_nu: None,
            noise_sigma: 0.01,
            jitter: DEFAULT_JITTER,
            samples_per_domain: 500,
            seed: 42,
        }
    }
}

impl ManifoldConfig {
    pub fn resolve(&self) -> Result<ManifoldSpec> {
        if self.dim < 3 {
            return Err(Error::invalid("dim", "must be at least 3"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_f1e1d);
        let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..self.dim).map(|_| StandardNormal.sample(rng)).collect()
        };
        let true_mu = match &self.true_mu {
            Some(v) => v.clone(),
            None => gaussian(&mut rng),
        };
        let true_nu = match &self.true_nu {
            Some(v) => v.clone(),
            None => gaussian(&mut rng),
        };
        check_dim(self.dim, true_mu.len())
            .map_err(|_| Error::invalid("true_mu", "wrong length"))?;
        check_dim(self.dim, true_nu.len())
            .map_err(|_| Error::invalid("true_nu", "wrong length"))?;
        let center = match &self.center {
            Some(c) => c.clone(),
            None => {
                let plane = gram_schmidt(&true_mu, &true_nu)?;
                let mut dir = plane.residual(&gaussian(&mut rng))?.into_vec();
                let len = norm(&dir);
                dir.iter_mut().for_each(|v| *v *= self.center_offset / len);
                dir
            }
        };
        let spec = ManifoldSpec {
            dim: self.dim,
            radius: self.radius,
            center,
            true_mu,
            true_nu,
            noise_sigma: self.noise_sigma,
            jitter: self.jitter,
            samples_per_domain: self.samples_per_domain,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ManifoldSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid("radius", "must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma", "must be non-negative"));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::invalid("jitter", "must be non-negative"));
        }
        if self.samples_per_domain == 0 {
            return Err(Error::invalid("samples_per_domain", "must be positive"));
        }
        check_dim(self.dim, self.center.len())
            .map_err(|_| Error::invalid("center", "wrong length"))?;
        gram_schmidt(&self.true_mu, &self.true_nu)?;
        Ok(())
    }

    pub fn true_plane(&self) -> Result<RotationPlane> {
        gram_schmidt(&self.true_mu, &self.true_nu)
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            true_mu: self.true_mu.clone(),
            true_nu: self.true_nu.clone(),
            center: self.center.clone(),
            radius: self.radius,
        }
    }
}

/// Ground-truth file: `{"true_mu", "true_nu", "center", "radius"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub true_mu: Vec<f64>,
    pub true_nu: Vec<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl GroundTruth {
    pub fn plane(&self) -> Result<RotationPlane> {
        gram_schmidt(&self.true_mu, &self.true_nu)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

/// Draw `samples_per_domain` points per chart domain:
/// `center + radius (cos(phi + j) m* + sin(phi + j) n*) + noise`.
pub fn sample_dataset(spec: &ManifoldSpec, chart: &DomainChart) -> Result<LabeledStyleDataset> {
    spec.validate()?;
    let plane = spec.true_plane()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
    let mut data = LabeledStyleDataset::new(spec.dim);
    for (d, &phi) in chart.angles().iter().enumerate() {
        for _ in 0..spec.samples_per_domain {
            let jitter = if spec.jitter > 0.0 {
                rng.random_range(-spec.jitter..spec.jitter)
            } else {
                0.0
            };
            let (sin, cos) = (phi + jitter).sin_cos();
            let mut v = spec.center.clone();
            axpy(spec.radius * cos, plane.m(), &mut v);
            axpy(spec.radius * sin, plane.n(), &mut v);
            if spec.noise_sigma > 0.0 {
                v.iter_mut().for_each(|x| *x += noise.sample(&mut rng));
            }
            data.push(StyleVector::new(v)?, d)?;
        }
    }
    Ok(data)
}

/// Plane spanned by the top two principal directions of `data`, found by
/// power iteration with deflation on the sample covariance.
pub fn pca_plane_oracle(data: &LabeledStyleDataset) -> Result<RotationPlane> {
    if data.len() < 3 {
        return Err(Error::invalid("data", "need at least 3 samples"));
    }
    let first = data.domain(0);
    if data.samples().all(|(_, d)| d == first) {
        return Err(Error::invalid(
            "data",
            "need samples from at least 2 domains",
        ));
    }
    let n = data.dim();
    let all: Vec<usize> = (0..data.len()).collect();
    let mean = data.mean(&all);
    let rows: Vec<Vec<f64>> = data
        .samples()
        .map(|(v, _)| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![0.0; n * n];
    for r in &rows {
        for i in 0..n {
            let ri = r[i];
            for j in i..n {
                cov[i * n + j] += ri * r[j];
            }
        }
    }
    let inv = 1.0 / rows.len() as f64;
    for i in 0..n {
        for j in i..n {
            let v = cov[i * n + j] * inv;
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    let trace: f64 = (0..n).map(|i| cov[i * n + i]).sum();
    let floor = 1e-12 * trace.max(f64::MIN_POSITIVE);
    if trace <= 0.0 {
        return Err(Error::RankDeficient);
    }

    let start1 = longest(&rows).ok_or(Error::RankDeficient)?;
    let (v1, l1) = power_iteration(&cov, n, start1);
    if l1 <= floor {
        return Err(Error::RankDeficient);
    }
    for i in 0..n {
        for j in 0..n {
            cov[i * n + j] -= l1 * v1[i] * v1[j];
        }
    }
    let deflated: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            axpy(-dot(&r, &v1), &v1, &mut r);
            r
        })
        .collect();
    let start2 = longest(&deflated).ok_or(Error::RankDeficient)?;
    let (v2, l2) = power_iteration(&cov, n, start2);
    if l2 <= floor {
        return Err(Error::RankDeficient);
    }
    gram_schmidt(&v1, &v2).map_err(|_| Error::RankDeficient)
}

fn longest(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let (best, len) = rows
        .iter()
        .map(|r| (r, norm(r)))
        .fold(
            (None, 0.0),
            |acc, (r, l)| if l > acc.1 { (Some(r), l) } else { acc },
        );
    best.filter(|_| len > 0.0).cloned()
}

fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

/// Dominant eigenpair of a symmetric PSD matrix. Stops when the eigen
/// residual `|Av - lambda v|` falls below `tol * lambda` or the iteration
/// budget runs out.
fn power_iteration(a: &[f64], n: usize, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut v = start;
    let len = norm(&v);
    v.iter_mut().for_each(|x| *x /= len);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let av = mat_vec(a, n, &v);
        lambda = dot(&v, &av);
        let mut res = av.clone();
        axpy(-lambda, &v, &mut res);
        let len = norm(&av);
        if len == 0.0 {
            return (v, 0.0);
        }
        v = av.into_iter().map(|x| x / len).collect();
        if norm(&res) <= POWER_TOLERANCE * lambda.abs() {
            break;
        }
    }
    (v, lambda)
}

/// Singular values `(largest, smallest)` of the two-column matrix `[x y]`,
/// via a single one-sided Jacobi rotation.
fn two_column_singular_values(x: &[f64], y: &[f64]) -> (f64, f64) {
    let alpha = dot(x, x);
    let beta = dot(y, y);
    let gamma = dot(x, y);
    let (sx, sy) = if gamma == 0.0 {
        (alpha.sqrt(), beta.sqrt())
    } else {
        let zeta = (beta - alpha) / (2.0 * gamma);
        let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = c * t;
        let rx: Vec<f64> = x.iter().zip(y).map(|(a, b)| c * a - s * b).collect();
        let ry: Vec<f64> = x.iter().zip(y).map(|(a, b)| s * a + c * b).collect();
        (norm(&rx), norm(&ry))
    };
    if sx >= sy {
        (sx, sy)
    } else {
        (sy, sx)
    }
}

fn principal_angles_directed(a: &RotationPlane, b: &RotationPlane) -> (f64, f64) {
    // cosines: singular values of [a_i . b_j]
    let c_col1 = [dot(a.m(), b.m()), dot(a.n(), b.m())];
    let c_col2 = [dot(a.m(), b.n()), dot(a.n(), b.n())];
    let (cos_big, cos_small) = two_column_singular_values(&c_col1, &c_col2);

    // sines: singular values of (I - P_a) [b.m b.n]
    let off = |v: &[f64]| {
        let mut r = v.to_vec();
        axpy(-dot(v, a.m()), a.m(), &mut r);
        axpy(-dot(v, a.n()), a.n(), &mut r);
        r
    };
    let (sin_big, sin_small) = two_column_singular_values(&off(b.m()), &off(b.n()));

    let angle = |cos: f64, sin: f64| {
        if cos * cos >= 0.5 {
            sin.clamp(0.0, 1.0).asin()
        } else {
            cos.clamp(0.0, 1.0).acos()
        }
    };
    (angle(cos_big, sin_small), angle(cos_small, sin_big))
}

/// Principal angles `(theta1 <= theta2)` between two planes, in radians.
/// Small angles come from sines and large ones from cosines so both ends of
/// [0, pi/2] keep full precision. Exactly symmetric in its arguments.
pub fn principal_angles(a: &RotationPlane, b: &RotationPlane) -> Result<(f64, f64)> {
    check_dim(a.dim(), b.dim())?;
    let (ab1, ab2) = principal_angles_directed(a, b);
    let (ba1, ba2) = principal_angles_directed(b, a);
    Ok((0.5 * (ab1 + ba1), 0.5 * (ab2 + ba2)))
}

/// In-plane polar coordinates `(magnitude, angle)` of `v - center`.
pub fn in_plane_polar(plane: &RotationPlane, center: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    check_dim(plane.dim(), center.len())?;
    let rel: Vec<f64> = v.iter().zip(center).map(|(x, c)| x - c).collect();
    let (a, b) = plane.coords(&rel)?;
    Ok((a.hypot(b), b.atan2(a)))
}
