//! Analytic derivatives of the rotation and of the style-alignment loss.
//!
//! The loss over a batch of pairs `(src, tgt, theta)` is
//! `mean |rotate(src, theta) - tgt|^2`. Gradients flow through the rotation
//! into the basis `(m, n)` and then through Gram-Schmidt into the raw
//! parameters `(mu, nu)`:
//!
//! ```text
//! dm/dmu   = (I - m m^T) / |mu|
//! n'       = nu - (nu.m) m,   n = n' / |n'|
//! dn/dn'   = (I - n n^T) / |n'|
//! ```

use crate::data::LabeledStyleDataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, check_dim, dot};
use crate::plane::{gram_schmidt, RotationPlane, StyleVector};

/// Gradient with respect to the raw plane parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGradient {
    pub d_mu: Vec<f64>,
    pub d_nu: Vec<f64>,
}

impl PlaneGradient {
    pub fn zeros(dim: usize) -> Self {
        PlaneGradient {
            d_mu: vec![0.0; dim],
            d_nu: vec![0.0; dim],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.d_mu
            .iter()
            .chain(&self.d_nu)
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.d_mu.iter().chain(&self.d_nu).all(|v| v.is_finite())
    }
}

/// A training pair: rotate sample `src` by `theta` to approximate sample `tgt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub src: usize,
    pub tgt: usize,
    pub theta: f64,
}

/// Derivative of `rotate(s, w, theta)` with respect to `theta`.
pub fn d_rotate_d_theta(s: &[f64], w: &RotationPlane, theta: f64) -> Result<StyleVector> {
    let (a, b) = w.coords(s)?;
    let (sin, cos) = theta.sin_cos();
    let mut out = vec![0.0; s.len()];
    axpy(-sin * a - cos * b, w.m(), &mut out);
    axpy(cos * a - sin * b, w.n(), &mut out);
    Ok(StyleVector::from_vec_unchecked(out))
}

/// Accumulates `d loss / d m` and `d loss / d n` over pairs, treating the
/// basis vectors as independent. [`finish`](Self::finish) chains the result
/// through Gram-Schmidt.
struct BasisAccumulator<'a> {
    plane: &'a RotationPlane,
    g_m: Vec<f64>,
    g_n: Vec<f64>,
    err: Vec<f64>,
}

impl<'a> BasisAccumulator<'a> {
    fn new(plane: &'a RotationPlane) -> Self {
        let dim = plane.dim();
        BasisAccumulator {
            plane,
            g_m: vec![0.0; dim],
            g_n: vec![0.0; dim],
            err: vec![0.0; dim],
        }
    }

    /// Adds `weight * d|rot(s) - t|^2` and returns `(|rot(s) - t|^2, d/dtheta)`.
    fn add(&mut self, s: &[f64], t: &[f64], theta: f64, weight: f64) -> (f64, f64) {
        let (m, n) = (self.plane.m(), self.plane.n());
        let a = dot(s, m);
        let b = dot(s, n);
        let (sin, cos) = theta.sin_cos();
        let c1 = (cos - 1.0) * a - sin * b;
        let c2 = sin * a + (cos - 1.0) * b;

        // e = rot(s) - t
        for ((e, (si, ti)), (mi, ni)) in self
            .err
            .iter_mut()
            .zip(s.iter().zip(t))
            .zip(m.iter().zip(n))
        {
            *e = si - ti + c1 * mi + c2 * ni;
        }
        let e = &self.err;
        let loss = dot(e, e);
        let em = dot(e, m);
        let en = dot(e, n);

        let w2 = 2.0 * weight;
        axpy(w2 * c1, e, &mut self.g_m);
        axpy(w2 * ((cos - 1.0) * em + sin * en), s, &mut self.g_m);
        axpy(w2 * c2, e, &mut self.g_n);
        axpy(w2 * (-sin * em + (cos - 1.0) * en), s, &mut self.g_n);

        let d_theta = 2.0 * ((-sin * a - cos * b) * em + (cos * a - sin * b) * en);
        (loss, d_theta)
    }

    fn finish(self) -> PlaneGradient {
        chain_through_gram_schmidt(self.plane, self.g_m, self.g_n)
    }
}

/// Map gradients on the orthonormal basis to gradients on `(mu, nu)`.
fn chain_through_gram_schmidt(
    w: &RotationPlane,
    mut g_m: Vec<f64>,
    g_n: Vec<f64>,
) -> PlaneGradient {
    let (m, n, nu) = (w.m(), w.n(), w.nu());

    // through n = n' / |n'|
    let mut g_np = g_n;
    axpy(-dot(n, &g_np), n, &mut g_np);
    let inv = 1.0 / w.nu_perp_norm();
    g_np.iter_mut().for_each(|v| *v *= inv);

    // through n' = nu - (nu.m) m
    let mut d_nu = g_np.clone();
    axpy(-dot(m, &g_np), m, &mut d_nu);
    axpy(-dot(m, &g_np), nu, &mut g_m);
    axpy(-dot(nu, m), &g_np, &mut g_m);

    // through m = mu / |mu|
    let mut d_mu = g_m;
    axpy(-dot(m, &d_mu), m, &mut d_mu);
    let inv = 1.0 / w.mu_norm();
    d_mu.iter_mut().for_each(|v| *v *= inv);

    PlaneGradient { d_mu, d_nu }
}

/// Mean squared alignment loss over `pairs` and its gradient with respect to
/// the raw plane parameters. Summation runs sequentially in pair order, so
/// results are bitwise reproducible.
pub fn loss_gradient(
    data: &LabeledStyleDataset,
    pairs: &[Pair],
    w: &RotationPlane,
) -> Result<(PlaneGradient, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_dim(w.dim(), data.dim())?;
    let weight = 1.0 / pairs.len() as f64;
    let mut acc = BasisAccumulator::new(w);
    let mut loss = 0.0;
    for p in pairs {
        let (l, _) = acc.add(data.vector(p.src), data.vector(p.tgt), p.theta, weight);
        loss += l;
    }
    Ok((acc.finish(), loss * weight))
}

/// Loss only, same reduction as [`loss_gradient`].
pub fn batch_loss(data: &LabeledStyleDataset, pairs: &[Pair], w: &RotationPlane) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_dim(w.dim(), data.dim())?;
    let mut loss = 0.0;
    for p in pairs {
        let r = w.rotate(data.vector(p.src), p.theta)?;
        loss += crate::linalg::dist_sq(&r, data.vector(p.tgt));
    }
    Ok(loss / pairs.len() as f64)
}

/// Loss and all three gradients for a single pair `|rot(s) - t|^2`.
pub fn pair_loss_gradient(
    s: &[f64],
    t: &[f64],
    w: &RotationPlane,
    theta: f64,
) -> Result<(f64, f64, PlaneGradient)> {
    check_dim(w.dim(), s.len())?;
    check_dim(w.dim(), t.len())?;
    let mut acc = BasisAccumulator::new(w);
    let (loss, d_theta) = acc.add(s, t, theta, 1.0);
    Ok((loss, d_theta, acc.finish()))
}

/// Floor on the denominator of the relative error. Entries whose analytic
/// and numeric values are both below this are compared absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-3;

/// Relative error with a floor: `|a - b| / max(|a|, |b|, REL_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockError {
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

impl BlockError {
    fn worst(entries: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut worst = BlockError {
            analytic: 0.0,
            numeric: 0.0,
            rel_error: 0.0,
        };
        for (a, n) in entries {
            // NaN must surface as a failure
            let e = match relative_error(a, n) {
                e if e.is_nan() => f64::INFINITY,
                e => e,
            };
            if e >= worst.rel_error {
                worst = BlockError {
                    analytic: a,
                    numeric: n,
                    rel_error: e,
                };
            }
        }
        worst
    }
}

/// Result of comparing analytic gradients with central differences. Each
/// block holds its worst entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub theta: BlockError,
    pub mu: BlockError,
    pub nu: BlockError,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.theta
            .rel_error
            .max(self.mu.rel_error)
            .max(self.nu.rel_error)
    }

    pub fn blocks(&self) -> [(&'static str, &BlockError); 3] {
        [("theta", &self.theta), ("mu", &self.mu), ("nu", &self.nu)]
    }
}

fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Check the gradients of `|rotate(s, w, theta) - target|^2` with respect
/// to `theta`, `mu` and `nu` against central finite differences
/// (step `1e-6 * max(1, |x|)` per coordinate).
/// The plane is given by its raw parameters; degenerate ones fail with
/// [`Error::DegeneratePlane`].
pub fn finite_diff_check(
    s: &[f64],
    target: &[f64],
    mu: &[f64],
    nu: &[f64],
    theta: f64,
) -> Result<GradCheckReport> {
    finite_diff_check_with(s, target, mu, nu, theta, |_| {})
}

/// [`finite_diff_check`] with a hook that may alter the analytic gradient
/// before comparison. Used to confirm that the check detects a wrong
/// gradient.
pub fn finite_diff_check_with(
    s: &[f64],
    target: &[f64],
    mu: &[f64],
    nu: &[f64],
    theta: f64,
    tamper: impl FnOnce(&mut (f64, PlaneGradient)),
) -> Result<GradCheckReport> {
    let w = gram_schmidt(mu, nu)?;
    let (_, d_theta, grad) = pair_loss_gradient(s, target, &w, theta)?;
    let mut analytic = (d_theta, grad);
    tamper(&mut analytic);
    let (d_theta, grad) = analytic;

    let loss = |mu: &[f64], nu: &[f64], th: f64| -> Result<f64> {
        let p = gram_schmidt(mu, nu)?;
        let r = p.rotate(s, th)?;
        Ok(crate::linalg::dist_sq(&r, target))
    };

    let h = fd_step(theta);
    let num_theta =
        (loss(w.mu(), w.nu(), theta + h)? - loss(w.mu(), w.nu(), theta - h)?) / (2.0 * h);

    let mut num_mu = Vec::with_capacity(w.dim());
    let mut mu = w.mu().to_vec();
    for i in 0..w.dim() {
        let x = mu[i];
        let h = fd_step(x);
        mu[i] = x + h;
        let up = loss(&mu, w.nu(), theta)?;
        mu[i] = x - h;
        let down = loss(&mu, w.nu(), theta)?;
        mu[i] = x;
        num_mu.push((up - down) / (2.0 * h));
    }

    let mut num_nu = Vec::with_capacity(w.dim());
    let mut nu = w.nu().to_vec();
    for i in 0..w.dim() {
        let x = nu[i];
        let h = fd_step(x);
        nu[i] = x + h;
        let up = loss(w.mu(), &nu, theta)?;
        nu[i] = x - h;
        let down = loss(w.mu(), &nu, theta)?;
        nu[i] = x;
        num_nu.push((up - down) / (2.0 * h));
    }

    Ok(GradCheckReport {
        theta: BlockError::worst(std::iter::once((d_theta, num_theta))),
        mu: BlockError::worst(grad.d_mu.iter().copied().zip(num_mu)),
        nu: BlockError::worst(grad.d_nu.iter().copied().zip(num_nu)),
    })
}
