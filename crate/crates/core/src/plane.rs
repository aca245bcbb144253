//! Rotation of n-dimensional vectors inside a 2-D plane.
//!
//! A plane is parameterized by two raw vectors `(mu, nu)`; its orthonormal
//! basis `(m, n)` comes from Gram-Schmidt. Rotating a vector by `theta` turns
//! its projection onto the plane and leaves the orthogonal residual alone:
//!
//! ```text
//! a = s.m,  b = s.n
//! rot(s) = s + ((cos t - 1) a - sin t b) m + (sin t a + (cos t - 1) b) n
//! ```

use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, check_dim, dot, norm, scaled};

/// Relative tolerance used when a plane file's stored basis is checked
/// against the basis recomputed from its raw parameters.
pub const PLANE_FILE_TOLERANCE: f64 = 1e-9;

/// A style code: finite real vector of dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleVector(Vec<f64>);

impl StyleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(
                "style vector",
                format!("dimension must be at least 2, got {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "style vector",
                format!("entry {i} is not finite"),
            ));
        }
        Ok(StyleVector(values))
    }

    /// Skips validation. Callers guarantee finiteness and length.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        StyleVector(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for StyleVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<StyleVector> for Vec<f64> {
    fn from(v: StyleVector) -> Self {
        v.0
    }
}

/// Learnable rotation plane: raw parameters plus their orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationPlane {
    mu: Vec<f64>,
    nu: Vec<f64>,
    m: Vec<f64>,
    n: Vec<f64>,
    // Cached for the Gram-Schmidt Jacobians.
    mu_norm: f64,
    nu_perp_norm: f64,
}

/// Orthonormalize `(mu, nu)` into a rotation plane.
///
/// Fails with [`Error::DegeneratePlane`] when `mu` is numerically zero or
/// `nu` is numerically parallel to it. The threshold is
/// `1e-10 * max(1, |input|)`.
pub fn gram_schmidt(mu: &[f64], nu: &[f64]) -> Result<RotationPlane> {
    if mu.len() < 2 {
        return Err(Error::invalid(
            "plane",
            format!("dimension must be at least 2, got {}", mu.len()),
        ));
    }
    check_dim(mu.len(), nu.len())?;
    if mu.iter().chain(nu).any(|v| !v.is_finite()) {
        return Err(Error::invalid("plane", "parameters must be finite"));
    }

    let mu_norm = norm(mu);
    if mu_norm <= 1e-10 * mu_norm.max(1.0) {
        return Err(Error::DegeneratePlane("mu is numerically zero"));
    }
    let m = scaled(1.0 / mu_norm, mu);

    let mut n = nu.to_vec();
    axpy(-dot(nu, &m), &m, &mut n);
    let nu_perp_norm = norm(&n);
    if nu_perp_norm <= 1e-10 * norm(nu).max(1.0) {
        return Err(Error::DegeneratePlane("nu is numerically parallel to mu"));
    }
    n.iter_mut().for_each(|v| *v /= nu_perp_norm);

    Ok(RotationPlane {
        mu: mu.to_vec(),
        nu: nu.to_vec(),
        m,
        n,
        mu_norm,
        nu_perp_norm,
    })
}

impl RotationPlane {
    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// First basis vector, `mu / |mu|`.
    pub fn m(&self) -> &[f64] {
        &self.m
    }

    /// Second basis vector, the normalized part of `nu` orthogonal to `m`.
    pub fn n(&self) -> &[f64] {
        &self.n
    }

    pub(crate) fn mu_norm(&self) -> f64 {
        self.mu_norm
    }

    pub(crate) fn nu_perp_norm(&self) -> f64 {
        self.nu_perp_norm
    }

    /// In-plane coordinates `(s.m, s.n)`.
    pub fn coords(&self, s: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), s.len())?;
        Ok((dot(s, &self.m), dot(s, &self.n)))
    }

    pub fn project(&self, s: &[f64]) -> Result<StyleVector> {
        let (a, b) = self.coords(s)?;
        let mut p = scaled(a, &self.m);
        axpy(b, &self.n, &mut p);
        Ok(StyleVector(p))
    }

    pub fn residual(&self, s: &[f64]) -> Result<StyleVector> {
        let (a, b) = self.coords(s)?;
        let mut r = s.to_vec();
        axpy(-a, &self.m, &mut r);
        axpy(-b, &self.n, &mut r);
        Ok(StyleVector(r))
    }

    /// Rotate `s` by `theta` radians within the plane. `theta` is used as
    /// given; it is not reduced modulo 2*pi.
    pub fn rotate(&self, s: &[f64], theta: f64) -> Result<StyleVector> {
        let (a, b) = self.coords(s)?;
        let (sin, cos) = theta.sin_cos();
        let mut out = s.to_vec();
        axpy((cos - 1.0) * a - sin * b, &self.m, &mut out);
        axpy(sin * a + (cos - 1.0) * b, &self.n, &mut out);
        Ok(StyleVector(out))
    }

    pub fn to_file(&self) -> PlaneFile {
        PlaneFile {
            dim: self.dim(),
            mu: self.mu.clone(),
            nu: self.nu.clone(),
            m: self.m.clone(),
            n: self.n.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plane serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlaneFile = serde_json::from_str(text).map_err(|e| Error::json("<plane>", e))?;
        file.into_plane()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PlaneFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        file.into_plane()
    }
}

/// Free-function forms of the plane operations.
pub fn project(s: &[f64], w: &RotationPlane) -> Result<StyleVector> {
    w.project(s)
}

pub fn residual(s: &[f64], w: &RotationPlane) -> Result<StyleVector> {
    w.residual(s)
}

pub fn rotate(s: &[f64], w: &RotationPlane, theta: f64) -> Result<StyleVector> {
    w.rotate(s, theta)
}

/// On-disk plane: `{"dim", "mu", "nu", "m", "n"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneFile {
    pub dim: usize,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
}

impl PlaneFile {
    /// Rebuild the plane from `mu`, `nu` and reject the file if the stored
    /// basis disagrees with the recomputed one.
    pub fn into_plane(self) -> Result<RotationPlane> {
        for (name, v) in [
            ("mu", &self.mu),
            ("nu", &self.nu),
            ("m", &self.m),
            ("n", &self.n),
        ] {
            if v.len() != self.dim {
                return Err(Error::invalid(
                    name,
                    format!("length {} does not match dim {}", v.len(), self.dim),
                ));
            }
        }
        let plane = gram_schmidt(&self.mu, &self.nu)?;
        for (name, stored, computed) in [("m", &self.m, &plane.m), ("n", &self.n, &plane.n)] {
            let worst = stored
                .iter()
                .zip(computed)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if worst.is_nan() || worst > PLANE_FILE_TOLERANCE {
                return Err(Error::invalid(
                    name,
                    format!("stored basis differs from Gram-Schmidt recomputation by {worst:e}"),
                ));
            }
        }
        Ok(plane)
    }
}
