//! Rotation paths versus straight-line interpolation between style vectors.

use std::fmt::Write as _;

use crate::data::{fmt_f64, DomainChart, LabeledStyleDataset};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, wrap_angle};
use crate::manifold::{in_plane_polar, GroundTruth};
use crate::plane::{RotationPlane, StyleVector};

/// Angular tolerance for counting a domain as reached.
pub const REACH_ANGLE: f64 = 0.1;
/// Relative magnitude tolerance for counting a domain as reached.
pub const REACH_RADIUS_FRACTION: f64 = 0.1;

/// Coordinates on the circle: a plane, the circle's center and radius, and
/// the offset between in-plane angles and chart angles.
#[derive(Debug, Clone)]
pub struct ManifoldFrame {
    pub plane: RotationPlane,
    pub center: Vec<f64>,
    pub radius: f64,
    pub angle_offset: f64,
    pub chart: DomainChart,
}

impl ManifoldFrame {
    pub fn new(
        plane: RotationPlane,
        center: Vec<f64>,
        radius: f64,
        chart: DomainChart,
    ) -> Result<Self> {
        check_dim(plane.dim(), center.len())?;
        Ok(ManifoldFrame {
            plane,
            center,
            radius,
            angle_offset: 0.0,
            chart,
        })
    }

    /// Frame for a plane fitted to `data`. The in-plane center is the origin
    /// (rotation is about the origin), so the center is the residual of the
    /// data mean; the radius is the mean in-plane magnitude. `truth`
    /// overrides both when known. The angle offset is the circular mean of
    /// sample angle minus chart angle.
    pub fn calibrate(
        plane: RotationPlane,
        data: &LabeledStyleDataset,
        chart: &DomainChart,
        truth: Option<&GroundTruth>,
    ) -> Result<Self> {
        check_dim(plane.dim(), data.dim())?;
        data.require_all_domains(chart)?;
        let (center, radius) = match truth {
            Some(t) => (t.center.clone(), t.radius),
            None => {
                let all: Vec<usize> = (0..data.len()).collect();
                let center = plane.residual(&data.mean(&all))?.into_vec();
                let mut total = 0.0;
                for (v, _) in data.samples() {
                    total += in_plane_polar(&plane, &center, v)?.0;
                }
                (center, total / data.len() as f64)
            }
        };
        let (mut sx, mut sy) = (0.0, 0.0);
        for (v, d) in data.samples() {
            let (_, ang) = in_plane_polar(&plane, &center, v)?;
            let delta = ang - chart.angle(d);
            sx += delta.cos();
            sy += delta.sin();
        }
        Ok(ManifoldFrame {
            plane,
            center,
            radius,
            angle_offset: sy.atan2(sx),
            chart: chart.clone(),
        })
    }

    /// `(in-plane magnitude, chart angle)` of a point.
    pub fn polar(&self, v: &[f64]) -> Result<(f64, f64)> {
        let (mag, ang) = in_plane_polar(&self.plane, &self.center, v)?;
        Ok((mag, wrap_angle(ang - self.angle_offset)))
    }
}

/// Geometry of a sampled path. All lists have one entry per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub alphas: Vec<f64>,
    pub points: Vec<StyleVector>,
    pub norms: Vec<f64>,
    pub in_plane_magnitudes: Vec<f64>,
    pub in_plane_angles: Vec<f64>,
    /// `|in-plane magnitude - radius|`
    pub manifold_distance: Vec<f64>,
    pub nearest_domain: Vec<usize>,
}

impl PathReport {
    fn from_points(
        alphas: Vec<f64>,
        points: Vec<StyleVector>,
        frame: &ManifoldFrame,
    ) -> Result<Self> {
        let mut report = PathReport {
            norms: Vec::with_capacity(points.len()),
            in_plane_magnitudes: Vec::with_capacity(points.len()),
            in_plane_angles: Vec::with_capacity(points.len()),
            manifold_distance: Vec::with_capacity(points.len()),
            nearest_domain: Vec::with_capacity(points.len()),
            alphas,
            points: Vec::new(),
        };
        for p in &points {
            let (mag, ang) = frame.polar(p)?;
            report.norms.push(p.norm());
            report.in_plane_magnitudes.push(mag);
            report.in_plane_angles.push(ang);
            report.manifold_distance.push((mag - frame.radius).abs());
            report.nearest_domain.push(frame.chart.nearest(ang));
        }
        report.points = points;
        Ok(report)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `|norm_i - norm_0| / norm_0` along the path.
    pub fn max_norm_deviation(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms
            .iter()
            .map(|n| (n - n0).abs() / n0.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// CSV with header `alpha,norm,in_plane_magnitude,manifold_distance,nearest_domain`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("alpha,norm,in_plane_magnitude,manifold_distance,nearest_domain\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(self.alphas[i]),
                fmt_f64(self.norms[i]),
                fmt_f64(self.in_plane_magnitudes[i]),
                fmt_f64(self.manifold_distance[i]),
                self.nearest_domain[i]
            );
        }
        out
    }
}

fn alphas(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid("steps", "must be at least 2"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| i as f64 / last).collect())
}

/// Points `(1 - alpha) s1 + alpha s2`, `alpha = i / (steps - 1)`. The
/// endpoints are reproduced exactly.
pub fn linear_path(
    s1: &[f64],
    s2: &[f64],
    steps: usize,
    frame: &ManifoldFrame,
) -> Result<PathReport> {
    check_dim(s1.len(), s2.len())?;
    check_dim(frame.plane.dim(), s1.len())?;
    let alphas = alphas(steps)?;
    let last = steps - 1;
    let points = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let v = match i {
                0 => s1.to_vec(),
                i if i == last => s2.to_vec(),
                _ => s1
                    .iter()
                    .zip(s2)
                    .map(|(x, y)| (1.0 - a) * x + a * y)
                    .collect(),
            };
            StyleVector::from_vec_unchecked(v)
        })
        .collect();
    PathReport::from_points(alphas, points, frame)
}

/// Points `rotate(s, w, alpha * theta_total)`, `alpha = i / (steps - 1)`.
pub fn rotation_path(
    s: &[f64],
    w: &RotationPlane,
    theta_total: f64,
    steps: usize,
    frame: &ManifoldFrame,
) -> Result<PathReport> {
    let alphas = alphas(steps)?;
    let points = alphas
        .iter()
        .map(|a| w.rotate(s, a * theta_total))
        .collect::<Result<Vec<_>>>()?;
    PathReport::from_points(alphas, points, frame)
}

/// For every chart domain, whether some path point sits within
/// [`REACH_ANGLE`] of its angle with in-plane magnitude within
/// [`REACH_RADIUS_FRACTION`] of the radius.
pub fn reachability(path: &PathReport, frame: &ManifoldFrame) -> Vec<(usize, bool)> {
    let tol = REACH_RADIUS_FRACTION * frame.radius;
    (0..frame.chart.len())
        .map(|d| {
            let phi = frame.chart.angle(d);
            let reached = path
                .in_plane_angles
                .iter()
                .zip(&path.in_plane_magnitudes)
                .any(|(ang, mag)| {
                    wrap_angle(ang - phi).abs() <= REACH_ANGLE && (mag - frame.radius).abs() <= tol
                });
            (d, reached)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::gram_schmidt;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn frame3() -> ManifoldFrame {
        let w = gram_schmidt(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        ManifoldFrame::new(w, vec![0.0, 0.0, 0.0], 1.0, DomainChart::seasons()).unwrap()
    }

    fn frame2() -> ManifoldFrame {
        let w = gram_schmidt(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        ManifoldFrame::new(w, vec![0.0, 0.0], 1.0, DomainChart::seasons()).unwrap()
    }

    #[test]
    fn linear_path_examples() {
        let f = frame2();
        let p = linear_path(&[1.0, 0.0], &[0.0, 1.0], 3, &f).unwrap();
        assert_eq!(p.alphas, vec![0.0, 0.5, 1.0]);
        assert_eq!(&*p.points[1], &[0.5, 0.5]);
        assert!((p.norms[1] - 0.5f64.sqrt()).abs() < 1e-15);

        let same = linear_path(&[0.3, 0.4], &[0.3, 0.4], 4, &f).unwrap();
        assert!(same.points.iter().all(|v| **v == [0.3, 0.4]));

        assert!(linear_path(&[1.0, 0.0], &[0.0, 1.0], 1, &f).is_err());
        assert!(matches!(
            linear_path(&[1.0, 0.0], &[0.0, 1.0, 2.0], 3, &f),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn antipodal_midpoint_collapses_to_residual() {
        let f = frame3();
        let p = linear_path(&[2.0, 0.0, 0.7], &[-2.0, 0.0, 0.7], 5, &f).unwrap();
        assert!(p.in_plane_magnitudes[2].abs() < 1e-15);
        assert!((p.norms[2] - 0.7).abs() < 1e-15);
        // norm dips then rises for equal-norm endpoints
        assert!(p.norms[0] > p.norms[1] && p.norms[1] > p.norms[2]);
        assert!(p.norms[2] < p.norms[3] && p.norms[3] < p.norms[4]);
    }

    #[test]
    fn rotation_path_closes_and_keeps_norm() {
        let f = frame3();
        let s = [0.6, -0.8, 2.0];
        let p = rotation_path(&s, &f.plane, TAU, 5, &f).unwrap();
        for (a, b) in p.points[0].iter().zip(p.points[4].iter()) {
            assert!((a - b).abs() <= 1e-9 * 2.2);
        }
        assert!(p.max_norm_deviation() <= 1e-9);
        assert_eq!(p.points.len(), p.norms.len());

        let q = rotation_path(&[1.0, 0.0, 0.0], &f.plane, PI, 3, &f).unwrap();
        assert!((q.in_plane_angles[1] - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(q.nearest_domain, vec![0, 1, 2]);
    }

    #[test]
    fn single_point_reaches_its_domain() {
        let f = frame3();
        let p = PathReport::from_points(
            vec![0.0],
            vec![StyleVector::new(vec![0.0, 1.0, 3.0]).unwrap()],
            &f,
        )
        .unwrap();
        let reached: Vec<bool> = reachability(&p, &f).into_iter().map(|(_, r)| r).collect();
        assert_eq!(reached, vec![false, true, false, false]);
    }

    #[test]
    fn csv_layout() {
        let f = frame2();
        let p = linear_path(&[1.0, 0.0], &[0.0, 1.0], 2, &f).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "alpha,norm,in_plane_magnitude,manifold_distance,nearest_domain"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with(",1"));
    }
}
