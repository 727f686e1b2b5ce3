use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::fields::AxisRoles;
use crate::linalg::{self, Vec3};

/// Shape and orientation descriptors of a skeleton's main path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFeatures {
    /// Mean turning angle between consecutive segments, radians.
    pub curvature: f64,
    /// Mean |cos| between segments and the streamwise axis.
    pub streamwise: f64,
    pub spanwise: f64,
    pub vertical: f64,
    /// Polyline length, world units.
    pub length: f64,
    /// Diagonal of the PCA-aligned bounding box of the path points.
    pub bbox_diag: f64,
    /// `length / bbox_diag`; 1 for straight paths.
    pub bbox_ratio: f64,
    pub n_points: usize,
}

/// Diagonal of the bounding box aligned with the principal axes of `points`.
pub fn oriented_box_diagonal(points: &[Vec3]) -> f64 {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        mean = linalg::add(mean, *p);
    }
    let mean = linalg::scale(mean, 1.0 / n);
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = linalg::sub(*p, mean);
        for r in 0..3 {
            for c in 0..3 {
                cov[r][c] += d[r] * d[c] / n;
            }
        }
    }
    let (_, axes) = linalg::sym_eigen(&cov);
    let extent2: f64 = axes
        .iter()
        .map(|axis| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let t = linalg::dot(linalg::sub(*p, mean), *axis);
                (lo.min(t), hi.max(t))
            });
            (hi - lo).powi(2)
        })
        .sum();
    extent2.sqrt()
}

/// Curvature, direction, length and box-ratio features of an ordered polyline.
///
/// Consecutive duplicate points are merged first; `n_points` counts the distinct points.
pub fn geometric_features(points: &[Vec3], roles: &AxisRoles) -> Result<GeometricFeatures, GeometryError> {
    let mut pts: Vec<Vec3> = Vec::with_capacity(points.len());
    for p in points {
        if pts.last() != Some(p) {
            pts.push(*p);
        }
    }
    let n = pts.len();
    if n < 2 {
        return Err(GeometryError::TooFewPoints(n));
    }
    let segments: Vec<Vec3> = pts.windows(2).map(|w| linalg::sub(w[1], w[0])).collect();
    let length: f64 = segments.iter().map(|s| linalg::norm(*s)).sum();
    let units: Vec<Vec3> = segments.iter().map(|s| linalg::scale(*s, 1.0 / linalg::norm(*s))).collect();

    let curvature = if n < 3 {
        0.0
    } else {
        let total: f64 = units
            .windows(2)
            .map(|w| linalg::norm(linalg::cross(w[0], w[1])).atan2(linalg::dot(w[0], w[1])))
            .sum();
        total / (n - 2) as f64
    };
    let [e_t, e_p, e_v] = roles.unit_vectors();
    let mean_abs = |e: Vec3| units.iter().map(|u| linalg::dot(*u, e).abs()).sum::<f64>() / units.len() as f64;
    let bbox_diag = oriented_box_diagonal(&pts);
    Ok(GeometricFeatures {
        curvature,
        streamwise: mean_abs(e_t),
        spanwise: mean_abs(e_p),
        vertical: mean_abs(e_v),
        length,
        bbox_diag,
        bbox_ratio: length / bbox_diag,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn straight_streamwise_path() {
        let pts: Vec<Vec3> = (0..10).map(|i| [i as f64 * 0.7, 2.0, -1.0]).collect();
        let f = geometric_features(&pts, &AxisRoles::default()).unwrap();
        assert_eq!(f.curvature, 0.0);
        assert!((f.streamwise - 1.0).abs() < 1e-12);
        assert!(f.spanwise.abs() < 1e-12 && f.vertical.abs() < 1e-12);
        assert!((f.bbox_ratio - 1.0).abs() < 1e-9);
        assert!((f.length - 6.3).abs() < 1e-12);
    }

    #[test]
    fn right_angle() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let f = geometric_features(&pts, &AxisRoles::default()).unwrap();
        assert!((f.curvature - PI / 2.0).abs() < 1e-12);
        assert!((f.streamwise - 0.5).abs() < 1e-12);
        assert!((f.spanwise - 0.5).abs() < 1e-12);
        assert_eq!(f.vertical, 0.0);
    }

    #[test]
    fn semicircle_box_ratio() {
        let r = 3.0;
        let pts: Vec<Vec3> = (0..=2000)
            .map(|i| {
                let t = PI * i as f64 / 2000.0;
                [r * t.cos(), r * t.sin(), 0.0]
            })
            .collect();
        let f = geometric_features(&pts, &AxisRoles::default()).unwrap();
        assert!((f.length - PI * r).abs() < 1e-5);
        assert!((f.bbox_diag - 5f64.sqrt() * r).abs() < 1e-3);
        assert!((f.bbox_ratio - PI / 5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn too_few_points() {
        assert_eq!(
            geometric_features(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]], &AxisRoles::default()),
            Err(GeometryError::TooFewPoints(1))
        );
    }
}
