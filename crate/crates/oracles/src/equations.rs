//! Hairpin scores written directly from their defining formulas.

/// Depth-weighted RMS of ω_y′ samples: each sample is scaled by t = 1 − (z − z_min)/(z_max − z_min)
/// (clamped to [0, 1]); negative products are damped to a tenth.
pub fn weighted_rms(z: &[f64], omega: &[f64], z_min: f64, z_max: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..z.len() {
        let mut t = 1.0 - (z[k] - z_min) / (z_max - z_min);
        if t < 0.0 {
            t = 0.0;
        }
        if t > 1.0 {
            t = 1.0;
        }
        let mut w = omega[k] * t;
        if w < 0.0 {
            w /= 10.0;
        }
        acc += w * w;
    }
    (acc / z.len() as f64).sqrt()
}

pub fn hairpin_curvature(c: f64, s_t: f64, s_p: f64, s_v: f64) -> f64 {
    c * (1.0 - s_t) * s_p * s_v
}

pub fn adjusted(c_h: f64, rho: f64, length: f64, n: usize) -> f64 {
    c_h * rho * length / (n as f64).sqrt().sqrt()
}

/// Polyline features: mean turning angle, mean |cos| to each axis, length.
pub fn polyline(points: &[[f64; 3]]) -> (f64, [f64; 3], f64) {
    let seg: Vec<[f64; 3]> = points.windows(2).map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]]).collect();
    let len = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let length: f64 = seg.iter().map(len).sum();
    let mut dirs = [0.0; 3];
    for s in &seg {
        for a in 0..3 {
            dirs[a] += (s[a] / len(s)).abs() / seg.len() as f64;
        }
    }
    let mut turn = 0.0;
    for w in seg.windows(2) {
        let cos = (w[0][0] * w[1][0] + w[0][1] * w[1][1] + w[0][2] * w[1][2]) / (len(&w[0]) * len(&w[1]));
        turn += cos.clamp(-1.0, 1.0).acos();
    }
    let c = if points.len() > 2 { turn / (points.len() - 2) as f64 } else { 0.0 };
    (c, dirs, length)
}

/// Diagonal of the bounding box aligned with the covariance eigenvectors of `points`.
pub fn principal_box_diagonal(points: &[[f64; 3]]) -> f64 {
    use nalgebra::{Matrix3, Vector3};
    let pts: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
    let mean = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let cov = pts.iter().map(|p| (p - mean) * (p - mean).transpose()).sum::<Matrix3<f64>>() / pts.len() as f64;
    let eig = cov.symmetric_eigen();
    (0..3)
        .map(|k| {
            let axis = eig.eigenvectors.column(k);
            let proj: Vec<f64> = pts.iter().map(|p| (p - mean).dot(&axis)).collect();
            let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}
