//! Analytic and constructed velocity fields for tests, benchmarks and demos.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::fields::{GridMeta, VelocityField};
use crate::linalg::{self, Vec3};

/// Solid-body rotation about the z axis: `v = rate·(−y, x, 0)`.
pub fn rigid_rotation(rate: f64) -> impl Fn(Vec3) -> Vec3 + Sync + Send {
    move |p| [-rate * p[1], rate * p[0], 0.0]
}

/// Plane shear `v = (rate·y, 0, 0)`.
pub fn simple_shear(rate: f64) -> impl Fn(Vec3) -> Vec3 + Sync + Send {
    move |p| [rate * p[1], 0.0, 0.0]
}

/// A Lamb–Oseen vortex tube around a polyline centreline.
///
/// The azimuthal speed at distance `r` from the centreline is `Γ/(2πr)·(1 − exp(−r²/a²))`
/// with core radius `a`, tapered smoothly to zero between 3a and 5a so tubes stay local.
/// Past either end of the centreline the swirl fades as `exp(−s²/a²)` with the axial
/// overshoot `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwirlTube {
    pub centerline: Vec<Vec3>,
    pub core_radius: f64,
    pub circulation: f64,
}

impl SwirlTube {
    pub fn straight(a: Vec3, b: Vec3, core_radius: f64, circulation: f64) -> Self {
        SwirlTube { centerline: vec![a, b], core_radius, circulation }
    }

    /// No contribution beyond this distance from the centreline.
    pub fn reach(&self) -> f64 {
        5.0 * self.core_radius
    }

    fn azimuthal_speed(&self, r: f64) -> f64 {
        let a = self.core_radius;
        let taper = if r <= 3.0 * a {
            1.0
        } else if r >= 5.0 * a {
            0.0
        } else {
            (std::f64::consts::FRAC_PI_2 * (r - 3.0 * a) / (2.0 * a)).cos().powi(2)
        };
        self.circulation / (2.0 * std::f64::consts::PI * r) * (1.0 - (-(r * r) / (a * a)).exp()) * taper
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.centerline {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a] - self.reach());
                hi[a] = hi[a].max(p[a] + self.reach());
            }
        }
        (lo, hi)
    }

    pub fn velocity(&self, p: Vec3) -> Vec3 {
        let a = self.core_radius;
        let last = self.centerline.len() - 2;
        let mut best: Option<(f64, Vec3)> = None;
        for (s, w) in self.centerline.windows(2).enumerate() {
            let seg = linalg::sub(w[1], w[0]);
            let len = linalg::norm(seg);
            if len == 0.0 {
                continue;
            }
            let t = linalg::scale(seg, 1.0 / len);
            let d = linalg::sub(p, w[0]);
            let along = linalg::dot(d, t);
            let foot = linalg::add(w[0], linalg::scale(t, along.clamp(0.0, len)));
            let radial = linalg::sub(p, foot);
            let dist2 = linalg::dot(radial, radial);
            let radial = linalg::sub(radial, linalg::scale(t, linalg::dot(radial, t)));
            if best.is_none_or(|(b, _)| dist2 < b) {
                // Overshoot only counts beyond the open ends of the whole curve.
                let over = if s == 0 && along < 0.0 {
                    -along
                } else if s == last && along > len {
                    along - len
                } else {
                    0.0
                };
                let r = linalg::norm(radial);
                let v = if r == 0.0 {
                    [0.0; 3]
                } else {
                    let speed = self.azimuthal_speed(r) * (-(over * over) / (a * a)).exp();
                    linalg::scale(linalg::cross(t, radial), speed / r)
                };
                best = Some((dist2, v));
            }
        }
        match best {
            Some((d2, v)) if d2 <= self.reach() * self.reach() => v,
            _ => [0.0; 3],
        }
    }
}

/// A hairpin centreline: two inclined legs joined by a semicircular head.
///
/// The legs start at `x_foot` at height `z_foot`, at spanwise positions `y_center ± half_width`,
/// and rise to the neck at `(x_head, ·, z_neck)`. The head is a half circle of radius
/// `half_width` in the plane `x = x_head`, reaching `z_neck + half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairpinShape {
    pub x_foot: f64,
    pub x_head: f64,
    pub y_center: f64,
    pub half_width: f64,
    pub z_foot: f64,
    pub z_neck: f64,
}

impl HairpinShape {
    /// Centreline in (x, y, z) = (streamwise, spanwise, vertical) coordinates.
    pub fn centerline(&self, head_samples: usize) -> Vec<Vec3> {
        let w = self.half_width;
        let mut pts = vec![[self.x_foot, self.y_center - w, self.z_foot]];
        for k in 0..=head_samples {
            let th = std::f64::consts::PI * k as f64 / head_samples as f64;
            pts.push([self.x_head, self.y_center - w * th.cos(), self.z_neck + w * th.sin()]);
        }
        pts.push([self.x_foot, self.y_center + w, self.z_foot]);
        pts
    }
}

/// Sum of the tubes' velocities at every vertex, evaluated only near each tube.
pub fn tube_field(meta: &GridMeta, tubes: &[SwirlTube], exec: Execution) -> VelocityField {
    let bounds: Vec<(Vec3, Vec3)> = tubes.iter().map(SwirlTube::bounds).collect();
    VelocityField::from_fn(
        meta,
        |p| {
            let mut v = [0.0; 3];
            for (tube, (lo, hi)) in tubes.iter().zip(&bounds) {
                if (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]) {
                    v = linalg::add(v, tube.velocity(p));
                }
            }
            v
        },
        exec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swirl_core_is_solid_rotation() {
        let tube = SwirlTube::straight([0.0, 0.0, -50.0], [0.0, 0.0, 50.0], 2.0, 2.0 * std::f64::consts::PI);
        let v = tube.velocity([0.01, 0.0, 0.0]);
        // v ≈ Γ·r/(2πa²) in the +y direction near the axis.
        assert!((v[1] - 0.0025).abs() < 1e-6);
        assert!(v[0].abs() < 1e-15 && v[2].abs() < 1e-15);
        let far = tube.velocity([5.0, 0.0, 0.0])[1];
        assert!((far - (1.0 - (-25.0f64 / 4.0).exp()) / 5.0).abs() < 1e-12);
        assert_eq!(tube.velocity([10.5, 0.0, 0.0]), [0.0; 3]);
    }

    #[test]
    fn swirl_fades_past_the_ends() {
        let tube = SwirlTube::straight([0.0, 0.0, 0.0], [10.0, 0.0, 0.0], 2.0, 1.0);
        let inside = linalg::norm(tube.velocity([5.0, 1.0, 0.0]));
        let past = linalg::norm(tube.velocity([13.0, 1.0, 0.0]));
        assert!(past < 0.2 * inside);
    }

    #[test]
    fn hairpin_centreline_shape() {
        let h = HairpinShape { x_foot: 15.0, x_head: 48.0, y_center: 48.0, half_width: 12.0, z_foot: 8.0, z_neck: 30.0 };
        let c = h.centerline(32);
        assert_eq!(c.len(), 35);
        let top = c.iter().map(|p| p[2]).fold(f64::MIN, f64::max);
        assert!((top - 42.0).abs() < 1e-12);
        assert_eq!(c[0], [15.0, 36.0, 8.0]);
        assert_eq!(c[34], [15.0, 60.0, 8.0]);
    }
}
