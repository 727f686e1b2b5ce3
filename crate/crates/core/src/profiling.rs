//! Per-vortex feature vectors: volume-averaged physical quantities plus skeleton geometry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldSet, GridMeta};
use crate::geometry::GeometricFeatures;
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("no profiles to summarise")]
    Empty,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
}

/// The 19 profile features, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Lambda2,
    LambdaCi,
    Q,
    Delta,
    Divergence,
    OmegaYPrime,
    Size,
    Vorticity,
    Enstrophy,
    Velocity,
    Acceleration,
    Jacobian,
    Curvature,
    HairpinCurvature,
    Streamwise,
    Spanwise,
    Vertical,
    Length,
    BboxRatio,
}

impl Feature {
    pub const ALL: [Feature; 19] = [
        Feature::Lambda2,
        Feature::LambdaCi,
        Feature::Q,
        Feature::Delta,
        Feature::Divergence,
        Feature::OmegaYPrime,
        Feature::Size,
        Feature::Vorticity,
        Feature::Enstrophy,
        Feature::Velocity,
        Feature::Acceleration,
        Feature::Jacobian,
        Feature::Curvature,
        Feature::HairpinCurvature,
        Feature::Streamwise,
        Feature::Spanwise,
        Feature::Vertical,
        Feature::Length,
        Feature::BboxRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Lambda2 => "lambda2",
            Feature::LambdaCi => "lambda_ci",
            Feature::Q => "q",
            Feature::Delta => "delta",
            Feature::Divergence => "divergence",
            Feature::OmegaYPrime => "omega_y_prime",
            Feature::Size => "size",
            Feature::Vorticity => "vorticity",
            Feature::Enstrophy => "enstrophy",
            Feature::Velocity => "velocity",
            Feature::Acceleration => "acceleration",
            Feature::Jacobian => "jacobian",
            Feature::Curvature => "curvature",
            Feature::HairpinCurvature => "hairpin_curvature",
            Feature::Streamwise => "streamwise",
            Feature::Spanwise => "spanwise",
            Feature::Vertical => "vertical",
            Feature::Length => "length",
            Feature::BboxRatio => "bbox_ratio",
        }
    }

    /// Physical features are defined for every region; the rest need a skeleton.
    pub fn is_physical(self) -> bool {
        (self as usize) <= Feature::Jacobian as usize
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = ProfileError;

    /// Canonical names, case-insensitive, plus the usual symbols (`l2`, `Oyf`, `S_t`, `rho`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        if let Some(f) = Feature::ALL.iter().find(|f| f.name() == key) {
            return Ok(*f);
        }
        let f = match key.as_str() {
            "l2" | "lambda_2" | "λ₂" => Feature::Lambda2,
            "lci" | "lambdaci" | "λ_ci" => Feature::LambdaCi,
            "div" => Feature::Divergence,
            "oyf" | "omega_y" | "ω_y′" => Feature::OmegaYPrime,
            "voxels" => Feature::Size,
            "omega" | "ω" => Feature::Vorticity,
            "xi" | "ξ" => Feature::Enstrophy,
            "v" | "speed" => Feature::Velocity,
            "a" | "accel" => Feature::Acceleration,
            "j" => Feature::Jacobian,
            "c" => Feature::Curvature,
            "c_h" | "ch" | "c_h_tilde" | "cht" => Feature::HairpinCurvature,
            "s_t" | "st" => Feature::Streamwise,
            "s_p" | "sp" => Feature::Spanwise,
            "s_v" | "sv" => Feature::Vertical,
            "l" => Feature::Length,
            "rho" | "ρ" => Feature::BboxRatio,
            _ => return Err(ProfileError::UnknownFeature(s.to_string())),
        };
        Ok(f)
    }
}

/// Volume averages over a region's vertices, plus its cell count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalFeatures {
    pub lambda2: f64,
    pub lambda_ci: f64,
    pub q: f64,
    pub delta: f64,
    pub divergence: f64,
    pub omega_y_prime: f64,
    pub size: f64,
    pub vorticity: f64,
    pub enstrophy: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jacobian: f64,
}

impl PhysicalFeatures {
    pub fn get(&self, f: Feature) -> Option<f64> {
        Some(match f {
            Feature::Lambda2 => self.lambda2,
            Feature::LambdaCi => self.lambda_ci,
            Feature::Q => self.q,
            Feature::Delta => self.delta,
            Feature::Divergence => self.divergence,
            Feature::OmegaYPrime => self.omega_y_prime,
            Feature::Size => self.size,
            Feature::Vorticity => self.vorticity,
            Feature::Enstrophy => self.enstrophy,
            Feature::Velocity => self.velocity,
            Feature::Acceleration => self.acceleration,
            Feature::Jacobian => self.jacobian,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexProfile {
    pub vortex_id: usize,
    #[serde(flatten)]
    pub physical: PhysicalFeatures,
    pub curvature: f64,
    pub hairpin_curvature: f64,
    pub streamwise: f64,
    pub spanwise: f64,
    pub vertical: f64,
    pub length: f64,
    pub bbox_ratio: f64,
}

impl VortexProfile {
    pub fn get(&self, f: Feature) -> f64 {
        match f {
            Feature::Curvature => self.curvature,
            Feature::HairpinCurvature => self.hairpin_curvature,
            Feature::Streamwise => self.streamwise,
            Feature::Spanwise => self.spanwise,
            Feature::Vertical => self.vertical,
            Feature::Length => self.length,
            Feature::BboxRatio => self.bbox_ratio,
            physical => self.physical.get(physical).expect("physical feature"),
        }
    }

    pub fn values(&self) -> [f64; 19] {
        Feature::ALL.map(|f| self.get(f))
    }
}

/// Distinct vertices of the given cells, ascending.
pub fn region_vertices(meta: &GridMeta, cells: &[usize]) -> Vec<usize> {
    let cd = meta.cell_dims();
    let mut out = Vec::with_capacity(cells.len() * 2);
    for &c in cells {
        let [i, j, k] = [c % cd[0], (c / cd[0]) % cd[1], c / (cd[0] * cd[1])];
        for corner in 0..8 {
            out.push(meta.index([i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1)]));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Vertex-averaged physical features of a cell set; vectors and tensors enter as magnitudes.
pub fn physical_features(fields: &FieldSet, cells: &[usize]) -> PhysicalFeatures {
    let verts = region_vertices(&fields.meta, cells);
    let n = verts.len() as f64;
    let mean = |f: &dyn Fn(usize) -> f64| verts.iter().map(|&v| f(v)).sum::<f64>() / n;
    PhysicalFeatures {
        lambda2: mean(&|v| fields.lambda2[v]),
        lambda_ci: mean(&|v| fields.lambda_ci[v]),
        q: mean(&|v| fields.q[v]),
        delta: mean(&|v| fields.delta[v]),
        divergence: mean(&|v| fields.divergence[v]),
        omega_y_prime: mean(&|v| fields.omega_y_prime[v]),
        size: cells.len() as f64,
        vorticity: mean(&|v| linalg::norm(fields.vorticity[v])),
        enstrophy: mean(&|v| fields.enstrophy[v]),
        velocity: mean(&|v| fields.speed[v]),
        acceleration: mean(&|v| fields.accel_mag[v]),
        jacobian: mean(&|v| fields.jacobian_norm[v]),
    }
}

pub fn build_profile(
    vortex_id: usize,
    cells: &[usize],
    fields: &FieldSet,
    geometry: &GeometricFeatures,
    c_h_tilde: f64,
) -> VortexProfile {
    VortexProfile {
        vortex_id,
        physical: physical_features(fields, cells),
        curvature: geometry.curvature,
        hairpin_curvature: c_h_tilde,
        streamwise: geometry.streamwise,
        spanwise: geometry.spanwise,
        vertical: geometry.vertical,
        length: geometry.length,
        bbox_ratio: geometry.bbox_ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: Feature,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub argmin: usize,
    pub argmax: usize,
}

/// Per-feature summary over all profiles; extreme ties resolve to the lowest vortex id.
pub fn profile_statistics(profiles: &[VortexProfile]) -> Result<Vec<FeatureStats>, ProfileError> {
    if profiles.is_empty() {
        return Err(ProfileError::Empty);
    }
    let n = profiles.len() as f64;
    Ok(Feature::ALL
        .iter()
        .map(|&feature| {
            let first = &profiles[0];
            let mut s = FeatureStats {
                feature,
                min: first.get(feature),
                max: first.get(feature),
                mean: 0.0,
                stddev: 0.0,
                argmin: first.vortex_id,
                argmax: first.vortex_id,
            };
            let mut sum = 0.0;
            for p in profiles {
                let x = p.get(feature);
                sum += x;
                if x < s.min || (x == s.min && p.vortex_id < s.argmin) {
                    s.min = x;
                    s.argmin = p.vortex_id;
                }
                if x > s.max || (x == s.max && p.vortex_id < s.argmax) {
                    s.max = x;
                    s.argmax = p.vortex_id;
                }
            }
            s.mean = sum / n;
            s.stddev = (profiles.iter().map(|p| (p.get(feature) - s.mean).powi(2)).sum::<f64>() / n).sqrt();
            s
        })
        .collect())
}
