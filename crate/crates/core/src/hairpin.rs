//! Hairpin-vortex candidate screening.
//!
//! Three conjunctive tests per vortex: no dominant axis direction, some positive
//! (depth-weighted) spanwise vorticity fluctuation along the skeleton, and a large enough
//! length-rewarded, streamwise-penalised curvature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fields::GridMeta;
use crate::geometry::{GeometricFeatures, Skeleton};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HairpinError {
    #[error("skeleton of vortex {0} has an empty main path")]
    EmptyPath(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairpinParams {
    /// Upper bound on each of S_t, S_p, S_v.
    pub t1: f64,
    /// Adjusted curvature must exceed this.
    pub c_h_min: f64,
    /// Minimum skeleton length as a fraction of the domain diagonal.
    pub min_len_frac: f64,
}

impl Default for HairpinParams {
    fn default() -> Self {
        HairpinParams { t1: 0.99, c_h_min: 1.0, min_len_frac: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairpinScores {
    pub vortex_id: usize,
    pub rms_oy: f64,
    pub c_h: f64,
    pub c_h_tilde: f64,
    pub passed_step1: bool,
    pub passed_step2: bool,
    pub passed_step3: bool,
    pub is_candidate: bool,
}

pub fn step1_direction_filter(f: &GeometricFeatures, t1: f64) -> bool {
    f.streamwise <= t1 && f.spanwise <= t1 && f.vertical <= t1
}

/// `1 − (z − z_min)/(z_max − z_min)`, clamped to [0, 1].
pub fn depth_weight(z: f64, z_min: f64, z_max: f64) -> f64 {
    if z_max <= z_min {
        return 1.0;
    }
    (1.0 - (z - z_min) / (z_max - z_min)).clamp(0.0, 1.0)
}

/// RMS of depth-weighted ω_y′ samples with negative values damped tenfold.
///
/// `samples` are `(vertical coordinate, ω_y′)` pairs.
pub fn rms_weighted(samples: &[(f64, f64)], z_min: f64, z_max: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .map(|&(z, w)| {
            let w = w * depth_weight(z, z_min, z_max);
            let w = if w >= 0.0 { w } else { 0.1 * w };
            w * w
        })
        .sum();
    (sum / samples.len() as f64).sqrt()
}

/// [`rms_weighted`] over a skeleton's main path, with the domain's vertical extent.
pub fn rms_omega_y(vortex_id: usize, skeleton: &Skeleton, meta: &GridMeta) -> Result<f64, HairpinError> {
    if skeleton.main_path.is_empty() {
        return Err(HairpinError::EmptyPath(vortex_id));
    }
    let v = meta.axis_roles.vertical;
    let (z_min, z_max) = meta.vertical_bounds();
    let samples: Vec<(f64, f64)> = skeleton
        .main_path
        .iter()
        .map(|&i| (skeleton.nodes[i].position[v], skeleton.nodes[i].omega_y_prime))
        .collect();
    Ok(rms_weighted(&samples, z_min, z_max))
}

/// `C · (1 − S_t) · S_p · S_v`.
pub fn hairpin_curvature(f: &GeometricFeatures) -> f64 {
    f.curvature * (1.0 - f.streamwise) * f.spanwise * f.vertical
}

/// `C_h · ρ · L / n^{1/4}` with `n` the number of main-path points.
pub fn adjusted_hairpin_curvature(f: &GeometricFeatures, c_h: f64) -> f64 {
    c_h * f.bbox_ratio * f.length / (f.n_points as f64).powf(0.25)
}

pub fn score_vortex(
    vortex_id: usize,
    features: &GeometricFeatures,
    skeleton: &Skeleton,
    meta: &GridMeta,
    params: &HairpinParams,
) -> Result<HairpinScores, HairpinError> {
    let rms_oy = rms_omega_y(vortex_id, skeleton, meta)?;
    let c_h = hairpin_curvature(features);
    let c_h_tilde = adjusted_hairpin_curvature(features, c_h);
    let passed_step1 = step1_direction_filter(features, params.t1);
    let passed_step2 = rms_oy > 0.0;
    let passed_step3 = c_h_tilde > params.c_h_min && features.length >= params.min_len_frac * meta.domain_diagonal();
    Ok(HairpinScores {
        vortex_id,
        rms_oy,
        c_h,
        c_h_tilde,
        passed_step1,
        passed_step2,
        passed_step3,
        is_candidate: passed_step1 && passed_step2 && passed_step3,
    })
}

pub struct HairpinInput<'a> {
    pub vortex_id: usize,
    pub features: &'a GeometricFeatures,
    pub skeleton: &'a Skeleton,
}

/// Scores every vortex (candidates and rejects alike), in input order.
pub fn select_candidates(
    inputs: &[HairpinInput<'_>],
    meta: &GridMeta,
    params: &HairpinParams,
    exec: Execution,
) -> Result<Vec<HairpinScores>, HairpinError> {
    exec.map_slice(inputs, |i| score_vortex(i.vortex_id, i.features, i.skeleton, meta, params))
        .into_iter()
        .collect()
}
