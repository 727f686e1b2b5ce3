//! The analysis stages, in order: fields → extract → split → profile → hairpin → cluster.
//!
//! Each stage is a pure function of its inputs and the parameters, so the stage outputs can
//! be cached and resumed (see [`crate::workdir`]) without changing the final bundle.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vortex_core::clustering::{cluster_profiles, ClusterError, ClusterRequest, ClusterResult, ClusterScope, Preset};
use vortex_core::fields::{FieldError, FieldSet, GridMeta, VelocityField};
use vortex_core::geometry::{
    extract_boundary_surface, geometric_features, laplacian_smooth, skeletonize, GeometricFeatures, GeometryError,
    Skeleton, SkeletonParams, SurfaceMesh,
};
use vortex_core::hairpin::{adjusted_hairpin_curvature, hairpin_curvature, select_candidates, HairpinInput, HairpinParams, HairpinScores};
use vortex_core::profiling::{build_profile, physical_features, PhysicalFeatures, VortexProfile};
use vortex_core::regions::{build_tree, extract_all_regions, simplify_region, CellGrid, SimplifyOutcome, SimplifyParams, SplitParams, VortexRegion, VortexTree};
use vortex_core::thresholding::{
    expand_histogram, refine_histogram, ExpandParams, Lambda2Steps, RefineParams, RefinedThreshold, ThresholdError,
};
use vortex_core::Execution;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{stage}: {message}")]
    Empty { stage: &'static str, message: String },
    #[error("{stage} failed: {message}")]
    Internal { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) => 2,
            PipelineError::Empty { .. } => 3,
            PipelineError::Internal { .. } => 4,
        }
    }

    pub(crate) fn internal(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Internal { stage, message: e.to_string() }
    }
}

impl From<FieldError> for PipelineError {
    fn from(e: FieldError) -> Self {
        PipelineError::Validation(e.to_string())
    }
}

/// Optional clustering step run as part of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSettings {
    pub preset: Preset,
    pub perplexity: f64,
    pub eps: Option<f64>,
    pub min_pts: usize,
    pub seed: u64,
    pub scope: ClusterScope,
}

impl ClusterSettings {
    pub fn request(&self) -> ClusterRequest {
        ClusterRequest {
            perplexity: self.perplexity,
            rng_seed: self.seed,
            eps: self.eps,
            min_pts: self.min_pts,
            scope: self.scope,
            ..ClusterRequest::new(&self.preset.attributes())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub refine: RefineParams,
    pub expand: ExpandParams,
    /// Regions smaller than this fraction of all cells are discarded as noise.
    pub noise_frac: f64,
    pub split: SplitParams,
    /// Run the simplification passes on each region before meshing and skeletonisation.
    #[serde(default = "yes")]
    pub simplify_regions: bool,
    pub simplify: SimplifyParams,
    pub smoothing_iterations: usize,
    pub smoothing_factor: f64,
    pub skeleton: SkeletonParams,
    pub hairpin: HairpinParams,
    pub cluster: Option<ClusterSettings>,
}

fn yes() -> bool {
    true
}

impl PipelineParams {
    fn simplified(&self, grid: &CellGrid, region: &VortexRegion) -> SimplifyOutcome {
        if self.simplify_regions {
            simplify_region(grid, region, &self.simplify)
        } else {
            SimplifyOutcome { region: region.clone(), emptied: false }
        }
    }
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            refine: RefineParams::default(),
            expand: ExpandParams::default(),
            noise_frac: 0.0001,
            split: SplitParams::default(),
            simplify_regions: true,
            simplify: SimplifyParams::default(),
            smoothing_iterations: 10,
            smoothing_factor: 0.5,
            skeleton: SkeletonParams::default(),
            hairpin: HairpinParams::default(),
            cluster: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractOutput {
    pub threshold: RefinedThreshold,
    pub regions: Vec<VortexRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutput {
    pub steps: Lambda2Steps,
    pub tree: VortexTree,
}

/// Geometry and features of one leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafGeometry {
    pub id: usize,
    /// The simplification pass would have removed every cell; the raw region was used.
    pub simplify_emptied: bool,
    pub skeleton: Skeleton,
    pub features: GeometricFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOutput {
    /// Physical averages for every tree node, by id.
    pub physical: Vec<PhysicalFeatures>,
    /// Smoothed boundary surface for every tree node, by id.
    pub meshes: Vec<SurfaceMesh>,
    pub leaves: Vec<LeafGeometry>,
    pub profiles: Vec<VortexProfile>,
}

fn timed<T>(stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    log::info!("{stage}: {:.3} s", start.elapsed().as_secs_f64());
    out
}

pub fn run_fields(meta: &GridMeta, velocity: &VelocityField, exec: Execution) -> Result<FieldSet, PipelineError> {
    timed("fields", || Ok(FieldSet::compute(meta, velocity, exec)?))
}

pub fn run_extract(fields: &FieldSet, params: &PipelineParams, exec: Execution) -> Result<ExtractOutput, PipelineError> {
    timed("extract", || {
        let threshold = refine_histogram(&fields.lambda2, &params.refine, exec).map_err(|e| match e {
            ThresholdError::NoVorticalValues => PipelineError::Empty { stage: "extract", message: e.to_string() },
            ThresholdError::InvalidParameter(m) => PipelineError::Validation(m),
            ThresholdError::DegenerateRange { .. } => PipelineError::Validation(e.to_string()),
            other => PipelineError::internal("extract", other),
        })?;
        log::info!(
            "initial threshold {} after {} iterations ({:?})",
            threshold.value,
            threshold.iterations,
            threshold.stop
        );
        let grid = CellGrid::lambda2(fields, exec);
        let regions = extract_all_regions(&grid, threshold.value, params.noise_frac, exec);
        if regions.is_empty() {
            return Err(PipelineError::Empty {
                stage: "extract",
                message: format!("no vortical region survives the threshold {}", threshold.value),
            });
        }
        log::info!("{} regions", regions.len());
        Ok(ExtractOutput { threshold, regions })
    })
}

pub fn run_split(
    fields: &FieldSet,
    extract: &ExtractOutput,
    params: &PipelineParams,
    exec: Execution,
) -> Result<SplitOutput, PipelineError> {
    timed("split", || {
        let steps = match expand_histogram(&fields.lambda2, extract.threshold.value, &params.expand, exec) {
            Ok(s) => s.steps,
            Err(ThresholdError::EmptySchedule(v)) => {
                log::warn!("nothing below {v}: no splitting steps");
                Lambda2Steps::new(Vec::new())
            }
            Err(ThresholdError::InvalidParameter(m)) => return Err(PipelineError::Validation(m)),
            Err(e) => return Err(PipelineError::internal("split", e)),
        };
        let grid = CellGrid::lambda2(fields, exec);
        let tree = build_tree(&grid, &extract.regions, &steps, &params.split, exec);
        log::info!("{} tree nodes over {} steps", tree.nodes.len(), steps.len());
        Ok(SplitOutput { steps, tree })
    })
}

fn leaf_geometry(
    grid: &CellGrid,
    fields: &FieldSet,
    region: &VortexRegion,
    params: &PipelineParams,
) -> Result<(LeafGeometry, f64), GeometryError> {
    let simplified = params.simplified(grid, region);
    let skeleton = skeletonize(grid, &simplified.region, &fields.meta, &fields.omega_y_prime, &params.skeleton)?;
    let features = geometric_features(&skeleton.main_path_points(), &fields.meta.axis_roles)?;
    let c_h_tilde = adjusted_hairpin_curvature(&features, hairpin_curvature(&features));
    Ok((LeafGeometry { id: region.id, simplify_emptied: simplified.emptied, skeleton, features }, c_h_tilde))
}

pub fn run_profile(
    fields: &FieldSet,
    split: &SplitOutput,
    params: &PipelineParams,
    exec: Execution,
) -> Result<ProfileOutput, PipelineError> {
    timed("profile", || {
        let grid = CellGrid::lambda2(fields, exec);
        let nodes = &split.tree.nodes;
        let physical = exec.map_slice(nodes, |n| physical_features(fields, &n.region.cells));
        let meshes = exec.map_slice(nodes, |n| {
            let simplified = params.simplified(&grid, &n.region);
            let mesh = extract_boundary_surface(&grid, &simplified.region);
            laplacian_smooth(&mesh, params.smoothing_iterations, params.smoothing_factor)
        });
        let leaf_nodes: Vec<_> = nodes.iter().filter(|n| n.is_leaf()).collect();
        let geoms = exec.map_slice(&leaf_nodes, |n| leaf_geometry(&grid, fields, &n.region, params));
        let mut leaves = Vec::with_capacity(geoms.len());
        let mut profiles = Vec::with_capacity(geoms.len());
        for (node, g) in leaf_nodes.iter().zip(geoms) {
            let (geom, c_h_tilde) = g.map_err(|e| PipelineError::internal("profile", format!("vortex {}: {e}", node.id)))?;
            let mut profile = build_profile(node.id, &node.region.cells, fields, &geom.features, c_h_tilde);
            profile.physical = physical[node.id];
            profiles.push(profile);
            leaves.push(geom);
        }
        Ok(ProfileOutput { physical, meshes, leaves, profiles })
    })
}

pub fn run_hairpin(
    meta: &GridMeta,
    profile: &ProfileOutput,
    params: &PipelineParams,
    exec: Execution,
) -> Result<Vec<HairpinScores>, PipelineError> {
    timed("hairpin", || {
        let inputs: Vec<HairpinInput<'_>> = profile
            .leaves
            .iter()
            .map(|l| HairpinInput { vortex_id: l.id, features: &l.features, skeleton: &l.skeleton })
            .collect();
        let scores = select_candidates(&inputs, meta, &params.hairpin, exec).map_err(|e| PipelineError::internal("hairpin", e))?;
        log::info!("{} hairpin candidates", scores.iter().filter(|s| s.is_candidate).count());
        Ok(scores)
    })
}

/// Profiles in the request's scope, in id order.
pub fn scoped_profiles(profiles: &[VortexProfile], scores: &[HairpinScores], scope: ClusterScope) -> Vec<VortexProfile> {
    match scope {
        ClusterScope::All => profiles.to_vec(),
        ClusterScope::HairpinCandidates => profiles
            .iter()
            .filter(|p| scores.iter().any(|s| s.vortex_id == p.vortex_id && s.is_candidate))
            .copied()
            .collect(),
    }
}

pub fn run_cluster(
    profiles: &[VortexProfile],
    scores: &[HairpinScores],
    request: &ClusterRequest,
    exec: Execution,
) -> Result<ClusterResult, ClusterError> {
    timed("cluster", || cluster_profiles(&scoped_profiles(profiles, scores, request.scope), request, exec))
}

/// Runs the configured clustering; a request the data cannot satisfy (too few vortices for
/// the perplexity, say) is logged and skipped rather than failing the whole pipeline.
pub fn cluster_or_skip(
    profiles: &[VortexProfile],
    scores: &[HairpinScores],
    settings: &ClusterSettings,
    exec: Execution,
) -> Option<ClusterResult> {
    match run_cluster(profiles, scores, &settings.request(), exec) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("clustering skipped: {e}");
            None
        }
    }
}

/// Every stage's output, as produced by a full in-memory run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub fields: FieldSet,
    pub extract: ExtractOutput,
    pub split: SplitOutput,
    pub profile: ProfileOutput,
    pub hairpin: Vec<HairpinScores>,
    pub clusters: Option<ClusterResult>,
}

pub fn run_all(
    meta: &GridMeta,
    velocity: &VelocityField,
    params: &PipelineParams,
    exec: Execution,
) -> Result<PipelineOutput, PipelineError> {
    let fields = run_fields(meta, velocity, exec)?;
    let extract = run_extract(&fields, params, exec)?;
    let split = run_split(&fields, &extract, params, exec)?;
    let profile = run_profile(&fields, &split, params, exec)?;
    let hairpin = run_hairpin(meta, &profile, params, exec)?;
    let clusters = params.cluster.as_ref().and_then(|c| cluster_or_skip(&profile.profiles, &hairpin, c, exec));
    Ok(PipelineOutput { fields, extract, split, profile, hairpin, clusters })
}
