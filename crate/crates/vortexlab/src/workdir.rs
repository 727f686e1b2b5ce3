//! Stage caches for running the pipeline one subcommand at a time.
//!
//! Each stage writes `{stage}.json` holding the dataset digest, the full parameter set it
//! ran with and its output. A stage refuses upstream caches whose digest or relevant
//! parameters differ from its own, so a staged run always ends in the same bundle as `all`.
//!
//! The derived fields are not cached: they are a cheap, deterministic function of the
//! velocity file, and a full double-precision cache would be many times its size. The
//! `fields` stage records the dataset and a summary; later stages recompute the fields.

use std::fs;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vortex_core::clustering::ClusterResult;
use vortex_core::fields::{FieldSet, GridMeta, VelocityField};
use vortex_core::hairpin::HairpinScores;
use vortex_core::Execution;

use crate::bundle::BundleParts;
use crate::io::{load_field, DatasetDescriptor};
use crate::pipeline::{ExtractOutput, PipelineError, PipelineParams, ProfileOutput, SplitOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Fields,
    Extract,
    Split,
    Profile,
    Hairpin,
    Cluster,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Fields => "fields",
            Stage::Extract => "extract",
            Stage::Split => "split",
            Stage::Profile => "profile",
            Stage::Hairpin => "hairpin",
            Stage::Cluster => "cluster",
        }
    }
}

/// The parameters a stage's output depends on: its own and all upstream ones.
pub fn stage_key(params: &PipelineParams, stage: Stage) -> serde_json::Value {
    let mut key = serde_json::Map::new();
    let mut put = |name: &str, v: serde_json::Value| {
        key.insert(name.to_string(), v);
    };
    if stage >= Stage::Extract {
        put("refine", j(&params.refine));
        put("noise_frac", j(&params.noise_frac));
    }
    if stage >= Stage::Split {
        put("expand", j(&params.expand));
        put("split", j(&params.split));
    }
    if stage >= Stage::Profile {
        put("simplify", j(&params.simplify));
        put("smoothing_iterations", j(&params.smoothing_iterations));
        put("smoothing_factor", j(&params.smoothing_factor));
        put("skeleton", j(&params.skeleton));
    }
    if stage >= Stage::Hairpin {
        put("hairpin", j(&params.hairpin));
    }
    if stage >= Stage::Cluster {
        put("cluster", j(&params.cluster));
    }
    serde_json::Value::Object(key)
}

fn j<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("parameters serialise")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cached<T> {
    pub digest: String,
    pub params: PipelineParams,
    pub output: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub descriptor: DatasetDescriptor,
    pub meta: GridMeta,
    pub lambda2_min: f64,
    pub lambda2_max: f64,
    pub negative_lambda2: usize,
}

pub struct WorkDir {
    pub root: PathBuf,
}

fn stage_err(stage: Stage, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::internal(stage.name(), e)
}

impl WorkDir {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| PipelineError::Validation(format!("{}: {e}", root.display())))?;
        Ok(WorkDir { root })
    }

    fn path(&self, stage: Stage) -> PathBuf {
        self.root.join(format!("{}.json", stage.name()))
    }

    pub fn has(&self, stage: Stage) -> bool {
        self.path(stage).exists()
    }

    pub fn save<T: Serialize>(&self, stage: Stage, digest: &str, params: &PipelineParams, output: &T) -> Result<(), PipelineError> {
        #[derive(Serialize)]
        struct Out<'a, T> {
            digest: &'a str,
            params: &'a PipelineParams,
            output: &'a T,
        }
        let text = serde_json::to_string(&Out { digest, params, output }).map_err(|e| stage_err(stage, e))?;
        fs::write(self.path(stage), text).map_err(|e| stage_err(stage, e))
    }

    fn read<T: DeserializeOwned>(&self, stage: Stage) -> Result<Cached<T>, PipelineError> {
        let path = self.path(stage);
        let text = fs::read_to_string(&path).map_err(|_| {
            PipelineError::Validation(format!("missing {}: run the `{}` stage first", path.display(), stage.name()))
        })?;
        serde_json::from_str(&text).map_err(|e| stage_err(stage, format!("{}: {e}", path.display())))
    }

    /// Loads an upstream cache, checking that it matches the current dataset and parameters.
    pub fn load<T: DeserializeOwned>(&self, stage: Stage, digest: &str, params: &PipelineParams) -> Result<T, PipelineError> {
        let cached: Cached<T> = self.read(stage)?;
        if cached.digest != digest {
            return Err(PipelineError::Validation(format!(
                "cached `{}` output belongs to a different dataset; rerun from `fields`",
                stage.name()
            )));
        }
        if stage_key(&cached.params, stage) != stage_key(params, stage) {
            return Err(PipelineError::Validation(format!(
                "cached `{}` output was produced with different parameters; rerun that stage",
                stage.name()
            )));
        }
        Ok(cached.output)
    }

    /// Parameters of the most recent stage run, or defaults for a fresh directory.
    pub fn params(&self) -> Result<PipelineParams, PipelineError> {
        let p = self.root.join("params.json");
        if !p.exists() {
            return Ok(PipelineParams::default());
        }
        let text = fs::read_to_string(&p).map_err(|e| PipelineError::Validation(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Validation(format!("{}: {e}", p.display())))
    }

    pub fn save_params(&self, params: &PipelineParams) -> Result<(), PipelineError> {
        let p = self.root.join("params.json");
        let text = serde_json::to_string_pretty(params).expect("parameters serialise");
        fs::write(&p, text + "\n").map_err(|e| PipelineError::internal("params", format!("{}: {e}", p.display())))
    }

    pub fn field_summary(&self) -> Result<Cached<FieldSummary>, PipelineError> {
        self.read(Stage::Fields)
    }

    /// Reloads the velocity file recorded by the `fields` stage and recomputes the fields.
    pub fn fields(&self, exec: Execution) -> Result<(String, FieldSet), PipelineError> {
        let summary = self.field_summary()?;
        let (meta, velocity) = load_checked(&summary.output.descriptor, &summary.digest)?;
        Ok((summary.digest, crate::pipeline::run_fields(&meta, &velocity, exec)?))
    }

    pub fn cached_clusters(&self, digest: &str, params: &PipelineParams) -> Result<Option<ClusterResult>, PipelineError> {
        if params.cluster.is_none() || !self.has(Stage::Cluster) {
            return Ok(None);
        }
        self.load(Stage::Cluster, digest, params)
    }
}

/// Loads a dataset, failing if its content no longer matches `digest`.
pub fn load_checked(desc: &DatasetDescriptor, digest: &str) -> Result<(GridMeta, VelocityField), PipelineError> {
    let now = desc.digest().map_err(|e| PipelineError::Validation(e.to_string()))?;
    if now != digest {
        return Err(PipelineError::Validation(format!("{} changed since the `fields` stage", desc.path.display())));
    }
    load_field(desc).map_err(|e| PipelineError::Validation(e.to_string()))
}

pub fn summarize(desc: &DatasetDescriptor, fields: &FieldSet) -> FieldSummary {
    let (lo, hi) = fields.lambda2.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut descriptor = desc.clone();
    descriptor.path = fs::canonicalize(&desc.path).unwrap_or_else(|_| desc.path.clone());
    FieldSummary {
        descriptor,
        meta: fields.meta.clone(),
        lambda2_min: lo,
        lambda2_max: hi,
        negative_lambda2: fields.lambda2.iter().filter(|&&v| v < 0.0).count(),
    }
}

/// All cached stage outputs needed for export.
pub struct StagedRun {
    pub digest: String,
    pub meta: GridMeta,
    pub extract: ExtractOutput,
    pub split: SplitOutput,
    pub profile: ProfileOutput,
    pub hairpin: Vec<HairpinScores>,
    pub clusters: Option<ClusterResult>,
}

impl StagedRun {
    pub fn load(dir: &WorkDir, params: &PipelineParams) -> Result<Self, PipelineError> {
        let summary = dir.field_summary()?;
        let digest = summary.digest;
        Ok(StagedRun {
            meta: summary.output.meta,
            extract: dir.load(Stage::Extract, &digest, params)?,
            split: dir.load(Stage::Split, &digest, params)?,
            profile: dir.load(Stage::Profile, &digest, params)?,
            hairpin: dir.load(Stage::Hairpin, &digest, params)?,
            clusters: dir.cached_clusters(&digest, params)?,
            digest,
        })
    }

    pub fn parts(&self) -> BundleParts<'_> {
        BundleParts {
            meta: &self.meta,
            extract: &self.extract,
            split: &self.split,
            profile: &self.profile,
            hairpin: &self.hairpin,
            clusters: self.clusters.as_ref(),
        }
    }
}
