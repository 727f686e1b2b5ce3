//! Command-line interface.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use vortex_core::clustering::{ClusterRequest, ClusterScope, Preset};
use vortex_core::Execution;

use crate::bundle::{write_bundle, BundleError};
use crate::io::{write_field, ByteOrder, DatasetDescriptor, IoError, Precision};
use crate::pipeline::{
    run_all, run_cluster, run_extract, run_fields, run_hairpin, run_profile, run_split, ClusterSettings, ExtractOutput,
    PipelineError, PipelineParams, ProfileOutput, SplitOutput,
};
use crate::scenarios::{scenario_field, Scenario};
use crate::service::{serve, ServeError};
use crate::workdir::{summarize, Stage, StagedRun, WorkDir};

#[derive(Debug, Parser)]
#[command(name = "vortexlab", version, about = "Extract, split, profile and explore vortices in 3-D velocity fields")]
pub struct Cli {
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the derived fields of a dataset and start a work directory.
    Fields {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        workdir: PathBuf,
        #[command(flatten)]
        flags: ParamFlags,
    },
    /// Pick the initial λ₂ threshold and extract the vortex regions.
    Extract(StageArgs),
    /// Split the regions into the vortex tree.
    Split(StageArgs),
    /// Skeletons, geometry and profiles of the tree leaves.
    Profile(StageArgs),
    /// Hairpin candidate selection.
    Hairpin(StageArgs),
    /// t-SNE embedding and DBSCAN clustering of the profiles.
    Cluster(StageArgs),
    /// Write the bundle from a work directory's cached stages.
    Export {
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write the bundle.
    All {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: ParamFlags,
    },
    /// Serve a bundle to the explorer.
    Serve {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Concurrent cluster computations.
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
    /// Write a synthetic dataset (descriptor plus raw file).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "hairpin")]
        scenario: Scenario,
        #[arg(long, default_value_t = 96)]
        size: usize,
    },
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    #[command(flatten)]
    pub flags: ParamFlags,
}

/// Parameter overrides; anything not given keeps its previous (or default) value.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// Volume-split factor gating which splits are kept.
    #[arg(long)]
    pub vsf: Option<f64>,
    /// Step-1 direction threshold T₁.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Step-3 threshold on the adjusted hairpin curvature.
    #[arg(long)]
    pub chmin: Option<f64>,
    /// Histogram bins for the initial threshold.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Regions below this fraction of all cells are noise.
    #[arg(long)]
    pub noise_frac: Option<f64>,
    /// Simplify regions before meshing and skeletonisation (`true` or `false`).
    #[arg(long)]
    pub simplify: Option<bool>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub min_pts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Attribute preset; enables clustering.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// `all` or `hairpin_candidates`.
    #[arg(long, value_parser = parse_scope)]
    pub scope: Option<ClusterScope>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn parse_scope(s: &str) -> Result<ClusterScope, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown scope `{s}`, expected all or hairpin_candidates"))
}

impl ParamFlags {
    pub fn apply(&self, mut p: PipelineParams) -> PipelineParams {
        if let Some(v) = self.vsf {
            p.split.vsf = v;
        }
        if let Some(v) = self.t1 {
            p.hairpin.t1 = v;
        }
        if let Some(v) = self.chmin {
            p.hairpin.c_h_min = v;
        }
        if let Some(v) = self.bins {
            p.refine.n_bins = v;
        }
        if let Some(v) = self.noise_frac {
            p.noise_frac = v;
        }
        if let Some(v) = self.simplify {
            p.simplify_regions = v;
        }
        let touches_cluster = self.preset.is_some()
            || self.perplexity.is_some()
            || self.eps.is_some()
            || self.min_pts.is_some()
            || self.seed.is_some()
            || self.scope.is_some();
        if touches_cluster {
            let defaults = ClusterRequest::new(&[]);
            let mut c = p.cluster.take().unwrap_or(ClusterSettings {
                preset: Preset::Couette,
                perplexity: defaults.perplexity,
                eps: None,
                min_pts: defaults.min_pts,
                seed: defaults.rng_seed,
                scope: defaults.scope,
            });
            if let Some(v) = self.preset {
                c.preset = v;
            }
            if let Some(v) = self.perplexity {
                c.perplexity = v;
            }
            if self.eps.is_some() {
                c.eps = self.eps;
            }
            if let Some(v) = self.min_pts {
                c.min_pts = v;
            }
            if let Some(v) = self.seed {
                c.seed = v;
            }
            if let Some(v) = self.scope {
                c.scope = v;
            }
            p.cluster = Some(c);
        }
        p
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Serve(#[from] ServeError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline(e) => e.exit_code(),
            CliError::Io(_) => 2,
            CliError::Serve(ServeError::Bundle(_)) => 2,
            CliError::Bundle(_) | CliError::Serve(_) => 4,
        }
    }
}

fn exec_of(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn stage_params(dir: &WorkDir, flags: &ParamFlags) -> Result<PipelineParams, PipelineError> {
    let params = flags.apply(dir.params()?);
    dir.save_params(&params)?;
    Ok(params)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let exec = exec_of(&cli);
    match cli.command {
        Command::Fields { dataset, workdir, flags } => {
            let dir = WorkDir::new(workdir)?;
            let params = stage_params(&dir, &flags)?;
            let desc = DatasetDescriptor::read(&dataset)?;
            let digest = desc.digest()?;
            let (meta, velocity) = crate::io::load_field(&desc)?;
            let fields = run_fields(&meta, &velocity, exec)?;
            dir.save(Stage::Fields, &digest, &params, &summarize(&desc, &fields))?;
        }
        Command::Extract(a) => {
            let dir = WorkDir::new(a.workdir)?;
            let params = stage_params(&dir, &a.flags)?;
            let (digest, fields) = dir.fields(exec)?;
            let out = run_extract(&fields, &params, exec)?;
            dir.save(Stage::Extract, &digest, &params, &out)?;
        }
        Command::Split(a) => {
            let dir = WorkDir::new(a.workdir)?;
            let params = stage_params(&dir, &a.flags)?;
            let (digest, fields) = dir.fields(exec)?;
            let extract: ExtractOutput = dir.load(Stage::Extract, &digest, &params)?;
            let out = run_split(&fields, &extract, &params, exec)?;
            dir.save(Stage::Split, &digest, &params, &out)?;
        }
        Command::Profile(a) => {
            let dir = WorkDir::new(a.workdir)?;
            let params = stage_params(&dir, &a.flags)?;
            let (digest, fields) = dir.fields(exec)?;
            let split: SplitOutput = dir.load(Stage::Split, &digest, &params)?;
            let out = run_profile(&fields, &split, &params, exec)?;
            dir.save(Stage::Profile, &digest, &params, &out)?;
        }
        Command::Hairpin(a) => {
            let dir = WorkDir::new(a.workdir)?;
            let params = stage_params(&dir, &a.flags)?;
            let summary = dir.field_summary()?;
            let profile: ProfileOutput = dir.load(Stage::Profile, &summary.digest, &params)?;
            let out = run_hairpin(&summary.output.meta, &profile, &params, exec)?;
            dir.save(Stage::Hairpin, &summary.digest, &params, &out)?;
        }
        Command::Cluster(a) => {
            let dir = WorkDir::new(a.workdir)?;
            let params = stage_params(&dir, &a.flags)?;
            let settings = params
                .cluster
                .as_ref()
                .ok_or_else(|| PipelineError::Validation("clustering needs --preset couette|benard".into()))?;
            let digest = dir.field_summary()?.digest;
            let profile: ProfileOutput = dir.load(Stage::Profile, &digest, &params)?;
            let hairpin: Vec<_> = dir.load(Stage::Hairpin, &digest, &params)?;
            let out = run_cluster(&profile.profiles, &hairpin, &settings.request(), exec)
                .map_err(|e| PipelineError::Validation(e.to_string()))?;
            println!("{} clusters over {} vortices (eps {})", out.cluster_count, out.vortex_ids.len(), out.eps);
            dir.save(Stage::Cluster, &digest, &params, &out)?;
        }
        Command::Export { workdir, out } => {
            let dir = WorkDir::new(workdir)?;
            let params = dir.params()?;
            let staged = StagedRun::load(&dir, &params)?;
            let manifest = write_bundle(&out, staged.parts(), &params, staged.digest.clone())?;
            report(&out, &manifest);
        }
        Command::All { dataset, out, flags } => {
            let params = flags.apply(PipelineParams::default());
            let desc = DatasetDescriptor::read(&dataset)?;
            let digest = desc.digest()?;
            let (meta, velocity) = crate::io::load_field(&desc)?;
            let result = run_all(&meta, &velocity, &params, exec)?;
            let manifest = write_bundle(&out, result.parts(), &params, digest)?;
            report(&out, &manifest);
        }
        Command::Serve { bundle, bind, workers } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Serve(ServeError::Io(e)))?;
            rt.block_on(serve(&bundle, bind, workers, exec))?;
        }
        Command::Synth { out, scenario, size } => {
            write_scenario(&out, scenario, size, exec)?;
            println!("wrote {}", out.join("dataset.json").display());
        }
    }
    Ok(())
}

fn report(out: &Path, m: &crate::bundle::Manifest) {
    println!(
        "{}: {} nodes, {} roots, {} leaves, {} hairpin candidates",
        out.display(),
        m.counts.nodes,
        m.counts.roots,
        m.counts.leaves,
        m.counts.candidates
    );
}

/// Writes `dataset.json` and `velocity.raw` (float32, little-endian) into `dir`.
pub fn write_scenario(dir: &Path, scenario: Scenario, size: usize, exec: Execution) -> Result<DatasetDescriptor, IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_path_buf(), source })?;
    let (meta, field) = scenario_field(scenario, size, exec);
    let mut desc = DatasetDescriptor {
        path: dir.join("velocity.raw"),
        dims: meta.dims,
        spacing: meta.spacing,
        origin: meta.origin,
        component_order: [0, 1, 2],
        precision: Precision::Float32,
        byte_order: ByteOrder::Little,
        axis_roles: meta.axis_roles,
    };
    write_field(&desc, &field)?;
    desc.path = PathBuf::from("velocity.raw");
    desc.write(&dir.join("dataset.json"))?;
    desc.path = dir.join("velocity.raw");
    Ok(desc)
}
