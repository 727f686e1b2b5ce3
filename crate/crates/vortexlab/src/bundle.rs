//! The export bundle: JSON documents plus little-endian binary geometry sidecars.
//!
//! ```text
//! manifest.json            schema version, parameters, dataset digest, thresholds, counts
//! tree.json                every node: hierarchy, split isovalue, size, physical averages
//! profiles.json / .csv     the 19-feature profile of every leaf
//! hairpin.json / .csv      per-leaf hairpin scores
//! clusters.json            optional clustering result
//! meshes/{id}.bin          u32 n, n×3 f32 positions, u32 m, m×3 u32 indices
//! skeletons/{id}.bin       u32 n, n×4 f32 (x, y, z, ω_y′), u32 e, e×2 u32 edges,
//!                          u32 p, p×u32 main-path node indices
//! ```
//!
//! Nothing time- or machine-dependent is written, so the same inputs and parameters give a
//! byte-identical bundle.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vortex_core::clustering::ClusterResult;
use vortex_core::fields::AxisRoles;
use vortex_core::geometry::{Skeleton, SkeletonNode, SurfaceMesh};
use vortex_core::hairpin::HairpinScores;
use vortex_core::profiling::{Feature, PhysicalFeatures, VortexProfile};
use vortex_core::regions::Aabb;
use vortex_core::thresholding::StopCondition;

use vortex_core::fields::GridMeta;

use crate::pipeline::{ExtractOutput, PipelineOutput, PipelineParams, ProfileOutput, SplitOutput};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("bundle schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("{path}: truncated or malformed binary sidecar")]
    Binary { path: PathBuf },
    #[error("bundle is inconsistent: {0}")]
    Inconsistent(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub digest: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub axis_roles: AxisRoles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub nodes: usize,
    pub roots: usize,
    pub leaves: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    pub params: PipelineParams,
    pub dataset: DatasetInfo,
    pub lambda2_init: f64,
    pub refine_iterations: usize,
    pub refine_stop: StopCondition,
    pub lambda2_steps: Vec<f64>,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEntry {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub level: usize,
    pub split_iso: Option<f64>,
    pub is_leaf: bool,
    pub size: usize,
    pub bbox: Aabb,
    pub diag_len: f64,
    pub physical: PhysicalFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub lambda2_steps: Vec<f64>,
    pub nodes: Vec<TreeEntry>,
}

/// A loaded bundle. Geometry sidecars are read on demand.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub tree: TreeDoc,
    pub profiles: Vec<VortexProfile>,
    pub hairpin: Vec<HairpinScores>,
    pub clusters: Option<ClusterResult>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BundleError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| BundleError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, BundleError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| BundleError::Json { path: path.to_path_buf(), source })
}

pub fn encode_mesh(mesh: &SurfaceMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + mesh.vertices.len() * 12 + mesh.triangles.len() * 12);
    out.extend((mesh.vertices.len() as u32).to_le_bytes());
    for v in &mesh.vertices {
        for c in v {
            out.extend((*c as f32).to_le_bytes());
        }
    }
    out.extend((mesh.triangles.len() as u32).to_le_bytes());
    for t in &mesh.triangles {
        for i in t {
            out.extend(i.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn u32(&mut self) -> Option<u32> {
        let b = self.bytes.get(self.at..self.at + 4)?;
        self.at += 4;
        Some(u32::from_le_bytes(b.try_into().ok()?))
    }

    fn f32(&mut self) -> Option<f32> {
        self.u32().map(f32::from_bits)
    }
}

/// Decodes a mesh sidecar; positions come back at f32 precision.
pub fn decode_mesh(bytes: &[u8]) -> Option<SurfaceMesh> {
    let mut r = Reader { bytes, at: 0 };
    let nv = r.u32()? as usize;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push([r.f32()? as f64, r.f32()? as f64, r.f32()? as f64]);
    }
    let nt = r.u32()? as usize;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        triangles.push([r.u32()?, r.u32()?, r.u32()?]);
    }
    (r.at == bytes.len()).then_some(SurfaceMesh { vertices, triangles })
}

pub fn encode_skeleton(sk: &Skeleton) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend((sk.nodes.len() as u32).to_le_bytes());
    for n in &sk.nodes {
        for c in n.position {
            out.extend((c as f32).to_le_bytes());
        }
        out.extend((n.omega_y_prime as f32).to_le_bytes());
    }
    out.extend((sk.edges.len() as u32).to_le_bytes());
    for e in &sk.edges {
        out.extend((e[0] as u32).to_le_bytes());
        out.extend((e[1] as u32).to_le_bytes());
    }
    out.extend((sk.main_path.len() as u32).to_le_bytes());
    for &i in &sk.main_path {
        out.extend((i as u32).to_le_bytes());
    }
    out
}

/// Decodes a skeleton sidecar; values come back at f32 precision.
pub fn decode_skeleton(bytes: &[u8]) -> Option<Skeleton> {
    let mut r = Reader { bytes, at: 0 };
    let nn = r.u32()? as usize;
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let position = [r.f32()? as f64, r.f32()? as f64, r.f32()? as f64];
        nodes.push(SkeletonNode { position, omega_y_prime: r.f32()? as f64 });
    }
    let ne = r.u32()? as usize;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        edges.push([r.u32()? as usize, r.u32()? as usize]);
    }
    let np = r.u32()? as usize;
    let mut main_path = Vec::with_capacity(np);
    for _ in 0..np {
        main_path.push(r.u32()? as usize);
    }
    (r.at == bytes.len()).then_some(Skeleton { nodes, edges, main_path, degenerate: false })
}

fn write_profiles_csv(path: &Path, profiles: &[VortexProfile], parents: &[Option<usize>]) -> Result<(), BundleError> {
    let csv_err = |source| BundleError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["id".to_string(), "parent_id".to_string()];
    header.extend(Feature::ALL.iter().map(|f| f.name().to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for p in profiles {
        let mut row = vec![p.vortex_id.to_string(), parents[p.vortex_id].map_or(String::new(), |x| x.to_string())];
        row.extend(p.values().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_hairpin_csv(path: &Path, scores: &[HairpinScores]) -> Result<(), BundleError> {
    let csv_err = |source| BundleError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["id", "rms_oy", "c_h", "c_h_tilde", "step1", "step2", "step3", "candidate"]).map_err(csv_err)?;
    for s in scores {
        w.write_record([
            s.vortex_id.to_string(),
            s.rms_oy.to_string(),
            s.c_h.to_string(),
            s.c_h_tilde.to_string(),
            s.passed_step1.to_string(),
            s.passed_step2.to_string(),
            s.passed_step3.to_string(),
            s.is_candidate.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Everything a bundle is written from.
#[derive(Debug, Clone, Copy)]
pub struct BundleParts<'a> {
    pub meta: &'a GridMeta,
    pub extract: &'a ExtractOutput,
    pub split: &'a SplitOutput,
    pub profile: &'a ProfileOutput,
    pub hairpin: &'a [HairpinScores],
    pub clusters: Option<&'a ClusterResult>,
}

impl PipelineOutput {
    pub fn parts(&self) -> BundleParts<'_> {
        BundleParts {
            meta: &self.fields.meta,
            extract: &self.extract,
            split: &self.split,
            profile: &self.profile,
            hairpin: &self.hairpin,
            clusters: self.clusters.as_ref(),
        }
    }
}

/// Writes a bundle directory, replacing any previous bundle files in it.
pub fn write_bundle(dir: &Path, out: BundleParts<'_>, params: &PipelineParams, digest: String) -> Result<Manifest, BundleError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for sub in ["meshes", "skeletons"] {
        let p = dir.join(sub);
        if p.exists() {
            fs::remove_dir_all(&p).map_err(io_err(&p))?;
        }
        fs::create_dir_all(&p).map_err(io_err(&p))?;
    }
    let clusters_path = dir.join("clusters.json");
    if clusters_path.exists() {
        fs::remove_file(&clusters_path).map_err(io_err(&clusters_path))?;
    }

    let tree = &out.split.tree;
    let meta = out.meta;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        generator: format!("vortexlab {}", env!("CARGO_PKG_VERSION")),
        params: params.clone(),
        dataset: DatasetInfo { digest, dims: meta.dims, spacing: meta.spacing, origin: meta.origin, axis_roles: meta.axis_roles },
        lambda2_init: out.extract.threshold.value,
        refine_iterations: out.extract.threshold.iterations,
        refine_stop: out.extract.threshold.stop,
        lambda2_steps: out.split.steps.values.clone(),
        counts: Counts {
            nodes: tree.nodes.len(),
            roots: tree.roots().count(),
            leaves: tree.leaves().count(),
            candidates: out.hairpin.iter().filter(|s| s.is_candidate).count(),
        },
    };
    write_json(&dir.join("manifest.json"), &manifest)?;

    let doc = TreeDoc {
        lambda2_steps: out.split.steps.values.clone(),
        nodes: tree
            .nodes
            .iter()
            .map(|n| TreeEntry {
                id: n.id,
                parent: n.parent,
                children: n.children.clone(),
                level: n.level,
                split_iso: n.split_iso,
                is_leaf: n.is_leaf(),
                size: n.region.len(),
                bbox: n.region.bbox,
                diag_len: n.region.diag_len,
                physical: out.profile.physical[n.id],
            })
            .collect(),
    };
    write_json(&dir.join("tree.json"), &doc)?;
    write_json(&dir.join("profiles.json"), &out.profile.profiles)?;
    let parents: Vec<Option<usize>> = tree.nodes.iter().map(|n| n.parent).collect();
    write_profiles_csv(&dir.join("profiles.csv"), &out.profile.profiles, &parents)?;
    write_json(&dir.join("hairpin.json"), &out.hairpin)?;
    write_hairpin_csv(&dir.join("hairpin.csv"), &out.hairpin)?;
    if let Some(c) = out.clusters {
        write_json(&clusters_path, c)?;
    }
    for (id, mesh) in out.profile.meshes.iter().enumerate() {
        let p = dir.join("meshes").join(format!("{id}.bin"));
        fs::write(&p, encode_mesh(mesh)).map_err(io_err(&p))?;
    }
    for leaf in &out.profile.leaves {
        let p = dir.join("skeletons").join(format!("{}.bin", leaf.id));
        fs::write(&p, encode_skeleton(&leaf.skeleton)).map_err(io_err(&p))?;
    }
    Ok(manifest)
}

impl Bundle {
    pub fn load(dir: &Path) -> Result<Self, BundleError> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: u32,
        }
        let v: Version = read_json(&dir.join("manifest.json"))?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(BundleError::SchemaVersion { found: v.schema_version });
        }
        let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
        let tree: TreeDoc = read_json(&dir.join("tree.json"))?;
        let profiles: Vec<VortexProfile> = read_json(&dir.join("profiles.json"))?;
        let hairpin: Vec<HairpinScores> = read_json(&dir.join("hairpin.json"))?;
        let clusters_path = dir.join("clusters.json");
        let clusters = if clusters_path.exists() { Some(read_json(&clusters_path)?) } else { None };
        let bundle = Bundle { root: dir.to_path_buf(), manifest, tree, profiles, hairpin, clusters };
        bundle.check()?;
        Ok(bundle)
    }

    fn check(&self) -> Result<(), BundleError> {
        for (i, n) in self.tree.nodes.iter().enumerate() {
            if n.id != i {
                return Err(BundleError::Inconsistent(format!("tree node at position {i} has id {}", n.id)));
            }
        }
        let known = |id: usize| id < self.tree.nodes.len();
        if let Some(p) = self.profiles.iter().find(|p| !known(p.vortex_id)) {
            return Err(BundleError::Inconsistent(format!("profile for unknown node {}", p.vortex_id)));
        }
        if let Some(s) = self.hairpin.iter().find(|s| !known(s.vortex_id)) {
            return Err(BundleError::Inconsistent(format!("hairpin score for unknown node {}", s.vortex_id)));
        }
        Ok(())
    }

    pub fn node(&self, id: usize) -> Option<&TreeEntry> {
        self.tree.nodes.get(id)
    }

    pub fn profile(&self, id: usize) -> Option<&VortexProfile> {
        self.profiles.iter().find(|p| p.vortex_id == id)
    }

    pub fn mesh_path(&self, id: usize) -> PathBuf {
        self.root.join("meshes").join(format!("{id}.bin"))
    }

    pub fn skeleton_path(&self, id: usize) -> PathBuf {
        self.root.join("skeletons").join(format!("{id}.bin"))
    }

    /// Raw mesh sidecar bytes, if the node exists.
    pub fn mesh_bytes(&self, id: usize) -> Result<Option<Vec<u8>>, BundleError> {
        if self.node(id).is_none() {
            return Ok(None);
        }
        let p = self.mesh_path(id);
        fs::read(&p).map(Some).map_err(io_err(&p))
    }

    /// The leaf's skeleton, if `id` is a leaf with one.
    pub fn skeleton(&self, id: usize) -> Result<Option<Skeleton>, BundleError> {
        let p = self.skeleton_path(id);
        if self.node(id).is_none_or(|n| !n.is_leaf) || !p.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&p).map_err(io_err(&p))?;
        decode_skeleton(&bytes).map(Some).ok_or(BundleError::Binary { path: p })
    }

    /// Value of `feature` for a node: physical features exist for every node, skeleton
    /// features only for leaves.
    pub fn feature_value(&self, id: usize, feature: Feature) -> Option<f64> {
        let node = self.node(id)?;
        if feature.is_physical() {
            return node.physical.get(feature);
        }
        self.profile(id).map(|p| p.get(feature))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_sidecar_round_trip() {
        let mesh = SurfaceMesh { vertices: vec![[0.0, 1.0, 2.0], [3.5, -1.0, 0.25]], triangles: vec![[0, 1, 0]] };
        let bytes = encode_mesh(&mesh);
        assert_eq!(bytes.len(), 4 + 24 + 4 + 12);
        assert_eq!(&bytes[..4], &2u32.to_le_bytes());
        assert_eq!(decode_mesh(&bytes), Some(mesh));
        assert_eq!(decode_mesh(&bytes[..bytes.len() - 1]), None);
    }

    #[test]
    fn skeleton_sidecar_round_trip() {
        let sk = Skeleton {
            nodes: vec![
                SkeletonNode { position: [0.0, 0.5, 1.0], omega_y_prime: -2.0 },
                SkeletonNode { position: [1.0, 0.5, 1.0], omega_y_prime: 0.125 },
            ],
            edges: vec![[0, 1]],
            main_path: vec![0, 1],
            degenerate: false,
        };
        assert_eq!(decode_skeleton(&encode_skeleton(&sk)), Some(sk));
    }
}
