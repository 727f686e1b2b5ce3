//! Vortex extraction and classification for 3D structured-grid velocity snapshots.
//!
//! The crate is organised as a pipeline of independent stages:
//!
//! * [`fields`] derives velocity-gradient quantities (λ₂, Q, Δ, λ_ci, vorticity, ...).
//! * [`thresholding`] picks the initial λ₂ threshold and the splitting isovalue schedule.
//! * [`regions`] grows vortical regions from seeds and splits them into a hierarchy.
//! * [`geometry`] extracts boundary surfaces, curve skeletons and shape descriptors.
//! * [`profiling`] assembles the per-vortex feature vectors.
//! * [`hairpin`] screens the profiles for hairpin-vortex candidates.
//! * [`clustering`] embeds selected features in 2D (t-SNE) and clusters them (DBSCAN).
//!
//! Every data-parallel loop goes through [`Execution`], which dispatches to rayon when the
//! `parallel` feature is enabled and to a plain sequential loop otherwise. Results are
//! bit-identical between the two strategies.

pub mod clustering;
pub mod exec;
pub mod fields;
pub mod geometry;
pub mod hairpin;
pub mod linalg;
pub mod profiling;
pub mod regions;
pub mod synthetic;
pub mod thresholding;

pub use exec::Execution;
pub use fields::{AxisRoles, FieldError, FieldSet, GridMeta, VelocityField};
