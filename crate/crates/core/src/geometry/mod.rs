//! Boundary surfaces, curve skeletons and skeleton shape descriptors of vortical regions.

mod features;
mod mesh;
mod skeleton;

use thiserror::Error;

pub use features::{geometric_features, oriented_box_diagonal, GeometricFeatures};
pub use mesh::{extract_boundary_surface, laplacian_smooth, SurfaceMesh};
pub use skeleton::{skeletonize, Skeleton, SkeletonNode, SkeletonParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a path needs at least 2 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("cannot skeletonize an empty region")]
    EmptyRegion,
}
