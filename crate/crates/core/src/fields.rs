//! Structured grid, velocity snapshot and the per-vertex velocity-gradient quantities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::linalg::{self, Mat3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("velocity has {actual} vertices, grid expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite velocity component at vertex {vertex:?} (linear index {index})")]
    NonFinite { vertex: [usize; 3], index: usize },
    #[error("vertex {vertex:?} outside grid of dims {dims:?}")]
    OutOfBounds { vertex: [usize; 3], dims: [usize; 3] },
}

/// Which grid axis plays which physical role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisRoles {
    pub streamwise: usize,
    pub spanwise: usize,
    pub vertical: usize,
}

impl Default for AxisRoles {
    fn default() -> Self {
        AxisRoles { streamwise: 0, spanwise: 1, vertical: 2 }
    }
}

impl AxisRoles {
    pub fn validate(&self) -> Result<(), FieldError> {
        let mut seen = [false; 3];
        for a in [self.streamwise, self.spanwise, self.vertical] {
            if a > 2 || seen[a] {
                return Err(FieldError::InvalidGrid(format!("axis roles {self:?} are not a permutation of 0,1,2")));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Unit vectors along the streamwise, spanwise and vertical axes.
    pub fn unit_vectors(&self) -> [Vec3; 3] {
        [self.streamwise, self.spanwise, self.vertical].map(|a| {
            let mut e = [0.0; 3];
            e[a] = 1.0;
            e
        })
    }
}

/// Vertex-centred structured grid. Vertex `(i, j, k)` has linear index `i + j·nx + k·nx·ny`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub axis_roles: AxisRoles,
}

impl GridMeta {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], axis_roles: AxisRoles) -> Result<Self, FieldError> {
        let meta = GridMeta { dims, spacing, origin, axis_roles };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.dims.iter().any(|&n| n < 2) {
            return Err(FieldError::InvalidGrid(format!("dims {:?} must all be >= 2", self.dims)));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(FieldError::InvalidGrid(format!("spacing {:?} must be positive", self.spacing)));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(FieldError::InvalidGrid(format!("origin {:?} must be finite", self.origin)));
        }
        self.axis_roles.validate()
    }

    pub fn vertex_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn index(&self, v: [usize; 3]) -> usize {
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    #[inline]
    pub fn position(&self, v: [usize; 3]) -> Vec3 {
        [0, 1, 2].map(|a| self.origin[a] + v[a] as f64 * self.spacing[a])
    }

    /// Number of hexahedral cells per axis.
    pub fn cell_dims(&self) -> [usize; 3] {
        self.dims.map(|n| n - 1)
    }

    pub fn cell_count(&self) -> usize {
        self.cell_dims().iter().product()
    }

    /// World-space size of the domain along each axis.
    pub fn extent(&self) -> Vec3 {
        [0, 1, 2].map(|a| (self.dims[a] - 1) as f64 * self.spacing[a])
    }

    /// Length of the domain bounding-box diagonal.
    pub fn domain_diagonal(&self) -> f64 {
        linalg::norm(self.extent())
    }

    /// Bottom and top coordinates along the vertical axis.
    pub fn vertical_bounds(&self) -> (f64, f64) {
        let v = self.axis_roles.vertical;
        (self.origin[v], self.origin[v] + self.extent()[v])
    }

    /// Trilinear interpolation of a vertex scalar at a world position (clamped to the domain).
    pub fn sample_trilinear(&self, values: &[f64], p: Vec3) -> f64 {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let t = ((p[a] - self.origin[a]) / self.spacing[a]).clamp(0.0, (self.dims[a] - 1) as f64);
            let i = (t.floor() as usize).min(self.dims[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let w: f64 = (0..3).map(|a| if off[a] == 1 { frac[a] } else { 1.0 - frac[a] }).product();
            if w != 0.0 {
                acc += w * values[self.index([base[0] + off[0], base[1] + off[1], base[2] + off[2]])];
            }
        }
        acc
    }
}

/// Per-vertex velocity vectors, laid out like [`GridMeta::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub data: Vec<Vec3>,
}

impl VelocityField {
    pub fn new(data: Vec<Vec3>) -> Self {
        VelocityField { data }
    }

    /// Samples `f(position)` at every vertex.
    pub fn from_fn(meta: &GridMeta, f: impl Fn(Vec3) -> Vec3 + Sync + Send, exec: Execution) -> Self {
        let data = exec.map_range(meta.vertex_count(), |idx| f(meta.position(meta.coords(idx))));
        VelocityField { data }
    }

    pub fn validate(&self, meta: &GridMeta) -> Result<(), FieldError> {
        if self.data.len() != meta.vertex_count() {
            return Err(FieldError::LengthMismatch { expected: meta.vertex_count(), actual: self.data.len() });
        }
        if let Some(index) = self.data.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(FieldError::NonFinite { vertex: meta.coords(index), index });
        }
        Ok(())
    }
}

/// The grid, the velocity and every derived per-vertex field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub meta: GridMeta,
    pub velocity: VelocityField,
    pub lambda2: Vec<f64>,
    pub q: Vec<f64>,
    pub delta: Vec<f64>,
    pub lambda_ci: Vec<f64>,
    pub divergence: Vec<f64>,
    pub enstrophy: Vec<f64>,
    pub omega_y_prime: Vec<f64>,
    pub speed: Vec<f64>,
    pub accel_mag: Vec<f64>,
    pub jacobian_norm: Vec<f64>,
    pub vorticity: Vec<Vec3>,
    pub acceleration: Vec<Vec3>,
}

/// ∂v/∂x_axis at a vertex: central differences inside, first-order one-sided at the boundary.
fn axis_derivative(meta: &GridMeta, vel: &[Vec3], v: [usize; 3], axis: usize) -> Vec3 {
    let n = meta.dims[axis];
    let h = meta.spacing[axis];
    let at = |i: usize| {
        let mut w = v;
        w[axis] = i;
        vel[meta.index(w)]
    };
    let i = v[axis];
    if i == 0 {
        linalg::scale(linalg::sub(at(1), at(0)), 1.0 / h)
    } else if i == n - 1 {
        linalg::scale(linalg::sub(at(i), at(i - 1)), 1.0 / h)
    } else {
        linalg::scale(linalg::sub(at(i + 1), at(i - 1)), 0.5 / h)
    }
}

fn jacobian_unchecked(meta: &GridMeta, vel: &[Vec3], v: [usize; 3]) -> Mat3 {
    let mut j = [[0.0; 3]; 3];
    for col in 0..3 {
        let d = axis_derivative(meta, vel, v, col);
        for row in 0..3 {
            j[row][col] = d[row];
        }
    }
    j
}

/// Velocity Jacobian `J[i][j] = ∂v_i/∂x_j` at one vertex.
pub fn compute_jacobian(meta: &GridMeta, vel: &VelocityField, vertex: [usize; 3]) -> Result<Mat3, FieldError> {
    if (0..3).any(|a| vertex[a] >= meta.dims[a]) {
        return Err(FieldError::OutOfBounds { vertex, dims: meta.dims });
    }
    if vel.data.len() != meta.vertex_count() {
        return Err(FieldError::LengthMismatch { expected: meta.vertex_count(), actual: vel.data.len() });
    }
    Ok(jacobian_unchecked(meta, &vel.data, vertex))
}

/// Every derived quantity at a single vertex, computed from its Jacobian and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCriteria {
    pub lambda2: f64,
    pub q: f64,
    pub delta: f64,
    pub lambda_ci: f64,
    pub divergence: f64,
    pub enstrophy: f64,
    pub vorticity: Vec3,
    pub acceleration: Vec3,
    pub jacobian_norm: f64,
}

impl PointCriteria {
    pub fn from_jacobian(j: &Mat3, v: Vec3) -> Self {
        let jt = linalg::transpose(j);
        let mut s = [[0.0; 3]; 3];
        let mut w = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                s[r][c] = 0.5 * (j[r][c] + jt[r][c]);
                w[r][c] = 0.5 * (j[r][c] - jt[r][c]);
            }
        }
        let q = 0.5 * (linalg::frobenius_sq(&w) - linalg::frobenius_sq(&s));
        let delta = (q / 3.0).powi(3) + (linalg::det(j) / 2.0).powi(2);
        let s2 = linalg::mat_mul(&s, &s);
        let w2 = linalg::mat_mul(&w, &w);
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = s2[r][c] + w2[r][c];
            }
        }
        // S² + Ω² is symmetric up to rounding; symmetrise before the eigensolve.
        for r in 0..3 {
            for c in (r + 1)..3 {
                let avg = 0.5 * (m[r][c] + m[c][r]);
                m[r][c] = avg;
                m[c][r] = avg;
            }
        }
        let lambda2 = linalg::sym_eigenvalues(&m)[1];
        let vorticity = [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]];
        PointCriteria {
            lambda2,
            q,
            delta,
            lambda_ci: linalg::swirling_strength(j),
            divergence: linalg::trace(j),
            enstrophy: 0.5 * linalg::dot(vorticity, vorticity),
            vorticity,
            acceleration: linalg::mat_vec(j, v),
            jacobian_norm: linalg::frobenius_sq(j).sqrt(),
        }
    }
}

/// Computes every derived field of a snapshot.
pub fn compute_criteria(meta: &GridMeta, vel: &VelocityField, exec: Execution) -> Result<FieldSet, FieldError> {
    meta.validate()?;
    vel.validate(meta)?;
    let points = exec.map_range(meta.vertex_count(), |idx| {
        let v = meta.coords(idx);
        let j = jacobian_unchecked(meta, &vel.data, v);
        PointCriteria::from_jacobian(&j, vel.data[idx])
    });
    let n = points.len();
    let mut fs = FieldSet {
        meta: meta.clone(),
        velocity: vel.clone(),
        lambda2: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
        lambda_ci: Vec::with_capacity(n),
        divergence: Vec::with_capacity(n),
        enstrophy: Vec::with_capacity(n),
        omega_y_prime: Vec::new(),
        speed: Vec::with_capacity(n),
        accel_mag: Vec::with_capacity(n),
        jacobian_norm: Vec::with_capacity(n),
        vorticity: Vec::with_capacity(n),
        acceleration: Vec::with_capacity(n),
    };
    for (p, v) in points.iter().zip(&vel.data) {
        fs.lambda2.push(p.lambda2);
        fs.q.push(p.q);
        fs.delta.push(p.delta);
        fs.lambda_ci.push(p.lambda_ci);
        fs.divergence.push(p.divergence);
        fs.enstrophy.push(p.enstrophy);
        fs.speed.push(linalg::norm(*v));
        fs.accel_mag.push(linalg::norm(p.acceleration));
        fs.jacobian_norm.push(p.jacobian_norm);
        fs.vorticity.push(p.vorticity);
        fs.acceleration.push(p.acceleration);
    }
    fs.omega_y_prime = compute_omega_y_prime(meta, &fs.vorticity);
    Ok(fs)
}

/// Spanwise vorticity minus its mean over each horizontal slab (fixed vertical index).
///
/// Only a single snapshot is available, so the slab mean stands in for the time-and-plane
/// average.
pub fn compute_omega_y_prime(meta: &GridMeta, vorticity: &[Vec3]) -> Vec<f64> {
    let span = meta.axis_roles.spanwise;
    let vert = meta.axis_roles.vertical;
    let levels = meta.dims[vert];
    let mut sums = vec![0.0f64; levels];
    let mut counts = vec![0usize; levels];
    for (idx, w) in vorticity.iter().enumerate() {
        let level = meta.coords(idx)[vert];
        sums[level] += w[span];
        counts[level] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c.max(1) as f64).collect();
    vorticity
        .iter()
        .enumerate()
        .map(|(idx, w)| w[span] - means[meta.coords(idx)[vert]])
        .collect()
}

impl FieldSet {
    /// Derived fields from raw velocity, dispatching on `exec`.
    pub fn compute(meta: &GridMeta, vel: &VelocityField, exec: Execution) -> Result<Self, FieldError> {
        compute_criteria(meta, vel, exec)
    }

    pub fn vorticity_magnitude(&self, idx: usize) -> f64 {
        linalg::norm(self.vorticity[idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, h: f64) -> GridMeta {
        let o = -(n as f64 - 1.0) * h / 2.0;
        GridMeta::new([n; 3], [h; 3], [o; 3], AxisRoles::default()).unwrap()
    }

    #[test]
    fn linear_fields_give_exact_jacobians() {
        let meta = cube(9, 0.25);
        let rot = VelocityField::from_fn(&meta, |p| [-p[1], p[0], 0.0], Execution::Sequential);
        let j = compute_jacobian(&meta, &rot, [4, 3, 5]).unwrap();
        let expected = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert!((j[r][c] - expected[r][c]).abs() < 1e-9);
            }
        }
        let shear = VelocityField::from_fn(&meta, |p| [p[1], 0.0, 0.0], Execution::Sequential);
        let j = compute_jacobian(&meta, &shear, [2, 2, 2]).unwrap();
        assert!((j[0][1] - 1.0).abs() < 1e-9);
        assert_eq!(j.iter().flatten().filter(|v| v.abs() > 1e-9).count(), 1);
        // one-sided stencils are also exact for linear fields
        let j = compute_jacobian(&meta, &rot, [0, 8, 0]).unwrap();
        assert!((j[0][1] + 1.0).abs() < 1e-9 && (j[1][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_bounds_vertex() {
        let meta = cube(4, 1.0);
        let vel = VelocityField::new(vec![[0.0; 3]; 64]);
        assert!(matches!(compute_jacobian(&meta, &vel, [4, 0, 0]), Err(FieldError::OutOfBounds { .. })));
    }

    #[test]
    fn non_finite_velocity_is_rejected() {
        let meta = cube(3, 1.0);
        let mut data = vec![[0.0; 3]; 27];
        data[13][2] = f64::NAN;
        let err = compute_criteria(&meta, &VelocityField::new(data), Execution::Sequential).unwrap_err();
        assert_eq!(err, FieldError::NonFinite { vertex: [1, 1, 1], index: 13 });
    }

    #[test]
    fn invalid_grids() {
        assert!(GridMeta::new([1, 4, 4], [1.0; 3], [0.0; 3], AxisRoles::default()).is_err());
        assert!(GridMeta::new([4, 4, 4], [1.0, 0.0, 1.0], [0.0; 3], AxisRoles::default()).is_err());
        let roles = AxisRoles { streamwise: 0, spanwise: 0, vertical: 2 };
        assert!(GridMeta::new([4, 4, 4], [1.0; 3], [0.0; 3], roles).is_err());
    }

    #[test]
    fn rigid_rotation_criteria() {
        let meta = cube(7, 0.5);
        let vel = VelocityField::from_fn(&meta, |p| [-p[1], p[0], 0.0], Execution::Sequential);
        let fs = compute_criteria(&meta, &vel, Execution::Sequential).unwrap();
        let idx = meta.index([3, 2, 4]);
        let p = meta.position([3, 2, 4]);
        assert!((fs.q[idx] - 1.0).abs() < 1e-9);
        assert!((fs.lambda2[idx] + 1.0).abs() < 1e-9);
        assert!((fs.enstrophy[idx] - 2.0).abs() < 1e-9);
        assert!(fs.divergence[idx].abs() < 1e-9);
        assert!((fs.lambda_ci[idx] - 1.0).abs() < 1e-9);
        let w = fs.vorticity[idx];
        assert!(w[0].abs() < 1e-9 && w[1].abs() < 1e-9 && (w[2] - 2.0).abs() < 1e-9);
        let a = fs.acceleration[idx];
        assert!((a[0] + p[0]).abs() < 1e-9 && (a[1] + p[1]).abs() < 1e-9 && a[2].abs() < 1e-9);
    }

    #[test]
    fn pure_shear_criteria() {
        let meta = cube(5, 1.0);
        let vel = VelocityField::from_fn(&meta, |p| [p[1], 0.0, 0.0], Execution::Sequential);
        let fs = compute_criteria(&meta, &vel, Execution::Sequential).unwrap();
        let idx = meta.index([2, 2, 2]);
        assert!(fs.q[idx].abs() < 1e-12);
        assert!(fs.lambda2[idx].abs() < 1e-12);
        assert!(fs.divergence[idx].abs() < 1e-12);
        assert_eq!(fs.lambda_ci[idx], 0.0);
        assert!((fs.vorticity[idx][2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn omega_y_prime_slab_means() {
        let meta = cube(4, 1.0);
        let constant = vec![[0.3, 2.5, -1.0]; meta.vertex_count()];
        assert!(compute_omega_y_prime(&meta, &constant).iter().all(|v| v.abs() < 1e-15));
        let alternating: Vec<Vec3> = (0..meta.vertex_count())
            .map(|i| {
                let c = meta.coords(i);
                [0.0, if (c[0] + c[1]) % 2 == 0 { 1.0 } else { -1.0 }, 0.0]
            })
            .collect();
        let oy = compute_omega_y_prime(&meta, &alternating);
        for (o, w) in oy.iter().zip(&alternating) {
            assert_eq!(*o, w[1]);
        }
    }

    #[test]
    fn trilinear_reproduces_linear_functions() {
        let meta = cube(5, 0.5);
        let vals: Vec<f64> = (0..meta.vertex_count())
            .map(|i| {
                let p = meta.position(meta.coords(i));
                2.0 * p[0] - p[1] + 0.5 * p[2] + 1.0
            })
            .collect();
        let p = [0.13, -0.41, 0.77];
        let expect = 2.0 * p[0] - p[1] + 0.5 * p[2] + 1.0;
        assert!((meta.sample_trilinear(&vals, p) - expect).abs() < 1e-12);
    }
}
