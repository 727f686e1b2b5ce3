//! Vortex criteria from a velocity-gradient matrix, via nalgebra eigen-solvers.

use nalgebra::Matrix3;

pub type Mat = [[f64; 3]; 3];

fn m3(j: &Mat) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| j[r][c])
}

fn parts(j: &Mat) -> (Matrix3<f64>, Matrix3<f64>) {
    let j = m3(j);
    ((j + j.transpose()) * 0.5, (j - j.transpose()) * 0.5)
}

/// Middle eigenvalue of S² + Ω².
pub fn lambda2(j: &Mat) -> f64 {
    let (s, w) = parts(j);
    let m = s * s + w * w;
    let m = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev[1]
}

/// Q as ½(|Ω|² − |S|²).
pub fn q_norms(j: &Mat) -> f64 {
    let (s, w) = parts(j);
    0.5 * (w.norm_squared() - s.norm_squared())
}

/// Q as −½ tr(S² + Ω²).
pub fn q_trace(j: &Mat) -> f64 {
    let (s, w) = parts(j);
    -0.5 * (s * s + w * w).trace()
}

/// Δ = (Q/3)³ + (det J / 2)².
pub fn delta(j: &Mat) -> f64 {
    (q_norms(j) / 3.0).powi(3) + (m3(j).determinant() / 2.0).powi(2)
}

/// Largest |Im| over the eigenvalues of J (0 when all are real).
pub fn lambda_ci(j: &Mat) -> f64 {
    m3(j).complex_eigenvalues().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Eigenvalues of J from the companion matrix of its characteristic polynomial.
pub fn companion_eigenvalues(j: &Mat) -> Vec<nalgebra::Complex<f64>> {
    let m = m3(j);
    let c2 = -m.trace();
    let c1 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let c0 = -m.determinant();
    // λ³ + c2 λ² + c1 λ + c0
    let companion = Matrix3::new(0.0, 0.0, -c0, 1.0, 0.0, -c1, 0.0, 1.0, -c2);
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Vorticity ω = ∇ × v.
pub fn vorticity(j: &Mat) -> [f64; 3] {
    [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]]
}

/// Jacobian at vertex `v` of a sampled field: central differences in the interior,
/// first-order one-sided differences on the boundary. `at` returns the velocity at an
/// integer vertex triple.
pub fn fd_jacobian(dims: [usize; 3], spacing: [f64; 3], at: impl Fn([usize; 3]) -> [f64; 3], v: [usize; 3]) -> Mat {
    let mut j = [[0.0; 3]; 3];
    for axis in 0..3 {
        let shifted = |i: usize| {
            let mut w = v;
            w[axis] = i;
            at(w)
        };
        let (a, b, h) = if v[axis] == 0 {
            (shifted(0), shifted(1), spacing[axis])
        } else if v[axis] == dims[axis] - 1 {
            (shifted(v[axis] - 1), shifted(v[axis]), spacing[axis])
        } else {
            (shifted(v[axis] - 1), shifted(v[axis] + 1), 2.0 * spacing[axis])
        };
        for comp in 0..3 {
            j[comp][axis] = (b[comp] - a[comp]) / h;
        }
    }
    j
}

/// ω_y′ = ω_y − ⟨ω_y⟩ over each horizontal slab, by explicit nested loops (x fastest).
pub fn slab_fluctuation(dims: [usize; 3], omega_y: &[f64]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let mut out = vec![0.0; omega_y.len()];
    for k in 0..nz {
        let mut sum = 0.0;
        for jj in 0..ny {
            for i in 0..nx {
                sum += omega_y[i + nx * (jj + ny * k)];
            }
        }
        let mean = sum / (nx * ny) as f64;
        for jj in 0..ny {
            for i in 0..nx {
                let idx = i + nx * (jj + ny * k);
                out[idx] = omega_y[idx] - mean;
            }
        }
    }
    out
}
