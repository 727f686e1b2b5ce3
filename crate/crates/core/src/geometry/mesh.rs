use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Vec3};
use crate::regions::{CellGrid, LocalBox, VortexRegion, ABSENT};

/// Triangle surface; triangles are wound counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl SurfaceMesh {
    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> BTreeSet<(u32, u32)> {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Enclosed volume by the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                linalg::dot(a, linalg::cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Every edge is used by exactly two triangles, once in each direction.
    pub fn is_closed_oriented(&self) -> bool {
        let mut directed: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        directed.iter().all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }

    fn neighbors(&self) -> Vec<Vec<u32>> {
        let mut nb: Vec<Vec<u32>> = vec![Vec::new(); self.vertices.len()];
        for (a, b) in self.edges() {
            nb[a as usize].push(b);
            nb[b as usize].push(a);
        }
        nb
    }
}

/// Outer surface of a region: every cell face not shared with another region cell, split
/// into two triangles.
pub fn extract_boundary_surface(grid: &CellGrid, region: &VortexRegion) -> SurfaceMesh {
    let lb = LocalBox::around(grid, &region.cells, 1);
    let member = lb.membership(grid, &region.cells);
    let vdims = grid.dims.map(|n| n + 1);
    let mut index_of: HashMap<usize, u32> = HashMap::new();
    let mut mesh = SurfaceMesh::default();
    let mut vertex = |v: [usize; 3], mesh: &mut SurfaceMesh| -> u32 {
        let key = v[0] + vdims[0] * (v[1] + vdims[1] * v[2]);
        *index_of.entry(key).or_insert_with(|| {
            mesh.vertices.push([0, 1, 2].map(|a| grid.origin[a] + v[a] as f64 * grid.spacing[a]));
            (mesh.vertices.len() - 1) as u32
        })
    };
    for &c in &region.cells {
        let l = lb.coords(lb.local_of_global(grid, c));
        let cc = grid.coords(c);
        for face in 0..6 {
            let axis = face / 2;
            let positive = face % 2 == 1;
            let mut d = [0isize; 3];
            d[axis] = if positive { 1 } else { -1 };
            let outside = lb.offset(l, d).is_none_or(|n| member[n] == ABSENT);
            if !outside {
                continue;
            }
            let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut base = cc;
            if positive {
                base[axis] += 1;
            }
            let mut q1 = base;
            q1[u] += 1;
            let mut q2 = q1;
            q2[w] += 1;
            let mut q3 = base;
            q3[w] += 1;
            let ids = [base, q1, q2, q3].map(|q| vertex(q, &mut mesh));
            if positive {
                mesh.triangles.push([ids[0], ids[1], ids[2]]);
                mesh.triangles.push([ids[0], ids[2], ids[3]]);
            } else {
                mesh.triangles.push([ids[0], ids[2], ids[1]]);
                mesh.triangles.push([ids[0], ids[3], ids[2]]);
            }
        }
    }
    mesh
}

/// Umbrella-operator smoothing: each iteration moves every vertex by `factor` toward the
/// mean of its one-ring neighbours. Connectivity is unchanged.
pub fn laplacian_smooth(mesh: &SurfaceMesh, iterations: usize, factor: f64) -> SurfaceMesh {
    let nb = mesh.neighbors();
    let mut pos = mesh.vertices.clone();
    for _ in 0..iterations {
        pos = pos
            .iter()
            .zip(&nb)
            .map(|(&p, ring)| {
                if ring.is_empty() {
                    return p;
                }
                let mut mean = [0.0; 3];
                for &j in ring {
                    mean = linalg::add(mean, pos[j as usize]);
                }
                let mean = linalg::scale(mean, 1.0 / ring.len() as f64);
                linalg::add(p, linalg::scale(linalg::sub(mean, p), factor))
            })
            .collect();
    }
    SurfaceMesh { vertices: pos, triangles: mesh.triangles.clone() }
}
