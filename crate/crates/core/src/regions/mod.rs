//! Vortical region extraction and top-down hierarchical splitting.
//!
//! Regions live on the hexahedral cells of the grid. A cell's scalar is the minimum of its
//! eight vertex values, so "the cell has a vertex with λ₂ < iso" is simply `cell < iso` and
//! every sublevel set below is a set of cells.

mod nearest;
mod simplify;
mod split;
mod tree;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::fields::{FieldSet, GridMeta};
use crate::linalg::{self, Vec3};

pub use simplify::{simplify_region, SimplifyOutcome, SimplifyParams};
pub use split::{isosurface_components, split_region, Component};
pub use tree::{build_tree, SplitParams, TreeNode, VortexTree};

/// Per-cell scalar (minimum over the cell's vertices) on the grid's cell lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub dims: [usize; 3],
    pub spacing: Vec3,
    pub origin: Vec3,
    pub values: Vec<f64>,
}

impl CellGrid {
    pub fn from_vertex_values(meta: &GridMeta, vertex_values: &[f64], exec: Execution) -> Self {
        assert_eq!(vertex_values.len(), meta.vertex_count());
        let dims = meta.cell_dims();
        let n = dims[0] * dims[1] * dims[2];
        let values = exec.map_range(n, |c| {
            let [i, j, k] = [c % dims[0], (c / dims[0]) % dims[1], c / (dims[0] * dims[1])];
            let mut m = f64::INFINITY;
            for corner in 0..8 {
                let v = [i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1)];
                m = m.min(vertex_values[meta.index(v)]);
            }
            m
        });
        CellGrid { dims, spacing: meta.spacing, origin: meta.origin, values }
    }

    /// Cell grid of the λ₂ field.
    pub fn lambda2(fields: &FieldSet, exec: Execution) -> Self {
        Self::from_vertex_values(&fields.meta, &fields.lambda2, exec)
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// World-space centre of a cell.
    pub fn center(&self, index: usize) -> Vec3 {
        let c = self.coords(index);
        [0, 1, 2].map(|a| self.origin[a] + (c[a] as f64 + 0.5) * self.spacing[a])
    }

    /// Diagonal of the whole domain.
    pub fn domain_diagonal(&self) -> f64 {
        linalg::norm([0, 1, 2].map(|a| self.dims[a] as f64 * self.spacing[a]))
    }

    /// The up-to-six face-adjacent cells.
    pub fn face_neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(index);
        (0..6).filter_map(move |f| {
            let axis = f / 2;
            let mut n = c;
            if f % 2 == 0 {
                n[axis] = c[axis].checked_sub(1)?;
            } else {
                n[axis] = c[axis] + 1;
                if n[axis] >= self.dims[axis] {
                    return None;
                }
            }
            Some(self.index(n))
        })
    }

    /// Cells within the 3×3×3 block around `index`, excluding the cell itself.
    pub fn box_neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(index);
        (0..27).filter(|&o| o != 13).filter_map(move |o| {
            let off = [o % 3, (o / 3) % 3, o / 9];
            let mut n = [0usize; 3];
            for a in 0..3 {
                let v = c[a] + off[a];
                if v == 0 || v > self.dims[a] {
                    return None;
                }
                n[a] = v - 1;
            }
            Some(self.index(n))
        })
    }
}

/// Axis-aligned box in world units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn diagonal(&self) -> f64 {
        linalg::norm(linalg::sub(self.max, self.min))
    }
}

/// Bounding box, in world units, of the union of the given cells.
pub fn cells_bbox(grid: &CellGrid, cells: &[usize]) -> Aabb {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for &c in cells {
        let p = grid.coords(c);
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    Aabb {
        min: [0, 1, 2].map(|a| grid.origin[a] + lo[a] as f64 * grid.spacing[a]),
        max: [0, 1, 2].map(|a| grid.origin[a] + (hi[a] + 1) as f64 * grid.spacing[a]),
    }
}

/// A face-connected set of cells forming one (candidate) vortex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexRegion {
    pub id: usize,
    /// Linear cell indices, ascending.
    pub cells: Vec<usize>,
    pub bbox: Aabb,
    pub diag_len: f64,
}

impl VortexRegion {
    pub fn from_cells(id: usize, mut cells: Vec<usize>, grid: &CellGrid) -> Self {
        assert!(!cells.is_empty(), "a region needs at least one cell");
        cells.sort_unstable();
        cells.dedup();
        let bbox = cells_bbox(grid, &cells);
        VortexRegion { id, cells, diag_len: bbox.diagonal(), bbox }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// Mean cell scalar over the region.
    pub fn mean_value(&self, grid: &CellGrid) -> f64 {
        self.cells.iter().map(|&c| grid.values[c]).sum::<f64>() / self.cells.len() as f64
    }
}

/// Dense lookup table over the cell-space bounding box of a cell subset, optionally padded.
///
/// Local coordinates may extend past the grid when padded; such cells are never members.
#[derive(Debug, Clone)]
pub(crate) struct LocalBox {
    pub lo: [isize; 3],
    pub dims: [usize; 3],
}

pub(crate) const ABSENT: u32 = u32::MAX;

impl LocalBox {
    pub fn around(grid: &CellGrid, cells: &[usize], pad: usize) -> Self {
        let mut lo = [isize::MAX; 3];
        let mut hi = [isize::MIN; 3];
        for &c in cells {
            let p = grid.coords(c);
            for a in 0..3 {
                lo[a] = lo[a].min(p[a] as isize);
                hi[a] = hi[a].max(p[a] as isize);
            }
        }
        let pad = pad as isize;
        let lo = lo.map(|v| v - pad);
        let dims = [0, 1, 2].map(|a| (hi[a] + pad - lo[a] + 1) as usize);
        LocalBox { lo, dims }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn local_of_global(&self, grid: &CellGrid, cell: usize) -> usize {
        let p = grid.coords(cell);
        let l = [0, 1, 2].map(|a| (p[a] as isize - self.lo[a]) as usize);
        self.index(l)
    }

    #[inline]
    pub fn index(&self, l: [usize; 3]) -> usize {
        l[0] + self.dims[0] * (l[1] + self.dims[1] * l[2])
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// Local neighbour at integer offset, if inside the box.
    #[inline]
    pub fn offset(&self, l: [usize; 3], d: [isize; 3]) -> Option<usize> {
        let mut n = [0usize; 3];
        for a in 0..3 {
            let v = l[a] as isize + d[a];
            if v < 0 || v as usize >= self.dims[a] {
                return None;
            }
            n[a] = v as usize;
        }
        Some(self.index(n))
    }

    /// Table mapping each local slot to the position of the cell in `cells`, or [`ABSENT`].
    pub fn membership(&self, grid: &CellGrid, cells: &[usize]) -> Vec<u32> {
        let mut table = vec![ABSENT; self.len()];
        for (pos, &c) in cells.iter().enumerate() {
            table[self.local_of_global(grid, c)] = pos as u32;
        }
        table
    }
}

pub(crate) const FACE_OFFSETS: [[isize; 3]; 6] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];

pub(crate) fn box_offsets() -> impl Iterator<Item = [isize; 3]> {
    (0..27).filter(|&o| o != 13).map(|o| [o % 3 - 1, (o / 3) % 3 - 1, o / 9 - 1])
}

/// Face-connected components of `cells` (ascending input gives components ordered by their
/// smallest cell, each sorted ascending).
pub(crate) fn connected_components(grid: &CellGrid, cells: &[usize]) -> Vec<Vec<usize>> {
    if cells.is_empty() {
        return Vec::new();
    }
    let lb = LocalBox::around(grid, cells, 0);
    let member = lb.membership(grid, cells);
    let mut label = vec![ABSENT; cells.len()];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..cells.len() {
        if label[start] != ABSENT {
            continue;
        }
        let id = comps.len() as u32;
        let mut comp = Vec::new();
        label[start] = id;
        queue.push_back(start);
        while let Some(pos) = queue.pop_front() {
            comp.push(cells[pos]);
            let l = lb.coords(lb.local_of_global(grid, cells[pos]));
            for d in FACE_OFFSETS {
                if let Some(n) = lb.offset(l, d) {
                    let m = member[n];
                    if m != ABSENT && label[m as usize] == ABSENT {
                        label[m as usize] = id;
                        queue.push_back(m as usize);
                    }
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Seed cells: sub-threshold cells that are the strict minimum of their 3×3×3 neighbourhood.
///
/// Equal values are ordered by linear index, so of two tied neighbours only the lower index
/// can be a seed.
pub fn find_seed_cells(grid: &CellGrid, lambda2_init: f64, exec: Execution) -> Vec<usize> {
    let flags = exec.map_range(grid.cell_count(), |c| {
        let v = grid.values[c];
        v < lambda2_init
            && grid.box_neighbors(c).all(|n| {
                let w = grid.values[n];
                v < w || (v == w && c < n)
            })
    });
    flags.iter().enumerate().filter_map(|(c, &s)| s.then_some(c)).collect()
}

fn grow_into(grid: &CellGrid, seed: usize, iso: f64, claimed: &mut [bool]) -> Vec<usize> {
    let mut cells = Vec::new();
    let mut queue = VecDeque::from([seed]);
    claimed[seed] = true;
    while let Some(c) = queue.pop_front() {
        cells.push(c);
        for n in grid.face_neighbors(c) {
            if !claimed[n] && grid.values[n] < iso {
                claimed[n] = true;
                queue.push_back(n);
            }
        }
    }
    cells
}

/// Breadth-first growth over face neighbours whose cell scalar is below `lambda2_init`.
pub fn grow_region(grid: &CellGrid, seed: usize, lambda2_init: f64) -> VortexRegion {
    let mut claimed = vec![false; grid.cell_count()];
    let cells = grow_into(grid, seed, lambda2_init, &mut claimed);
    VortexRegion::from_cells(0, cells, grid)
}

/// Grows a region from every seed, strongest first, skipping seeds already absorbed and
/// dropping regions smaller than `noise_frac` of all cells.
pub fn extract_all_regions(grid: &CellGrid, lambda2_init: f64, noise_frac: f64, exec: Execution) -> Vec<VortexRegion> {
    let mut seeds = find_seed_cells(grid, lambda2_init, exec);
    seeds.sort_by(|&a, &b| grid.values[a].total_cmp(&grid.values[b]).then(a.cmp(&b)));
    let min_cells = noise_frac * grid.cell_count() as f64;
    let mut claimed = vec![false; grid.cell_count()];
    let mut regions = Vec::new();
    for seed in seeds {
        if claimed[seed] {
            continue;
        }
        let cells = grow_into(grid, seed, lambda2_init, &mut claimed);
        if (cells.len() as f64) < min_cells {
            continue;
        }
        let id = regions.len();
        regions.push(VortexRegion::from_cells(id, cells, grid));
    }
    regions
}
