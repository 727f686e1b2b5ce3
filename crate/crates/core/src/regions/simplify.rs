use serde::{Deserialize, Serialize};

use super::{box_offsets, connected_components, CellGrid, LocalBox, VortexRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplifyParams {
    /// First pass: drop cells with fewer 26-neighbours in the region.
    pub min_neighbors: usize,
    /// Second pass: drop weaker-than-average cells with fewer 26-neighbours.
    pub min_neighbors_weak: usize,
}

impl Default for SimplifyParams {
    fn default() -> Self {
        SimplifyParams { min_neighbors: 6, min_neighbors_weak: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplifyOutcome {
    pub region: VortexRegion,
    /// Simplification would have removed every cell; `region` is the unmodified input.
    pub emptied: bool,
}

fn neighbor_counts(lb: &LocalBox, alive: &[bool], locals: &[usize]) -> Vec<usize> {
    locals
        .iter()
        .map(|&l| {
            let p = lb.coords(l);
            box_offsets().filter(|&d| lb.offset(p, d).is_some_and(|n| alive[n])).count()
        })
        .collect()
}

/// Removes ill-connected and weak cells, keeping the largest face-connected remainder.
///
/// Pass one drops cells with fewer than `min_neighbors` region cells in their 26-neighbourhood.
/// Pass two drops surviving cells whose scalar is above the region mean (weaker λ₂) and that
/// have fewer than `min_neighbors_weak` surviving neighbours. Removals within a pass are
/// simultaneous.
pub fn simplify_region(grid: &CellGrid, region: &VortexRegion, params: &SimplifyParams) -> SimplifyOutcome {
    let lb = LocalBox::around(grid, &region.cells, 0);
    let locals: Vec<usize> = region.cells.iter().map(|&c| lb.local_of_global(grid, c)).collect();
    let mut alive = vec![false; lb.len()];
    for &l in &locals {
        alive[l] = true;
    }

    let counts = neighbor_counts(&lb, &alive, &locals);
    for (&l, &n) in locals.iter().zip(&counts) {
        if n < params.min_neighbors {
            alive[l] = false;
        }
    }

    let mean = region.mean_value(grid);
    let counts = neighbor_counts(&lb, &alive, &locals);
    let mut drop = Vec::new();
    for ((&l, &n), &c) in locals.iter().zip(&counts).zip(&region.cells) {
        if alive[l] && grid.values[c] > mean && n < params.min_neighbors_weak {
            drop.push(l);
        }
    }
    for l in drop {
        alive[l] = false;
    }

    let survivors: Vec<usize> = locals.iter().zip(&region.cells).filter(|(&l, _)| alive[l]).map(|(_, &c)| c).collect();
    let largest = connected_components(grid, &survivors)
        .into_iter()
        .reduce(|best, c| if c.len() > best.len() { c } else { best });
    match largest {
        Some(cells) => SimplifyOutcome { region: VortexRegion::from_cells(region.id, cells, grid), emptied: false },
        None => {
            log::warn!("simplification would empty region {}; keeping it unmodified", region.id);
            SimplifyOutcome { region: region.clone(), emptied: true }
        }
    }
}
