use serde::{Deserialize, Serialize};

use super::nearest::LabelledPoints;
use super::{cells_bbox, connected_components, CellGrid, LocalBox, VortexRegion, ABSENT, FACE_OFFSETS};

/// One face-connected piece of a region's sublevel set at a given isovalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub color: usize,
    pub cells: Vec<usize>,
    /// Bounding-box diagonal, world units.
    pub diag_len: f64,
}

/// Face-connected components of the region cells whose scalar lies below `iso`.
///
/// Components with fewer than `min_comp_frac` of all grid cells are discarded; the survivors
/// are coloured `0..m` in order of their smallest cell index.
pub fn isosurface_components(grid: &CellGrid, region: &VortexRegion, iso: f64, min_comp_frac: f64) -> Vec<Component> {
    let below: Vec<usize> = region.cells.iter().copied().filter(|&c| grid.values[c] < iso).collect();
    let min_cells = min_comp_frac * grid.cell_count() as f64;
    connected_components(grid, &below)
        .into_iter()
        .filter(|c| c.len() as f64 >= min_cells)
        .enumerate()
        .map(|(color, cells)| Component { color, diag_len: cells_bbox(grid, &cells).diagonal(), cells })
        .collect()
}

/// Splits `region` around its isosurface components.
///
/// Components whose local length ratio is below `vsf / G_r` are ignored (the largest one is
/// always kept). With fewer than two survivors the region is not split and the result is
/// empty. Otherwise every cell joins the component with the nearest cell centre and each
/// colour class contributes its face-connected pieces as children, ordered by smallest cell.
pub fn split_region(
    grid: &CellGrid,
    region: &VortexRegion,
    components: &[Component],
    domain_diag: f64,
    vsf: f64,
) -> Vec<VortexRegion> {
    if components.len() < 2 {
        return Vec::new();
    }
    let global_ratio = region.diag_len / domain_diag;
    let min_local = vsf / global_ratio;
    let mut survivors: Vec<&Component> =
        components.iter().filter(|c| c.diag_len / region.diag_len >= min_local).collect();
    if survivors.is_empty() {
        let largest = components
            .iter()
            .max_by(|a, b| a.diag_len.total_cmp(&b.diag_len).then(b.color.cmp(&a.color)))
            .unwrap();
        survivors.push(largest);
    }
    if survivors.len() < 2 {
        return Vec::new();
    }

    let lb = LocalBox::around(grid, &region.cells, 0);
    let mut color_of = vec![ABSENT; lb.len()];
    for comp in &survivors {
        for &c in &comp.cells {
            color_of[lb.local_of_global(grid, c)] = comp.color as u32;
        }
    }
    // Only boundary cells of a component can be the nearest one to an outside cell.
    let mut boundary = Vec::new();
    for comp in &survivors {
        for &c in &comp.cells {
            let l = lb.coords(lb.local_of_global(grid, c));
            let inner = FACE_OFFSETS
                .iter()
                .all(|&d| lb.offset(l, d).is_some_and(|n| color_of[n] == comp.color as u32));
            if !inner {
                boundary.push((grid.coords(c).map(|v| v as i64), comp.color as u32));
            }
        }
    }
    let lookup = LabelledPoints::new(boundary, grid.spacing);

    let max_color = survivors.iter().map(|c| c.color).max().unwrap();
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); max_color + 1];
    for &c in &region.cells {
        let own = color_of[lb.local_of_global(grid, c)];
        let color = if own != ABSENT {
            own
        } else {
            lookup.nearest_label(grid.coords(c).map(|v| v as i64)).expect("survivors are non-empty")
        };
        classes[color as usize].push(c);
    }
    let mut children: Vec<Vec<usize>> = classes
        .into_iter()
        .filter(|c| !c.is_empty())
        .flat_map(|cells| connected_components(grid, &cells))
        .collect();
    children.sort_by_key(|c| c[0]);
    children.into_iter().map(|cells| VortexRegion::from_cells(0, cells, grid)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::tests::grid_from_fn;
    use crate::regions::grow_region;

    fn dumbbell() -> CellGrid {
        // two deep lobes joined by a shallow neck along x
        grid_from_fn(24, |p| {
            let r2 = (p[1] - 12.0).powi(2) + (p[2] - 12.0).powi(2);
            if r2 > 9.0 || !(3.0..21.0).contains(&p[0]) {
                return 0.0;
            }
            let lobe = |c: f64| (-((p[0] - c).powi(2)) / 8.0).exp();
            -0.3 - 0.7 * (lobe(7.0) + lobe(17.0))
        })
    }

    #[test]
    fn dumbbell_has_two_components() {
        let g = dumbbell();
        let r = grow_region(&g, g.index([7, 12, 12]), -0.1);
        let comps = isosurface_components(&g, &r, -0.5, 0.0);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].color, 0);
        assert!(comps[0].cells[0] < comps[1].cells[0]);
        // below every value: nothing
        assert!(isosurface_components(&g, &r, -5.0, 0.0).is_empty());
        // just under the growth threshold: one component that is nearly the whole region
        let one = isosurface_components(&g, &r, -0.1 - 1e-9, 0.0);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].cells.len(), r.len());
    }

    #[test]
    fn split_partitions_parent() {
        let g = dumbbell();
        let r = grow_region(&g, g.index([7, 12, 12]), -0.1);
        let comps = isosurface_components(&g, &r, -0.5, 0.0);
        let children = split_region(&g, &r, &comps, g.domain_diagonal(), 0.0);
        assert_eq!(children.len(), 2);
        let mut all: Vec<usize> = children.iter().flat_map(|c| c.cells.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, r.cells);
        // the lobes split at the neck midpoint
        assert!(children[0].contains(g.index([9, 12, 12])));
        assert!(children[1].contains(g.index([15, 12, 12])));
    }

    #[test]
    fn single_component_does_not_split() {
        let g = dumbbell();
        let r = grow_region(&g, g.index([7, 12, 12]), -0.1);
        let comps = isosurface_components(&g, &r, -0.2, 0.0);
        assert_eq!(comps.len(), 1);
        assert!(split_region(&g, &r, &comps, g.domain_diagonal(), 0.0).is_empty());
    }

    #[test]
    fn vsf_gate_keeps_largest_only() {
        let g = dumbbell();
        let r = grow_region(&g, g.index([7, 12, 12]), -0.1);
        let comps = isosurface_components(&g, &r, -0.5, 0.0);
        // with the default factor no component passes, the largest survives alone: no split
        assert!(split_region(&g, &r, &comps, g.domain_diagonal(), 3.5).is_empty());
    }
}
