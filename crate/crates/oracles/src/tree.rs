//! Brute-force region extraction and hierarchical splitting over a cell lattice.

use crate::cc::{components, Lattice};

pub struct CellField<'a> {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub values: &'a [f64],
}

impl CellField<'_> {
    fn lattice(&self) -> Lattice {
        Lattice { dims: self.dims }
    }

    fn diag(&self, cells: &[usize]) -> f64 {
        let l = self.lattice();
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for &c in cells {
            let p = l.coords(c);
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (0..3).map(|a| ((hi[a] - lo[a] + 1) as f64 * self.spacing[a]).powi(2)).sum::<f64>().sqrt()
    }

    fn domain_diag(&self) -> f64 {
        (0..3).map(|a| (self.dims[a] as f64 * self.spacing[a]).powi(2)).sum::<f64>().sqrt()
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        let l = self.lattice();
        let (p, q) = (l.coords(a), l.coords(b));
        (0..3).map(|k| ((p[k] as f64 - q[k] as f64) * self.spacing[k]).powi(2)).sum()
    }
}

/// Cells strictly below `iso` that are the minimum of their 26-neighbourhood, ties going to
/// the lower index.
pub fn seeds(f: &CellField<'_>, iso: f64) -> Vec<usize> {
    let l = f.lattice();
    (0..l.len())
        .filter(|&c| {
            let v = f.values[c];
            if v >= iso {
                return false;
            }
            let p = l.coords(c);
            for dz in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let q = [p[0] as i64 + dx, p[1] as i64 + dy, p[2] as i64 + dz];
                        if (0..3).any(|a| q[a] < 0 || q[a] >= f.dims[a] as i64) {
                            continue;
                        }
                        let n = l.index([q[0] as usize, q[1] as usize, q[2] as usize]);
                        let w = f.values[n];
                        if !(v < w || (v == w && c < n)) {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect()
}

/// Sub-threshold components that contain a seed and are not noise, as sorted cell sets.
pub fn regions(f: &CellField<'_>, iso: f64, noise_frac: f64) -> Vec<Vec<usize>> {
    let l = f.lattice();
    let below: Vec<usize> = (0..l.len()).filter(|&c| f.values[c] < iso).collect();
    let seeds = seeds(f, iso);
    let min_cells = noise_frac * l.len() as f64;
    components(&l, &below)
        .into_iter()
        .filter(|comp| comp.len() as f64 >= min_cells && seeds.iter().any(|s| comp.binary_search(s).is_ok()))
        .collect()
}

/// One split attempt; `None` when the region stays whole.
pub fn split_once(f: &CellField<'_>, region: &[usize], iso: f64, vsf: f64, min_comp_frac: f64) -> Option<Vec<Vec<usize>>> {
    let l = f.lattice();
    let below: Vec<usize> = region.iter().copied().filter(|&c| f.values[c] < iso).collect();
    let min_cells = min_comp_frac * l.len() as f64;
    let comps: Vec<Vec<usize>> = components(&l, &below).into_iter().filter(|c| c.len() as f64 >= min_cells).collect();
    if comps.len() < 2 {
        return None;
    }
    // gate: a component counts if its length relative to the region is at least vsf / G_r
    let region_diag = f.diag(region);
    let global = region_diag / f.domain_diag();
    let survivors: Vec<usize> = (0..comps.len()).filter(|&i| f.diag(&comps[i]) / region_diag >= vsf / global).collect();
    if survivors.len() < 2 {
        return None;
    }
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for &c in region {
        let mut best = (f64::INFINITY, usize::MAX);
        for &s in &survivors {
            for &m in &comps[s] {
                let d = f.dist2(c, m);
                if d < best.0 || (d == best.0 && s < best.1) {
                    best = (d, s);
                }
            }
        }
        classes[best.1].push(c);
    }
    let mut children: Vec<Vec<usize>> =
        classes.into_iter().filter(|c| !c.is_empty()).flat_map(|c| components(&l, &c)).collect();
    children.sort_by_key(|c| c[0]);
    Some(children)
}

/// Leaves after sweeping every isovalue in order over every current leaf.
pub fn leaves(f: &CellField<'_>, region: &[usize], steps: &[f64], vsf: f64, min_comp_frac: f64) -> Vec<Vec<usize>> {
    let mut current = vec![region.to_vec()];
    for &iso in steps {
        let mut next = Vec::new();
        for leaf in current {
            match split_once(f, &leaf, iso, vsf, min_comp_frac) {
                Some(children) => next.extend(children),
                None => next.push(leaf),
            }
        }
        current = next;
    }
    current.sort_by_key(|c| c[0]);
    current
}
