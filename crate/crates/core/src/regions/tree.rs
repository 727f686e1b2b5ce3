use serde::{Deserialize, Serialize};

use super::{isosurface_components, split_region, CellGrid, VortexRegion};
use crate::exec::Execution;
use crate::thresholding::Lambda2Steps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    /// Vortex size factor gating which components may cause a split.
    pub vsf: f64,
    /// Components smaller than this fraction of all cells are ignored.
    pub min_comp_frac: f64,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams { vsf: 3.5, min_comp_frac: 0.0001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub region: VortexRegion,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Isovalue whose split created this node; `None` for roots.
    pub split_iso: Option<f64>,
    /// 0 for roots; `k + 1` for nodes created by the k-th isovalue of the schedule.
    pub level: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Forest of vortical regions; one root per grown region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexTree {
    pub nodes: Vec<TreeNode>,
}

impl VortexTree {
    pub fn roots(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.parent.is_none())
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn get(&self, id: usize) -> Option<&TreeNode> {
        self.nodes.get(id)
    }

    /// Largest level present (0 for a forest of unsplit roots).
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// All strict descendants of `id`, breadth first.
    pub fn descendants(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut frontier = self.nodes[id].children.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for c in frontier {
                out.push(c);
                next.extend(self.nodes[c].children.iter().copied());
            }
            frontier = next;
        }
        out
    }
}

/// Top-down splitting of every grown region through the isovalue schedule.
///
/// At each isovalue every current leaf is tested independently (in parallel when `exec`
/// allows); the children of split leaves become the leaves for the next isovalue.
pub fn build_tree(
    grid: &CellGrid,
    regions: &[VortexRegion],
    steps: &Lambda2Steps,
    params: &SplitParams,
    exec: Execution,
) -> VortexTree {
    let domain_diag = grid.domain_diagonal();
    let mut nodes: Vec<TreeNode> = regions
        .iter()
        .enumerate()
        .map(|(id, r)| TreeNode {
            id,
            region: VortexRegion { id, ..r.clone() },
            parent: None,
            children: Vec::new(),
            split_iso: None,
            level: 0,
        })
        .collect();
    let mut leaves: Vec<usize> = (0..nodes.len()).collect();
    for (k, &iso) in steps.values.iter().enumerate() {
        let splits = exec.map_slice(&leaves, |&id| {
            let region = &nodes[id].region;
            let comps = isosurface_components(grid, region, iso, params.min_comp_frac);
            split_region(grid, region, &comps, domain_diag, params.vsf)
        });
        let mut next = Vec::with_capacity(leaves.len());
        for (&leaf, children) in leaves.iter().zip(splits) {
            if children.is_empty() {
                next.push(leaf);
                continue;
            }
            for child in children {
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    region: VortexRegion { id, ..child },
                    parent: Some(leaf),
                    children: Vec::new(),
                    split_iso: Some(iso),
                    level: k + 1,
                });
                nodes[leaf].children.push(id);
                next.push(id);
            }
        }
        leaves = next;
    }
    VortexTree { nodes }
}
