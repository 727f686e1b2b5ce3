//! Curve skeletons by topology-preserving voxel thinning.
//!
//! The region's cell mask is thinned with six directional sub-iterations that only delete
//! simple points (26-connected foreground, 6-connected background) and never delete curve
//! endpoints. The longest geodesic through the thinned voxels becomes the main path, which is
//! lightly smoothed, extended along its end tangents back to the region boundary (thinning
//! erodes roughly one radius off each end) and decimated. Side branches that are short
//! compared with the local radius are pruned.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::fields::GridMeta;
use crate::linalg::{self, Vec3};
use crate::regions::{CellGrid, LocalBox, VortexRegion, ABSENT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    pub smoothing_iterations: usize,
    /// Extend the main path along its end tangents while inside the region.
    pub extend_ends: bool,
    /// Douglas–Peucker tolerance as a fraction of the mean main-path point spacing.
    pub decimation: f64,
    /// Branches no deeper than this multiple of the attachment's boundary distance are pruned.
    pub spur_factor: f64,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams { smoothing_iterations: 2, extend_ends: true, decimation: 0.5, spur_factor: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonNode {
    pub position: Vec3,
    pub omega_y_prime: f64,
}

/// Skeleton graph. The main path occupies the leading nodes, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub nodes: Vec<SkeletonNode>,
    pub edges: Vec<[usize; 2]>,
    pub main_path: Vec<usize>,
    /// Thinning left fewer than two voxels; the main path runs through cell centres instead.
    pub degenerate: bool,
}

impl Skeleton {
    pub fn main_path_points(&self) -> Vec<Vec3> {
        self.main_path.iter().map(|&i| self.nodes[i].position).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e[0]] += 1;
            deg[e[1]] += 1;
        }
        deg
    }
}

struct Cube {
    n26: [Vec<usize>; 27],
    n6: [Vec<usize>; 27],
    in_n18: [bool; 27],
}

fn cube() -> &'static Cube {
    static CUBE: OnceLock<Cube> = OnceLock::new();
    CUBE.get_or_init(|| {
        let pos = |o: usize| [(o % 3) as i32, ((o / 3) % 3) as i32, (o / 9) as i32];
        let mut n26: [Vec<usize>; 27] = Default::default();
        let mut n6: [Vec<usize>; 27] = Default::default();
        let mut in_n18 = [false; 27];
        for a in 0..27 {
            let pa = pos(a);
            let off: i32 = (0..3).map(|k| (pa[k] - 1).abs()).sum();
            in_n18[a] = a != 13 && off <= 2;
            for b in 0..27 {
                if a == b || b == 13 {
                    continue;
                }
                let pb = pos(b);
                let d: Vec<i32> = (0..3).map(|k| (pa[k] - pb[k]).abs()).collect();
                if d.iter().all(|&x| x <= 1) {
                    n26[a].push(b);
                    if d.iter().sum::<i32>() == 1 {
                        n6[a].push(b);
                    }
                }
            }
        }
        Cube { n26, n6, in_n18 }
    })
}

const FACES: [usize; 6] = [4, 22, 10, 16, 12, 14];

/// Whether deleting the centre of a 3×3×3 neighbourhood preserves topology.
fn is_simple(nb: &[bool; 27]) -> bool {
    let cube = cube();
    let mut seen = [false; 27];
    let mut stack = Vec::new();

    let mut fg = 0;
    for start in 0..27 {
        if start == 13 || !nb[start] || seen[start] {
            continue;
        }
        fg += 1;
        if fg > 1 {
            return false;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(o) = stack.pop() {
            for &m in &cube.n26[o] {
                if nb[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    if fg != 1 {
        return false;
    }

    let mut seen = [false; 27];
    let mut bg = 0;
    for &start in &FACES {
        if nb[start] || seen[start] {
            continue;
        }
        bg += 1;
        if bg > 1 {
            return false;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(o) = stack.pop() {
            for &m in &cube.n6[o] {
                if cube.in_n18[m] && !nb[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    bg == 1
}

fn neighborhood(lb: &LocalBox, mask: &[bool], l: usize) -> [bool; 27] {
    let p = lb.coords(l);
    let mut nb = [false; 27];
    for (o, slot) in nb.iter_mut().enumerate() {
        let d = [(o % 3) as isize - 1, ((o / 3) % 3) as isize - 1, (o / 9) as isize - 1];
        *slot = lb.offset(p, d).is_some_and(|n| mask[n]);
    }
    nb
}

/// Directional sequential thinning to a curve. Within each direction the border voxels are
/// re-checked and deleted one parity subfield at a time: voxels of one subfield are never
/// 26-adjacent, so each pass erodes at most a thin shell and no voxel order matters.
fn thin(lb: &LocalBox, mask: &mut [bool]) -> Vec<usize> {
    const DIRS: [[isize; 3]; 6] = [[0, 0, 1], [0, 0, -1], [0, 1, 0], [0, -1, 0], [1, 0, 0], [-1, 0, 0]];
    // Removable unless it is an endpoint (the centre plus exactly one neighbour) or not simple.
    let removable = |mask: &[bool], l: usize| {
        let nb = neighborhood(lb, mask, l);
        nb.iter().filter(|&&b| b).count() > 2 && is_simple(&nb)
    };
    let subfield = |l: usize| {
        let p = lb.coords(l);
        (p[0] & 1) | ((p[1] & 1) << 1) | ((p[2] & 1) << 2)
    };
    let mut alive: Vec<usize> = (0..mask.len()).filter(|&l| mask[l]).collect();
    loop {
        let mut deleted = 0;
        for d in DIRS {
            let candidates: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&l| !lb.offset(lb.coords(l), d).is_some_and(|n| mask[n]))
                .filter(|&l| removable(mask, l))
                .collect();
            for field in 0..8 {
                let batch: Vec<usize> =
                    candidates.iter().copied().filter(|&l| subfield(l) == field && removable(mask, l)).collect();
                for l in batch {
                    mask[l] = false;
                    deleted += 1;
                }
            }
            alive.retain(|&l| mask[l]);
        }
        if deleted == 0 {
            return alive;
        }
    }
}

/// Chessboard distance of every foreground slot to the nearest background slot.
fn boundary_distance(lb: &LocalBox, mask: &[bool]) -> Vec<u32> {
    let mut dt = vec![u32::MAX; mask.len()];
    let mut queue = VecDeque::new();
    for (l, &m) in mask.iter().enumerate() {
        if !m {
            dt[l] = 0;
            queue.push_back(l);
        }
    }
    while let Some(l) = queue.pop_front() {
        let p = lb.coords(l);
        for d in crate::regions::box_offsets() {
            if let Some(n) = lb.offset(p, d) {
                if dt[n] == u32::MAX {
                    dt[n] = dt[l] + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    dt
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path distances and predecessors over a graph given as adjacency lists.
fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<usize>) {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut prev = vec![usize::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Entry(nd, v));
            }
        }
    }
    (dist, prev)
}

fn farthest(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &d) in dist.iter().enumerate() {
        if d.is_finite() && d > dist[best] {
            best = i;
        }
    }
    best
}

/// Longest geodesic (two-pass farthest search), as node indices.
fn longest_path(adj: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let (d0, _) = dijkstra(adj, 0);
    let a = farthest(&d0);
    let (da, prev) = dijkstra(adj, a);
    let b = farthest(&da);
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = prev[cur];
        path.push(cur);
    }
    path
}

/// 26-adjacency graph over the given local slots, weighted by world distance.
fn voxel_graph(lb: &LocalBox, slots: &[usize], spacing: Vec3) -> Vec<Vec<(usize, f64)>> {
    let mut index = vec![ABSENT; lb.len()];
    for (i, &l) in slots.iter().enumerate() {
        index[l] = i as u32;
    }
    slots
        .iter()
        .map(|&l| {
            let p = lb.coords(l);
            crate::regions::box_offsets()
                .filter_map(|d| {
                    let n = lb.offset(p, d)?;
                    (index[n] != ABSENT).then(|| {
                        let w = linalg::norm([0, 1, 2].map(|a| d[a] as f64 * spacing[a]));
                        (index[n] as usize, w)
                    })
                })
                .collect()
        })
        .collect()
}

fn smooth(points: &mut [Vec3], iterations: usize) {
    let n = points.len();
    if n < 3 {
        return;
    }
    for _ in 0..iterations {
        let old = points.to_vec();
        for i in 1..n - 1 {
            points[i] = [0, 1, 2].map(|a| 0.25 * old[i - 1][a] + 0.5 * old[i][a] + 0.25 * old[i + 1][a]);
        }
    }
}

fn douglas_peucker(points: &[Vec3], eps: f64) -> Vec<Vec3> {
    fn seg_dist(p: Vec3, a: Vec3, b: Vec3) -> f64 {
        let ab = linalg::sub(b, a);
        let len2 = linalg::dot(ab, ab);
        if len2 == 0.0 {
            return linalg::dist(p, a);
        }
        let t = (linalg::dot(linalg::sub(p, a), ab) / len2).clamp(0.0, 1.0);
        linalg::dist(p, linalg::add(a, linalg::scale(ab, t)))
    }
    fn recurse(points: &[Vec3], eps: f64, keep: &mut [bool], lo: usize, hi: usize) {
        if hi <= lo + 1 {
            return;
        }
        let (mut worst, mut at) = (0.0, lo);
        for i in lo + 1..hi {
            let d = seg_dist(points[i], points[lo], points[hi]);
            if d > worst {
                worst = d;
                at = i;
            }
        }
        if worst > eps {
            keep[at] = true;
            recurse(points, eps, keep, lo, at);
            recurse(points, eps, keep, at, hi);
        }
    }
    if points.len() < 3 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    recurse(points, eps, &mut keep, 0, points.len() - 1);
    points.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect()
}

fn containing_cell(grid: &CellGrid, p: Vec3) -> Option<usize> {
    let mut c = [0usize; 3];
    for a in 0..3 {
        let t = ((p[a] - grid.origin[a]) / grid.spacing[a]).floor();
        if t < 0.0 || t >= grid.dims[a] as f64 {
            return None;
        }
        c[a] = t as usize;
    }
    Some(grid.index(c))
}

/// Walk from `end` along `dir` in small steps while staying inside the region.
fn extend(grid: &CellGrid, region: &VortexRegion, end: Vec3, dir: Vec3, max_len: f64) -> Option<Vec3> {
    let step = 0.25 * grid.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut last = None;
    let mut t = step;
    while t <= max_len {
        let p = linalg::add(end, linalg::scale(dir, t));
        match containing_cell(grid, p) {
            Some(c) if region.contains(c) => last = Some(p),
            _ => break,
        }
        t += step;
    }
    last
}

fn end_tangent(points: &[Vec3], at_start: bool) -> Option<Vec3> {
    let n = points.len();
    let k = 3.min(n - 1);
    if at_start {
        linalg::normalize(linalg::sub(points[0], points[k]))
    } else {
        linalg::normalize(linalg::sub(points[n - 1], points[n - 1 - k]))
    }
}

/// Path for regions that thin to a point: longest cell-centre geodesic, or for a single
/// cell the segment between the opposite face centres along its longest side.
fn degenerate_path(grid: &CellGrid, region: &VortexRegion) -> Vec<Vec3> {
    if region.len() == 1 {
        let c = grid.center(region.cells[0]);
        let axis = (0..3).max_by(|&a, &b| grid.spacing[a].total_cmp(&grid.spacing[b]).then(b.cmp(&a))).unwrap();
        let mut a = c;
        let mut b = c;
        a[axis] -= 0.5 * grid.spacing[axis];
        b[axis] += 0.5 * grid.spacing[axis];
        return vec![a, b];
    }
    let lb = LocalBox::around(grid, &region.cells, 0);
    let slots: Vec<usize> = region.cells.iter().map(|&c| lb.local_of_global(grid, c)).collect();
    let adj = voxel_graph(&lb, &slots, grid.spacing);
    longest_path(&adj).into_iter().map(|i| grid.center(region.cells[i])).collect()
}

/// Curve skeleton of a connected region, with ω_y′ (a vertex field on `meta`) sampled at
/// every node.
pub fn skeletonize(
    grid: &CellGrid,
    region: &VortexRegion,
    meta: &GridMeta,
    omega_y_prime: &[f64],
    params: &SkeletonParams,
) -> Result<Skeleton, GeometryError> {
    if region.is_empty() {
        return Err(GeometryError::EmptyRegion);
    }
    let lb = LocalBox::around(grid, &region.cells, 1);
    let world = |l: usize| {
        let p = lb.coords(l);
        [0, 1, 2].map(|a| grid.origin[a] + ((lb.lo[a] + p[a] as isize) as f64 + 0.5) * grid.spacing[a])
    };
    let mut mask = vec![false; lb.len()];
    for &c in &region.cells {
        mask[lb.local_of_global(grid, c)] = true;
    }
    let dt = boundary_distance(&lb, &mask);
    let max_dt = region.cells.iter().map(|&c| dt[lb.local_of_global(grid, c)]).max().unwrap_or(1);
    let voxels = thin(&lb, &mut mask);

    let sample = |p: Vec3| SkeletonNode { position: p, omega_y_prime: meta.sample_trilinear(omega_y_prime, p) };

    if voxels.len() < 2 {
        log::warn!("region {} thins to fewer than 2 voxels; using a cell-centre path", region.id);
        let path = degenerate_path(grid, region);
        let n = path.len();
        return Ok(Skeleton {
            nodes: path.into_iter().map(sample).collect(),
            edges: (1..n).map(|i| [i - 1, i]).collect(),
            main_path: (0..n).collect(),
            degenerate: true,
        });
    }

    // The thinned set is 26-connected for a connected region; stay on the first voxel's
    // component regardless.
    let adj = voxel_graph(&lb, &voxels, grid.spacing);
    let raw_path = longest_path(&adj);

    let mut points: Vec<Vec3> = raw_path.iter().map(|&i| world(voxels[i])).collect();
    let spacing_mean = if points.len() > 1 {
        points.windows(2).map(|w| linalg::dist(w[0], w[1])).sum::<f64>() / (points.len() - 1) as f64
    } else {
        0.0
    };
    smooth(&mut points, params.smoothing_iterations);
    if params.extend_ends {
        let max_len = 3.0 * max_dt as f64 * grid.spacing.iter().cloned().fold(0.0, f64::max);
        if let Some(p) = end_tangent(&points, true).and_then(|d| extend(grid, region, points[0], d, max_len)) {
            points.insert(0, p);
        }
        if let Some(p) = end_tangent(&points, false).and_then(|d| extend(grid, region, points[points.len() - 1], d, max_len)) {
            points.push(p);
        }
    }
    let points = douglas_peucker(&points, params.decimation * spacing_mean);
    let m = points.len();

    let mut nodes: Vec<SkeletonNode> = points.iter().map(|&p| sample(p)).collect();
    let mut edges: Vec<[usize; 2]> = (1..m).map(|i| [i - 1, i]).collect();
    let nearest_main = |p: Vec3| {
        (0..m).min_by(|&a, &b| linalg::dist(points[a], p).total_cmp(&linalg::dist(points[b], p))).unwrap()
    };

    // Side branches: components of the remaining voxels, each a BFS tree hanging off the
    // main path. Shallow ones are thinning noise.
    let mut on_main = vec![false; voxels.len()];
    for &i in &raw_path {
        on_main[i] = true;
    }
    let mut depth = vec![usize::MAX; voxels.len()];
    let mut parent = vec![usize::MAX; voxels.len()];
    let mut attach = vec![usize::MAX; voxels.len()];
    let mut queue = VecDeque::new();
    for &i in &raw_path {
        depth[i] = 0;
        attach[i] = i;
        queue.push_back(i);
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                attach[v] = attach[u];
                queue.push_back(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; voxels.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..voxels.len() {
        if on_main[s] || comp[s] != usize::MAX || depth[s] == usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            k += 1;
            for &(v, _) in &adj[u] {
                if !on_main[v] && comp[v] == usize::MAX && depth[v] != usize::MAX {
                    comp[v] = id;
                    members.push(v);
                }
            }
        }
        comps.push(members);
    }
    for members in comps {
        let deepest = members.iter().map(|&v| depth[v]).max().unwrap_or(0);
        let junction_dt = members.iter().map(|&v| dt[voxels[attach[v]]]).max().unwrap_or(1);
        if (deepest as f64) <= params.spur_factor * junction_dt as f64 {
            continue;
        }
        let mut members = members;
        members.sort_by_key(|&v| (depth[v], v));
        let mut node_of = std::collections::HashMap::new();
        for v in members {
            let id = nodes.len();
            nodes.push(sample(world(voxels[v])));
            node_of.insert(v, id);
            let p = parent[v];
            let target = if on_main[p] { nearest_main(world(voxels[p])) } else { node_of[&p] };
            edges.push([target, id]);
        }
    }

    Ok(Skeleton { nodes, edges, main_path: (0..m).collect(), degenerate: false })
}
