//! Exact nearest labelled cell lookup on the integer cell lattice (implicit k-d tree).

use crate::linalg::Vec3;

pub(crate) struct LabelledPoints {
    points: Vec<([i64; 3], u32)>,
    split_axis: Vec<u8>,
    spacing: Vec3,
}

#[inline]
fn dist2(a: [i64; 3], b: [i64; 3], h: Vec3) -> f64 {
    let d = [0, 1, 2].map(|k| (a[k] - b[k]) as f64 * h[k]);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

impl LabelledPoints {
    pub fn new(points: Vec<([i64; 3], u32)>, spacing: Vec3) -> Self {
        let n = points.len();
        let mut tree = LabelledPoints { points, split_axis: vec![0; n], spacing };
        tree.build(0, n);
        tree
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let mut min = [i64::MAX; 3];
        let mut max = [i64::MIN; 3];
        for (p, _) in &self.points[lo..hi] {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                let ea = (max[a] - min[a]) as f64 * self.spacing[a];
                let eb = (max[b] - min[b]) as f64 * self.spacing[b];
                ea.total_cmp(&eb).then(b.cmp(&a))
            })
            .unwrap();
        let mid = (lo + hi) / 2;
        self.points[lo..hi].select_nth_unstable_by(mid - lo, |x, y| x.0[axis].cmp(&y.0[axis]).then(x.0.cmp(&y.0)));
        self.split_axis[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Label of the nearest point; equal distances resolve to the lower label.
    pub fn nearest_label(&self, q: [i64; 3]) -> Option<u32> {
        let mut best = (f64::INFINITY, u32::MAX);
        self.search(0, self.points.len(), q, &mut best);
        (best.1 != u32::MAX).then_some(best.1)
    }

    fn search(&self, lo: usize, hi: usize, q: [i64; 3], best: &mut (f64, u32)) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let (p, label) = self.points[mid];
        let d = dist2(p, q, self.spacing);
        if d < best.0 || (d == best.0 && label < best.1) {
            *best = (d, label);
        }
        if hi - lo == 1 {
            return;
        }
        let axis = self.split_axis[mid] as usize;
        let diff = (q[axis] - p[axis]) as f64 * self.spacing[axis];
        let (first, second) = if q[axis] < p[axis] { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(first.0, first.1, q, best);
        if diff * diff <= best.0 {
            self.search(second.0, second.1, q, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = [1.0, 0.5, 2.0];
        let pts: Vec<([i64; 3], u32)> = (0..300)
            .map(|_| ([rng.random_range(0..20), rng.random_range(0..20), rng.random_range(0..20)], rng.random_range(0..5)))
            .collect();
        let tree = LabelledPoints::new(pts.clone(), h);
        for _ in 0..500 {
            let q = [rng.random_range(-3..23), rng.random_range(-3..23), rng.random_range(-3..23)];
            let brute = pts
                .iter()
                .map(|(p, l)| (dist2(*p, q, h), *l))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .unwrap();
            assert_eq!(tree.nearest_label(q), Some(brute.1));
        }
    }
}
