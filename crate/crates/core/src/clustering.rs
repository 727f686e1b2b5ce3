//! 2D embedding (exact t-SNE) and density clustering (DBSCAN) of profile attribute subsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::profiling::{Feature, VortexProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("need at least {required} rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },
    #[error("need at least 2 attributes, got {0}")]
    TooFewAttributes(usize),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("perplexity {perplexity} must be positive and below (points - 1) / 3 = {limit}")]
    Perplexity { perplexity: f64, limit: f64 },
    #[error("eps must be positive and finite, got {0}")]
    Eps(f64),
    #[error("min_pts must be at least 1")]
    MinPts,
    #[error("iterations must be at least 1")]
    Iterations,
}

/// Named attribute subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Wall-bounded shear flow: strength, spanwise fluctuation and hairpin shape.
    Couette,
    /// Convection: strength, size and the horizontal/vertical orientation.
    Benard,
}

impl Preset {
    pub fn attributes(self) -> Vec<Feature> {
        match self {
            Preset::Couette => vec![
                Feature::Lambda2,
                Feature::OmegaYPrime,
                Feature::HairpinCurvature,
                Feature::Streamwise,
                Feature::Spanwise,
                Feature::Vertical,
                Feature::Length,
            ],
            Preset::Benard => vec![Feature::Lambda2, Feature::Size, Feature::Streamwise, Feature::Vertical],
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "couette" => Ok(Preset::Couette),
            "benard" | "bénard" => Ok(Preset::Benard),
            other => Err(format!("unknown preset `{other}` (expected couette or benard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterScope {
    #[default]
    All,
    HairpinCandidates,
}

fn default_perplexity() -> f64 {
    12.0
}

fn default_min_pts() -> usize {
    4
}

fn default_iterations() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRequest {
    pub attribute_names: Vec<String>,
    #[serde(default = "default_perplexity")]
    pub perplexity: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Chosen from the k-distance curve when absent.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_min_pts")]
    pub min_pts: usize,
    #[serde(default)]
    pub scope: ClusterScope,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

impl ClusterRequest {
    pub fn new(attributes: &[Feature]) -> Self {
        ClusterRequest {
            attribute_names: attributes.iter().map(|f| f.name().to_string()).collect(),
            perplexity: default_perplexity(),
            rng_seed: 0,
            eps: None,
            min_pts: default_min_pts(),
            scope: ClusterScope::All,
            iterations: default_iterations(),
        }
    }

    /// Checks the request against the number of points it will run on and resolves the
    /// attribute names.
    pub fn validate(&self, n_points: usize) -> Result<Vec<Feature>, ClusterError> {
        if self.attribute_names.len() < 2 {
            return Err(ClusterError::TooFewAttributes(self.attribute_names.len()));
        }
        let attrs = self
            .attribute_names
            .iter()
            .map(|n| n.parse::<Feature>().map_err(|_| ClusterError::UnknownAttribute(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(ClusterError::Eps(eps));
            }
        }
        if self.min_pts < 1 {
            return Err(ClusterError::MinPts);
        }
        if self.iterations < 1 {
            return Err(ClusterError::Iterations);
        }
        if n_points < MIN_EMBED_POINTS {
            return Err(ClusterError::TooFewRows { required: MIN_EMBED_POINTS, actual: n_points });
        }
        check_perplexity(self.perplexity, n_points)?;
        Ok(attrs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub vortex_ids: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    /// Cluster per point, `-1` for noise.
    pub labels: Vec<i64>,
    pub cluster_count: usize,
    /// The DBSCAN radius actually used.
    pub eps: f64,
}

const MIN_EMBED_POINTS: usize = 5;

fn check_perplexity(perplexity: f64, n: usize) -> Result<(), ClusterError> {
    let limit = (n as f64 - 1.0) / 3.0;
    if !(perplexity > 0.0 && perplexity < limit) {
        return Err(ClusterError::Perplexity { perplexity, limit });
    }
    Ok(())
}

/// Z-scores of the chosen attributes, one row per profile (population standard deviation).
///
/// Constant columns become zeros; their features are returned alongside.
pub fn standardize(profiles: &[VortexProfile], attributes: &[Feature]) -> Result<(Vec<Vec<f64>>, Vec<Feature>), ClusterError> {
    if profiles.len() < 2 {
        return Err(ClusterError::TooFewRows { required: 2, actual: profiles.len() });
    }
    let n = profiles.len() as f64;
    let mut rows = vec![vec![0.0; attributes.len()]; profiles.len()];
    let mut constant = Vec::new();
    for (col, &f) in attributes.iter().enumerate() {
        let mean = profiles.iter().map(|p| p.get(f)).sum::<f64>() / n;
        let std = (profiles.iter().map(|p| (p.get(f) - mean).powi(2)).sum::<f64>() / n).sqrt();
        if std == 0.0 || !std.is_finite() {
            log::warn!("attribute {f} has zero variance; standardised to zeros");
            constant.push(f);
            continue;
        }
        for (row, p) in rows.iter_mut().zip(profiles) {
            row[col] = (p.get(f) - mean) / std;
        }
    }
    Ok((rows, constant))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Step size; when absent, max(n / exaggeration / 4, 50), which stays stable for small n.
    pub learning_rate: Option<f64>,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: default_perplexity(),
            iterations: default_iterations(),
            seed: 0,
            learning_rate: None,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    /// KL(P‖Q) after every iteration, against the unexaggerated P.
    pub kl: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Conditional affinities of one row, with the Gaussian precision bisected to the target
/// entropy.
fn row_affinities(d: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let (mut beta, mut lo, mut hi) = (1.0f64, 0.0f64, f64::INFINITY);
    let mut p = vec![0.0; d.len()];
    for _ in 0..200 {
        let mut sum = 0.0;
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = if j == i { 0.0 } else { (-d[j] * beta).exp() };
            sum += *pj;
        }
        if sum == 0.0 {
            // Precision too high for every neighbour; relax.
            hi = beta;
            beta = (lo + hi) / 2.0;
            continue;
        }
        let mut h = 0.0;
        for pj in p.iter_mut() {
            *pj /= sum;
        }
        for (j, &pj) in p.iter().enumerate() {
            if pj > 0.0 {
                h += pj * d[j] * beta;
            }
        }
        h += sum.ln();
        let diff = h - target;
        if diff.abs() < 1e-10 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    p
}

/// FNV-1a over the row's bit patterns: a stable per-row key for the initial layout.
fn row_hash(row: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in row {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Exact t-SNE to two dimensions.
///
/// Each row's starting point is drawn from N(0, 1e-4²) by a generator seeded with the seed and
/// the row's content, and the optimisation runs over the rows sorted by content, so permuting
/// the rows permutes the result bit for bit.
pub fn embed_2d(data: &[Vec<f64>], params: &TsneParams, exec: Execution) -> Result<Embedding, ClusterError> {
    let n = data.len();
    let key = |r: &Vec<f64>| (row_hash(r), r.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_cached_key(|&i| key(&data[i]));
    let sorted: Vec<Vec<f64>> = order.iter().map(|&i| data[i].clone()).collect();
    let emb = embed_sorted(&sorted, params, exec)?;
    let mut coords = vec![[0.0; 2]; n];
    for (k, &i) in order.iter().enumerate() {
        coords[i] = emb.coords[k];
    }
    Ok(Embedding { coords, kl: emb.kl })
}

fn embed_sorted(data: &[Vec<f64>], params: &TsneParams, exec: Execution) -> Result<Embedding, ClusterError> {
    let n = data.len();
    if n < MIN_EMBED_POINTS {
        return Err(ClusterError::TooFewRows { required: MIN_EMBED_POINTS, actual: n });
    }
    check_perplexity(params.perplexity, n)?;
    if params.iterations == 0 {
        return Err(ClusterError::Iterations);
    }

    let dist: Vec<Vec<f64>> = exec.map_range(n, |i| data.iter().map(|r| sq_dist(&data[i], r)).collect());
    let cond: Vec<Vec<f64>> = exec.map_range(n, |i| row_affinities(&dist[i], i, params.perplexity));
    let p: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12)).collect())
        .collect();

    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = data
        .iter()
        .map(|row| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ row_hash(row));
            [normal.sample(&mut rng), normal.sample(&mut rng)]
        })
        .collect();
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl = Vec::with_capacity(params.iterations);
    let rate = params.learning_rate.unwrap_or_else(|| (n as f64 / params.early_exaggeration / 4.0).max(50.0));

    for it in 0..params.iterations {
        let exaggerate = it < params.exaggeration_iterations;
        let ex = if exaggerate { params.early_exaggeration } else { 1.0 };
        let momentum = if exaggerate { 0.5 } else { 0.8 };

        let num: Vec<Vec<f64>> = exec.map_range(n, |i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { 1.0 / (1.0 + (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2)) })
                .collect()
        });
        let z: f64 = num.iter().map(|r| r.iter().sum::<f64>()).sum();
        let grad: Vec<[f64; 2]> = exec.map_range(n, |i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                let q = (num[i][j] / z).max(1e-12);
                let w = (ex * p[i][j] - q) * num[i][j];
                g[0] += 4.0 * w * (y[i][0] - y[j][0]);
                g[1] += 4.0 * w * (y[i][1] - y[j][1]);
            }
            g
        });
        let cost: f64 = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| p[i][j] * (p[i][j] / (num[i][j] / z).max(1e-12)).ln())
                    .sum::<f64>()
            })
            .sum();
        kl.push(cost);

        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (update[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                gains[i][d] = gains[i][d].max(0.01);
                update[i][d] = momentum * update[i][d] - rate * gains[i][d] * grad[i][d];
                y[i][d] += update[i][d];
            }
        }
        let mean = [0, 1].map(|d| y.iter().map(|p| p[d]).sum::<f64>() / n as f64);
        for p in y.iter_mut() {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
    }
    Ok(Embedding { coords: y, kl })
}

/// DBSCAN over 2D points. Neighbourhoods include the point itself; a border point joins the
/// first cluster (in point order) that reaches it.
pub fn dbscan(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Vec<i64> {
    const UNSEEN: i64 = -2;
    const NOISE: i64 = -1;
    let eps2 = eps * eps;
    let neighbors = |i: usize| -> Vec<usize> {
        (0..points.len())
            .filter(|&j| (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2) <= eps2)
            .collect()
    };
    let mut labels = vec![UNSEEN; points.len()];
    let mut cluster = 0i64;
    for i in 0..points.len() {
        if labels[i] != UNSEEN {
            continue;
        }
        let nb = neighbors(i);
        if nb.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        labels[i] = cluster;
        let mut queue: std::collections::VecDeque<usize> = nb.into_iter().collect();
        while let Some(q) = queue.pop_front() {
            if labels[q] == NOISE {
                labels[q] = cluster;
            }
            if labels[q] != UNSEEN {
                continue;
            }
            labels[q] = cluster;
            let qn = neighbors(q);
            if qn.len() >= min_pts {
                queue.extend(qn);
            }
        }
        cluster += 1;
    }
    labels
}

/// Radius at the elbow of the sorted k-th-nearest-neighbour distance curve: the point
/// farthest from the chord between the curve's ends.
pub fn k_distance_eps(points: &[[f64; 2]], k: usize) -> f64 {
    let n = points.len();
    if n < 2 {
        return 1.0;
    }
    let k = k.clamp(1, n - 1);
    let mut kd: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt())
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    kd.sort_by(f64::total_cmp);
    let (first, last) = (kd[0], kd[n - 1]);
    if last <= first {
        return if last > 0.0 { last } else { 1e-9 };
    }
    let dx = (n - 1) as f64;
    let dy = last - first;
    let norm = (dx * dx + dy * dy).sqrt();
    let mut best = (f64::NEG_INFINITY, n - 1);
    for (i, &v) in kd.iter().enumerate() {
        // Perpendicular distance to the chord; ties keep the earlier index.
        let d = (dy * i as f64 - dx * (v - first)).abs() / norm;
        if d > best.0 {
            best = (d, i);
        }
    }
    let eps = kd[best.1];
    if eps > 0.0 { eps } else { last }
}

/// Standardise, embed and cluster. Row order follows `profiles`.
pub fn cluster_profiles(
    profiles: &[VortexProfile],
    request: &ClusterRequest,
    exec: Execution,
) -> Result<ClusterResult, ClusterError> {
    let attrs = request.validate(profiles.len())?;
    let (matrix, _) = standardize(profiles, &attrs)?;
    let params = TsneParams {
        perplexity: request.perplexity,
        iterations: request.iterations,
        seed: request.rng_seed,
        ..TsneParams::default()
    };
    let emb = embed_2d(&matrix, &params, exec)?;
    let eps = request.eps.unwrap_or_else(|| k_distance_eps(&emb.coords, request.min_pts));
    let labels = dbscan(&emb.coords, eps, request.min_pts);
    let cluster_count = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
    Ok(ClusterResult {
        vortex_ids: profiles.iter().map(|p| p.vortex_id).collect(),
        coords: emb.coords,
        labels,
        cluster_count,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbscan_blobs_and_noise() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push([i as f64 * 0.1, 0.0]);
            pts.push([100.0 + i as f64 * 0.1, 0.0]);
        }
        let labels = dbscan(&pts, 0.5, 3);
        assert_eq!(labels.iter().filter(|&&l| l == -1).count(), 0);
        assert_eq!(labels.iter().max(), Some(&1));
        assert_eq!(dbscan(&[[0.0, 0.0], [10.0, 0.0]], 1.0, 2), vec![-1, -1]);
    }

    #[test]
    fn border_point_goes_to_first_cluster() {
        // Two cores at ±1 each with their own dense cluster; the middle point is a border
        // of both.
        let pts = [[-1.0, 0.0], [-1.5, 0.0], [-1.2, 0.3], [0.0, 0.0], [1.0, 0.0], [1.5, 0.0], [1.2, 0.3]];
        let labels = dbscan(&pts, 1.0, 4);
        assert_eq!(labels[3], labels[0]);
        assert_ne!(labels[0], labels[4]);
    }

    #[test]
    fn standardize_two_points() {
        let mut a = fake(0, 0.0);
        let mut b = fake(1, 2.0);
        a.physical.size = 5.0;
        b.physical.size = 5.0;
        let (m, constant) = standardize(&[a, b], &[Feature::Lambda2, Feature::Size]).unwrap();
        assert_eq!(m, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(constant, vec![Feature::Size]);
        assert!(standardize(&[a], &[Feature::Lambda2]).is_err());
    }

    #[test]
    fn request_validation() {
        let mut r = ClusterRequest::new(&[Feature::Lambda2]);
        assert_eq!(r.validate(100), Err(ClusterError::TooFewAttributes(1)));
        r = ClusterRequest::new(&[Feature::Lambda2, Feature::Size]);
        assert!(r.validate(100).is_ok());
        assert!(matches!(r.validate(30), Err(ClusterError::Perplexity { .. })));
        r.eps = Some(0.0);
        assert_eq!(r.validate(100), Err(ClusterError::Eps(0.0)));
        r.eps = None;
        r.attribute_names.push("nope".into());
        assert!(matches!(r.validate(100), Err(ClusterError::UnknownAttribute(_))));
    }

    #[test]
    fn affinities_hit_target_perplexity() {
        let d: Vec<f64> = (0..40).map(|j| (j as f64 * 0.37).sin().abs() * 5.0).collect();
        let p = row_affinities(&d, 3, 7.0);
        let h: f64 = -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
        assert!((h.exp() - 7.0).abs() < 1e-6);
        assert_eq!(p[3], 0.0);
    }

    fn fake(id: usize, l2: f64) -> VortexProfile {
        let json = format!(
            "{{\"vortex_id\":{id},{}}}",
            Feature::ALL.iter().map(|f| format!("\"{}\":{}", f.name(), if *f == Feature::Lambda2 { l2 } else { 1.0 })).collect::<Vec<_>>().join(",")
        );
        serde_json::from_str(&json).unwrap()
    }
}
