//! Dataset-adaptive λ₂ thresholds.
//!
//! [`refine_histogram`] narrows a histogram of the vortical (λ₂ < 0) values until its upper
//! end is well resolved and reads the initial threshold off the 90th bin.
//! [`expand_histogram`] then resolves the values below that threshold and picks a
//! Fibonacci-spaced set of bins as the descending isovalue schedule used for splitting.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("no vertex has lambda2 < 0; the field contains no vortical values")]
    NoVorticalValues,
    #[error("only {distinct} distinct vortical values, at least {required} needed for the histogram")]
    DegenerateRange { distinct: usize, required: usize },
    #[error("no vertex lies below the initial threshold {0}; the splitting schedule is empty")]
    EmptySchedule(f64),
    #[error("invalid threshold parameter: {0}")]
    InvalidParameter(String),
}

/// Fixed-width histogram. Bins are half-open `[lo, hi)` except the last, which is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

const ACCUMULATE_CHUNK: usize = 1 << 16;

impl Histogram {
    /// Histogram of the values inside `[lo, hi]`; values outside are ignored.
    pub fn build(values: &[f64], lo: f64, hi: f64, n_bins: usize, exec: Execution) -> Self {
        assert!(n_bins >= 1 && hi > lo, "histogram needs n_bins >= 1 and hi > lo");
        let width = (hi - lo) / n_bins as f64;
        let partials = exec.map_chunks(values, ACCUMULATE_CHUNK, |chunk| {
            let mut counts = vec![0u64; n_bins];
            for &v in chunk {
                if let Some(b) = bin_of(v, lo, hi, n_bins) {
                    counts[b] += 1;
                }
            }
            counts
        });
        let mut counts = vec![0u64; n_bins];
        for part in partials {
            for (c, p) in counts.iter_mut().zip(part) {
                *c += p;
            }
        }
        let mut edges: Vec<f64> = (0..=n_bins).map(|k| lo + width * k as f64).collect();
        edges[n_bins] = hi;
        let total = counts.iter().sum();
        Histogram { edges, counts, total }
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.n_bins()]
    }

    /// Percentage (0–100) of the histogram's samples in bin `b`.
    pub fn percent(&self, b: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.counts[b] as f64 / self.total as f64
        }
    }

    pub fn bin_of(&self, v: f64) -> Option<usize> {
        bin_of(v, self.lo(), self.hi(), self.n_bins())
    }
}

#[inline]
fn bin_of(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    if v == hi {
        return Some(n - 1);
    }
    let b = ((v - lo) / (hi - lo) * n as f64) as usize;
    Some(b.min(n - 1))
}

/// Tunables of the histogram refinement that selects the initial threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineParams {
    pub n_bins: usize,
    /// Bins with fewer than this fraction of the histogram's samples are dropped.
    pub cutoff_frac: f64,
    /// Stop once the last bin holds less than this fraction of the samples.
    pub last_bin_frac: f64,
    /// Stop once last and second-last bin percentages differ by less than this many points.
    pub diff_pct: f64,
    pub max_iterations: usize,
}

impl Default for RefineParams {
    fn default() -> Self {
        RefineParams { n_bins: 100, cutoff_frac: 0.001, last_bin_frac: 0.30, diff_pct: 20.0, max_iterations: 100 }
    }
}

/// Why the refinement loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    /// The last bin holds less than `last_bin_frac` of the samples.
    SmallLastBin,
    /// Last and second-last bins differ by less than `diff_pct` percentage points.
    SimilarLastBins,
    /// The last-bin count did not change between consecutive iterations.
    UnchangedLastBin,
    /// The surviving value range collapsed to a single value.
    RangeCollapsed,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedThreshold {
    /// Lower edge of the 90th bin of the final histogram.
    pub value: f64,
    pub iterations: usize,
    pub stop: StopCondition,
    pub histogram: Histogram,
}

/// Index of the "90th bin" for an `n`-bin histogram (89 for 100 bins).
pub fn ninetieth_bin(n_bins: usize) -> usize {
    ((n_bins * 9).div_ceil(10)).saturating_sub(1)
}

fn check_stop(h: &Histogram, prev_last: Option<u64>, p: &RefineParams) -> Option<StopCondition> {
    let n = h.n_bins();
    let last = h.counts[n - 1];
    if (last as f64) < p.last_bin_frac * h.total as f64 {
        return Some(StopCondition::SmallLastBin);
    }
    if n >= 2 && (h.percent(n - 1) - h.percent(n - 2)).abs() < p.diff_pct {
        return Some(StopCondition::SimilarLastBins);
    }
    if prev_last == Some(last) {
        return Some(StopCondition::UnchangedLastBin);
    }
    None
}

/// Selects the initial λ₂ threshold by iterative histogram refinement over the λ₂ < 0 values.
pub fn refine_histogram(lambda2: &[f64], params: &RefineParams, exec: Execution) -> Result<RefinedThreshold, ThresholdError> {
    if params.n_bins < 2 {
        return Err(ThresholdError::InvalidParameter("n_bins must be at least 2".into()));
    }
    let vortical: Vec<f64> = lambda2.iter().copied().filter(|v| *v < 0.0).collect();
    if vortical.is_empty() {
        return Err(ThresholdError::NoVorticalValues);
    }
    let mut distinct = HashSet::new();
    for v in &vortical {
        distinct.insert(v.to_bits());
        if distinct.len() >= params.n_bins {
            break;
        }
    }
    if distinct.len() < params.n_bins {
        return Err(ThresholdError::DegenerateRange { distinct: distinct.len(), required: params.n_bins });
    }

    let (mut lo, mut hi) = min_max(&vortical);
    let mut hist = Histogram::build(&vortical, lo, hi, params.n_bins, exec);
    let mut prev_last = None;
    let mut iterations = 1;
    let stop = loop {
        if let Some(stop) = check_stop(&hist, prev_last, params) {
            break stop;
        }
        if iterations >= params.max_iterations {
            break StopCondition::IterationLimit;
        }
        // drop sparse bins and re-histogram over the value range of the survivors
        let keep_min = params.cutoff_frac * hist.total as f64;
        let mut new_lo = f64::INFINITY;
        let mut new_hi = f64::NEG_INFINITY;
        for &v in &vortical {
            if let Some(b) = hist.bin_of(v) {
                if hist.counts[b] as f64 >= keep_min {
                    new_lo = new_lo.min(v);
                    new_hi = new_hi.max(v);
                }
            }
        }
        if !(new_hi > new_lo) {
            break StopCondition::RangeCollapsed;
        }
        prev_last = Some(hist.counts[hist.n_bins() - 1]);
        lo = new_lo;
        hi = new_hi;
        hist = Histogram::build(&vortical, lo, hi, params.n_bins, exec);
        iterations += 1;
    };
    let value = hist.edges[ninetieth_bin(params.n_bins)];
    Ok(RefinedThreshold { value, iterations, stop, histogram: hist })
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Strictly decreasing λ₂ isovalues, all below the initial threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda2Steps {
    pub values: Vec<f64>,
}

impl Lambda2Steps {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] > w[1]));
        Lambda2Steps { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Schedule with the `k` most negative isovalues removed.
    pub fn truncated(&self, keep: usize) -> Self {
        Lambda2Steps { values: self.values[..keep.min(self.values.len())].to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandParams {
    pub initial_bins: usize,
    /// Keep doubling the bin count while the top bin holds at least this fraction.
    pub stop_frac: f64,
    pub max_doublings: usize,
}

impl Default for ExpandParams {
    fn default() -> Self {
        ExpandParams { initial_bins: 100, stop_frac: 0.10, max_doublings: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedSchedule {
    pub steps: Lambda2Steps,
    pub n_bins: usize,
    pub doublings: usize,
    pub histogram: Histogram,
}

/// `{0} ∪ {F_k ≤ n}` with duplicates removed, ascending.
pub fn fibonacci_indices(n: usize) -> Vec<usize> {
    let mut out = vec![0];
    let (mut a, mut b) = (1usize, 2usize);
    while a <= n {
        if *out.last().unwrap() != a {
            out.push(a);
        }
        let next = a + b;
        a = b;
        b = next;
    }
    out
}

/// Builds the splitting schedule from the values below `lambda2_init`.
pub fn expand_histogram(
    lambda2: &[f64],
    lambda2_init: f64,
    params: &ExpandParams,
    exec: Execution,
) -> Result<ExpandedSchedule, ThresholdError> {
    if params.initial_bins < 1 {
        return Err(ThresholdError::InvalidParameter("initial_bins must be positive".into()));
    }
    let below: Vec<f64> = lambda2.iter().copied().filter(|v| *v < lambda2_init && *v < 0.0).collect();
    if below.is_empty() {
        return Err(ThresholdError::EmptySchedule(lambda2_init));
    }
    let (lo, _) = min_max(&below);
    let hi = lambda2_init.min(0.0);
    if !(hi > lo) {
        return Err(ThresholdError::EmptySchedule(lambda2_init));
    }
    let mut n = params.initial_bins;
    let mut doublings = 0;
    let hist = loop {
        let h = Histogram::build(&below, lo, hi, n, exec);
        let top = h.counts[n - 1] as f64;
        if top < params.stop_frac * h.total as f64 || doublings >= params.max_doublings {
            break h;
        }
        n *= 2;
        doublings += 1;
    };
    // bin k of the descending order is ascending bin n-1-k
    let values = fibonacci_indices(n)
        .into_iter()
        .filter(|&k| k < n)
        .map(|k| hist.edges[n - 1 - k])
        .collect();
    Ok(ExpandedSchedule { steps: Lambda2Steps::new(values), n_bins: n, doublings, histogram: hist })
}
