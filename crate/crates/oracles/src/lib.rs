//! Slow, independent reference implementations for checking the fast code paths.
//!
//! Nothing here shares code with `vortex-core`: every routine is written from the defining
//! formula (or with `nalgebra`) against plain arrays.

pub mod cc;
pub mod clustering;
pub mod criteria;
pub mod equations;
pub mod fixtures;
pub mod tree;

use std::collections::BTreeSet;

/// A labelling as a set of sets, so two labellings compare equal up to renaming.
/// Entries with a negative label are collected as one extra block tagged `noise`.
pub fn partition(labels: &[i64]) -> (BTreeSet<BTreeSet<usize>>, BTreeSet<usize>) {
    let mut blocks = std::collections::BTreeMap::<i64, BTreeSet<usize>>::new();
    let mut noise = BTreeSet::new();
    for (i, &l) in labels.iter().enumerate() {
        if l < 0 {
            noise.insert(i);
        } else {
            blocks.entry(l).or_default().insert(i);
        }
    }
    (blocks.into_values().collect(), noise)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_pop(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}
