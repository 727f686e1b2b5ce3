//! Randomised inputs shared by several suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cell values of a random multi-well field (2–7 anisotropic Gaussian wells, each axis
/// 12–32 cells) with a little jitter so no two cells tie.
pub fn multi_well(seed: u64) -> ([usize; 3], Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: [usize; 3] = [0; 3].map(|_| rng.random_range(12..=32));
    let wells: Vec<([f64; 3], f64, f64, [f64; 3])> = (0..rng.random_range(2..=7))
        .map(|_| {
            (
                dims.map(|d| rng.random_range(0.0..d as f64)),
                rng.random_range(1.5..4.0),
                rng.random_range(0.5..2.0),
                [0; 3].map(|_| rng.random_range(0.3..1.0)),
            )
        })
        .collect();
    let n = dims.iter().product();
    let mut values = Vec::with_capacity(n);
    for c in 0..n {
        let p = [c % dims[0], (c / dims[0]) % dims[1], c / (dims[0] * dims[1])].map(|v| v as f64 + 0.5);
        let mut v = 0.0;
        for (center, width, depth, stretch) in &wells {
            let r2: f64 = (0..3).map(|a| ((p[a] - center[a]) * stretch[a]).powi(2)).sum();
            v -= depth * (-r2 / (width * width)).exp();
        }
        values.push(v + rng.random_range(-1e-6..1e-6));
    }
    (dims, values)
}
