#![allow(dead_code)]

use dephom::samplers::stream_rng;
use dephom::PointCloud;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const SEEDS: [u64; 3] = [11, 2024, 0xdead_beef];

/// Random cloud in `[0,1]^p`. With `snap`, coordinates land on a coarse grid
/// so that distance ties are common.
pub fn random_cloud(seed: u64, n: usize, p: usize, snap: bool) -> PointCloud<f64> {
    let mut rng = stream_rng(seed, 99);
    let coords = (0..n * p)
        .map(|_| {
            let x: f64 = rng.random();
            if snap {
                (x * 4.0).round() / 4.0
            } else {
                x
            }
        })
        .collect();
    PointCloud::from_flat(p, coords).unwrap()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// 1% critical value of the two-sample KS statistic (asymptotic).
pub fn ks_critical(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

pub fn chi_square_critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(0.99)
}

pub fn chi_square(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = n as f64 * p;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Mean and batch-means standard error with `batches` contiguous batches.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let len = values.len() / batches;
    let means: Vec<f64> = values
        .chunks_exact(len)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / len as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

pub fn column(cloud: &PointCloud<f64>, k: usize) -> Vec<f64> {
    cloud.points().map(|x| x[k]).collect()
}
