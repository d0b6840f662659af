#![allow(dead_code)]

use bilinear_taylor::monte_carlo::{sample_acf1, simulate_path, SimConfig, Transform};
use bilinear_taylor::{InnovationSpec, ModelSpec};

/// Statistic on the whole series and its batch-means standard error.
pub fn batch_means<F>(series: &[f64], batches: usize, stat: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let len = series.len() / batches;
    let values: Vec<f64> = series.chunks_exact(len).map(&stat).collect();
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (stat(series), (var / b).sqrt())
}

pub fn raw_moment(order: i32) -> impl Fn(&[f64]) -> f64 {
    move |xs| xs.iter().map(|x| x.powi(order)).sum::<f64>() / xs.len() as f64
}

pub fn acf1(transform: Transform) -> impl Fn(&[f64]) -> f64 {
    move |xs| sample_acf1(xs, transform).expect("non-degenerate batch")
}

pub fn long_path(family: &InnovationSpec, beta: f64, n_obs: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let config = SimConfig::new(ModelSpec::first_order(beta).unwrap(), *family, n_obs, 1_000, seed).unwrap();
    let path = simulate_path(&config).unwrap();
    (path.x, path.eps)
}

/// `|observed - expected|` in units of `se`.
pub fn z_score(observed: f64, expected: f64, se: f64) -> f64 {
    (observed - expected).abs() / se
}
