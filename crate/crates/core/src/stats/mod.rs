//! Reproducible Monte Carlo plumbing: RNG streams, parallel replication,
//! goodness-of-fit tests and recurrence diagnostics.

mod gof;
mod replicate;
mod returns;
mod rng;

pub use gof::{
    chi_square_sf, chi_square_two_sample, chi_square_vs_exact, tv_distance, tv_distance_two_sample,
    Histogram, TestResult, MIN_EXPECTED,
};
pub use replicate::{replicate, replicate_infallible};
pub use returns::{return_time_stats, return_time_stats_of, ReturnStats};
pub use rng::{derive_stream_seed, splitmix64_mix, RngSpec, SimRng};

/// Two-sided normal quantile for a 99% confidence interval.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Sample mean and 99% confidence half-width.
pub fn mean_ci99(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z_99 * (var / n).sqrt())
}
