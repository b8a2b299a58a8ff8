use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exact::{check_s, return_formula_preconditions};
use super::popcount::PopCount;
use super::simulate::require_horizon;
use super::ChainConfig;
use crate::stats::mean_ci99;
use crate::Result;

/// Monte Carlo estimate with a 99% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub ci_halfwidth: f64,
}

impl Estimate {
    fn from_samples(values: &[f64], scale: f64) -> Self {
        let (m, h) = mean_ci99(values);
        Estimate {
            estimate: scale * m,
            ci_halfwidth: scale * h,
        }
    }
}

/// `ln(−ln(1 − e^{ln_p}))`, accurate for tiny `e^{ln_p}`.
fn ln_neg_log1m(ln_p: f64) -> f64 {
    if ln_p < -30.0 {
        ln_p + 0.5 * ln_p.exp()
    } else {
        (-(-ln_p.exp()).ln_1p()).ln()
    }
}

/// `z · ln(1 − e^{ln_p})`, which stays finite for astronomically large `z`.
fn weighted_log1m(z: PopCount, ln_p: f64) -> f64 {
    if z.is_zero() {
        return 0.0;
    }
    -(z.ln() + ln_neg_log1m(ln_p)).exp()
}

/// Monte Carlo over the environment and immigration of
/// `P(X_n = 1) = p₁ E[exp(Σ_{i=1}^{n−1} Z_{i+1} ln(1 − Π_{j≤i} β_j))]`.
pub fn return_prob_formula<R: Rng + ?Sized>(cfg: &ChainConfig, n: u64, reps: u64, rng: &mut R) -> Result<Estimate> {
    require_horizon(n)?;
    require_reps(reps)?;
    let p1 = return_formula_preconditions(cfg)?;
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            let mut ln_prod = 0.0;
            let mut exponent = 0.0;
            for _ in 1..n {
                ln_prod += cfg.env.sample(rng).ln();
                exponent += weighted_log1m(cfg.imm.sample(rng), ln_prod);
            }
            exponent.exp()
        })
        .collect();
    Ok(Estimate::from_samples(&samples, p1))
}

/// `Σ_{n≤N} P̂(X_n = 1)` for `N = 1, …, max_n`. All terms share the same
/// environment and immigration draws, so the sums are nondecreasing.
pub fn green_partial_sum<R: Rng + ?Sized>(cfg: &ChainConfig, max_n: u64, reps: u64, rng: &mut R) -> Result<Vec<f64>> {
    require_horizon(max_n)?;
    require_reps(reps)?;
    let p1 = return_formula_preconditions(cfg)?;
    let mut terms = vec![0.0; max_n as usize];
    for _ in 0..reps {
        let mut ln_prod = 0.0;
        let mut exponent = 0.0;
        terms[0] += 1.0;
        for t in terms.iter_mut().skip(1) {
            ln_prod += cfg.env.sample(rng).ln();
            exponent += weighted_log1m(cfg.imm.sample(rng), ln_prod);
            *t += exponent.exp();
        }
    }
    let mut acc = 0.0;
    Ok(terms
        .into_iter()
        .map(|t| {
            acc += p1 * t / reps as f64;
            acc
        })
        .collect())
}

/// Monte Carlo of `E(s^{X_n}) = E exp(Σ_{i=1}^n Z_i ln(1 − β_{i,n}(1−s)))`.
pub fn pgf_formula<R: Rng + ?Sized>(cfg: &ChainConfig, n: u64, s: f64, reps: u64, rng: &mut R) -> Result<Estimate> {
    require_horizon(n)?;
    require_reps(reps)?;
    check_s(s)?;
    let ln_1ms = (-s).ln_1p();
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            // walk i = n, n−1, …, 1 with ln β_{i,n}
            let mut ln_prod = 0.0;
            let mut exponent = 0.0;
            for i in (1..=n).rev() {
                exponent += weighted_log1m(cfg.imm.sample(rng), ln_prod + ln_1ms);
                if i > 1 {
                    ln_prod += cfg.env.sample(rng).ln();
                }
            }
            exponent.exp()
        })
        .collect();
    Ok(Estimate::from_samples(&samples, 1.0))
}

fn require_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        Err(crate::error::invalid("reps", "must be at least 1"))
    } else {
        Ok(())
    }
}
