use rand::Rng;

use super::popcount::PopCount;
use super::simulate::{require_horizon, thin_ln, ThinningConvention};
use super::ChainConfig;
use crate::Result;

/// Survival probabilities below `2^−60` applied to exact counts are taken to
/// kill every immigrant.
pub const SKIP_LN_PROB: f64 = -60.0 * std::f64::consts::LN_2;

/// One draw of `Σ_{i=1}^n Binomial(Z_i, Π_{j=i+1}^n β_j)`, which has the law
/// of `X_n`.
pub fn representation_sample<R: Rng + ?Sized>(cfg: &ChainConfig, n: u64, rng: &mut R) -> Result<PopCount> {
    require_horizon(n)?;
    let n = n as usize;
    // betas[j] = β_{j+1}; β_1 never enters
    let betas: Vec<f64> = (0..n).map(|_| cfg.env.sample(rng)).collect();
    let zs: Vec<PopCount> = (0..n).map(|_| cfg.imm.sample(rng)).collect();
    let ln_mean = cfg.env.mean().ln();
    let mut total = PopCount::ZERO;
    // ln Π_{j=i+1}^n β_j, starting from i = n
    let mut ln_prod = 0.0;
    for i in (1..=n).rev() {
        let z = zs[i - 1];
        if !(ln_prod < SKIP_LN_PROB && !z.is_log_scale()) {
            total = total + thin_ln(z, ln_prod, rng);
        }
        if i > 1 {
            ln_prod += match cfg.convention {
                ThinningConvention::SharedEnvironment => betas[i - 1].ln(),
                // each immigrant of cohort i meets its own environment
                ThinningConvention::PerIndividual => ln_mean,
            };
        }
    }
    Ok(total)
}
