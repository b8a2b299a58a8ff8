use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::popcount::{PopCount, LN_SWITCH_DOWN};
use crate::distributions::{EnvDistribution, ImmigrationDistribution};
use crate::stats::SimRng;
use crate::{Error, Result};

const LN_2_62: f64 = 62.0 * std::f64::consts::LN_2;

/// `Binomial(N, p)` for `p ∈ (0, 1)`.
///
/// Exact counts are thinned by an exact binomial draw. A log-scale `N` is
/// thinned deterministically (`ln N + ln p`) while the mean `Np` stays above
/// `2^47`, where the relative fluctuation is below `1e−7`. Below that an
/// exact binomial on the rounded count is used when `N ≤ 2^62`, and a
/// Poisson draw with mean `Np` otherwise.
pub fn binomial_thin<R: Rng + ?Sized>(n: PopCount, p: f64, rng: &mut R) -> Result<PopCount> {
    if !(p > 0.0 && p < 1.0) {
        return Err(crate::error::invalid("p", format!("{p} must lie in (0, 1)")));
    }
    Ok(thin_ln(n, p.ln(), rng))
}

/// Thinning with survival probability `e^{ln_p}`, `ln_p ≤ 0`.
pub(crate) fn thin_ln<R: Rng + ?Sized>(n: PopCount, ln_p: f64, rng: &mut R) -> PopCount {
    if ln_p >= 0.0 {
        return n;
    }
    match n {
        PopCount::Exact(0) => PopCount::ZERO,
        PopCount::Exact(k) => exact_binomial(k, ln_p.exp(), rng),
        PopCount::LogScale(l) => {
            let ln_mean = l + ln_p;
            if ln_mean >= LN_SWITCH_DOWN {
                PopCount::from_ln(ln_mean)
            } else if l <= LN_2_62 {
                exact_binomial(l.exp().round() as u64, ln_p.exp(), rng)
            } else {
                let mean = ln_mean.exp();
                if mean <= 0.0 {
                    return PopCount::ZERO;
                }
                let draw: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
                PopCount::from_u64(draw as u64)
            }
        }
    }
}

fn exact_binomial<R: Rng + ?Sized>(k: u64, p: f64, rng: &mut R) -> PopCount {
    if p <= 0.0 {
        return PopCount::ZERO;
    }
    PopCount::from_u64(Binomial::new(k, p.min(1.0)).expect("valid binomial").sample(rng))
}

/// One transition: thin `x` with survival probability `beta`, then add `z`.
pub fn step<R: Rng + ?Sized>(x: PopCount, beta: f64, z: PopCount, rng: &mut R) -> Result<PopCount> {
    Ok(binomial_thin(x, beta, rng)? + z)
}

/// How the per-step survival probabilities act on the population.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinningConvention {
    /// One `β` per step shared by every individual.
    #[default]
    SharedEnvironment,
    /// Every individual draws its own `β`. Survivors are then
    /// `Binomial(X, E β)`. This is not the model; it exists to check that
    /// validation catches it.
    PerIndividual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub env: EnvDistribution,
    pub imm: ImmigrationDistribution,
    pub horizon: u64,
    #[serde(default = "one")]
    pub x0: PopCount,
    pub seed: u64,
    #[serde(default)]
    pub convention: ThinningConvention,
}

fn one() -> PopCount {
    PopCount::Exact(1)
}

impl ChainConfig {
    pub fn new(env: EnvDistribution, imm: ImmigrationDistribution, horizon: u64, seed: u64) -> Self {
        Self {
            env,
            imm,
            horizon,
            x0: one(),
            seed,
            convention: ThinningConvention::SharedEnvironment,
        }
    }

    pub fn with_x0(mut self, x0: PopCount) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_convention(mut self, convention: ThinningConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.env.log_moment()?;
        Ok(())
    }

    /// Survivors of `x` in one step with environment draw `beta`.
    pub(crate) fn survivors<R: Rng + ?Sized>(&self, x: PopCount, beta: f64, rng: &mut R) -> PopCount {
        match self.convention {
            ThinningConvention::SharedEnvironment => thin_ln(x, beta.ln(), rng),
            ThinningConvention::PerIndividual => thin_ln(x, self.env.mean().ln(), rng),
        }
    }
}

/// A simulated path. Index `n` of every vector refers to step `n`; the
/// draws at index 0 are placeholders (`None`, zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<PopCount>,
    /// `β_n`, the survival probability applied to `X_{n−1}`.
    pub env_draws: Vec<Option<f64>>,
    /// `Z_n`.
    pub imm_draws: Vec<PopCount>,
    pub seed: u64,
}

impl Trajectory {
    pub fn horizon(&self) -> u64 {
        self.states.len() as u64 - 1
    }

    /// `step,population_log10,beta,z_log10,exact`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "population_log10", "beta", "z_log10", "exact"])?;
        for (n, x) in self.states.iter().enumerate() {
            w.write_record(csv_row(n, *x, self.env_draws[n], self.imm_draws[n], n > 0))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_row(n: usize, x: PopCount, beta: Option<f64>, z: PopCount, has_z: bool) -> Vec<String> {
    vec![
        n.to_string(),
        x.log10().to_string(),
        beta.map(|b| b.to_string()).unwrap_or_default(),
        if has_z { z.log10().to_string() } else { String::new() },
        x.as_exact().map(|k| k.to_string()).unwrap_or_default(),
    ]
}

/// Runs the chain from `X_0 = x0`, `B_0 = 0`, so `X_1 = Z_1`.
pub fn simulate(cfg: &ChainConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    Ok(simulate_with(cfg, &mut rng))
}

/// [`simulate`] driven by a caller-owned generator.
pub fn simulate_with<R: Rng + ?Sized>(cfg: &ChainConfig, rng: &mut R) -> Trajectory {
    let len = cfg.horizon as usize + 1;
    let mut states = Vec::with_capacity(len);
    let mut env_draws = Vec::with_capacity(len);
    let mut imm_draws = Vec::with_capacity(len);
    states.push(cfg.x0);
    env_draws.push(None);
    imm_draws.push(PopCount::ZERO);
    let mut x = cfg.x0;
    for n in 1..len {
        let beta = cfg.env.sample(rng);
        let b = if n == 1 { PopCount::ZERO } else { cfg.survivors(x, beta, rng) };
        let z = cfg.imm.sample(rng);
        x = b + z;
        states.push(x);
        env_draws.push(Some(beta));
        imm_draws.push(z);
    }
    Trajectory {
        states,
        env_draws,
        imm_draws,
        seed: cfg.seed,
    }
}

/// `X_n` alone, without storing the path.
pub fn simulate_endpoint<R: Rng + ?Sized>(cfg: &ChainConfig, n: u64, rng: &mut R) -> PopCount {
    let mut x = cfg.x0;
    for k in 1..=n {
        let beta = cfg.env.sample(rng);
        let b = if k == 1 { PopCount::ZERO } else { cfg.survivors(x, beta, rng) };
        x = b + cfg.imm.sample(rng);
    }
    x
}

pub(crate) fn require_horizon(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::Precondition("n must be at least 1".into()))
    } else {
        Ok(())
    }
}
