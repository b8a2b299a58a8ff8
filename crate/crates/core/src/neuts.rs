//! Neuts' variant: catastrophes strike at random times and immigrants
//! arrive in between. Watching it just before each catastrophe gives a
//! catastrophe chain whose immigration law is the aggregated one.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::chain::{csv_row, thin_ln, PopCount};
use crate::distributions::{EnvDistribution, ImmigrationDistribution};
use crate::stats::{chi_square_two_sample, chi_square_vs_exact, replicate, Histogram, RngSpec, SimRng, TestResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutsConfig {
    /// Per-step catastrophe probability.
    pub p: f64,
    pub env: EnvDistribution,
    pub imm: ImmigrationDistribution,
    pub horizon: u64,
    pub seed: u64,
    /// Initial population; a fresh immigration draw when absent.
    #[serde(default)]
    pub y0: Option<PopCount>,
}

impl NeutsConfig {
    pub fn new(p: f64, env: EnvDistribution, imm: ImmigrationDistribution, horizon: u64, seed: u64) -> Self {
        Self {
            p,
            env,
            imm,
            horizon,
            seed,
            y0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(crate::error::invalid("p", format!("{} must lie in (0, 1)", self.p)));
        }
        self.env.validate()?;
        self.env.log_moment()?;
        Ok(())
    }

    fn initial<R: Rng + ?Sized>(&self, rng: &mut R) -> PopCount {
        self.y0.unwrap_or_else(|| self.imm.sample(rng))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutsTrajectory {
    pub states: Vec<PopCount>,
    /// `true` at catastrophe steps; index 0 is always `false`.
    pub collapse_flags: Vec<bool>,
    /// `β` at catastrophe steps.
    pub env_draws: Vec<Option<f64>>,
    /// `Z` at immigration steps.
    pub imm_draws: Vec<Option<PopCount>>,
    pub seed: u64,
}

impl NeutsTrajectory {
    /// Trajectory CSV with an extra `collapse` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "population_log10", "beta", "z_log10", "exact", "collapse"])?;
        for (n, x) in self.states.iter().enumerate() {
            let z = self.imm_draws[n];
            let mut row = csv_row(n, *x, self.env_draws[n], z.unwrap_or_default(), z.is_some());
            row.push(self.collapse_flags[n].to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// With probability `p` the population is thinned by a fresh `β`,
/// otherwise `Z` immigrants are added.
pub fn simulate_neuts(cfg: &NeutsConfig) -> Result<NeutsTrajectory> {
    cfg.validate()?;
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let len = cfg.horizon as usize + 1;
    let mut traj = NeutsTrajectory {
        states: Vec::with_capacity(len),
        collapse_flags: Vec::with_capacity(len),
        env_draws: Vec::with_capacity(len),
        imm_draws: Vec::with_capacity(len),
        seed: cfg.seed,
    };
    let mut y = cfg.initial(&mut rng);
    traj.states.push(y);
    traj.collapse_flags.push(false);
    traj.env_draws.push(None);
    traj.imm_draws.push(None);
    for _ in 1..len {
        if rng.random::<f64>() < cfg.p {
            let beta = cfg.env.sample(&mut rng);
            y = thin_ln(y, beta.ln(), &mut rng);
            traj.collapse_flags.push(true);
            traj.env_draws.push(Some(beta));
            traj.imm_draws.push(None);
        } else {
            let z = cfg.imm.sample(&mut rng);
            y = y + z;
            traj.collapse_flags.push(false);
            traj.env_draws.push(None);
            traj.imm_draws.push(Some(z));
        }
        traj.states.push(y);
    }
    Ok(traj)
}

/// Catastrophe steps `T_1 < T_2 < …`.
pub fn collapse_times(traj: &NeutsTrajectory) -> Vec<u64> {
    traj.collapse_flags
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(n, _)| n as u64)
        .collect()
}

/// `G_k = T_k − T_{k−1}` with `T_0 = 0`.
pub fn collapse_gaps(times: &[u64]) -> Vec<u64> {
    let mut prev = 0;
    times
        .iter()
        .map(|&t| {
            let g = t - prev;
            prev = t;
            g
        })
        .collect()
}

fn require_collapses(traj: &NeutsTrajectory, needed: usize) -> Result<Vec<u64>> {
    let times = collapse_times(traj);
    if times.len() < needed {
        return Err(Error::InsufficientCollapses {
            needed,
            found: times.len(),
            horizon: traj.states.len() as u64 - 1,
        });
    }
    Ok(times)
}

/// `X′_k = Y_{T_k − 1}`, the population just before the `k`-th catastrophe.
pub fn embedded_chain(traj: &NeutsTrajectory) -> Result<Vec<PopCount>> {
    let times = require_collapses(traj, 1)?;
    Ok(times.iter().map(|&t| traj.states[t as usize - 1]).collect())
}

/// `Z′_k`, the immigrants that arrived strictly between `T_{k−1}` and `T_k`
/// (0 when there were none).
pub fn embedded_increments(traj: &NeutsTrajectory) -> Result<Vec<PopCount>> {
    let times = require_collapses(traj, 1)?;
    let mut prev = 0usize;
    Ok(times
        .iter()
        .map(|&t| {
            let t = t as usize;
            let sum = traj.imm_draws[prev + 1..t]
                .iter()
                .flatten()
                .fold(PopCount::ZERO, |acc, &z| acc + z);
            prev = t;
            sum
        })
        .collect())
}

/// Replays the embedded chain: `X′_1 = Y_0 + Z′_1` and
/// `X′_k = Y_{T_{k−1}} + Z′_k` with `Y_{T_{k−1}} ≤ X′_{k−1}` the survivors.
/// The immigrants of each gap are added one draw at a time, in path order,
/// so the replay is exact also for log-scale counts.
pub fn embedded_recursion_holds(traj: &NeutsTrajectory) -> Result<bool> {
    let times = require_collapses(traj, 1)?;
    let x = embedded_chain(traj)?;
    let replay = |start: PopCount, from: usize, to: usize| {
        traj.imm_draws[from..to].iter().flatten().fold(start, |acc, &z| acc + z)
    };
    let mut ok = x[0] == replay(traj.states[0], 1, times[0] as usize);
    for k in 1..x.len() {
        let t_prev = times[k - 1] as usize;
        let survivors = traj.states[t_prev];
        ok &= survivors <= x[k - 1];
        ok &= x[k] == replay(survivors, t_prev + 1, times[k] as usize);
    }
    Ok(ok)
}

fn geometric(p: f64) -> Result<Geometric> {
    if !(p > 0.0 && p < 1.0) {
        return Err(crate::error::invalid("p", format!("{p} must lie in (0, 1)")));
    }
    Ok(Geometric::new(p).expect("p in (0, 1)"))
}

/// `Z′ = Σ_{i=1}^{G′} Z_i` with `P(G′ = g) = p (1−p)^g`.
pub fn aggregated_immigration_sample<R: Rng + ?Sized>(imm: &ImmigrationDistribution, p: f64, rng: &mut R) -> Result<PopCount> {
    let g = geometric(p)?.sample(rng);
    Ok(aggregate(imm, g, rng))
}

fn aggregate<R: Rng + ?Sized>(imm: &ImmigrationDistribution, g: u64, rng: &mut R) -> PopCount {
    (0..g).fold(PopCount::ZERO, |acc, _| acc + imm.sample(rng))
}

/// `X′_n` of one Neuts run, stepping until the `n`-th catastrophe or the
/// horizon.
fn neuts_embedded_endpoint<R: Rng + ?Sized>(cfg: &NeutsConfig, n: usize, rng: &mut R) -> Result<PopCount> {
    let mut y = cfg.initial(rng);
    let mut seen = 0;
    for _ in 0..cfg.horizon {
        if rng.random::<f64>() < cfg.p {
            seen += 1;
            if seen == n {
                return Ok(y);
            }
            let beta = cfg.env.sample(rng);
            y = thin_ln(y, beta.ln(), rng);
        } else {
            y = y + cfg.imm.sample(rng);
        }
    }
    Err(Error::InsufficientCollapses {
        needed: n,
        found: seen,
        horizon: cfg.horizon,
    })
}

/// `X_n` of the catastrophe chain with aggregated immigration: `X_1 = Y_0 + Z′_1`
/// and `X_k = Binomial(X_{k−1}, β_k) + Z′_k`.
fn coupled_chain_endpoint<R: Rng + ?Sized>(cfg: &NeutsConfig, n: usize, rng: &mut R) -> Result<PopCount> {
    let geo = geometric(cfg.p)?;
    let y0 = cfg.initial(rng);
    let g = geo.sample(rng);
    let mut x = y0 + aggregate(&cfg.imm, g, rng);
    for _ in 1..n {
        let beta = cfg.env.sample(rng);
        let b = thin_ln(x, beta.ln(), rng);
        let g = geo.sample(rng);
        x = b + aggregate(&cfg.imm, g, rng);
    }
    Ok(x)
}

/// Two-sample chi-square between `X′_n` from `reps` Neuts runs and `X_n`
/// from `reps` runs of the catastrophe chain with aggregated immigration.
/// Runs use disjoint streams derived from `cfg.seed`.
pub fn coupling_check(cfg: &NeutsConfig, n: u64, reps: u64) -> Result<TestResult> {
    cfg.validate()?;
    if reps == 0 {
        return Err(crate::error::invalid("reps", "must be at least 1"));
    }
    if n == 0 {
        return Err(crate::error::invalid("n", "must be at least 1"));
    }
    let spec = RngSpec::new(cfg.seed);
    let neuts = replicate(reps, spec.child(0), |_, rng| neuts_embedded_endpoint(cfg, n as usize, rng))?;
    let direct = replicate(reps, spec.child(1), |_, rng| coupled_chain_endpoint(cfg, n as usize, rng))?;
    chi_square_two_sample(&neuts.into_iter().collect(), &direct.into_iter().collect())
}

/// Goodness of fit of catastrophe gaps to `P(G = g) = p (1−p)^{g−1}`, `g ≥ 1`.
pub fn gap_law_test(p: f64, gaps: &[u64]) -> Result<TestResult> {
    geometric(p)?;
    let hist: Histogram = gaps.iter().copied().collect();
    let max = gaps.iter().copied().max().unwrap_or(1) as usize;
    let mut pmf = vec![0.0; max + 1];
    for (g, v) in pmf.iter_mut().enumerate().skip(1) {
        *v = p * (1.0 - p).powi(g as i32 - 1);
    }
    chi_square_vs_exact(&hist, &pmf)
}
