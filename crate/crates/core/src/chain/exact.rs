use serde::{Deserialize, Serialize};

use super::simulate::require_horizon;
use super::ChainConfig;
use crate::{Error, Result};

/// Largest number of environment paths enumerated by the exact formula routes.
pub const MAX_ENV_PATHS: usize = 1 << 20;
/// Largest state cap accepted by the forward recursion.
pub const MAX_STATE_CAP: u64 = 20_000;

/// Law of `X_n` on `{0, …, state_cap}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    pub pmf: Vec<f64>,
    /// Mass that left `{0, …, state_cap}` at some step.
    pub truncated_mass: f64,
}

impl ExactLaw {
    pub fn prob(&self, k: u64) -> f64 {
        self.pmf.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn pgf(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for p in &self.pmf {
            acc += p * pow;
            pow *= s;
        }
        acc
    }
}

fn env_atoms(cfg: &ChainConfig) -> Result<Vec<(f64, f64)>> {
    cfg.env
        .atoms()
        .ok_or_else(|| Error::Unsupported("exact routes need a discrete environment law".into()))
}

fn imm_support(cfg: &ChainConfig) -> Result<Vec<(u64, f64)>> {
    cfg.imm
        .finite_support()
        .ok_or_else(|| Error::Unsupported("exact routes need an immigration law with finite support".into()))
}

/// `Binomial(x, β)` pmf on `0..=x`, built by the ratio recurrence outwards
/// from the mode and normalized.
pub fn binomial_row_pmf(x: usize, beta: f64) -> Vec<f64> {
    let mut row = vec![0.0; x + 1];
    let mode = (((x + 1) as f64) * beta).floor().min(x as f64) as usize;
    let odds = beta / (1.0 - beta);
    row[mode] = 1.0;
    for k in mode..x {
        row[k + 1] = row[k] * ((x - k) as f64 / (k + 1) as f64) * odds;
    }
    for k in (0..mode).rev() {
        row[k] = row[k + 1] * ((k + 1) as f64 / (x - k) as f64) / odds;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= total);
    row
}

/// Forward recursion for the law of `X_n`: thin by each environment atom,
/// then convolve with the immigration law. Mass pushed above `state_cap`
/// is dropped and reported.
pub fn exact_distribution(cfg: &ChainConfig, n: u64, state_cap: u64) -> Result<ExactLaw> {
    require_horizon(n)?;
    if state_cap > MAX_STATE_CAP {
        return Err(crate::error::invalid("state_cap", format!("at most {MAX_STATE_CAP}")));
    }
    let atoms = env_atoms(cfg)?;
    let imm = imm_support(cfg)?;
    let cap = state_cap as usize;

    let immigrate = |survivors: &[f64]| -> (Vec<f64>, f64) {
        let mut next = vec![0.0; cap + 1];
        let mut lost = 0.0;
        for (y, &py) in survivors.iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            for &(z, pz) in &imm {
                let x = y as u64 + z;
                if x <= state_cap {
                    next[x as usize] += py * pz;
                } else {
                    lost += py * pz;
                }
            }
        }
        (next, lost)
    };

    let mut start = vec![0.0; cap + 1];
    start[0] = 1.0;
    let (mut pmf, mut truncated) = immigrate(&start);
    let rows: Vec<Vec<Vec<f64>>> = atoms
        .iter()
        .map(|&(b, _)| (0..=cap).map(|x| binomial_row_pmf(x, b)).collect())
        .collect();
    for _ in 2..=n {
        let mut survivors = vec![0.0; cap + 1];
        for (x, &px) in pmf.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (a, &(_, w)) in atoms.iter().enumerate() {
                for (y, &q) in rows[a][x].iter().enumerate() {
                    survivors[y] += px * w * q;
                }
            }
        }
        let (next, lost) = immigrate(&survivors);
        pmf = next;
        truncated += lost;
    }
    Ok(ExactLaw {
        pmf,
        truncated_mass: truncated,
    })
}

/// `X_n ≤ n · max Z`, so this cap loses no mass.
pub fn lossless_cap(cfg: &ChainConfig, n: u64) -> Result<u64> {
    let zmax = imm_support(cfg)?.last().map(|e| e.0).unwrap_or(0);
    n.checked_mul(zmax)
        .filter(|&c| c <= MAX_STATE_CAP)
        .ok_or_else(|| Error::Unsupported(format!("support of X_{n} exceeds {MAX_STATE_CAP}")))
}

/// `E(s^{X_n})` from the exact law.
pub fn pgf_exact(cfg: &ChainConfig, n: u64, s: f64) -> Result<f64> {
    check_s(s)?;
    let law = exact_distribution(cfg, n, lossless_cap(cfg, n)?)?;
    Ok(law.pgf(s))
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(crate::error::invalid("s", format!("{s} must lie in (0, 1)")))
    }
}

/// `E Π_{i=1}^m g(Π_{j≤i} β_j)` over all environment paths of length `m`.
fn env_path_expectation(atoms: &[(f64, f64)], m: usize, g: &dyn Fn(usize, f64) -> f64) -> Result<f64> {
    if atoms.len() > 1 && (atoms.len() as f64).powi(m as i32) > MAX_ENV_PATHS as f64 {
        return Err(Error::Unsupported(format!(
            "{} environment paths of length {m} are too many to enumerate",
            atoms.len()
        )));
    }
    fn rec(atoms: &[(f64, f64)], i: usize, m: usize, prod: f64, g: &dyn Fn(usize, f64) -> f64) -> f64 {
        if i > m {
            return 1.0;
        }
        atoms
            .iter()
            .map(|&(b, w)| {
                let p = prod * b;
                w * g(i, p) * rec(atoms, i + 1, m, p, g)
            })
            .sum()
    }
    Ok(rec(atoms, 1, m, 1.0, g))
}

/// `E(s^Z)` for `s ∈ [0, 1]`.
fn imm_pgf(imm: &[(u64, f64)], s: f64) -> f64 {
    imm.iter().map(|&(k, p)| p * s.powi(k as i32)).sum()
}

/// Requires `P(Z = 1) > 0` and `P(Z = 0) = 0`, under which
/// `P(X_n = 1) = p₁ I_{n−1}`.
pub(crate) fn return_formula_preconditions(cfg: &ChainConfig) -> Result<f64> {
    let p1 = cfg.imm.p1();
    if p1 <= 0.0 {
        return Err(Error::Precondition("return-probability formula needs p₁ = P(Z=1) > 0".into()));
    }
    if cfg.imm.pmf(0) > 0.0 {
        return Err(Error::Precondition("return-probability formula needs P(Z=0) = 0".into()));
    }
    Ok(p1)
}

/// `p₁ I_{n−1}` with `I_m = E Π_{i=1}^m E[(1 − Π_{j≤i} β_j)^Z]`, summed
/// exactly over the environment paths.
pub fn return_prob_exact(cfg: &ChainConfig, n: u64) -> Result<f64> {
    require_horizon(n)?;
    let p1 = return_formula_preconditions(cfg)?;
    let atoms = env_atoms(cfg)?;
    let imm = imm_support(cfg)?;
    let m = (n - 1) as usize;
    if atoms.len() == 1 {
        let b = atoms[0].0;
        let mut prod = 1.0;
        let mut acc = 1.0;
        for _ in 0..m {
            prod *= b;
            acc *= imm_pgf(&imm, 1.0 - prod);
        }
        return Ok(p1 * acc);
    }
    Ok(p1 * env_path_expectation(&atoms, m, &|_, p| imm_pgf(&imm, 1.0 - p))?)
}

/// `E exp(Σ_{i=1}^n Z_i ln(1 − β_{i,n}(1−s)))` summed exactly over the
/// environment, using `β_{i,n} =d Π_{j≤n−i} β_j`.
pub fn pgf_formula_exact(cfg: &ChainConfig, n: u64, s: f64) -> Result<f64> {
    require_horizon(n)?;
    check_s(s)?;
    let atoms = env_atoms(cfg)?;
    let imm = imm_support(cfg)?;
    let m = (n - 1) as usize;
    // the i = n term has β_{n,n} = 1
    let last = imm_pgf(&imm, s);
    if atoms.len() == 1 {
        let b = atoms[0].0;
        let mut prod = 1.0;
        let mut acc = last;
        for _ in 0..m {
            prod *= b;
            acc *= imm_pgf(&imm, 1.0 - prod * (1.0 - s));
        }
        return Ok(acc);
    }
    Ok(last * env_path_expectation(&atoms, m, &|_, p| imm_pgf(&imm, 1.0 - p * (1.0 - s)))?)
}
