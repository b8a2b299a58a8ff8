use rand::distr::{Distribution, Open01};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quad::adaptive_simpson;
use super::Moment;
use crate::{Error, Result};

/// Absolute tolerance used for the `Uniform01` moment integrals.
pub const QUAD_TOL: f64 = 1e-12;
/// The singular part `(0, ε)` of the `Uniform01` integrals is done in closed form.
const SINGULAR_CUT: f64 = 1e-8;

/// Law of the per-step survival probability `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvDistribution {
    PointMass { beta: f64 },
    Uniform01,
    /// `(value, weight)` atoms.
    FiniteTable { atoms: Vec<(f64, f64)> },
}

impl EnvDistribution {
    pub fn point_mass(beta: f64) -> Result<Self> {
        let d = EnvDistribution::PointMass { beta };
        d.validate()?;
        Ok(d)
    }

    pub fn finite_table(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let d = EnvDistribution::FiniteTable { atoms };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |b: f64| b > 0.0 && b < 1.0;
        match self {
            EnvDistribution::PointMass { beta } => {
                if !open_unit(*beta) {
                    return Err(Error::InvalidDistribution(format!(
                        "point mass β = {beta} must lie in (0, 1)"
                    )));
                }
            }
            EnvDistribution::Uniform01 => {}
            EnvDistribution::FiniteTable { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution("empty β table".into()));
                }
                for &(b, w) in atoms {
                    if !open_unit(b) {
                        return Err(Error::InvalidDistribution(format!(
                            "β atom {b} must lie in (0, 1)"
                        )));
                    }
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(Error::InvalidDistribution(format!(
                            "β atom weight {w} must be positive"
                        )));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "β weights sum to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            EnvDistribution::PointMass { beta } => *beta,
            EnvDistribution::Uniform01 => Open01.sample(rng),
            EnvDistribution::FiniteTable { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(b, w) in atoms {
                    acc += w;
                    if u < acc {
                        return b;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// `μ = E(−ln β)`.
    pub fn log_moment(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            EnvDistribution::PointMass { beta } => -beta.ln(),
            EnvDistribution::FiniteTable { atoms } => atoms.iter().map(|&(b, w)| -w * b.ln()).sum(),
            EnvDistribution::Uniform01 => {
                let e = SINGULAR_CUT;
                let head = e * (1.0 - e.ln());
                head + adaptive_simpson(&|x: f64| -x.ln(), e, 1.0, QUAD_TOL)
            }
        })
    }

    /// `E(β^{−θ})`, infinite when the integral diverges.
    pub fn neg_moment(&self, theta: f64) -> Result<Moment> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(crate::error::invalid("theta", "must be positive"));
        }
        self.validate()?;
        Ok(match self {
            EnvDistribution::PointMass { beta } => Moment::Finite(beta.powf(-theta)),
            EnvDistribution::FiniteTable { atoms } => {
                Moment::Finite(atoms.iter().map(|&(b, w)| w * b.powf(-theta)).sum())
            }
            EnvDistribution::Uniform01 => {
                if theta >= 1.0 {
                    Moment::Infinite
                } else {
                    let e = SINGULAR_CUT;
                    let head = e.powf(1.0 - theta) / (1.0 - theta);
                    Moment::Finite(head + adaptive_simpson(&|x: f64| x.powf(-theta), e, 1.0, QUAD_TOL))
                }
            }
        })
    }

    /// Whether `E(β^{−θ}) < ∞` for some `θ > 0`.
    pub fn has_negative_moment(&self) -> bool {
        [1.0, 0.5, 0.1]
            .iter()
            .any(|&t| matches!(self.neg_moment(t), Ok(Moment::Finite(_))))
    }

    /// `E(β)`.
    pub fn mean(&self) -> f64 {
        match self {
            EnvDistribution::PointMass { beta } => *beta,
            EnvDistribution::Uniform01 => 0.5,
            EnvDistribution::FiniteTable { atoms } => atoms.iter().map(|&(b, w)| b * w).sum(),
        }
    }

    /// Atoms of a discrete law; `None` for `Uniform01`.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            EnvDistribution::PointMass { beta } => Some(vec![(*beta, 1.0)]),
            EnvDistribution::FiniteTable { atoms } => Some(atoms.clone()),
            EnvDistribution::Uniform01 => None,
        }
    }
}
