//! Environment and immigration laws.

mod env;
mod immigration;
mod quad;
mod series;
mod series_bound;

use serde::{Deserialize, Serialize};

pub use env::EnvDistribution;
pub use immigration::{ImmigrationDistribution, ImmigrationSpec, TailLimits, TailReport};
pub use quad::adaptive_simpson;
pub use series::{imm_normalizer, Normalizer, NORMALIZER_CUTOFF};
pub use series_bound::{series_bound, SeriesBound, SummationMethod, K1};

/// A moment that is either a finite number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    /// The value, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            Moment::Finite(v) => v,
            Moment::Infinite => f64::INFINITY,
        }
    }
}
