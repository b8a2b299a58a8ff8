//! Discrete-time population chains hit by binomial catastrophes in an i.i.d.
//! random environment, with i.i.d. immigration.
//!
//! At each step every individual survives independently with a survival
//! probability `β_n` that is drawn once per step and shared by the whole
//! population, and `Z_n` immigrants arrive:
//!
//! ```text
//! X_0 = x0,  B_0 = 0,  X_n = B_{n-1} + Z_n,  B_n | X_n ~ Binomial(X_n, β_{n+1})
//! ```
//!
//! The crate provides
//! - [`distributions`]: the environment law of `β` and the immigration law of
//!   `Z`, including the heavy-tailed family `P(Z=k) = C / (k (ln k)^(a+1))`;
//! - [`chain`]: direct simulation, the sum-of-binomials representation, an
//!   exact forward DP oracle and the return-probability / generating-function
//!   formulas;
//! - [`classify`]: regime classification (positive recurrent, null recurrent,
//!   transient) from log-moment and tail data;
//! - [`neuts`]: the catastrophe-at-random-times variant and its embedded chain;
//! - [`stats`]: reproducible RNG streams, parallel replication, chi-square and
//!   total-variation tests and return-time diagnostics.

pub mod chain;
pub mod classify;
pub mod distributions;
mod error;
pub mod neuts;
pub mod stats;

pub use chain::{ChainConfig, PopCount, Trajectory};
pub use classify::{ClassificationInput, Regime, Verdict};
pub use distributions::{EnvDistribution, ImmigrationDistribution, ImmigrationSpec, Moment};
pub use error::{Error, Result};
pub use neuts::{NeutsConfig, NeutsTrajectory};
pub use stats::{RngSpec, SimRng, TestResult};
