//! The catastrophe chain: direct simulation, the sum-of-binomials
//! representation, the exact forward recursion and the formula routes for
//! return probabilities and generating functions.

mod exact;
mod formulas;
mod popcount;
mod representation;
mod simulate;

pub use exact::{
    binomial_row_pmf, exact_distribution, lossless_cap, pgf_exact, pgf_formula_exact, return_prob_exact, ExactLaw,
    MAX_ENV_PATHS, MAX_STATE_CAP,
};
pub use formulas::{green_partial_sum, pgf_formula, return_prob_formula, Estimate};
pub use popcount::{PopCount, SWITCH_DOWN, SWITCH_UP};
pub use representation::{representation_sample, SKIP_LN_PROB};
pub use simulate::{
    binomial_thin, simulate, simulate_endpoint, simulate_with, step, ChainConfig, ThinningConvention, Trajectory,
};

pub(crate) use simulate::{csv_row, thin_ln};
