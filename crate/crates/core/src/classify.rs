//! Regime classification from the log-moment of `β` and the tail of `ln Z`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{imm_normalizer, EnvDistribution, ImmigrationDistribution};
use crate::Result;

/// Half-width of the band around `β_c` where no verdict is given.
pub const BETA_C_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PositiveRecurrent,
    NullRecurrent,
    Transient,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PositiveRecurrent => "positive_recurrent",
            Verdict::NullRecurrent => "null_recurrent",
            Verdict::Transient => "transient",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub verdict: Verdict,
    pub citations: Vec<String>,
    /// Why no verdict was reached, or remarks on the one that was.
    pub reasons: Vec<String>,
}

impl Regime {
    fn new(verdict: Verdict, citations: &[&str]) -> Self {
        Self {
            verdict,
            citations: citations.iter().map(|c| c.to_string()).collect(),
            reasons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationInput {
    /// `E(−ln β)`.
    pub mu: f64,
    /// `limsup t P(ln Z > t)`, possibly `+∞`.
    pub tail_limsup: f64,
    pub tail_liminf: f64,
    /// `E(ln Z) < ∞`.
    pub log_z_finite: bool,
    /// Environment and immigration sequences are independent.
    pub hyp1: bool,
    /// `E(β^{−θ}) < ∞` for some `θ > 0`.
    pub hyp2: bool,
}

impl ClassificationInput {
    /// Inputs read off the laws. The tail limits are the analytic values of
    /// each variant. The two sequences are always sampled independently
    /// here, so `hyp1` holds.
    pub fn from_distributions(env: &EnvDistribution, imm: &ImmigrationDistribution) -> Result<Self> {
        let limits = imm.tail_limits();
        Ok(Self {
            mu: env.log_moment()?,
            tail_limsup: limits.limsup,
            tail_liminf: limits.liminf,
            log_z_finite: imm.log_moment().is_finite(),
            hyp1: true,
            hyp2: env.has_negative_moment(),
        })
    }
}

pub fn classify_general(inp: &ClassificationInput) -> Result<Regime> {
    if !(inp.mu > 0.0 && inp.mu.is_finite()) {
        return Err(crate::error::invalid("mu", format!("{} must be positive and finite", inp.mu)));
    }
    if inp.tail_liminf > inp.tail_limsup || inp.tail_liminf < 0.0 || inp.tail_liminf.is_nan() {
        return Err(crate::error::invalid("tail_liminf", "must lie in [0, tail_limsup]"));
    }
    if inp.log_z_finite {
        return Ok(Regime::new(Verdict::PositiveRecurrent, &["Thm3"]));
    }
    if inp.hyp1 && inp.tail_limsup < inp.mu {
        return Ok(Regime::new(Verdict::NullRecurrent, &["Thm1", "Thm3-converse"]));
    }
    if inp.hyp2 && inp.tail_liminf > inp.mu {
        return Ok(Regime::new(Verdict::Transient, &["Thm2"]));
    }
    let mut r = Regime::new(Verdict::Indeterminate, &[]);
    if inp.tail_limsup < inp.mu {
        r.reasons.push("limsup t P(ln Z > t) < μ but the environment and immigration are not independent".into());
    } else if inp.tail_liminf > inp.mu {
        r.reasons.push("liminf t P(ln Z > t) > μ but E(β^−θ) = ∞ for every θ > 0".into());
    } else {
        r.reasons.push(format!(
            "μ = {} lies in [liminf, limsup] = [{}, {}] of t P(ln Z > t)",
            inp.mu, inp.tail_liminf, inp.tail_limsup
        ));
    }
    Ok(r)
}

/// `β_c = e^{−C}` for the `a = 1` log-tail law.
pub fn beta_critical(a: f64) -> Result<f64> {
    Ok(beta_critical_bracket(a)?.0)
}

/// `β_c` with a certified half-width inherited from the normalizer.
pub fn beta_critical_bracket(a: f64) -> Result<(f64, f64)> {
    if a != 1.0 {
        return Err(crate::error::invalid("a", "the critical value exists only for a = 1"));
    }
    let c = imm_normalizer(1.0, 2)?;
    let bc = (-c.value).exp();
    Ok((bc, bc * c.error_bound * 1.000_001))
}

/// Verdict for a point-mass environment `β` and log-tail immigration with
/// exponent `a`. For `a = 1` the chain is null recurrent below `β_c` and
/// transient above it; no verdict is given within [`BETA_C_TOLERANCE`] of
/// `β_c`.
pub fn classify_example(a: f64, beta: f64) -> Result<Regime> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(crate::error::invalid("a", format!("{a} must be positive")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(crate::error::invalid("beta", format!("{beta} must lie in (0, 1)")));
    }
    let (limsup, liminf) = if a > 1.0 {
        (0.0, 0.0)
    } else if a < 1.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let bc = beta_critical(1.0)?;
        if (beta - bc).abs() <= BETA_C_TOLERANCE {
            let mut r = Regime::new(Verdict::Indeterminate, &[]);
            r.reasons.push(format!("β = {beta} is within {BETA_C_TOLERANCE:e} of β_c = {bc}"));
            return Ok(r);
        }
        let c = imm_normalizer(1.0, 2)?.value;
        (c, c)
    };
    let mut r = classify_general(&ClassificationInput {
        mu: -beta.ln(),
        tail_limsup: limsup,
        tail_liminf: liminf,
        log_z_finite: a > 1.0,
        hyp1: true,
        hyp2: true,
    })?;
    if a == 1.0 {
        r.reasons.push("a = 1: μ = −ln β exceeds C exactly when β < β_c, so small β is the recurrent side".into());
    }
    Ok(r)
}

/// Partial sums `Σ_{i≤k} Z_i b^i`, `k = 1, …, n`.
pub fn geometric_weighted_series<R: Rng + ?Sized>(
    imm: &ImmigrationDistribution,
    b: f64,
    n: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(b > 0.0 && b < 1.0) {
        return Err(crate::error::invalid("b", format!("{b} must lie in (0, 1)")));
    }
    let ln_b = b.ln();
    let mut acc = 0.0;
    Ok((1..=n)
        .map(|i| {
            let z = imm.sample(rng);
            if !z.is_zero() {
                acc += (z.ln() + i as f64 * ln_b).exp();
            }
            acc
        })
        .collect())
}

/// Largest increment of a partial-sum path over its last `⌈n/2⌉` indices.
pub fn last_half_max_increment(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    (n / 2..n)
        .map(|k| partial_sums[k] - if k == 0 { 0.0 } else { partial_sums[k - 1] })
        .fold(0.0, f64::max)
}

