use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::series::{raw_log_series, sum_with_remainder, HeavyTail, Normalizer, SeriesLaw, NORMALIZER_CUTOFF};
use super::Moment;
use crate::chain::PopCount;
use crate::{Error, Result};

/// Wire form of an immigration law (the experiment-config grammar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImmigrationSpec {
    /// `Z = k` almost surely, `k ≥ 1`.
    Deterministic { k: u64 },
    /// `(count, probability)` pairs; counts may include 0.
    FiniteTable { pmf: Vec<(u64, f64)> },
    /// `P(Z=k) = C / (k (ln k)^(a+1))` for `k ≥ 2`.
    LogTail { a: f64 },
    /// `Z = W − 1` with `W ~ LogTail(a)`: support `{1, 2, …}` and the same
    /// tail limits and log-moment finiteness as `LogTail(a)`.
    ShiftedLogTail { a: f64 },
    /// `P(Z=k) = (6/π²) / k²` for `k ≥ 1`.
    InverseSquare,
}

/// Law of the number of immigrants per step.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ImmigrationSpec", into = "ImmigrationSpec")]
pub struct ImmigrationDistribution {
    spec: ImmigrationSpec,
    law: Law,
}

#[derive(Debug, Clone)]
enum Law {
    Finite(Arc<FiniteLaw>),
    Heavy(Arc<HeavyTail>),
}

#[derive(Debug)]
struct FiniteLaw {
    values: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// `suffix[i] = Σ_{j≥i} probs[j]`.
    suffix: Vec<f64>,
}

impl FiniteLaw {
    fn new(mut pmf: Vec<(u64, f64)>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidDistribution("empty immigration table".into()));
        }
        pmf.sort_by_key(|e| e.0);
        if pmf.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("duplicate count in immigration table".into()));
        }
        if pmf.iter().any(|e| !(e.1 >= 0.0 && e.1.is_finite())) {
            return Err(Error::InvalidDistribution("negative immigration probability".into()));
        }
        let total: f64 = pmf.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDistribution(format!(
                "immigration probabilities sum to {total}, not 1"
            )));
        }
        pmf.retain(|e| e.1 > 0.0);
        let values: Vec<u64> = pmf.iter().map(|e| e.0).collect();
        let probs: Vec<f64> = pmf.iter().map(|e| e.1 / total).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let mut suffix = vec![0.0; probs.len()];
        let mut acc = 0.0;
        for i in (0..probs.len()).rev() {
            acc += probs[i];
            suffix[i] = acc;
        }
        Ok(Self {
            values,
            probs,
            cumulative,
            suffix,
        })
    }

    fn pmf(&self, k: u64) -> f64 {
        self.values.binary_search(&k).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    fn tail(&self, k: u64) -> f64 {
        let i = self.values.partition_point(|&v| v < k);
        self.suffix.get(i).copied().unwrap_or(0.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// `P(ln Z > t)` at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub t: f64,
    pub tail: f64,
    /// `t · tail`.
    pub functional: f64,
}

/// Limits of `t · P(ln Z > t)` as `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLimits {
    pub liminf: f64,
    /// May be `+∞`.
    pub limsup: f64,
}

impl TryFrom<ImmigrationSpec> for ImmigrationDistribution {
    type Error = Error;

    fn try_from(spec: ImmigrationSpec) -> Result<Self> {
        let check_a = |a: f64| {
            if a > 0.0 && a.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!("log-tail exponent a = {a} must be positive")))
            }
        };
        let law = match &spec {
            ImmigrationSpec::Deterministic { k } => {
                if *k < 1 {
                    return Err(Error::InvalidDistribution("deterministic count must be ≥ 1".into()));
                }
                Law::Finite(Arc::new(FiniteLaw::new(vec![(*k, 1.0)])?))
            }
            ImmigrationSpec::FiniteTable { pmf } => Law::Finite(Arc::new(FiniteLaw::new(pmf.clone())?)),
            ImmigrationSpec::LogTail { a } => {
                check_a(*a)?;
                Law::Heavy(Arc::new(HeavyTail::log_tail(*a, 0)?))
            }
            ImmigrationSpec::ShiftedLogTail { a } => {
                check_a(*a)?;
                Law::Heavy(Arc::new(HeavyTail::log_tail(*a, 1)?))
            }
            ImmigrationSpec::InverseSquare => Law::Heavy(Arc::new(HeavyTail::inverse_square())),
        };
        Ok(Self { spec, law })
    }
}

impl From<ImmigrationDistribution> for ImmigrationSpec {
    fn from(d: ImmigrationDistribution) -> Self {
        d.spec
    }
}

impl PartialEq for ImmigrationDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl ImmigrationDistribution {
    pub fn new(spec: ImmigrationSpec) -> Result<Self> {
        spec.try_into()
    }

    pub fn deterministic(k: u64) -> Result<Self> {
        Self::new(ImmigrationSpec::Deterministic { k })
    }

    pub fn finite_table(pmf: Vec<(u64, f64)>) -> Result<Self> {
        Self::new(ImmigrationSpec::FiniteTable { pmf })
    }

    pub fn log_tail(a: f64) -> Result<Self> {
        Self::new(ImmigrationSpec::LogTail { a })
    }

    pub fn shifted_log_tail(a: f64) -> Result<Self> {
        Self::new(ImmigrationSpec::ShiftedLogTail { a })
    }

    pub fn inverse_square() -> Self {
        Self::new(ImmigrationSpec::InverseSquare).expect("inverse-square law is always valid")
    }

    pub fn spec(&self) -> &ImmigrationSpec {
        &self.spec
    }

    /// `P(Z ≥ 2) > 0`, needed for irreducibility of the chain.
    pub fn is_irreducible(&self) -> bool {
        self.tail_count(2) > 0.0
    }

    /// The certified normalizer of the heavy-tailed variants.
    pub fn normalizer(&self) -> Option<Normalizer> {
        match &self.law {
            Law::Heavy(h) => Some(h.normalizer),
            Law::Finite(_) => None,
        }
    }

    /// Support points and probabilities of a finite-support law.
    pub fn finite_support(&self) -> Option<Vec<(u64, f64)>> {
        match &self.law {
            Law::Finite(f) => Some(f.values.iter().copied().zip(f.probs.iter().copied()).collect()),
            Law::Heavy(_) => None,
        }
    }

    pub fn max_support(&self) -> Option<u64> {
        match &self.law {
            Law::Finite(f) => f.values.last().copied(),
            Law::Heavy(_) => None,
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match &self.law {
            Law::Finite(f) => f.pmf(k),
            Law::Heavy(h) => h.pmf_z(k),
        }
    }

    /// `P(Z ≥ k)`.
    pub fn tail_count(&self, k: u64) -> f64 {
        match &self.law {
            Law::Finite(f) => f.tail(k),
            Law::Heavy(h) => h.tail_z(k),
        }
    }

    /// `P(Z ≤ k)`, defined as `1 − P(Z ≥ k+1)`.
    pub fn cdf(&self, k: u64) -> f64 {
        match k.checked_add(1) {
            Some(k1) => 1.0 - self.tail_count(k1),
            None => 1.0,
        }
    }

    /// `P(Z = 1)`.
    pub fn p1(&self) -> f64 {
        self.pmf(1)
    }

    /// Exact inverse-CDF draw. Heavy-tailed draws whose inverse lies beyond
    /// `2^50` come back in log scale with `ln Z = (C / (a u))^(1/a)`
    /// (log-tail) or `ln(C / u)` (inverse square), the inverse of the
    /// integral tail, whose relative error on `ln Z` there is below `1e−12`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PopCount {
        match &self.law {
            Law::Finite(f) => PopCount::from_u64(f.sample(rng)),
            Law::Heavy(h) => {
                let u = 1.0 - rng.random::<f64>();
                match h.inverse_raw_tail(h.raw_target(u)) {
                    Ok(w) => PopCount::from_u64(w - h.shift),
                    Err(ln_w) => PopCount::from_ln(ln_w),
                }
            }
        }
    }

    /// `E(ln Z)` (with `ln 0` read as `0`, i.e. `E ln max(Z, 1)`); infinite
    /// exactly for the log-tail families with `a ≤ 1`.
    pub fn log_moment(&self) -> Moment {
        match (&self.spec, &self.law) {
            (_, Law::Finite(f)) => Moment::Finite(
                f.values
                    .iter()
                    .zip(&f.probs)
                    .map(|(&v, &p)| if v > 1 { p * (v as f64).ln() } else { 0.0 })
                    .sum(),
            ),
            (ImmigrationSpec::LogTail { a } | ImmigrationSpec::ShiftedLogTail { a }, Law::Heavy(h)) => {
                if *a <= 1.0 {
                    return Moment::Infinite;
                }
                // Σ ln k · f_{a+1}(k) = Σ 1/(k (ln k)^a), the raw series of exponent a−1.
                let s = raw_log_series(*a - 1.0).expect("a > 1");
                let mut v = h.c() * s;
                if h.shift == 1 {
                    // ln(k−1) = ln k + ln(1 − 1/k); the correction converges like Σ 1/(k² ln^(a+1) k).
                    let law = SeriesLaw::LogTail { a: *a };
                    let corr = sum_with_remainder(2, NORMALIZER_CUTOFF, |x| -(-1.0 / x).ln_1p() * law.term(x), |_| 0.0);
                    v -= h.c() * corr;
                }
                Moment::Finite(v)
            }
            (ImmigrationSpec::InverseSquare, Law::Heavy(h)) => {
                let g = |x: f64| x.ln() / (x * x);
                let dg = |x: f64| (1.0 - 2.0 * x.ln()) / (x * x * x);
                let s = sum_with_remainder(2, 1_000_000, g, |x| (x.ln() + 1.0) / x - 0.5 * g(x) - dg(x) / 12.0);
                Moment::Finite(h.c() * s)
            }
            _ => unreachable!("heavy law always comes from a heavy spec"),
        }
    }

    /// `P(ln Z > t)` and the functional `t P(ln Z > t)`.
    pub fn log_tail_report(&self, t: f64) -> Result<TailReport> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(crate::error::invalid("t", "must be positive"));
        }
        let x = t.exp();
        let tail = match &self.law {
            Law::Finite(f) => {
                let k = if x >= u64::MAX as f64 { u64::MAX } else { x.floor() as u64 + 1 };
                f.tail(k)
            }
            Law::Heavy(h) => h.tail_above_real(x),
        };
        Ok(TailReport {
            t,
            tail,
            functional: t * tail,
        })
    }

    /// Analytic limits of `t P(ln Z > t)`.
    pub fn tail_limits(&self) -> TailLimits {
        let zero = TailLimits {
            liminf: 0.0,
            limsup: 0.0,
        };
        match (&self.spec, &self.law) {
            (ImmigrationSpec::LogTail { a } | ImmigrationSpec::ShiftedLogTail { a }, Law::Heavy(h)) => {
                if *a > 1.0 {
                    zero
                } else if *a < 1.0 {
                    TailLimits {
                        liminf: f64::INFINITY,
                        limsup: f64::INFINITY,
                    }
                } else {
                    TailLimits {
                        liminf: h.c(),
                        limsup: h.c(),
                    }
                }
            }
            _ => zero,
        }
    }

    /// `E(e^{−λZ}) = Σ_k e^{−λk} P(Z=k)`.
    pub fn laplace_direct(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(match &self.law {
            Law::Finite(f) => f
                .values
                .iter()
                .zip(&f.probs)
                .map(|(&v, &p)| p * (-lambda * v as f64).exp())
                .sum(),
            Law::Heavy(_) => {
                let mut acc = 0.0;
                let mut k = 0u64;
                loop {
                    acc += (-lambda * k as f64).exp() * self.pmf(k);
                    k += 1;
                    // Σ_{j≥k} e^{−λj} P(Z=j) ≤ e^{−λk} P(Z≥k)
                    if (-lambda * k as f64).exp() * self.tail_count(k) < 1e-14 {
                        break;
                    }
                }
                acc
            }
        })
    }

    /// `1 − (e^λ − 1) Σ_{k≥1} e^{−λk} P(Z ≥ k)`.
    pub fn laplace_tail_form(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let mut acc = 0.0;
        let limit = self.max_support();
        let mut k = 1u64;
        loop {
            if limit.is_some_and(|m| k > m) {
                break;
            }
            let term = (-lambda * k as f64).exp() * self.tail_count(k);
            acc += term;
            k += 1;
            // (e^λ − 1) Σ_{j≥k} e^{−λj} P(Z≥j) ≤ e^{−λ(k−1)} P(Z≥k)
            if limit.is_none() && (-lambda * (k - 1) as f64).exp() * self.tail_count(k) < 1e-14 {
                break;
            }
        }
        Ok(1.0 - lambda.exp_m1() * acc)
    }

    /// Probability generating function `E(s^Z)` for `s ∈ (0, 1]`.
    pub fn pgf(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(crate::error::invalid("s", format!("{s} must lie in (0, 1]")));
        }
        if s == 1.0 {
            return Ok(1.0);
        }
        match &self.law {
            Law::Finite(f) => Ok(f.values.iter().zip(&f.probs).map(|(&v, &p)| p * s.powf(v as f64)).sum()),
            Law::Heavy(_) => {
                let lambda = -s.ln();
                if lambda < 1e-6 {
                    return Err(Error::Unsupported(format!(
                        "series generating function at s = {s} needs more than 10^7 terms"
                    )));
                }
                self.laplace_direct(lambda)
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid("lambda", "must be positive"))
    }
}
