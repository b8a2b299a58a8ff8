//! Certified sums for the heavy-tailed immigration laws.
//!
//! Both laws have raw terms `f(k)` that are positive, decreasing and convex
//! on their support, so the trapezoid rule over-estimates and the midpoint
//! rule under-estimates `∫ f`. For a cut-off `K` this brackets the remainder:
//!
//! ```text
//! ∫_K^∞ f − f(K)/2  ≤  Σ_{k>K} f(k)  ≤  ∫_{K+1/2}^∞ f
//! ```
//!
//! Point values use the Euler–Maclaurin estimate, which sits inside the
//! bracket and is far more accurate than its width suggests.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::Result;

/// Partial sums of the normalizer run to this index before the remainder
/// bracket takes over.
pub const NORMALIZER_CUTOFF: u64 = 10_000_000;

/// Cumulative table length used for exact inverse-CDF lookups.
pub(crate) const TABLE_LEN: usize = 1 << 16;

/// Per-term relative error allowance for `ln`/`powf` evaluation plus
/// compensated summation.
const SUM_REL_ERR: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SeriesLaw {
    /// `f(x) = 1 / (x (ln x)^(a+1))`.
    LogTail { a: f64 },
    /// `f(x) = 1 / x²`.
    InverseSquare,
}

impl SeriesLaw {
    pub(crate) fn term(&self, x: f64) -> f64 {
        match *self {
            SeriesLaw::LogTail { a } => 1.0 / (x * x.ln().powf(a + 1.0)),
            SeriesLaw::InverseSquare => 1.0 / (x * x),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            SeriesLaw::LogTail { a } => {
                let l = x.ln();
                -(l + a + 1.0) / (x * x * l.powf(a + 2.0))
            }
            SeriesLaw::InverseSquare => -2.0 / (x * x * x),
        }
    }

    /// `∫_x^∞ f`.
    pub(crate) fn integral_tail(&self, x: f64) -> f64 {
        match *self {
            SeriesLaw::LogTail { a } => 1.0 / (a * x.ln().powf(a)),
            SeriesLaw::InverseSquare => 1.0 / x,
        }
    }

    /// Euler–Maclaurin estimate of `Σ_{j≥k} f(j)` for large `k`.
    pub(crate) fn em_tail(&self, k: f64) -> f64 {
        let base = self.integral_tail(k) + 0.5 * self.term(k) - self.derivative(k) / 12.0;
        match self {
            // f''' = −24/x⁵ ; B₄/4! = −1/720
            SeriesLaw::InverseSquare => base - 1.0 / (30.0 * k.powi(5)),
            SeriesLaw::LogTail { .. } => base,
        }
    }

    /// Certified bracket of `Σ_{k>cut} f(k)`.
    fn remainder_bracket(&self, cut: f64) -> (f64, f64) {
        (
            self.integral_tail(cut) - 0.5 * self.term(cut),
            self.integral_tail(cut + 0.5),
        )
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Normalizing constant `C = 1 / Σ_{k≥kmin} f(k)` with a certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    /// `C`.
    pub value: f64,
    /// `|C − C_true| ≤ error_bound`.
    pub error_bound: f64,
    /// Point estimate of the raw series `Σ_{k≥kmin} f(k)`.
    pub raw_sum: f64,
    pub raw_sum_lower: f64,
    pub raw_sum_upper: f64,
}

fn certified_sum(law: SeriesLaw, kmin: u64, cutoff: u64) -> Normalizer {
    let mut acc = CompensatedSum::default();
    // smallest terms first
    for k in (kmin..=cutoff).rev() {
        acc.add(law.term(k as f64));
    }
    let partial = acc.value();
    let cut = cutoff as f64;
    let estimate = law.em_tail(cut) - law.term(cut);
    let (lo, hi) = law.remainder_bracket(cut);
    let slack = SUM_REL_ERR * partial;
    let raw_sum = partial + estimate;
    let raw_sum_lower = partial - slack + lo;
    let raw_sum_upper = partial + slack + hi;
    let value = 1.0 / raw_sum;
    let error_bound = (1.0 / raw_sum_lower - value).max(value - 1.0 / raw_sum_upper);
    Normalizer {
        value,
        error_bound,
        raw_sum,
        raw_sum_lower,
        raw_sum_upper,
    }
}

fn cache() -> &'static Mutex<HashMap<(u64, u64), Normalizer>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Normalizer>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Normalizer of `P(Z=k) = C / (k (ln k)^(a+1))`, `k ≥ kmin`.
pub fn imm_normalizer(a: f64, kmin: u64) -> Result<Normalizer> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(crate::error::invalid("a", format!("{a} must be positive")));
    }
    if kmin < 2 {
        return Err(crate::error::invalid("kmin", "must be at least 2"));
    }
    let key = (a.to_bits(), kmin);
    if let Some(n) = cache().lock().expect("normalizer cache").get(&key) {
        return Ok(*n);
    }
    let n = certified_sum(SeriesLaw::LogTail { a }, kmin, NORMALIZER_CUTOFF.max(kmin));
    cache().lock().expect("normalizer cache").insert(key, n);
    Ok(n)
}

/// `Σ_{k≥2} 1/(k (ln k)^(b+1))` for `b > 0`, the raw series behind
/// [`imm_normalizer`].
pub(crate) fn raw_log_series(b: f64) -> Result<f64> {
    Ok(imm_normalizer(b, 2)?.raw_sum)
}

/// Table-backed evaluation of a heavy-tailed law `W` and of `Z = W − shift`.
#[derive(Debug)]
pub(crate) struct HeavyTail {
    pub(crate) law: SeriesLaw,
    pub(crate) kmin: u64,
    pub(crate) shift: u64,
    pub(crate) normalizer: Normalizer,
    /// `prefix[j] = Σ_{k=kmin}^{kmin+j} f(k)`.
    prefix: Vec<f64>,
}

impl HeavyTail {
    pub(crate) fn log_tail(a: f64, shift: u64) -> Result<Self> {
        let normalizer = imm_normalizer(a, 2)?;
        Ok(Self::build(SeriesLaw::LogTail { a }, 2, shift, normalizer))
    }

    pub(crate) fn inverse_square() -> Self {
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let normalizer = Normalizer {
            value: 1.0 / zeta2,
            error_bound: 2.0 * f64::EPSILON / zeta2,
            raw_sum: zeta2,
            raw_sum_lower: zeta2,
            raw_sum_upper: zeta2,
        };
        Self::build(SeriesLaw::InverseSquare, 1, 0, normalizer)
    }

    fn build(law: SeriesLaw, kmin: u64, shift: u64, normalizer: Normalizer) -> Self {
        let mut acc = CompensatedSum::default();
        let prefix = (0..TABLE_LEN as u64)
            .map(|j| {
                acc.add(law.term((kmin + j) as f64));
                acc.value()
            })
            .collect();
        Self {
            law,
            kmin,
            shift,
            normalizer,
            prefix,
        }
    }

    pub(crate) fn c(&self) -> f64 {
        self.normalizer.value
    }

    fn raw_total(&self) -> f64 {
        self.normalizer.raw_sum
    }

    /// `Σ_{j≥k} f(j)` over the support of `W`.
    pub(crate) fn raw_tail_w(&self, k: u64) -> f64 {
        if k <= self.kmin {
            return self.raw_total();
        }
        let idx = (k - self.kmin - 1) as usize;
        if idx < TABLE_LEN {
            (self.raw_total() - self.prefix[idx]).max(0.0)
        } else {
            self.law.em_tail(k as f64)
        }
    }

    pub(crate) fn pmf_z(&self, k: u64) -> f64 {
        match k.checked_add(self.shift) {
            Some(w) if w >= self.kmin => self.c() * self.law.term(w as f64),
            _ => 0.0,
        }
    }

    /// `P(Z ≥ k)`.
    pub(crate) fn tail_z(&self, k: u64) -> f64 {
        match k.checked_add(self.shift) {
            Some(w) => (self.c() * self.raw_tail_w(w)).min(1.0),
            None => 0.0,
        }
    }

    /// `P(Z > x)` for a real threshold; beyond the exact-integer range the
    /// integral tail is used (relative error `O(f(x) / ∫_x^∞ f)`).
    pub(crate) fn tail_above_real(&self, x: f64) -> f64 {
        const EXACT: f64 = 9_007_199_254_740_992.0; // 2^53
        if x < EXACT {
            let k = x.floor().max(0.0) as u64 + 1;
            self.tail_z(k)
        } else {
            (self.c() * self.law.integral_tail(x + self.shift as f64)).min(1.0)
        }
    }

    /// Inverse of the survival function of `W`: the unique `k` with
    /// `raw_tail(k+1) < target ≤ raw_tail(k)`. Returns `Err(ln k)` when `k`
    /// exceeds `2^50` and only its logarithm is resolved.
    pub(crate) fn inverse_raw_tail(&self, target: f64) -> std::result::Result<u64, f64> {
        let total = self.raw_total();
        let j = self.prefix.partition_point(|&p| p <= total - target);
        if j < TABLE_LEN {
            return Ok(self.kmin + j as u64);
        }
        let ln_guess = match self.law {
            SeriesLaw::LogTail { a } => (1.0 / (a * target)).powf(1.0 / a),
            SeriesLaw::InverseSquare => (1.0 / target).ln(),
        };
        const EXACT_SEARCH_LN: f64 = 50.0 * std::f64::consts::LN_2;
        if ln_guess > EXACT_SEARCH_LN {
            return Err(ln_guess);
        }
        let above = |k: u64| self.raw_tail_w(k + 1) < target;
        let mut lo = self.kmin + TABLE_LEN as u64 - 1;
        let mut hi = ((2.0 * ln_guess.exp()) as u64).max(lo + 1);
        while !above(hi) {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi >= 1 << 52 {
                return Err((hi as f64).ln());
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub(crate) fn raw_target(&self, u: f64) -> f64 {
        u * self.raw_total()
    }
}

/// `Σ_{k≥kmin} g(k)` for positive, eventually decreasing convex terms, by
/// compensated partial sums to `cutoff` plus an Euler–Maclaurin remainder
/// `∫_cutoff^∞ g − g(cutoff)/2 − g'(cutoff)/12`.
pub(crate) fn sum_with_remainder(
    kmin: u64,
    cutoff: u64,
    term: impl Fn(f64) -> f64,
    remainder: impl Fn(f64) -> f64,
) -> f64 {
    let mut acc = CompensatedSum::default();
    for k in (kmin..=cutoff).rev() {
        acc.add(term(k as f64));
    }
    acc.value() + remainder(cutoff as f64)
}
