use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exact counts above this switch to log scale.
pub const SWITCH_UP: u64 = 1 << 48;
/// Log-scale values below this drop back to exact counts.
pub const SWITCH_DOWN: u64 = 1 << 47;

pub(crate) const LN_SWITCH_DOWN: f64 = 47.0 * std::f64::consts::LN_2;

/// A population size: an exact integer, or its natural logarithm once it is
/// too large to track exactly.
///
/// Exact values never exceed `2^48`. A log-scale value returns to an exact
/// count (rounded to nearest) only after falling below `2^47`, so values in
/// `[2^47, 2^48]` may appear in either form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopCount {
    Exact(u64),
    LogScale(f64),
}

impl Default for PopCount {
    fn default() -> Self {
        PopCount::Exact(0)
    }
}

impl PopCount {
    pub const ZERO: PopCount = PopCount::Exact(0);

    pub fn from_u64(n: u64) -> Self {
        if n > SWITCH_UP {
            PopCount::LogScale((n as f64).ln())
        } else {
            PopCount::Exact(n)
        }
    }

    /// A count known through `ln n`.
    pub fn from_ln(logval: f64) -> Self {
        if logval < LN_SWITCH_DOWN {
            PopCount::Exact(logval.exp().round() as u64)
        } else {
            PopCount::LogScale(logval)
        }
    }

    /// `ln` of the value; `−∞` for zero.
    pub fn ln(&self) -> f64 {
        match *self {
            PopCount::Exact(n) => (n as f64).ln(),
            PopCount::LogScale(l) => l,
        }
    }

    pub fn log10(&self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    pub fn as_exact(&self) -> Option<u64> {
        match *self {
            PopCount::Exact(n) => Some(n),
            PopCount::LogScale(_) => None,
        }
    }

    /// The value as a float; `+∞` when it exceeds the `f64` range.
    pub fn to_f64(&self) -> f64 {
        match *self {
            PopCount::Exact(n) => n as f64,
            PopCount::LogScale(l) => l.exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PopCount::Exact(0))
    }

    pub fn is_log_scale(&self) -> bool {
        matches!(self, PopCount::LogScale(_))
    }

    /// Sum, exact when both sides are exact and small enough, otherwise by
    /// log-sum-exp.
    pub fn add(self, other: PopCount) -> PopCount {
        match (self, other) {
            (PopCount::Exact(a), PopCount::Exact(b)) => match a.checked_add(b) {
                Some(s) => PopCount::from_u64(s),
                None => PopCount::from_ln(log_add((a as f64).ln(), (b as f64).ln())),
            },
            (PopCount::Exact(0), x) | (x, PopCount::Exact(0)) => x,
            (a, b) => PopCount::from_ln(log_add(a.ln(), b.ln())),
        }
    }

    fn key(&self) -> (f64, u8, u64) {
        match *self {
            PopCount::Exact(n) => ((n as f64).ln(), 0, n),
            PopCount::LogScale(l) => (l, 1, 0),
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl std::ops::Add for PopCount {
    type Output = PopCount;

    fn add(self, rhs: PopCount) -> PopCount {
        PopCount::add(self, rhs)
    }
}

impl From<u64> for PopCount {
    fn from(n: u64) -> Self {
        PopCount::from_u64(n)
    }
}

impl Ord for PopCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PopCount::Exact(a), PopCount::Exact(b)) => a.cmp(b),
            _ => {
                let (la, ra, na) = self.key();
                let (lb, rb, nb) = other.key();
                la.total_cmp(&lb).then(ra.cmp(&rb)).then(na.cmp(&nb))
            }
        }
    }
}

impl PartialOrd for PopCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for PopCount {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PopCount {}

impl fmt::Display for PopCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PopCount::Exact(n) => write!(f, "{n}"),
            PopCount::LogScale(l) => write!(f, "exp({l})"),
        }
    }
}
