use serde::{Deserialize, Serialize};

use super::series::CompensatedSum;
use crate::Result;

/// `e^{−1} / (1 − e^{−1})`.
pub const K1: f64 = 0.581_976_706_869_326_4;

/// Largest number of terms summed one by one.
const DIRECT_LIMIT: f64 = 5.0e7;
/// Relative width of the blocks used beyond [`DIRECT_LIMIT`].
const BLOCK_GROWTH: f64 = 1e-6;
const TAIL_CUT: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummationMethod {
    Direct,
    /// Geometric sums over blocks on which `1/ln k` is bracketed.
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    pub c: f64,
    pub i: u32,
    /// `c^i Σ_{k ≥ d^i} e^{−c^i k} / ln k`, `d = 1/c`.
    pub lhs: f64,
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    /// `k₁ / (i ln d)`.
    pub rhs: f64,
    pub method: SummationMethod,
}

impl SeriesBound {
    /// `lhs ≤ rhs`, decided on the certified upper end.
    pub fn holds(&self) -> bool {
        self.lhs_upper <= self.rhs
    }
}

/// Evaluates both sides of `c^i Σ_{k≥d^i} e^{−c^i k}/ln k ≤ k₁/(i ln d)`.
pub fn series_bound(c: f64, i: u32) -> Result<SeriesBound> {
    if !(c > 0.0 && c < 1.0) {
        return Err(crate::error::invalid("c", format!("{c} must lie in (0, 1)")));
    }
    if i == 0 {
        return Err(crate::error::invalid("i", "must be at least 1"));
    }
    let d = 1.0 / c;
    let x = c.powi(i as i32);
    let start = d.powi(i as i32);
    if !(start.is_finite() && start < 2f64.powi(62)) {
        return Err(crate::error::invalid("i", format!("d^i = {start:e} exceeds the summation range")));
    }
    // ln k needs k ≥ 2
    let k0 = start.ceil().max(2.0);
    let rhs = K1 / (i as f64 * d.ln());

    // e^{−xk}/ln k after k0 + span is below TAIL_CUT relative to the leading term
    let span = ((1.0 / TAIL_CUT).ln() + 1.0) / x;
    let (lhs, lower, upper, method) = if span <= DIRECT_LIMIT {
        let mut acc = CompensatedSum::default();
        let mut k = k0;
        loop {
            let e = (-x * k).exp();
            acc.add(e / k.ln());
            k += 1.0;
            // Σ_{j≥k} e^{−xj}/ln j ≤ e^{−xk} / (ln k (1 − e^{−x}))
            let rest = (-x * k).exp() / (k.ln() * -(-x).exp_m1());
            if x * rest < TAIL_CUT * 1e-2 {
                let s = x * acc.value();
                break (s, s, s + x * rest + s * 1e-14, SummationMethod::Direct);
            }
        }
    } else {
        let mut lo = CompensatedSum::default();
        let mut hi = CompensatedSum::default();
        let mut m = k0;
        let one_minus = -(-x).exp_m1();
        loop {
            let len = (m * BLOCK_GROWTH).floor().max(1.0);
            // Σ_{k=m}^{m+len−1} e^{−xk} = e^{−xm} (1 − e^{−x len}) / (1 − e^{−x})
            let geo = (-x * m).exp() * -(-x * len).exp_m1() / one_minus;
            lo.add(geo / (m + len - 1.0).ln());
            hi.add(geo / m.ln());
            m += len;
            let rest = (-x * m).exp() / (m.ln() * one_minus);
            if x * rest < TAIL_CUT * 1e-2 {
                let (l, u) = (x * lo.value(), x * hi.value() + x * rest);
                break (0.5 * (l + u), l * (1.0 - 1e-14), u * (1.0 + 1e-14), SummationMethod::Blocked);
            }
        }
    };
    Ok(SeriesBound {
        c,
        i,
        lhs,
        lhs_lower: lower,
        lhs_upper: upper,
        rhs,
        method,
    })
}
