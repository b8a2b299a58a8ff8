//! Chi-square and total-variation comparisons between integer-valued samples
//! and against exact laws.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::chain::PopCount;
use crate::{Error, Result};

/// Minimum expected count per pooled bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Counts of nonnegative integer outcomes. Values that do not fit an exact
/// integer are counted under [`Histogram::OVERFLOW`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl Histogram {
    pub const OVERFLOW: u64 = u64::MAX;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: u64) {
        self.add_count(value, 1);
    }

    pub fn add_count(&mut self, value: u64, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(value).or_insert(0) += count;
        self.total += count;
    }

    pub fn add_pop(&mut self, x: PopCount) {
        self.add(x.as_exact().unwrap_or(Self::OVERFLOW));
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn frequency(&self, value: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(value) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (v, c) in other.iter() {
            self.add_count(v, c);
        }
    }
}

impl FromIterator<u64> for Histogram {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for v in iter {
            h.add(v);
        }
        h
    }
}

impl FromIterator<PopCount> for Histogram {
    fn from_iter<I: IntoIterator<Item = PopCount>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for v in iter {
            h.add_pop(v);
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub pooled_bins: usize,
}

/// Upper tail of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    if !statistic.is_finite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}

/// Two-sample chi-square homogeneity test. Adjacent outcomes are pooled,
/// left to right, until both samples expect at least [`MIN_EXPECTED`] counts
/// in every bin; a deficient remainder is merged into the last bin.
pub fn chi_square_two_sample(a: &Histogram, b: &Histogram) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let na = a.total() as f64;
    let nb = b.total() as f64;
    let share_a = na / (na + nb);
    let share_b = 1.0 - share_a;

    let mut support: Vec<u64> = a.iter().map(|(v, _)| v).chain(b.iter().map(|(v, _)| v)).collect();
    support.sort_unstable();
    support.dedup();

    let mut bins: Vec<(u64, u64)> = Vec::new();
    let (mut ca, mut cb) = (0u64, 0u64);
    for v in support {
        ca += a.count(v);
        cb += b.count(v);
        let pooled = (ca + cb) as f64;
        if pooled * share_a >= MIN_EXPECTED && pooled * share_b >= MIN_EXPECTED {
            bins.push((ca, cb));
            ca = 0;
            cb = 0;
        }
    }
    if ca + cb > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += ca;
                last.1 += cb;
            }
            None => bins.push((ca, cb)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::SingleBin);
    }

    let statistic: f64 = bins
        .iter()
        .map(|&(oa, ob)| {
            let pooled = (oa + ob) as f64;
            let ea = pooled * share_a;
            let eb = pooled * share_b;
            (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb
        })
        .sum();
    let dof = bins.len() - 1;
    Ok(TestResult {
        statistic,
        p_value: chi_square_sf(statistic, dof),
        dof,
        pooled_bins: bins.len(),
    })
}

/// Goodness of fit of `sample` to `pmf`, where `pmf[k]` is the probability of
/// outcome `k`. Mass the vector does not cover, `1 − Σ pmf`, forms a tail bin
/// together with sample values `≥ pmf.len()`.
pub fn chi_square_vs_exact(sample: &Histogram, pmf: &[f64]) -> Result<TestResult> {
    if sample.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let n = sample.total() as f64;
    let covered: f64 = pmf.iter().sum();
    let tail_p = (1.0 - covered).max(0.0);
    let tail_obs: u64 = sample
        .iter()
        .filter(|&(v, _)| v >= pmf.len() as u64)
        .map(|(_, c)| c)
        .sum();

    let cells = pmf
        .iter()
        .enumerate()
        .map(|(k, &p)| (sample.count(k as u64), p))
        .chain(std::iter::once((tail_obs, tail_p)));

    let mut bins: Vec<(u64, f64)> = Vec::new();
    let (mut obs, mut prob) = (0u64, 0.0f64);
    for (o, p) in cells {
        obs += o;
        prob += p;
        if prob * n >= MIN_EXPECTED {
            bins.push((obs, prob));
            obs = 0;
            prob = 0.0;
        }
    }
    if obs > 0 || prob > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += prob;
            }
            None => bins.push((obs, prob)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::SingleBin);
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(o, p)| {
            let e = p * n;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = bins.len() - 1;
    Ok(TestResult {
        statistic,
        p_value: chi_square_sf(statistic, dof),
        dof,
        pooled_bins: bins.len(),
    })
}

/// Total-variation distance between an empirical law and `pmf` (outcomes
/// `0..pmf.len()`), counting sample mass outside the vector and pmf mass
/// missing from it.
pub fn tv_distance(empirical: &Histogram, pmf: &[f64]) -> Result<f64> {
    if empirical.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let n = empirical.total() as f64;
    let mut diff = 0.0;
    for (k, &p) in pmf.iter().enumerate() {
        diff += (empirical.count(k as u64) as f64 / n - p).abs();
    }
    let outside: u64 = empirical
        .iter()
        .filter(|&(v, _)| v >= pmf.len() as u64)
        .map(|(_, c)| c)
        .sum();
    let missing = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    diff += (outside as f64 / n - missing).abs();
    Ok(0.5 * diff)
}

/// Total-variation distance between two empirical laws.
pub fn tv_distance_two_sample(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let mut support: Vec<u64> = a.iter().map(|(v, _)| v).chain(b.iter().map(|(v, _)| v)).collect();
    support.sort_unstable();
    support.dedup();
    Ok(0.5
        * support
            .into_iter()
            .map(|v| (a.count(v) as f64 / na - b.count(v) as f64 / nb).abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pairs: &[(u64, u64)]) -> Histogram {
        let mut h = Histogram::new();
        for &(v, c) in pairs {
            h.add_count(v, c);
        }
        h
    }

    #[test]
    fn identical_histograms() {
        let h = hist(&[(0, 40), (1, 80), (2, 30), (3, 10)]);
        let r = chi_square_two_sample(&h, &h).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(r.pooled_bins >= 2);
    }

    #[test]
    fn tv_of_own_pmf_is_zero() {
        let h = hist(&[(0, 25), (1, 50), (2, 25)]);
        assert_eq!(tv_distance(&h, &[0.25, 0.5, 0.25]).unwrap(), 0.0);
    }

    #[test]
    fn tv_counts_outside_mass() {
        let h = hist(&[(0, 50), (5, 50)]);
        let d = tv_distance(&h, &[1.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_is_error() {
        let e = Histogram::new();
        let h = hist(&[(0, 5)]);
        assert!(matches!(chi_square_two_sample(&e, &h), Err(Error::EmptyHistogram)));
        assert!(matches!(chi_square_vs_exact(&e, &[1.0]), Err(Error::EmptyHistogram)));
        assert!(matches!(tv_distance(&e, &[1.0]), Err(Error::EmptyHistogram)));
    }

    #[test]
    fn everything_pooled_into_one_bin() {
        let a = hist(&[(0, 3), (1, 3)]);
        let b = hist(&[(0, 2), (1, 4)]);
        assert!(matches!(chi_square_two_sample(&a, &b), Err(Error::SingleBin)));
    }

    #[test]
    fn pooled_bins_meet_expected_floor() {
        let a = hist(&[(0, 100), (1, 50), (2, 3), (3, 2), (4, 1), (9, 1)]);
        let b = hist(&[(0, 90), (1, 60), (2, 4), (3, 1), (7, 2)]);
        let r = chi_square_two_sample(&a, &b).unwrap();
        assert_eq!(r.pooled_bins, 3);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn survival_function_reference_values() {
        // scipy.stats.chi2.sf
        let cases = [
            (3.841_458_820_694_124, 1, 0.05),
            (10.0, 10, 0.440_493_285_065_212_6),
            (0.5, 3, 0.918_891_411_654_675_8),
            (50.0, 20, 0.000_221_476_638_248_783_5),
        ];
        for (x, k, want) in cases {
            let got = chi_square_sf(x, k);
            assert!((got - want).abs() < 1e-10, "sf({x},{k}) = {got}, want {want}");
        }
    }

    #[test]
    fn vs_exact_detects_wrong_law() {
        let h = hist(&[(0, 500), (1, 500)]);
        let good = chi_square_vs_exact(&h, &[0.5, 0.5]).unwrap();
        assert!(good.p_value > 0.99);
        let bad = chi_square_vs_exact(&h, &[0.3, 0.7]).unwrap();
        assert!(bad.p_value < 1e-10);
    }
}
