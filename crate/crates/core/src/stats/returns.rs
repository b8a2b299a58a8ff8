use serde::{Deserialize, Serialize};

use crate::chain::{PopCount, Trajectory};
use crate::distributions::Moment;

/// Visits of a trajectory to the low set `{x ≤ m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub target_set_max: u64,
    pub visit_count: u64,
    pub mean_return_time: Moment,
    pub occupation_frequency: f64,
    pub first_half_frequency: f64,
    pub last_half_frequency: f64,
}

impl ReturnStats {
    /// Last-half over first-half occupation ratio; `None` when the first half
    /// has no visits.
    pub fn occupation_trend(&self) -> Option<f64> {
        (self.first_half_frequency > 0.0).then(|| self.last_half_frequency / self.first_half_frequency)
    }
}

/// Return diagnostics over steps `1..=horizon` (the initial state is not a
/// visit).
pub fn return_time_stats(traj: &Trajectory, m: u64) -> ReturnStats {
    return_time_stats_of(&traj.states, m)
}

pub fn return_time_stats_of(states: &[PopCount], m: u64) -> ReturnStats {
    let horizon = states.len().saturating_sub(1);
    let bound = PopCount::Exact(m);
    let half = horizon / 2;
    let mut visits = 0u64;
    let mut first = 0u64;
    let mut last = 0u64;
    let mut prev: Option<usize> = None;
    let mut gap_sum = 0u64;
    let mut gaps = 0u64;
    for (step, x) in states.iter().enumerate().skip(1) {
        if *x <= bound {
            visits += 1;
            if step <= half {
                first += 1;
            } else {
                last += 1;
            }
            if let Some(p) = prev {
                gap_sum += (step - p) as u64;
                gaps += 1;
            }
            prev = Some(step);
        }
    }
    let freq = |count: u64, len: usize| if len == 0 { 0.0 } else { count as f64 / len as f64 };
    ReturnStats {
        target_set_max: m,
        visit_count: visits,
        mean_return_time: if gaps == 0 {
            Moment::Infinite
        } else {
            Moment::Finite(gap_sum as f64 / gaps as f64)
        },
        occupation_frequency: freq(visits, horizon),
        first_half_frequency: freq(first, half),
        last_half_frequency: freq(last, horizon - half),
    }
}
