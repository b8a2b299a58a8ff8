use rayon::prelude::*;

use super::rng::{RngSpec, SimRng};
use crate::{Error, Result};

/// Runs `count` independent jobs, job `i` receiving stream `i` of `spec`.
///
/// Jobs execute on the current rayon pool; results come back ordered by
/// stream index, so the aggregate does not depend on the number of worker
/// threads. The first failing stream (lowest index) is reported.
pub fn replicate<T, F>(count: u64, spec: RngSpec, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = spec.stream(i);
            job(i, &mut rng).map_err(|e| Error::Replication {
                stream_index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// [`replicate`] for infallible jobs.
pub fn replicate_infallible<T, F>(count: u64, spec: RngSpec, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = spec.stream(i);
            job(i, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn job(i: u64, rng: &mut SimRng) -> Result<(u64, f64)> {
        let s: f64 = (0..100).map(|_| rng.random::<f64>()).sum();
        Ok((i, s))
    }

    #[test]
    fn single_replication_matches_direct_call() {
        let spec = RngSpec::new(9);
        let out = replicate(1, spec, job).unwrap();
        let mut rng = spec.stream(0);
        assert_eq!(out, vec![job(0, &mut rng).unwrap()]);
    }

    #[test]
    fn invariant_under_thread_count() {
        let spec = RngSpec::new(77);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| replicate(257, spec, job).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(8));
        assert!(one.iter().enumerate().all(|(i, &(j, _))| i as u64 == j));
    }

    #[test]
    fn error_carries_stream_index() {
        let err = replicate(10, RngSpec::new(1), |i, _| {
            if i == 6 {
                Err(Error::Precondition("boom".into()))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Replication { stream_index: 6, .. }));
    }
}
