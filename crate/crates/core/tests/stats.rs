use std::time::Instant;

use catastrophe::chain::{exact_distribution, lossless_cap, simulate, simulate_endpoint, ChainConfig};
use catastrophe::classify::beta_critical;
use catastrophe::stats::{
    chi_square_two_sample, chi_square_vs_exact, replicate, replicate_infallible, return_time_stats, tv_distance,
    tv_distance_two_sample, Histogram, RngSpec,
};
use catastrophe::{EnvDistribution, ImmigrationDistribution};

fn small() -> ChainConfig {
    ChainConfig::new(
        EnvDistribution::point_mass(0.5).unwrap(),
        ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)]).unwrap(),
        5,
        0,
    )
}

fn sample(cfg: &ChainConfig, spec: RngSpec, count: u64) -> Histogram {
    replicate_infallible(count, spec, |_, rng| simulate_endpoint(cfg, cfg.horizon, rng))
        .into_iter()
        .collect()
}

#[test]
fn chi_square_calibration() {
    let cfg = small();
    let pmf = exact_distribution(&cfg, 5, lossless_cap(&cfg, 5).unwrap()).unwrap().pmf;
    let master = RngSpec::new(20_240_601);
    let mut two_sample = 0;
    let mut vs_exact = 0;
    for rep in 0..200 {
        let a = sample(&cfg, master.child(2 * rep), 100_000);
        let b = sample(&cfg, master.child(2 * rep + 1), 100_000);
        if chi_square_two_sample(&a, &b).unwrap().p_value < 0.01 {
            two_sample += 1;
        }
        if chi_square_vs_exact(&a, &pmf).unwrap().p_value < 0.01 {
            vs_exact += 1;
        }
    }
    assert!((1..=7).contains(&two_sample), "two-sample false positives: {two_sample}");
    assert!((1..=7).contains(&vs_exact), "vs-exact false positives: {vs_exact}");
}

#[test]
fn tv_triangle() {
    let cfg = small();
    let spec = RngSpec::new(3);
    let h: Vec<Histogram> = (0..6).map(|i| sample(&cfg, spec.child(i), 1_000 * (i + 1))).collect();
    for a in &h {
        for b in &h {
            for c in &h {
                let ab = tv_distance_two_sample(a, b).unwrap();
                let bc = tv_distance_two_sample(b, c).unwrap();
                let ac = tv_distance_two_sample(a, c).unwrap();
                assert!(ac <= ab + bc + 1e-15);
            }
        }
    }
    let pmf = exact_distribution(&cfg, 5, 10).unwrap().pmf;
    assert!(tv_distance(&h[5], &pmf).unwrap() < 0.05);
}

#[test]
fn parallel_determinism() {
    let cfg = ChainConfig::new(EnvDistribution::Uniform01, ImmigrationDistribution::log_tail(1.0).unwrap(), 300, 0);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            replicate(64, RngSpec::new(9), |i, rng| {
                let mut c = cfg.clone();
                c.seed = i;
                Ok((simulate(&c)?.states, simulate_endpoint(&cfg, 300, rng)))
            })
            .unwrap()
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
}

#[test]
fn replication_throughput() {
    let cfg = ChainConfig::new(EnvDistribution::Uniform01, ImmigrationDistribution::inverse_square(), 1_000, 0);
    let start = Instant::now();
    let out = replicate(1_000, RngSpec::new(4), |i, _| {
        let mut c = cfg.clone();
        c.seed = i;
        simulate(&c)
    })
    .unwrap();
    assert_eq!(out.len(), 1_000);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn uniform_inverse_square_returns_often() {
    let cfg = ChainConfig::new(EnvDistribution::Uniform01, ImmigrationDistribution::inverse_square(), 100_000, 17);
    let r = return_time_stats(&simulate(&cfg).unwrap(), 2);
    assert!(r.occupation_frequency > 0.05, "{}", r.occupation_frequency);
    assert!(r.mean_return_time.value() >= 1.0);
}

#[test]
fn transient_config_escapes() {
    let beta = 1.3 * beta_critical(1.0).unwrap();
    let cfg = ChainConfig::new(
        EnvDistribution::point_mass(beta).unwrap(),
        ImmigrationDistribution::log_tail(1.0).unwrap(),
        100_000,
        0,
    );
    let spec = RngSpec::new(31);
    let escaped = replicate_infallible(100, spec, |i, _| {
        let mut c = cfg.clone();
        c.seed = spec.derive_stream_seed(i);
        let r = return_time_stats(&simulate(&c).unwrap(), 10);
        r.last_half_frequency < 0.5 * r.first_half_frequency
    })
    .into_iter()
    .filter(|&e| e)
    .count();
    assert!(escaped >= 80, "{escaped} of 100");
}
