use catastrophe::neuts::{
    aggregated_immigration_sample, collapse_gaps, collapse_times, coupling_check, embedded_chain,
    embedded_increments, embedded_recursion_holds, gap_law_test, simulate_neuts,
};
use catastrophe::stats::{chi_square_two_sample, return_time_stats_of, Histogram, RngSpec};
use catastrophe::{EnvDistribution, Error, ImmigrationDistribution, NeutsConfig, PopCount};

fn cfg(p: f64, horizon: u64, seed: u64) -> NeutsConfig {
    NeutsConfig::new(
        p,
        EnvDistribution::point_mass(0.5).unwrap(),
        ImmigrationDistribution::deterministic(1).unwrap(),
        horizon,
        seed,
    )
}

#[test]
fn near_certain_collapse_stays_low() {
    let t = simulate_neuts(&cfg(0.999, 10_000, 1)).unwrap();
    let r = return_time_stats_of(&t.states, 2);
    assert!(r.occupation_frequency > 0.9);
}

#[test]
fn flags_and_increments() {
    let t = simulate_neuts(&cfg(0.3, 100_000, 2)).unwrap();
    let freq = t.collapse_flags.iter().filter(|&&c| c).count() as f64 / 100_000.0;
    assert!((freq - 0.3).abs() < 3.0 * (0.21f64 / 1e5).sqrt());
    for n in 1..t.states.len() {
        if t.collapse_flags[n] {
            assert!(t.states[n] <= t.states[n - 1]);
        } else {
            assert_eq!(t.states[n], t.states[n - 1] + t.imm_draws[n].unwrap());
        }
    }
}

#[test]
fn gaps_are_geometric() {
    let p = 0.2;
    let t = simulate_neuts(&cfg(p, 200_000, 3)).unwrap();
    let times = collapse_times(&t);
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    let gaps = collapse_gaps(&times[..10_000]);
    let mean = gaps.iter().sum::<u64>() as f64 / gaps.len() as f64;
    let sigma = ((1.0 - p) / (p * p) / gaps.len() as f64).sqrt();
    assert!((mean - 1.0 / p).abs() < 3.0 * sigma, "{mean}");
    assert!(gap_law_test(p, &gaps).unwrap().p_value > 0.01);
}

#[test]
fn no_collapse_cases() {
    let mut t = simulate_neuts(&cfg(0.5, 20, 4)).unwrap();
    t.collapse_flags.iter_mut().for_each(|c| *c = false);
    assert!(collapse_times(&t).is_empty());
    assert!(matches!(embedded_chain(&t), Err(Error::InsufficientCollapses { .. })));
}

#[test]
fn embedded_index_arithmetic() {
    for seed in 0..200 {
        let t = simulate_neuts(&cfg(0.4, 50, seed)).unwrap();
        let times = collapse_times(&t);
        if times.is_empty() {
            continue;
        }
        let x = embedded_chain(&t).unwrap();
        assert_eq!(x[0], t.states[times[0] as usize - 1]);
        assert!(embedded_recursion_holds(&t).unwrap());
        let z = embedded_increments(&t).unwrap();
        for k in 1..times.len() {
            if times[k] == times[k - 1] + 1 {
                assert_eq!(z[k], PopCount::ZERO);
            }
        }
    }
}

#[test]
fn recursion_holds_with_heavy_tails() {
    let c = NeutsConfig::new(0.3, EnvDistribution::Uniform01, ImmigrationDistribution::log_tail(0.5).unwrap(), 5_000, 9);
    let t = simulate_neuts(&c).unwrap();
    assert!(embedded_recursion_holds(&t).unwrap());
}

#[test]
fn aggregated_law() {
    let one = ImmigrationDistribution::deterministic(1).unwrap();
    let mut rng = RngSpec::new(5).stream(0);
    let n = 100_000;
    let zeros = (0..n)
        .filter(|_| aggregated_immigration_sample(&one, 0.999, &mut rng).unwrap().is_zero())
        .count() as f64
        / n as f64;
    assert!((zeros - 0.999).abs() < 3.0 * (0.999f64 * 0.001 / n as f64).sqrt() + 1e-4);
    let p = 0.3;
    let draws: Vec<f64> = (0..n).map(|_| aggregated_immigration_sample(&one, p, &mut rng).unwrap().to_f64()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = ((1.0 - p) / (p * p) / n as f64).sqrt();
    assert!((mean - (1.0 - p) / p).abs() < 3.0 * sd, "{mean}");
    assert!(aggregated_immigration_sample(&one, 1.0, &mut rng).is_err());
}

#[test]
fn embedded_increments_match_aggregated_law() {
    let c = NeutsConfig::new(
        0.5,
        EnvDistribution::point_mass(0.5).unwrap(),
        ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)]).unwrap(),
        100_000,
        6,
    );
    let t = simulate_neuts(&c).unwrap();
    let from_path: Histogram = embedded_increments(&t).unwrap().into_iter().collect();
    let mut rng = RngSpec::new(7).stream(0);
    let direct: Histogram = (0..from_path.total())
        .map(|_| aggregated_immigration_sample(&c.imm, c.p, &mut rng).unwrap())
        .collect();
    assert!(chi_square_two_sample(&from_path, &direct).unwrap().p_value > 0.01);
}

#[test]
fn coupling_default_cell() {
    let r = coupling_check(&cfg(0.5, 10_000, 8), 3, 100_000).unwrap();
    assert!(r.p_value > 0.01, "{r:?}");
    assert!(coupling_check(&cfg(0.5, 10_000, 8), 3, 0).is_err());
    assert!(matches!(
        coupling_check(&cfg(0.5, 2, 8), 5, 100),
        Err(Error::Replication { .. })
    ));
}

#[test]
fn coupling_degenerate_p() {
    let c = cfg(0.99, 10_000, 10);
    let r = coupling_check(&c, 2, 20_000);
    // X′ sits at {0, 1, 2} with almost all mass at a single value
    match r {
        Ok(r) => assert!(r.p_value > 0.001, "{r:?}"),
        Err(e) => assert!(matches!(e, Error::SingleBin), "{e}"),
    }
}

#[test]
fn rejects_bad_p() {
    assert!(simulate_neuts(&cfg(1.0, 10, 0)).is_err());
    assert!(simulate_neuts(&cfg(0.0, 10, 0)).is_err());
}

#[test]
fn csv_has_collapse_column() {
    let t = simulate_neuts(&cfg(0.5, 5, 11)).unwrap();
    let mut out = Vec::new();
    t.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("step,population_log10,beta,z_log10,exact,collapse\n"));
    assert_eq!(text.lines().count(), 7);
}
