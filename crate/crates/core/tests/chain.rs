use catastrophe::chain::{
    binomial_row_pmf, binomial_thin, exact_distribution, green_partial_sum, lossless_cap, pgf_exact, pgf_formula,
    pgf_formula_exact, representation_sample, return_prob_exact, return_prob_formula, simulate, simulate_endpoint,
    step, ChainConfig, PopCount, ThinningConvention,
};
use catastrophe::stats::{tv_distance, Histogram, RngSpec};
use catastrophe::{EnvDistribution, Error, ImmigrationDistribution};

fn half_half() -> ImmigrationDistribution {
    ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)]).unwrap()
}

fn small(beta: f64) -> ChainConfig {
    ChainConfig::new(EnvDistribution::point_mass(beta).unwrap(), half_half(), 10, 7)
}

#[test]
fn thin_zero_is_zero() {
    let mut rng = RngSpec::new(1).stream(0);
    assert_eq!(binomial_thin(PopCount::Exact(0), 0.3, &mut rng).unwrap(), PopCount::Exact(0));
    assert!(binomial_thin(PopCount::Exact(5), 1.0, &mut rng).is_err());
    assert!(binomial_thin(PopCount::Exact(5), 0.0, &mut rng).is_err());
}

#[test]
fn thin_mean_large_exact() {
    let mut rng = RngSpec::new(2).stream(0);
    let reps = 100_000;
    let n = 100_000u64;
    let total: f64 = (0..reps)
        .map(|_| binomial_thin(PopCount::Exact(n), 0.5, &mut rng).unwrap().to_f64())
        .sum();
    let mean = total / reps as f64;
    let sigma = (n as f64 * 0.25 / reps as f64).sqrt();
    assert!((mean - 50_000.0).abs() < 3.0 * sigma, "{mean}");
}

#[test]
fn thin_log_scale_drifts() {
    let mut rng = RngSpec::new(3).stream(0);
    let t = binomial_thin(PopCount::LogScale(2000.0), 0.5, &mut rng).unwrap();
    assert_eq!(t, PopCount::LogScale(2000.0 + 0.5f64.ln()));
}

#[test]
fn thin_log_scale_huge_with_tiny_p() {
    let mut rng = RngSpec::new(3).stream(1);
    // mean e^{100 − 98} ≈ 7.4 falls back to a Poisson draw
    let t = binomial_thin(PopCount::LogScale(100.0), (-98.0f64).exp(), &mut rng).unwrap();
    assert!(t.as_exact().is_some_and(|k| k < 100));
}

#[test]
fn step_examples() {
    let mut rng = RngSpec::new(4).stream(0);
    assert_eq!(step(PopCount::Exact(0), 0.5, PopCount::Exact(3), &mut rng).unwrap(), PopCount::Exact(3));
    let n = 100_000;
    let ones = (0..n)
        .filter(|_| step(PopCount::Exact(1), 0.5, PopCount::Exact(1), &mut rng).unwrap() == PopCount::Exact(1))
        .count() as f64;
    assert!((ones / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    let big = step(PopCount::LogScale(100.0), 0.5, PopCount::Exact(2), &mut rng).unwrap();
    assert!((big.ln() - (100.0 + 0.5f64.ln())).abs() < 1e-12);
}

#[test]
fn horizon_zero() {
    let mut cfg = small(0.5);
    cfg.horizon = 0;
    let t = simulate(&cfg).unwrap();
    assert_eq!(t.states, vec![PopCount::Exact(1)]);
}

#[test]
fn tiny_beta_hovers_near_one() {
    let cfg = ChainConfig::new(
        EnvDistribution::point_mass(0.01).unwrap(),
        ImmigrationDistribution::deterministic(1).unwrap(),
        10_000,
        11,
    );
    let t = simulate(&cfg).unwrap();
    let mean = t.states[10..].iter().map(|x| x.to_f64()).sum::<f64>() / (t.states.len() - 10) as f64;
    assert!(mean < 1.2, "{mean}");
}

#[test]
fn reproducible_and_pathwise_sane() {
    let cfg = ChainConfig::new(EnvDistribution::Uniform01, ImmigrationDistribution::log_tail(0.5).unwrap(), 2_000, 99);
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.states.iter().any(|x| x.is_log_scale()));
    for n in 1..a.states.len() {
        assert!(a.states[n] >= a.imm_draws[n]);
        assert!(a.states[n] <= a.states[n - 1] + a.imm_draws[n]);
    }
}

#[test]
fn csv_layout() {
    let mut cfg = small(0.5);
    cfg.horizon = 3;
    let t = simulate(&cfg).unwrap();
    let mut out = Vec::new();
    t.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,population_log10,beta,z_log10,exact");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "0,0,,,1");
}

#[test]
fn one_beta_per_step() {
    // Var(B | X = 100): shared β from {0.2, 0.8} gives 100·E[β(1−β)] + 100²·Var β = 16 + 900
    let env = EnvDistribution::finite_table(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap();
    let imm = ImmigrationDistribution::deterministic(100).unwrap();
    let spec = RngSpec::new(5);
    let run = |convention| {
        let cfg = ChainConfig::new(env.clone(), imm.clone(), 2, 0).with_convention(convention);
        let draws: Vec<f64> = (0..20_000u64)
            .map(|i| simulate_endpoint(&cfg, 2, &mut spec.stream(i)).to_f64() - 100.0)
            .collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64
    };
    let shared = run(ThinningConvention::SharedEnvironment);
    let per_individual = run(ThinningConvention::PerIndividual);
    assert!((shared - 916.0).abs() < 40.0, "{shared}");
    assert!((per_individual - 25.0).abs() < 3.0, "{per_individual}");
}

#[test]
fn representation_first_step_is_immigration() {
    let cfg = small(0.5);
    let mut rng = RngSpec::new(6).stream(0);
    let h: Histogram = (0..100_000)
        .map(|_| representation_sample(&cfg, 1, &mut rng).unwrap())
        .collect();
    assert!(tv_distance(&h, &[0.0, 0.5, 0.5]).unwrap() < 0.01);
    assert!(matches!(representation_sample(&cfg, 0, &mut rng), Err(Error::Precondition(_))));
}

#[test]
fn representation_skips_negligible_terms() {
    let cfg = small(0.5);
    let mut rng = RngSpec::new(7).stream(0);
    for _ in 0..200 {
        let x = representation_sample(&cfg, 10_000, &mut rng).unwrap();
        // at most 2 per cohort over the ~60 cohorts whose survival exceeds 2^−60
        assert!(x.as_exact().is_some_and(|k| k <= 2 * 61));
    }
}

#[test]
fn binomial_rows_are_exact() {
    let row = binomial_row_pmf(4, 0.5);
    let want = [1.0, 4.0, 6.0, 4.0, 1.0].map(|c| c / 16.0);
    for (a, b) in row.iter().zip(want) {
        assert!((a - b).abs() < 1e-16);
    }
    let row = binomial_row_pmf(300, 0.01);
    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!((row[0] - 0.99f64.powi(300)).abs() < 1e-15);
}

#[test]
fn dp_hand_values() {
    let cfg = small(0.5);
    let one = exact_distribution(&cfg, 1, 10).unwrap();
    assert_eq!(&one.pmf[..3], &[0.0, 0.5, 0.5]);
    let two = exact_distribution(&cfg, 2, 10).unwrap();
    assert!((two.prob(1) - 3.0 / 16.0).abs() < 1e-15);
    for n in 1..=8 {
        let law = exact_distribution(&cfg, n, lossless_cap(&cfg, n).unwrap()).unwrap();
        assert!((law.pmf.iter().sum::<f64>() + law.truncated_mass - 1.0).abs() < 1e-12);
        assert_eq!(law.truncated_mass, 0.0);
    }
}

#[test]
fn dp_reports_truncation() {
    let cfg = small(0.9);
    let law = exact_distribution(&cfg, 8, 5).unwrap();
    assert!(law.truncated_mass > 0.1);
    assert!((law.pmf.iter().sum::<f64>() + law.truncated_mass - 1.0).abs() < 1e-12);
}

#[test]
fn dp_rejects_unbounded_laws() {
    let cfg = ChainConfig::new(
        EnvDistribution::point_mass(0.5).unwrap(),
        ImmigrationDistribution::log_tail(1.0).unwrap(),
        5,
        0,
    );
    assert!(matches!(exact_distribution(&cfg, 3, 50), Err(Error::Unsupported(_))));
    let cfg = ChainConfig::new(EnvDistribution::Uniform01, half_half(), 5, 0);
    assert!(matches!(exact_distribution(&cfg, 3, 50), Err(Error::Unsupported(_))));
}

#[test]
fn return_probability_routes() {
    let cfg = small(0.5);
    assert!((return_prob_exact(&cfg, 2).unwrap() - 3.0 / 16.0).abs() < 1e-15);
    for n in 2..=10 {
        let dp = exact_distribution(&cfg, n, lossless_cap(&cfg, n).unwrap()).unwrap().prob(1);
        assert!((return_prob_exact(&cfg, n).unwrap() - dp).abs() < 1e-9);
    }
    let mut rng = RngSpec::new(8).stream(0);
    let est = return_prob_formula(&cfg, 2, 100_000, &mut rng).unwrap();
    assert!((est.estimate - 3.0 / 16.0).abs() <= est.ci_halfwidth + 1e-9);
    assert!((0.0..=1.0).contains(&est.estimate));
}

#[test]
fn return_probability_mixed_environment() {
    let cfg = ChainConfig::new(
        EnvDistribution::finite_table(vec![(0.2, 0.5), (0.8, 0.5)]).unwrap(),
        half_half(),
        10,
        0,
    );
    for n in 2..=8 {
        let dp = exact_distribution(&cfg, n, lossless_cap(&cfg, n).unwrap()).unwrap().prob(1);
        assert!((return_prob_exact(&cfg, n).unwrap() - dp).abs() < 1e-9);
    }
}

#[test]
fn return_probability_preconditions() {
    let cfg = ChainConfig::new(
        EnvDistribution::point_mass(0.5).unwrap(),
        ImmigrationDistribution::deterministic(2).unwrap(),
        5,
        0,
    );
    let mut rng = RngSpec::new(9).stream(0);
    let err = return_prob_formula(&cfg, 2, 10, &mut rng).unwrap_err();
    assert!(err.to_string().contains("p₁"), "{err}");
    assert!(return_prob_exact(&cfg, 2).is_err());
}

#[test]
fn green_sums_grow_for_recurrent_config() {
    let cfg = small(0.1);
    let mut rng = RngSpec::new(10).stream(0);
    let g = green_partial_sum(&cfg, 200, 2_000, &mut rng).unwrap();
    assert_eq!(g.len(), 200);
    assert!((g[0] - 0.5).abs() < 1e-15);
    assert!(g.windows(2).all(|w| w[1] >= w[0]));
    // for β = 0.1 each term is close to p₁ · Π E(1 − 0.1^i)^Z ≈ 0.5·0.86
    assert!((g[199] - g[99]) / 100.0 > 0.3);
}

#[test]
fn pgf_routes_agree() {
    let cfg = small(0.5);
    for n in 1..=8 {
        for s in [0.1, 0.5, 0.9] {
            let exact = pgf_exact(&cfg, n, s).unwrap();
            let formula = pgf_formula_exact(&cfg, n, s).unwrap();
            assert!((exact - formula).abs() < 1e-9, "n={n} s={s}");
        }
    }
    assert!((pgf_exact(&cfg, 1, 0.5).unwrap() - (0.25 + 0.125)).abs() < 1e-15);
    let s = 1.0 - 1e-12;
    assert!((pgf_exact(&cfg, 5, s).unwrap() - 1.0).abs() < 1e-9);
    assert!((pgf_formula_exact(&cfg, 5, s).unwrap() - 1.0).abs() < 1e-9);

    let mut rng = RngSpec::new(11).stream(0);
    let mc = pgf_formula(&cfg, 3, 0.5, 100_000, &mut rng).unwrap();
    let exact = pgf_exact(&cfg, 3, 0.5).unwrap();
    assert!((mc.estimate - exact).abs() <= mc.ci_halfwidth + 1e-9);
    let mc1 = pgf_formula(&cfg, 4, s, 1_000, &mut rng).unwrap();
    assert!((mc1.estimate - 1.0).abs() < 1e-9);
}
