use catastrophe::classify::{
    beta_critical, beta_critical_bracket, classify_example, classify_general, geometric_weighted_series,
    last_half_max_increment, BETA_C_TOLERANCE,
};
use catastrophe::stats::RngSpec;
use catastrophe::{ClassificationInput, EnvDistribution, ImmigrationDistribution, Verdict};
use proptest::prelude::*;

const C1: f64 = 0.473_991_426_544_374_9;
const BETA_C: f64 = 0.622_512_589_628_871_45;

fn input(mu: f64, limsup: f64, liminf: f64, finite: bool) -> ClassificationInput {
    ClassificationInput {
        mu,
        tail_limsup: limsup,
        tail_liminf: liminf,
        log_z_finite: finite,
        hyp1: true,
        hyp2: true,
    }
}

#[test]
fn general_examples() {
    let r = classify_general(&input(0.7, 0.0, 0.0, true)).unwrap();
    assert_eq!(r.verdict, Verdict::PositiveRecurrent);
    assert_eq!(r.citations, ["Thm3"]);
    let r = classify_general(&input(0.7, 0.3, 0.3, false)).unwrap();
    assert_eq!(r.verdict, Verdict::NullRecurrent);
    assert_eq!(r.citations, ["Thm1", "Thm3-converse"]);
    let r = classify_general(&input(0.7, 0.9, 0.9, false)).unwrap();
    assert_eq!(r.verdict, Verdict::Transient);
    assert_eq!(r.citations, ["Thm2"]);
    let r = classify_general(&input(0.7, 0.9, 0.5, false)).unwrap();
    assert_eq!(r.verdict, Verdict::Indeterminate);
    assert!(!r.reasons.is_empty());
    let mut no_hyp2 = input(0.7, 0.9, 0.9, false);
    no_hyp2.hyp2 = false;
    let r = classify_general(&no_hyp2).unwrap();
    assert_eq!(r.verdict, Verdict::Indeterminate);
    assert!(!r.reasons.is_empty());
    assert!(classify_general(&input(0.0, 0.0, 0.0, true)).is_err());
}

#[test]
fn example_table() {
    assert_eq!(classify_example(2.0, 0.3).unwrap().verdict, Verdict::PositiveRecurrent);
    assert_eq!(classify_example(0.5, 0.9).unwrap().verdict, Verdict::Transient);
    assert_eq!(classify_example(1.0, BETA_C * (1.0 - 1e-3)).unwrap().verdict, Verdict::NullRecurrent);
    assert_eq!(classify_example(1.0, BETA_C * (1.0 + 1e-3)).unwrap().verdict, Verdict::Transient);
    let at = classify_example(1.0, BETA_C).unwrap();
    assert_eq!(at.verdict, Verdict::Indeterminate);
    assert!(!at.reasons.is_empty());
    assert!(classify_example(1.0, 1.0).is_err());
    assert!(classify_example(-1.0, 0.5).is_err());
}

#[test]
fn critical_value() {
    let bc = beta_critical(1.0).unwrap();
    assert!((bc - BETA_C).abs() < 1e-12);
    assert!((-bc.ln() - C1).abs() < 1e-12);
    assert!(bc > 0.0 && bc < 1.0);
    assert!(beta_critical(2.0).is_err());
    let (_, half_width) = beta_critical_bracket(1.0).unwrap();
    assert!(half_width < BETA_C_TOLERANCE);
    assert_eq!(classify_example(1.0, bc / 2.0).unwrap().verdict, Verdict::NullRecurrent);
}

#[test]
fn example_agrees_with_general() {
    for a in [0.3, 0.5, 1.0, 1.5, 3.0] {
        let imm = ImmigrationDistribution::log_tail(a).unwrap();
        for beta in [0.05, 0.3, 0.6, 0.65, 0.9] {
            let env = EnvDistribution::point_mass(beta).unwrap();
            let general = classify_general(&ClassificationInput::from_distributions(&env, &imm).unwrap()).unwrap();
            let example = classify_example(a, beta).unwrap();
            assert_eq!(general.verdict, example.verdict, "a={a} β={beta}");
        }
    }
}

#[test]
fn geometric_series_examples() {
    let mut rng = RngSpec::new(1).stream(0);
    let one = ImmigrationDistribution::deterministic(1).unwrap();
    let s = geometric_weighted_series(&one, 0.5, 40, &mut rng).unwrap();
    assert!((s[39] - 1.0).abs() <= 2f64.powi(-39));
    let t = ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)]).unwrap();
    let s = geometric_weighted_series(&t, 0.5, 100, &mut rng).unwrap();
    assert!(last_half_max_increment(&s) < 1e-6);
    assert!(geometric_weighted_series(&t, 1.0, 10, &mut rng).is_err());
}

#[test]
fn geometric_series_diverges_for_infinite_log_moment() {
    let imm = ImmigrationDistribution::log_tail(1.0).unwrap();
    let spec = RngSpec::new(2024);
    let hits = (0..100)
        .filter(|&i| {
            let s = geometric_weighted_series(&imm, 0.9, 500, &mut spec.stream(i)).unwrap();
            last_half_max_increment(&s) > 1.0
        })
        .count();
    assert!(hits >= 1, "{hits}");
}

proptest! {
    #[test]
    fn raising_mu_never_moves_null_to_transient(
        mu in 0.01f64..5.0,
        bump in 0.0f64..5.0,
        limsup in 0.0f64..5.0,
        gap in 0.0f64..1.0,
        finite: bool,
        hyp1: bool,
        hyp2: bool,
    ) {
        let liminf = limsup * gap;
        let base = ClassificationInput { mu, tail_limsup: limsup, tail_liminf: liminf, log_z_finite: finite, hyp1, hyp2 };
        let raised = ClassificationInput { mu: mu + bump, ..base };
        let a = classify_general(&base).unwrap().verdict;
        let b = classify_general(&raised).unwrap().verdict;
        prop_assert!(!(a == Verdict::NullRecurrent && b == Verdict::Transient));
        if a == Verdict::Indeterminate {
            prop_assert!(!classify_general(&base).unwrap().reasons.is_empty());
        }
    }

    #[test]
    fn a_one_is_a_step_function(u in 0.0001f64..0.9999, v in 0.0001f64..0.9999) {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let rank = |b: f64| match classify_example(1.0, b).unwrap().verdict {
            Verdict::NullRecurrent => 0,
            Verdict::Indeterminate => 1,
            Verdict::Transient => 2,
            Verdict::PositiveRecurrent => 3,
        };
        prop_assert!(rank(lo) <= rank(hi));
        prop_assert!(rank(lo) != 3);
    }
}
