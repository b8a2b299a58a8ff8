use catastrophe::chain::{
    exact_distribution, lossless_cap, pgf_exact, pgf_formula_exact, representation_sample, return_prob_exact,
    simulate_endpoint, ChainConfig, ThinningConvention,
};
use catastrophe::classify::{beta_critical, beta_critical_bracket};
use catastrophe::distributions::{imm_normalizer, series_bound, SummationMethod};
use catastrophe::stats::{chi_square_two_sample, replicate, tv_distance, Histogram, RngSpec};
use catastrophe::{EnvDistribution, ImmigrationDistribution, TestResult};
use serde::Serialize;

use crate::config::{ExperimentConfig, MatrixCell};
use crate::error::CliError;
use crate::output::print_json;

const TV_TOLERANCE: f64 = 0.01;
const SIGNIFICANCE: f64 = 0.01;
const IDENTITY_TOLERANCE: f64 = 1e-9;
const LAPLACE_TOLERANCE: f64 = 1e-10;
const PGF_POINTS: [f64; 3] = [0.1, 0.5, 0.9];
const LAPLACE_LAMBDAS: [f64; 4] = [0.01, 0.1, 1.0, 5.0];

pub fn default_matrix() -> Vec<MatrixCell> {
    let envs = [
        EnvDistribution::point_mass(0.3),
        EnvDistribution::point_mass(0.7),
        EnvDistribution::finite_table(vec![(0.2, 0.5), (0.8, 0.5)]),
    ]
    .map(|e| e.expect("built-in law"));
    let imms = [
        ImmigrationDistribution::deterministic(2),
        ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)]),
    ]
    .map(|i| i.expect("built-in law"));
    let mut cells = Vec::new();
    for env in &envs {
        for imm in &imms {
            for n in [2, 5, 8] {
                cells.push(MatrixCell {
                    env: env.clone(),
                    imm: imm.clone(),
                    n,
                });
            }
        }
    }
    cells
}

#[derive(Serialize)]
struct CellReport {
    env: EnvDistribution,
    imm: ImmigrationDistribution,
    n: u64,
    tv_representation: f64,
    tv_direct: f64,
    chi_square: TestResult,
    chi_square_passed: bool,
    return_prob_error: Option<f64>,
    pgf_max_error: f64,
    passed: bool,
}

#[derive(Serialize)]
struct LaplaceRow {
    imm: ImmigrationDistribution,
    lambda: f64,
    direct: f64,
    tail_form: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SeriesRow {
    c: f64,
    i: u32,
    lhs: f64,
    lhs_upper: f64,
    rhs: f64,
    direct_summation: bool,
    passed: bool,
}

#[derive(Serialize)]
struct TailCheck {
    normalizer: f64,
    normalizer_error_bound: f64,
    pmf_mass: f64,
    functional_at_40: f64,
    functional_relative_error: f64,
    beta_c: f64,
    beta_c_halfwidth: f64,
    round_trip_error: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ReferenceCheck {
    return_prob_n2: f64,
    return_prob_max_error: f64,
    pgf_max_error: f64,
    pgf_at_one_error: f64,
    passed: bool,
}

#[derive(Serialize)]
struct Report {
    reps: u64,
    convention: ThinningConvention,
    cells: Vec<CellReport>,
    chi_square_failures: usize,
    chi_square_allowed_failures: usize,
    reference: ReferenceCheck,
    laplace: Vec<LaplaceRow>,
    series_bound: Vec<SeriesRow>,
    tail: TailCheck,
    passed: bool,
}

fn check_cell(
    cell: &MatrixCell,
    index: u64,
    cfg: &ExperimentConfig,
    reps: u64,
) -> Result<CellReport, CliError> {
    let mut chain = ChainConfig::new(cell.env.clone(), cell.imm.clone(), cell.n, 0);
    if let Some(c) = cfg.convention {
        chain = chain.with_convention(c);
    }
    chain.validate()?;
    let n = cell.n;
    let cap = match cfg.state_cap {
        Some(c) => c,
        None => lossless_cap(&chain, n)?,
    };
    let exact = exact_distribution(&chain, n, cap)?;
    let spec = RngSpec::new(cfg.seed()).child(index);
    let rep: Histogram = replicate(reps, spec.child(0), |_, rng| representation_sample(&chain, n, rng))?
        .into_iter()
        .collect();
    let direct: Histogram = replicate(reps, spec.child(1), |_, rng| Ok(simulate_endpoint(&chain, n, rng)))?
        .into_iter()
        .collect();
    let tv_representation = tv_distance(&rep, &exact.pmf)?;
    let tv_direct = tv_distance(&direct, &exact.pmf)?;
    let chi_square = chi_square_two_sample(&rep, &direct)?;

    let return_prob_error = if n >= 2 && chain.imm.p1() > 0.0 && chain.imm.pmf(0) == 0.0 {
        Some((return_prob_exact(&chain, n)? - exact.prob(1)).abs())
    } else {
        None
    };
    let mut pgf_max_error = 0.0f64;
    for s in PGF_POINTS.into_iter().chain(cfg.s) {
        pgf_max_error = pgf_max_error.max((pgf_exact(&chain, n, s)? - pgf_formula_exact(&chain, n, s)?).abs());
    }
    let passed = tv_representation <= TV_TOLERANCE
        && tv_direct <= TV_TOLERANCE
        && return_prob_error.is_none_or(|e| e <= IDENTITY_TOLERANCE)
        && pgf_max_error <= IDENTITY_TOLERANCE;
    Ok(CellReport {
        env: cell.env.clone(),
        imm: cell.imm.clone(),
        n,
        tv_representation,
        tv_direct,
        chi_square_passed: chi_square.p_value > SIGNIFICANCE,
        chi_square,
        return_prob_error,
        pgf_max_error,
        passed,
    })
}

fn reference_check() -> Result<ReferenceCheck, CliError> {
    let chain = ChainConfig::new(
        EnvDistribution::point_mass(0.5)?,
        ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)])?,
        10,
        0,
    );
    let return_prob_n2 = return_prob_exact(&chain, 2)?;
    let mut return_prob_max_error = (return_prob_n2 - 3.0 / 16.0).abs();
    for n in 2..=10 {
        let dp = exact_distribution(&chain, n, lossless_cap(&chain, n)?)?.prob(1);
        return_prob_max_error = return_prob_max_error.max((return_prob_exact(&chain, n)? - dp).abs());
    }
    let mut pgf_max_error = 0.0f64;
    let mut pgf_at_one_error = 0.0f64;
    for n in 1..=8 {
        for s in PGF_POINTS {
            pgf_max_error = pgf_max_error.max((pgf_exact(&chain, n, s)? - pgf_formula_exact(&chain, n, s)?).abs());
        }
        let s = 1.0 - 1e-12;
        pgf_at_one_error = pgf_at_one_error
            .max((pgf_exact(&chain, n, s)? - 1.0).abs())
            .max((pgf_formula_exact(&chain, n, s)? - 1.0).abs());
    }
    Ok(ReferenceCheck {
        return_prob_n2,
        return_prob_max_error,
        pgf_max_error,
        pgf_at_one_error,
        passed: return_prob_max_error <= IDENTITY_TOLERANCE
            && pgf_max_error <= IDENTITY_TOLERANCE
            && pgf_at_one_error <= IDENTITY_TOLERANCE,
    })
}

fn laplace_grid() -> Result<Vec<LaplaceRow>, CliError> {
    let laws = vec![
        ImmigrationDistribution::deterministic(1)?,
        ImmigrationDistribution::deterministic(3)?,
        ImmigrationDistribution::finite_table(vec![(1, 0.5), (2, 0.5)])?,
        ImmigrationDistribution::log_tail(0.5)?,
        ImmigrationDistribution::log_tail(1.0)?,
        ImmigrationDistribution::log_tail(2.0)?,
        ImmigrationDistribution::shifted_log_tail(1.0)?,
        ImmigrationDistribution::inverse_square(),
    ];
    let mut rows = Vec::new();
    for imm in laws {
        for lambda in LAPLACE_LAMBDAS {
            let direct = imm.laplace_direct(lambda)?;
            let tail_form = imm.laplace_tail_form(lambda)?;
            rows.push(LaplaceRow {
                imm: imm.clone(),
                lambda,
                direct,
                tail_form,
                passed: (direct - tail_form).abs() <= LAPLACE_TOLERANCE,
            });
        }
    }
    Ok(rows)
}

fn series_grid() -> Result<Vec<SeriesRow>, CliError> {
    let mut rows = Vec::new();
    for c in [0.3, 0.5, 0.7, 0.9] {
        for i in 1..=20 {
            let b = series_bound(c, i)?;
            rows.push(SeriesRow {
                c,
                i,
                lhs: b.lhs,
                lhs_upper: b.lhs_upper,
                rhs: b.rhs,
                direct_summation: b.method == SummationMethod::Direct,
                passed: b.lhs >= 0.0 && b.holds(),
            });
        }
    }
    Ok(rows)
}

fn tail_check() -> Result<TailCheck, CliError> {
    let norm = imm_normalizer(1.0, 2)?;
    let d = ImmigrationDistribution::log_tail(1.0)?;
    let head_end = 1_000_000u64;
    let pmf_mass = (0..=head_end).map(|k| d.pmf(k)).sum::<f64>() + d.tail_count(head_end + 1);
    let functional_at_40 = d.log_tail_report(40.0)?.functional;
    let functional_relative_error = (functional_at_40 / norm.value - 1.0).abs();
    let beta_c = beta_critical(1.0)?;
    let (_, beta_c_halfwidth) = beta_critical_bracket(1.0)?;
    let round_trip_error = (-beta_c.ln() - norm.value).abs();
    Ok(TailCheck {
        normalizer: norm.value,
        normalizer_error_bound: norm.error_bound,
        pmf_mass,
        functional_at_40,
        functional_relative_error,
        beta_c,
        beta_c_halfwidth,
        round_trip_error,
        passed: (pmf_mass - 1.0).abs() <= 1e-8 && functional_relative_error < 0.1 && round_trip_error <= 1e-12,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let matrix = match &cfg.matrix {
        Some(m) => m.clone(),
        None => default_matrix(),
    };
    if matrix.is_empty() {
        return Err(CliError::Config("the validation matrix is empty".into()));
    }
    let reps = cfg.reps.unwrap_or(100_000);
    if reps == 0 {
        return Err(CliError::Config("`reps` must be positive".into()));
    }
    let cells = matrix
        .iter()
        .enumerate()
        .map(|(i, cell)| check_cell(cell, i as u64, cfg, reps))
        .collect::<Result<Vec<_>, _>>()?;
    let chi_square_failures = cells.iter().filter(|c| !c.chi_square_passed).count();
    let chi_square_allowed_failures = cells.len() / 18;
    let reference = reference_check()?;
    let laplace = laplace_grid()?;
    let series_bound = series_grid()?;
    let tail = tail_check()?;
    let passed = cells.iter().all(|c| c.passed)
        && chi_square_failures <= chi_square_allowed_failures
        && reference.passed
        && laplace.iter().all(|r| r.passed)
        && series_bound.iter().all(|r| r.passed)
        && tail.passed;
    let report = Report {
        reps,
        convention: cfg.convention.unwrap_or_default(),
        cells,
        chi_square_failures,
        chi_square_allowed_failures,
        reference,
        laplace,
        series_bound,
        tail,
        passed,
    };
    print_json(&report)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation("one or more identities failed".into()))
    }
}
