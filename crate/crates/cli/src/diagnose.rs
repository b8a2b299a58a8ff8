use std::io::Write;
use std::path::PathBuf;

use catastrophe::chain::{green_partial_sum, simulate_with, ChainConfig};
use catastrophe::classify::{beta_critical, classify_example, geometric_weighted_series, last_half_max_increment};
use catastrophe::stats::{replicate, return_time_stats, RngSpec};
use catastrophe::stats::ReturnStats;
use catastrophe::{EnvDistribution, ImmigrationDistribution};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{print_json, sink, write_jsonl};
use crate::Format;

/// Plateau statistic below this reads as transient.
pub const GREEN_PLATEAU_THRESHOLD: f64 = 1e-4;
/// Occupation trend above this reads as recurrent.
pub const OCCUPATION_TREND_THRESHOLD: f64 = 0.1;
const SERIES_B: f64 = 0.9;
const SERIES_LEN: u64 = 500;

struct Regime {
    name: String,
    expected: Option<String>,
    env: EnvDistribution,
    imm: ImmigrationDistribution,
}

fn regimes(cfg: &ExperimentConfig) -> Result<Vec<Regime>, CliError> {
    if cfg.env.is_some() || cfg.imm.is_some() {
        return Ok(vec![Regime {
            name: "custom".into(),
            expected: None,
            env: cfg.env()?,
            imm: cfg.imm()?,
        }]);
    }
    let beta_c = beta_critical(1.0)?;
    let cases = [
        ("a2_beta0.5", 2.0, 0.5),
        ("a1_below_critical", 1.0, 0.7 * beta_c),
        ("a1_above_critical", 1.0, 1.3 * beta_c),
    ];
    cases
        .into_iter()
        .map(|(name, a, beta)| {
            Ok(Regime {
                name: name.into(),
                expected: Some(classify_example(a, beta)?.verdict.to_string()),
                env: EnvDistribution::point_mass(beta)?,
                imm: ImmigrationDistribution::shifted_log_tail(a)?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct RunMetrics {
    regime: String,
    stream_index: u64,
    seed: u64,
    metrics: Metrics,
}

#[derive(Serialize, Clone)]
struct Metrics {
    green_final: f64,
    green_plateau: f64,
    returns: ReturnStats,
    occupation_trend: Option<f64>,
    recurrent_by_plateau: bool,
    recurrent_by_trend: bool,
}

#[derive(Serialize)]
struct RegimeReport {
    regime: String,
    expected: Option<String>,
    env: EnvDistribution,
    imm: ImmigrationDistribution,
    runs: Vec<Metrics>,
    recurrent_by_plateau: u64,
    recurrent_by_trend: u64,
    series_last_half_max_increment: f64,
    series_final: f64,
}

#[derive(Serialize)]
struct Report {
    max_n: u64,
    reps: u64,
    horizon: u64,
    m: u64,
    green_plateau_threshold: f64,
    occupation_trend_threshold: f64,
    regimes: Vec<RegimeReport>,
}

/// `(S_N − S_{N/2}) / (N − N/2)`: the mean late term of the partial sums.
pub fn plateau_statistic(sums: &[f64]) -> f64 {
    let n = sums.len();
    let half = n / 2;
    if half == 0 {
        return sums.last().copied().unwrap_or(0.0);
    }
    (sums[n - 1] - sums[half - 1]) / (n - half) as f64
}

pub fn run(cfg: &ExperimentConfig, out: Option<PathBuf>, format: Format) -> Result<(), CliError> {
    let max_n = cfg.max_n.unwrap_or(200);
    let reps = cfg.reps.unwrap_or(2_000);
    let horizon = cfg.horizon.unwrap_or(10_000);
    let m = cfg.m.unwrap_or(10);
    let runs = cfg.runs.unwrap_or(10);
    if max_n == 0 || reps == 0 || runs == 0 || horizon == 0 {
        return Err(CliError::Config("`max_n`, `reps`, `runs` and `horizon` must be positive".into()));
    }
    let root = RngSpec::new(cfg.seed());
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut series_rows = Vec::new();
    for (r, regime) in regimes(cfg)?.into_iter().enumerate() {
        let chain = ChainConfig::new(regime.env.clone(), regime.imm.clone(), horizon, 0);
        chain.validate()?;
        let spec = root.child(r as u64);
        let streams = spec.child(0);
        let runs_out = replicate(runs, streams, |_, rng| {
            let sums = green_partial_sum(&chain, max_n, reps, rng)?;
            let traj = simulate_with(&chain, rng);
            let returns = return_time_stats(&traj, m);
            let green_plateau = plateau_statistic(&sums);
            let occupation_trend = returns.occupation_trend();
            Ok((
                Metrics {
                    green_final: sums[sums.len() - 1],
                    green_plateau,
                    recurrent_by_plateau: green_plateau >= GREEN_PLATEAU_THRESHOLD,
                    recurrent_by_trend: occupation_trend.is_some_and(|t| t > OCCUPATION_TREND_THRESHOLD),
                    returns,
                    occupation_trend,
                },
                sums,
            ))
        })?;
        let mut series_rng = spec.child(1).stream(0);
        let series = geometric_weighted_series(&regime.imm, SERIES_B, SERIES_LEN, &mut series_rng)?;
        for (k, s) in runs_out[0].1.iter().enumerate() {
            series_rows.push(format!("{},green_partial_sum,{},{}", regime.name, k + 1, s));
        }
        for (k, s) in series.iter().enumerate() {
            series_rows.push(format!("{},geometric_weighted_series,{},{}", regime.name, k + 1, s));
        }
        let metrics: Vec<Metrics> = runs_out.into_iter().map(|(mt, _)| mt).collect();
        for (i, mt) in metrics.iter().enumerate() {
            rows.push(RunMetrics {
                regime: regime.name.clone(),
                stream_index: i as u64,
                seed: streams.derive_stream_seed(i as u64),
                metrics: mt.clone(),
            });
        }
        reports.push(RegimeReport {
            recurrent_by_plateau: metrics.iter().filter(|x| x.recurrent_by_plateau).count() as u64,
            recurrent_by_trend: metrics.iter().filter(|x| x.recurrent_by_trend).count() as u64,
            regime: regime.name,
            expected: regime.expected,
            env: regime.env,
            imm: regime.imm,
            runs: metrics,
            series_last_half_max_increment: last_half_max_increment(&series),
            series_final: series.last().copied().unwrap_or(0.0),
        });
    }
    if let Some(path) = out.as_deref().or(cfg.output.as_deref()) {
        let mut w = sink(Some(path))?;
        writeln!(w, "regime,series,k,value")?;
        for row in &series_rows {
            writeln!(w, "{row}")?;
        }
        w.flush()?;
    }
    match format {
        Format::Jsonl => {
            let mut w = sink(None)?;
            write_jsonl(&mut *w, &rows)?;
            w.flush()?;
            Ok(())
        }
        Format::Csv => print_json(&Report {
            max_n,
            reps,
            horizon,
            m,
            green_plateau_threshold: GREEN_PLATEAU_THRESHOLD,
            occupation_trend_threshold: OCCUPATION_TREND_THRESHOLD,
            regimes: reports,
        }),
    }
}
