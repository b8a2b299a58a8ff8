use std::io::Write;
use std::path::PathBuf;

use catastrophe::classify::{beta_critical, classify_example, classify_general};
use catastrophe::{ClassificationInput, ImmigrationSpec, Regime};
use serde::Serialize;

use crate::config::{require_probability, ExperimentConfig};
use crate::error::CliError;
use crate::output::{print_json, sink};

#[derive(Serialize)]
struct Report {
    verdict: String,
    citations: Vec<String>,
    mu: f64,
    beta_c: Option<f64>,
    reasons: Vec<String>,
}

impl Report {
    fn new(r: Regime, mu: f64, beta_c: Option<f64>) -> Self {
        Self {
            verdict: r.verdict.to_string(),
            citations: r.citations,
            mu,
            beta_c,
            reasons: r.reasons,
        }
    }
}

pub fn classify(cfg: &ExperimentConfig, a: Option<f64>, beta: Option<f64>) -> Result<(), CliError> {
    let a = a.or(cfg.a);
    let beta = beta.or(cfg.beta);
    let report = match (a, beta) {
        (Some(a), Some(beta)) => {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!("`a` = {a} must be positive")));
            }
            require_probability("beta", beta)?;
            Report::new(classify_example(a, beta)?, -beta.ln(), Some(beta_critical(1.0)?))
        }
        (None, None) => {
            let env = cfg.env()?;
            let imm = cfg.imm()?;
            let inp = ClassificationInput::from_distributions(&env, &imm)?;
            let beta_c = match imm.spec() {
                ImmigrationSpec::LogTail { a } | ImmigrationSpec::ShiftedLogTail { a } if *a == 1.0 => {
                    Some(beta_critical(1.0)?)
                }
                _ => None,
            };
            Report::new(classify_general(&inp)?, inp.mu, beta_c)
        }
        _ => return Err(CliError::Config("give both --a and --beta, or env and imm in a config".into())),
    };
    print_json(&report)
}

pub const DEFAULT_A_GRID: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0];

/// `0.05, 0.10, …, 0.95` with `β_c` inserted in order.
pub fn default_beta_grid() -> Result<Vec<f64>, CliError> {
    let mut grid: Vec<f64> = (1..=19).map(|k| k as f64 / 20.0).collect();
    grid.push(beta_critical(1.0)?);
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

pub fn phase(
    cfg: &ExperimentConfig,
    a_grid: Option<Vec<f64>>,
    beta_grid: Option<Vec<f64>>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let a_grid = a_grid.or(cfg.a_grid.clone()).unwrap_or(DEFAULT_A_GRID.to_vec());
    let beta_grid = match beta_grid.or(cfg.beta_grid.clone()) {
        Some(g) => g,
        None => default_beta_grid()?,
    };
    if a_grid.is_empty() || beta_grid.is_empty() {
        return Err(CliError::Config("empty grid".into()));
    }
    let mut w = sink(out.as_deref().or(cfg.output.as_deref()))?;
    writeln!(w, "a,beta,verdict")?;
    for &a in &a_grid {
        for &beta in &beta_grid {
            require_probability("beta", beta)?;
            let r = classify_example(a, beta)?;
            writeln!(w, "{a},{beta},{}", r.verdict)?;
        }
    }
    w.flush()?;
    Ok(())
}
