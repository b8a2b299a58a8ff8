use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use catastrophe::neuts::{collapse_gaps, collapse_times, coupling_check, gap_law_test, simulate_neuts};
use catastrophe::{EnvDistribution, ImmigrationDistribution, NeutsConfig, TestResult};
use serde::Serialize;

use crate::config::{require_probability, ExperimentConfig};
use crate::error::CliError;
use crate::output::print_json;

const SIGNIFICANCE: f64 = 0.01;

#[derive(Serialize)]
struct Report {
    p: f64,
    n: u64,
    reps: u64,
    coupling: TestResult,
    coupling_passed: bool,
    gaps: usize,
    mean_gap: f64,
    gap_law: TestResult,
    gap_law_passed: bool,
}

pub fn run(cfg: &ExperimentConfig, trajectory: Option<PathBuf>) -> Result<(), CliError> {
    let p = require_probability("p", cfg.p.unwrap_or(0.5))?;
    let env = match &cfg.env {
        Some(e) => e.clone(),
        None => EnvDistribution::point_mass(0.5)?,
    };
    let imm = match &cfg.imm {
        Some(i) => i.clone(),
        None => ImmigrationDistribution::deterministic(1)?,
    };
    let n = cfg.n.unwrap_or(3);
    let reps = cfg.reps.unwrap_or(100_000);
    let horizon = cfg.horizon.unwrap_or(10_000);
    let seed = cfg.seed();
    let mut neuts = NeutsConfig::new(p, env, imm, horizon, seed);
    neuts.y0 = cfg.x0;

    let coupling = coupling_check(&neuts, n, reps)?;

    let wanted = cfg.gaps.unwrap_or(10_000) as usize;
    let mut long = neuts.clone();
    long.horizon = ((wanted as f64 / p) * 1.5) as u64 + 1_000;
    long.seed = catastrophe::RngSpec::new(seed).derive_stream_seed(u64::MAX);
    let traj = simulate_neuts(&long)?;
    let times = collapse_times(&traj);
    if times.len() < wanted {
        return Err(CliError::Runtime(format!("only {} of {wanted} collapses", times.len())));
    }
    let gaps = collapse_gaps(&times[..wanted]);
    let gap_law = gap_law_test(p, &gaps)?;
    if let Some(path) = trajectory {
        let mut short = neuts.clone();
        short.horizon = horizon;
        simulate_neuts(&short)?.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let report = Report {
        p,
        n,
        reps,
        coupling_passed: coupling.p_value > SIGNIFICANCE,
        coupling,
        gaps: gaps.len(),
        mean_gap: gaps.iter().sum::<u64>() as f64 / gaps.len() as f64,
        gap_law_passed: gap_law.p_value > SIGNIFICANCE,
        gap_law,
    };
    print_json(&report)?;
    if report.coupling_passed && report.gap_law_passed {
        Ok(())
    } else {
        Err(CliError::Validation("a Neuts check rejected at the 0.01 level".into()))
    }
}
