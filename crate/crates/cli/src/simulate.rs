use std::io::Write;
use std::path::PathBuf;

use catastrophe::chain::{simulate, ChainConfig};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{sink, write_jsonl};
use crate::Format;

#[derive(Serialize)]
struct Row {
    step: usize,
    population_log10: f64,
    beta: Option<f64>,
    z_log10: Option<f64>,
    exact: Option<u64>,
}

pub fn run(
    cfg: &ExperimentConfig,
    horizon: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), CliError> {
    let horizon = horizon
        .or(cfg.horizon)
        .ok_or_else(|| CliError::Config("missing horizon".into()))?;
    let mut chain = ChainConfig::new(cfg.env()?, cfg.imm()?, horizon, seed.unwrap_or(cfg.seed()));
    if let Some(x0) = cfg.x0 {
        chain = chain.with_x0(x0);
    }
    let traj = simulate(&chain)?;
    let mut w = sink(out.as_deref().or(cfg.output.as_deref()))?;
    match format {
        Format::Csv => traj.write_csv(&mut w)?,
        Format::Jsonl => {
            let rows: Vec<Row> = traj
                .states
                .iter()
                .enumerate()
                .map(|(n, x)| Row {
                    step: n,
                    population_log10: x.log10(),
                    beta: traj.env_draws[n],
                    z_log10: (n > 0).then(|| traj.imm_draws[n].log10()),
                    exact: x.as_exact(),
                })
                .collect();
            write_jsonl(&mut w, &rows)?;
        }
    }
    w.flush()?;
    Ok(())
}
