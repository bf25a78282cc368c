//! Experiment runner for the `metrofi` library.
//!
//! [`cli`] parses flags and merges them over a TOML [`config`] file,
//! [`experiments`] calls into the library, and [`output`] writes CSV tables,
//! JSON records and gnuplot scripts atomically.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::Path;

use cli::RunPlan;
use error::CliResult;
use experiments::Outcome;
use output::{write_atomic, ResultRecord, FORMAT_VERSION};

/// Runs the plan on its worker pool and writes every artifact under `plan.out`.
pub fn execute(plan: &RunPlan) -> CliResult<Outcome> {
    let mode = plan.mode();
    let outcome =
        metrofi::exec::with_workers(plan.workers, || experiments::run(&plan.experiment, mode))?;
    persist(plan, &outcome)?;
    Ok(outcome)
}

fn persist(plan: &RunPlan, outcome: &Outcome) -> CliResult<()> {
    let dir: &Path = &plan.out;
    let mut files = Vec::with_capacity(outcome.artifacts.len());
    for a in &outcome.artifacts {
        write_atomic(&dir.join(&a.name), &a.bytes)?;
        files.push(a.name.clone());
    }
    let record = ResultRecord {
        experiment: plan.experiment.id(),
        format_version: FORMAT_VERSION,
        software_version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: &plan.experiment,
        files,
        warnings: outcome.warnings.clone(),
        result: &outcome.result,
    };
    let json = serde_json::to_vec_pretty(&record)
        .map_err(|e| error::CliError::Output(format!("json encoding failed: {e}")))?;
    write_atomic(&dir.join(format!("{}.json", outcome.stem)), &json)
}
