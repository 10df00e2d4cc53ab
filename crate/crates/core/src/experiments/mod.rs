//! Config-driven experiment runner.
//!
//! A flat TOML file names the experiment, a seed and the sweep grids; the
//! runner returns a [`ResultTable`] whose metadata echoes every resolved
//! parameter. Same config and seed give the same CSV bytes for any thread
//! count.

mod config;
mod pipelines;
mod table;

use std::time::Instant;

pub use config::{Default, ExperimentConfig, ExperimentKind, KeySpec, Kind, Value};
pub use pipelines::path_correlation_curve;
pub use table::{Cell, ResultTable};

use crate::error::Result;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let mut table = match cfg.experiment {
        ExperimentKind::RankVsM => pipelines::rank_vs_m(cfg),
        ExperimentKind::PilotDecontamination => pipelines::pilot_decontamination(cfg),
        ExperimentKind::RankVsR => pipelines::rank_vs_r(cfg),
        ExperimentKind::SegmentRank => pipelines::segment_rank(cfg),
        ExperimentKind::PathCorrelation => pipelines::path_correlation_sweep(cfg),
        ExperimentKind::SigmaSq => pipelines::sigma_sq_sweep(cfg),
        ExperimentKind::CrosscorrDist => pipelines::crosscorr_dist(cfg),
        ExperimentKind::MseVsDistance => pipelines::mse_vs_distance(cfg),
        ExperimentKind::SumrateVsDistance => pipelines::sumrate_vs_distance(cfg),
        ExperimentKind::PercellRateVsR => pipelines::percell_rate_vs_r(cfg),
    }?;
    let mut meta = vec![
        ("experiment".to_string(), cfg.experiment.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("dmimo_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    for spec in cfg.experiment.schema() {
        if let Some(v) = cfg.params.get(spec.name) {
            meta.push((spec.name.to_string(), v.to_string()));
        }
    }
    if !cfg.defaulted.is_empty() {
        meta.push(("defaulted_keys".to_string(), cfg.defaulted.join(" ")));
    }
    meta.append(&mut table.metadata);
    table.metadata = meta;
    table.runtime = Some(start.elapsed());
    log::info!("{} finished in {:.2?}", cfg.experiment, start.elapsed());
    Ok(table)
}
