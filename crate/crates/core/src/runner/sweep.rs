//! Seeded parallel sweep over source-destination distances.

use rayon::prelude::*;

use crate::delivery::Protocol;
use crate::error::{Result, SimError};
use crate::metrics::{network_density, topological_average, AveragedMetrics, MetricsAccumulator, TopologyMetrics};
use crate::rng::StreamKey;

use super::config::ExperimentConfig;
use super::output::emit_outputs;
use super::trial::{simulate_trial, ProtocolVariant, Realization, TrialParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub distance: f64,
    pub protocol: Protocol,
    pub label: String,
    pub metrics: AveragedMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by distance, then by protocol label.
    pub rows: Vec<ResultRow>,
}

impl SweepResult {
    pub fn row(&self, distance: f64, label: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.label == label && (r.distance - distance).abs() < 1e-9)
    }

    /// Rows of one protocol label in distance order.
    pub fn series(&self, label: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.label == label).collect()
    }
}

/// Protocol variants of a configuration, sorted by label.
pub fn protocol_variants(config: &ExperimentConfig) -> Vec<ProtocolVariant> {
    let mut out = Vec::new();
    for &protocol in &config.protocols {
        match protocol {
            Protocol::GreedyForwarding => {
                let many = config.r_t.len() > 1;
                out.extend(
                    config
                        .r_t
                        .iter()
                        .enumerate()
                        .map(|(i, &r)| ProtocolVariant::greedy(r, i, many)),
                );
            }
            other => out.push(ProtocolVariant::new(other)),
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out.dedup_by(|a, b| a.label == b.label);
    out
}

fn trial_params(config: &ExperimentConfig) -> TrialParams {
    TrialParams {
        channel: config.channel_params(),
        delivery: config.delivery_params(),
        mu: config.mu,
        p: config.p,
        r_g: config.r_g,
        backend: config.backend(),
    }
}

/// Runs all trials of one `(distance, topology)` unit; returns one metrics
/// record per variant.
fn run_unit(
    config: &ExperimentConfig,
    params: &TrialParams,
    variants: &[ProtocolVariant],
    distance_index: usize,
    topology_index: usize,
) -> Result<Vec<TopologyMetrics>> {
    let distance = config.distance_grid[distance_index];
    let network = config.network_params(distance);
    let key = StreamKey::topology(config.master_seed, distance_index, topology_index);
    let realization = Realization::generate(&network, &params.channel, key)?;

    if config.dump_topology && topology_index == 0 {
        let dir = config.output_directory.join("topologies");
        realization
            .topology
            .write_csv(&dir.join(format!("distance_{distance_index:02}.csv")))?;
    }

    let mut accumulators = vec![MetricsAccumulator::new(config.ase_failed); variants.len()];
    for trial in 0..config.trials {
        let outcomes = simulate_trial(&realization, params, variants, key.with_trial(trial));
        for (acc, outcome) in accumulators.iter_mut().zip(&outcomes) {
            acc.push(outcome);
        }
    }
    let density = network_density(config.mobiles, network.area());
    Ok(accumulators.iter().map(|a| a.finish(density)).collect())
}

/// Runs the sweep without writing any files.
pub fn simulate(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let variants = protocol_variants(config);
    let params = trial_params(config);

    if config.dump_topology {
        let dir = config.output_directory.join("topologies");
        std::fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    }

    let units: Vec<(usize, usize)> = (0..config.distance_grid.len())
        .flat_map(|d| (0..config.topologies).map(move |t| (d, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| SimError::config(format!("cannot start worker pool: {e}")))?;
    let per_unit: Vec<Vec<TopologyMetrics>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(d, t)| run_unit(config, &params, &variants, d, t))
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::with_capacity(config.distance_grid.len() * variants.len());
    for (d, &distance) in config.distance_grid.iter().enumerate() {
        let unit_range = d * config.topologies..(d + 1) * config.topologies;
        for (v, variant) in variants.iter().enumerate() {
            let per_topology: Vec<TopologyMetrics> =
                per_unit[unit_range.clone()].iter().map(|u| u[v].clone()).collect();
            rows.push(ResultRow {
                distance,
                protocol: variant.protocol,
                label: variant.label.clone(),
                metrics: topological_average(&per_topology),
            });
        }
    }
    rows.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));
    Ok(SweepResult { rows })
}

/// Runs the sweep and writes results, plots and the run manifest.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let sweep = simulate(config)?;
    emit_outputs(&sweep, config)?;
    Ok(sweep)
}
