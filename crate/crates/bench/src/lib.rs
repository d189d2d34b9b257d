//! Shared fixtures for the simulator benchmarks.

use routesim::rng::StreamKey;
use routesim::runner::{ExperimentConfig, ProtocolVariant, Realization, TrialParams};
use routesim::Protocol;

/// A topology at the reference density with its link budget.
pub fn reference_realization(distance: f64, seed: u64) -> (Realization, TrialParams) {
    let config = ExperimentConfig::default();
    let channel = config.channel_params();
    let realization = Realization::generate(
        &config.network_params(distance),
        &channel,
        StreamKey::topology(seed, 0, 0),
    )
    .expect("reference density places comfortably");
    let params = TrialParams {
        channel,
        delivery: config.delivery_params(),
        mu: config.mu,
        p: config.p,
        r_g: config.r_g,
        backend: config.backend(),
    };
    (realization, params)
}

pub fn variant(protocol: Protocol) -> ProtocolVariant {
    match protocol {
        Protocol::GreedyForwarding => ProtocolVariant::greedy(0.35, 0, false),
        other => ProtocolVariant::new(other),
    }
}
