//! Per-topology performance metrics and their topological averages.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delivery::{FailureStage, TrialOutcome};
use crate::error::SimError;

/// How failed trials enter the area spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AseFailedPolicy {
    /// A failed trial contributes the inverse of the delay it accumulated.
    Accumulated,
    /// A failed trial contributes nothing: no message, no throughput.
    #[default]
    Excluded,
}

impl AseFailedPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            AseFailedPolicy::Accumulated => "accumulated",
            AseFailedPolicy::Excluded => "excluded",
        }
    }
}

impl FromStr for AseFailedPolicy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "accumulated" => Ok(AseFailedPolicy::Accumulated),
            "excluded" => Ok(AseFailedPolicy::Excluded),
            other => Err(SimError::config(format!("unknown ase-failed policy '{other}'"))),
        }
    }
}

/// Density of possible transmitters, `(M + 1) / A`.
pub fn network_density(mobiles: usize, area: f64) -> f64 {
    (mobiles + 1) as f64 / area
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub discovery_void: u64,
    pub no_path: u64,
    pub ack: u64,
    pub delivery: u64,
}

impl StageCounts {
    pub fn total(&self) -> u64 {
        self.discovery_void + self.no_path + self.ack + self.delivery
    }

    pub fn request(&self) -> u64 {
        self.discovery_void + self.no_path
    }
}

/// Running sums over the trials of one topology. Merging is a plain sum, so
/// partial accumulators can be combined in any fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    trials: u64,
    stages: StageCounts,
    hop_sum: u64,
    delay_sum: f64,
    inverse_delay_sum: f64,
    policy: AseFailedPolicy,
}

impl MetricsAccumulator {
    pub fn new(policy: AseFailedPolicy) -> Self {
        MetricsAccumulator {
            policy,
            ..Default::default()
        }
    }

    pub fn push(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        match outcome.failure {
            None => {
                self.hop_sum += outcome.hops as u64;
                self.delay_sum += outcome.total_delay;
                self.inverse_delay_sum += outcome.total_delay.recip();
            }
            Some(stage) => {
                match stage {
                    FailureStage::DiscoveryVoid => self.stages.discovery_void += 1,
                    FailureStage::NoPath => self.stages.no_path += 1,
                    FailureStage::AckFailure => self.stages.ack += 1,
                    FailureStage::DeliveryFailure => self.stages.delivery += 1,
                }
                // A failure before any channel time was spent carries no rate.
                if self.policy == AseFailedPolicy::Accumulated && outcome.total_delay > 0.0 {
                    self.inverse_delay_sum += outcome.total_delay.recip();
                }
            }
        }
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        assert_eq!(self.policy, other.policy, "cannot merge different ASE policies");
        self.trials += other.trials;
        self.stages.discovery_void += other.stages.discovery_void;
        self.stages.no_path += other.stages.no_path;
        self.stages.ack += other.stages.ack;
        self.stages.delivery += other.stages.delivery;
        self.hop_sum += other.hop_sum;
        self.delay_sum += other.delay_sum;
        self.inverse_delay_sum += other.inverse_delay_sum;
    }

    pub fn finish(&self, density: f64) -> TopologyMetrics {
        assert!(self.trials >= 1, "metrics need at least one trial");
        let k = self.trials;
        let failures = self.stages.total();
        let successes = k - failures;
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);

        let after_request = k - self.stages.request();
        let after_ack = after_request - self.stages.ack;
        TopologyMetrics {
            trials: k,
            failures,
            stages: self.stages,
            reliability: successes as f64 / k as f64,
            cond_hops: ratio(self.hop_sum, successes),
            cond_delay: (successes > 0).then(|| self.delay_sum / successes as f64),
            ase: density / k as f64 * self.inverse_delay_sum,
            request_reliability: after_request as f64 / k as f64,
            ack_reliability: ratio(after_ack, after_request),
            delivery_reliability: ratio(successes, after_ack),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMetrics {
    pub trials: u64,
    pub failures: u64,
    pub stages: StageCounts,
    /// `1 - F/K`.
    pub reliability: f64,
    /// Mean hop count over successful trials; absent when every trial failed.
    pub cond_hops: Option<f64>,
    /// Mean total delay over successful trials; absent when every trial failed.
    pub cond_delay: Option<f64>,
    pub ase: f64,
    pub request_reliability: f64,
    /// Conditioned on the request stage succeeding.
    pub ack_reliability: Option<f64>,
    /// Conditioned on discovery succeeding.
    pub delivery_reliability: Option<f64>,
}

impl TopologyMetrics {
    /// Every trial failed, so the conditional metrics are undefined.
    pub fn is_degenerate(&self) -> bool {
        self.failures == self.trials
    }
}

pub fn topology_metrics(
    outcomes: &[TrialOutcome],
    density: f64,
    policy: AseFailedPolicy,
) -> TopologyMetrics {
    let mut acc = MetricsAccumulator::new(policy);
    outcomes.iter().for_each(|o| acc.push(o));
    acc.finish(density)
}

/// Mean of a metric over topologies with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Topologies over which the metric was defined.
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(MeanEstimate { mean, std_error, count: n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMetrics {
    pub topologies: usize,
    pub trials_per_topology: u64,
    pub reliability: MeanEstimate,
    pub request_reliability: MeanEstimate,
    pub ack_reliability: Option<MeanEstimate>,
    pub delivery_reliability: Option<MeanEstimate>,
    pub cond_delay: Option<MeanEstimate>,
    pub cond_hops: Option<MeanEstimate>,
    pub ase: MeanEstimate,
}

/// Arithmetic means over topologies; conditional metrics use only the
/// topologies where they are defined.
pub fn topological_average(per_topology: &[TopologyMetrics]) -> AveragedMetrics {
    assert!(!per_topology.is_empty(), "need at least one topology");
    let all = |f: fn(&TopologyMetrics) -> f64| {
        let v: Vec<f64> = per_topology.iter().map(f).collect();
        MeanEstimate::from_values(&v).expect("non-empty")
    };
    let defined = |f: fn(&TopologyMetrics) -> Option<f64>| {
        let v: Vec<f64> = per_topology.iter().filter_map(f).collect();
        MeanEstimate::from_values(&v)
    };
    AveragedMetrics {
        topologies: per_topology.len(),
        trials_per_topology: per_topology[0].trials,
        reliability: all(|m| m.reliability),
        request_reliability: all(|m| m.request_reliability),
        ack_reliability: defined(|m| m.ack_reliability),
        delivery_reliability: defined(|m| m.delivery_reliability),
        cond_delay: defined(|m| m.cond_delay),
        cond_hops: defined(|m| m.cond_hops),
        ase: all(|m| m.ase),
    }
}
