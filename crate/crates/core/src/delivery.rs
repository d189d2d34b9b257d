//! Message delivery over a selected path with bounded retransmissions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::protocols::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "gf")]
    GreedyForwarding,
    #[serde(rename = "mp")]
    MaxProgress,
    #[serde(rename = "aodv")]
    Aodv,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::GreedyForwarding, Protocol::MaxProgress, Protocol::Aodv];

    pub fn short_name(self) -> &'static str {
        match self {
            Protocol::GreedyForwarding => "gf",
            Protocol::MaxProgress => "mp",
            Protocol::Aodv => "aodv",
        }
    }

    /// Whether the protocol pays the per-hop discovery overhead `2 h T_d`.
    pub fn has_discovery(self) -> bool {
        !matches!(self, Protocol::GreedyForwarding)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Protocol {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gf" | "greedy" => Ok(Protocol::GreedyForwarding),
            "mp" | "maxprogress" | "max-progress" => Ok(Protocol::MaxProgress),
            "aodv" => Ok(Protocol::Aodv),
            other => Err(SimError::config(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryParams {
    /// Maximum transmission attempts per link during message delivery.
    pub max_attempts: u32,
    /// Delay of one transmission over a link.
    pub t_link: f64,
    /// Excess delay of each retransmission.
    pub t_excess: f64,
    /// Link delay of discovery packets.
    pub t_discovery: f64,
    /// Whether discovery overhead is charged (`c = 1`).
    pub discovery_overhead: bool,
}

impl Default for DeliveryParams {
    fn default() -> Self {
        DeliveryParams {
            max_attempts: 4,
            t_link: 1.0,
            t_excess: 1.2,
            t_discovery: 1.0,
            discovery_overhead: false,
        }
    }
}

impl DeliveryParams {
    pub fn for_protocol(self, protocol: Protocol) -> Self {
        DeliveryParams {
            discovery_overhead: protocol.has_discovery(),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.max_attempts < 1 {
            return Err(SimError::config("B must be at least 1"));
        }
        if !(self.t_link > 0.0) || !(self.t_excess >= 0.0) || !(self.t_discovery >= 0.0) {
            return Err(SimError::config("delays must satisfy T > 0, T_e >= 0, T_d >= 0"));
        }
        Ok(())
    }

    /// Delay of a link that used `attempts` transmissions.
    pub fn link_delay(&self, attempts: u32) -> f64 {
        f64::from(attempts) * self.t_link + f64::from(attempts.saturating_sub(1)) * self.t_excess
    }

    /// Overhead `2 c h T_d` of discovering an `h`-hop route.
    pub fn discovery_delay(&self, hops: usize) -> f64 {
        if self.discovery_overhead {
            2.0 * hops as f64 * self.t_discovery
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDeliveryResult {
    pub success: bool,
    pub attempts: u32,
    pub delay: f64,
}

/// Retransmits over one link until the first success or `B` failures.
///
/// Always consumes exactly `B` uniforms so that later links see the same
/// draws whatever happens on this one.
pub fn deliver_link<R: Rng + ?Sized>(epsilon: f64, params: &DeliveryParams, rng: &mut R) -> LinkDeliveryResult {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    let mut attempts = 0;
    let mut success = false;
    for _ in 0..params.max_attempts {
        let u = rng.random::<f64>();
        if !success {
            attempts += 1;
            success = u >= epsilon;
        }
    }
    LinkDeliveryResult {
        success,
        attempts,
        delay: params.link_delay(attempts),
    }
}

/// Stage at which a trial failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureStage {
    /// A forwarding mobile had no usable next hop.
    DiscoveryVoid,
    /// The candidate graph holds no route.
    NoPath,
    /// The reverse acknowledgement was lost.
    AckFailure,
    /// A link exhausted its `B` delivery attempts.
    DeliveryFailure,
}

impl FailureStage {
    /// Failures that happen before any route request completes.
    pub fn is_request(self) -> bool {
        matches!(self, FailureStage::DiscoveryVoid | FailureStage::NoPath)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub protocol: Protocol,
    pub failure: Option<FailureStage>,
    /// Links of the selected (or partially selected) path.
    pub hops: usize,
    /// Sum of the delivery delays of every attempted link.
    pub message_delay: f64,
    /// Message delay plus discovery overhead.
    pub total_delay: f64,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }

    /// Outcome of a trial that ended before message delivery.
    pub fn discovery_failure(
        protocol: Protocol,
        stage: FailureStage,
        hops_discovered: usize,
        params: &DeliveryParams,
    ) -> Self {
        TrialOutcome {
            protocol,
            failure: Some(stage),
            hops: hops_discovered,
            message_delay: 0.0,
            total_delay: params.discovery_delay(hops_discovered),
        }
    }
}

/// Delivers a message link by link along `path`; `epsilons[l]` is the outage
/// probability of the `l`-th link.
pub fn deliver_path<R: Rng + ?Sized>(
    protocol: Protocol,
    path: &Path,
    epsilons: &[f64],
    params: &DeliveryParams,
    rng: &mut R,
) -> TrialOutcome {
    assert_eq!(epsilons.len(), path.hop_count(), "one outage probability per link");
    let mut message_delay = 0.0;
    let mut failure = None;
    for &eps in epsilons {
        let link = deliver_link(eps, params, rng);
        message_delay += link.delay;
        if !link.success {
            failure = Some(FailureStage::DeliveryFailure);
            break;
        }
    }
    let hops = path.hop_count();
    TrialOutcome {
        protocol,
        failure,
        hops,
        message_delay,
        total_delay: message_delay + params.discovery_delay(hops),
    }
}
