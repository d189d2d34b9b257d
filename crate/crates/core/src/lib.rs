//! Monte Carlo evaluation of greedy forwarding, maximum progress and AODV
//! routing in finite ad hoc networks with shadowing, distance-dependent
//! Nakagami fading, exclusion zones and guard zones.
//!
//! The pipeline for one trial is: place mobiles ([`topology`]), draw the
//! shadowing and link budget ([`channel`]), draw the relay set, run each
//! protocol's discovery and path selection ([`protocols`]), deliver the
//! message ([`delivery`]) and fold the outcome into per-topology metrics
//! ([`metrics`]). [`runner`] drives sweeps over source-destination distance.

pub mod channel;
pub mod delivery;
pub mod error;
pub mod metrics;
pub mod protocols;
pub mod rng;
pub mod runner;
pub mod topology;

pub use channel::{ChannelParams, InterferenceProfile, LinkBudget, NormalizedPowerRow, OutageBackend, OutageEstimate, ShadowField};
pub use delivery::{DeliveryParams, FailureStage, LinkDeliveryResult, Protocol, TrialOutcome};
pub use error::{Result, SimError};
pub use metrics::{AseFailedPolicy, AveragedMetrics, MeanEstimate, TopologyMetrics};
pub use protocols::{LinkGraph, Path, RoutingFailure};
pub use rng::{Purpose, StreamKey};
pub use runner::{run_experiment, ExperimentConfig, Preset, SweepResult};
pub use topology::{NetworkParams, Point, RelaySet, Topology};
