//! One topology realization and the per-trial protocol runs on it.

use std::collections::HashMap;

use rand::Rng;

use crate::channel::{
    conditional_outage, draw_shadow_field, ChannelParams, InterferenceProfile, LinkBudget,
    OutageBackend,
};
use crate::delivery::{
    deliver_link, deliver_path, DeliveryParams, FailureStage, Protocol, TrialOutcome,
};
use crate::error::Result;
use crate::protocols::{
    aodv_ack_traverse, closest_to_destination, draw_candidate_links, eligible_heads,
    fewest_hops_path, greedy_next_hop, guard_zone_silencing, reachable_eligible_links, Directions,
    LinkGraph, Path,
};
use crate::rng::{Purpose, StreamKey};
use crate::topology::{draw_relay_set, place_mobiles, NetworkParams, RelaySet, Topology};

/// One protocol as evaluated in a sweep; greedy forwarding may appear once per
/// transmission range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolVariant {
    pub protocol: Protocol,
    pub r_t: f64,
    pub label: String,
    /// Sub-stream index, distinct among variants of the same protocol.
    pub stream: u64,
}

impl ProtocolVariant {
    pub fn new(protocol: Protocol) -> Self {
        ProtocolVariant {
            protocol,
            r_t: f64::NAN,
            label: protocol.short_name().to_string(),
            stream: 0,
        }
    }

    pub fn greedy(r_t: f64, index: usize, labelled_by_range: bool) -> Self {
        let label = if labelled_by_range {
            format!("gf_rt{r_t}")
        } else {
            "gf".to_string()
        };
        ProtocolVariant {
            protocol: Protocol::GreedyForwarding,
            r_t,
            label,
            stream: index as u64,
        }
    }
}

/// Model parameters shared by every trial of a sweep.
#[derive(Debug, Clone)]
pub struct TrialParams {
    pub channel: ChannelParams,
    pub delivery: DeliveryParams,
    pub mu: f64,
    pub p: f64,
    pub r_g: f64,
    pub backend: OutageBackend,
}

/// A placed topology with its fixed shadowing folded into a link budget.
#[derive(Debug, Clone)]
pub struct Realization {
    pub topology: Topology,
    pub budget: LinkBudget,
}

impl Realization {
    pub fn generate(network: &NetworkParams, channel: &ChannelParams, key: StreamKey) -> Result<Self> {
        let topology = place_mobiles(network, &mut key.rng(Purpose::Placement))?;
        let shadow = draw_shadow_field(&topology, channel.sigma_s, &mut key.rng(Purpose::Shadowing));
        let budget = LinkBudget::new(&topology, &shadow, channel);
        Ok(Realization { topology, budget })
    }
}

/// Outage probabilities of directed links under one interference profile,
/// memoized for the duration of a trial.
struct OutageTable<'a> {
    budget: &'a LinkBudget,
    profile: InterferenceProfile,
    channel: &'a ChannelParams,
    backend: OutageBackend,
    key: StreamKey,
    phase: u64,
    cache: HashMap<(usize, usize), f64>,
}

impl<'a> OutageTable<'a> {
    fn new(
        budget: &'a LinkBudget,
        profile: InterferenceProfile,
        channel: &'a ChannelParams,
        backend: OutageBackend,
        key: StreamKey,
        phase: u64,
    ) -> Self {
        OutageTable {
            budget,
            profile,
            channel,
            backend,
            key,
            phase,
            cache: HashMap::new(),
        }
    }

    fn epsilon(&mut self, k: usize, j: usize) -> f64 {
        if let Some(&eps) = self.cache.get(&(k, j)) {
            return eps;
        }
        let (beta, gamma) = (self.channel.beta, self.channel.gamma);
        let eps = match self.backend {
            OutageBackend::Analytic => self.budget.analytic_outage(k, j, &self.profile, beta, gamma),
            OutageBackend::MonteCarlo { .. } => {
                // The estimate of a link depends only on its own keyed stream.
                let sub = (self.phase << 48) | ((k as u64) << 24) | j as u64;
                let mut rng = self.key.sub_rng(Purpose::Outage, sub);
                let row = self.budget.row(k, j);
                conditional_outage(&row, &self.profile, beta, gamma, self.backend, &mut rng)
                    .expect("sample count validated with the configuration")
                    .epsilon
            }
        };
        self.cache.insert((k, j), eps);
        eps
    }
}

const PHASE_BASE: u64 = 0;
const PHASE_GUARDED: u64 = 1;

/// Runs every variant on one trial: a fresh relay set shared by all
/// protocols, then each protocol's discovery, selection and delivery on its
/// own stream.
pub fn simulate_trial(
    realization: &Realization,
    params: &TrialParams,
    variants: &[ProtocolVariant],
    key: StreamKey,
) -> Vec<TrialOutcome> {
    let topology = &realization.topology;
    let relays = draw_relay_set(topology, params.mu, &mut key.rng(Purpose::RelaySet));
    let base_profile = InterferenceProfile::from_relays(&relays, params.p);
    let mut base = OutageTable::new(
        &realization.budget,
        base_profile,
        &params.channel,
        params.backend,
        key,
        PHASE_BASE,
    );

    variants
        .iter()
        .map(|variant| {
            let delivery = params.delivery.for_protocol(variant.protocol);
            match variant.protocol {
                Protocol::GreedyForwarding => {
                    let mut rng = key.sub_rng(Purpose::GreedyForwarding, variant.stream);
                    run_greedy(topology, &relays, variant.r_t, &delivery, &mut base, &mut rng)
                }
                Protocol::MaxProgress => {
                    let mut rng = key.sub_rng(Purpose::MaxProgress, variant.stream);
                    run_max_progress(realization, &relays, params, &delivery, &mut base, &mut rng)
                }
                Protocol::Aodv => {
                    let mut rng = key.sub_rng(Purpose::Aodv, variant.stream);
                    run_aodv(topology, &relays, &delivery, &mut base, &mut rng)
                }
            }
        })
        .collect()
}

/// Greedy forwarding interleaves next-hop selection and delivery.
fn run_greedy<R: Rng + ?Sized>(
    topology: &Topology,
    relays: &RelaySet,
    r_t: f64,
    delivery: &DeliveryParams,
    outage: &mut OutageTable<'_>,
    rng: &mut R,
) -> TrialOutcome {
    let mut current = topology.source();
    let mut hops = 0;
    let mut delay = 0.0;
    let outcome = |failure, hops, delay| TrialOutcome {
        protocol: Protocol::GreedyForwarding,
        failure,
        hops,
        message_delay: delay,
        total_delay: delay,
    };
    while current != topology.destination() {
        let Some(next) = greedy_next_hop(topology, relays, current, r_t) else {
            return outcome(Some(FailureStage::DiscoveryVoid), hops, delay);
        };
        let link = deliver_link(outage.epsilon(current, next), delivery, rng);
        delay += link.delay;
        hops += 1;
        if !link.success {
            return outcome(Some(FailureStage::DeliveryFailure), hops, delay);
        }
        current = next;
    }
    outcome(None, hops, delay)
}

/// Maximum progress: RTS/CTS discovery one hop at a time over the two-way
/// candidate links, then delivery with guard zones around the selected path.
fn run_max_progress<R: Rng + ?Sized>(
    realization: &Realization,
    relays: &RelaySet,
    params: &TrialParams,
    delivery: &DeliveryParams,
    base: &mut OutageTable<'_>,
    rng: &mut R,
) -> TrialOutcome {
    let topology = &realization.topology;
    let n = topology.len();
    let mut hops = vec![topology.source()];
    let mut current = topology.source();
    while current != topology.destination() {
        let mut frontier = LinkGraph::from_links(
            n,
            eligible_heads(topology, relays, current).map(|j| (current, j)),
        );
        draw_candidate_links(&mut frontier, |k, j| base.epsilon(k, j), Directions::Both, rng);
        let Some(next) =
            closest_to_destination(topology, frontier.two_way_candidates().map(|(_, j)| j))
        else {
            let stage = if frontier.candidates().next().is_some() {
                FailureStage::AckFailure
            } else {
                FailureStage::DiscoveryVoid
            };
            return TrialOutcome::discovery_failure(Protocol::MaxProgress, stage, hops.len() - 1, delivery);
        };
        hops.push(next);
        current = next;
    }

    let path = Path::new(hops);
    let guarded = guard_zone_silencing(topology, &path, params.r_g, &base.profile);
    let mut outage = OutageTable::new(
        &realization.budget,
        guarded,
        &params.channel,
        params.backend,
        base.key,
        PHASE_GUARDED,
    );
    let epsilons: Vec<f64> = path.links().map(|(i, j)| outage.epsilon(i, j)).collect();
    deliver_path(Protocol::MaxProgress, &path, &epsilons, delivery, rng)
}

/// AODV: candidate links from one flooding round, a uniformly chosen
/// fewest-hops route, its reverse acknowledgement, then delivery.
fn run_aodv<R: Rng + ?Sized>(
    topology: &Topology,
    relays: &RelaySet,
    delivery: &DeliveryParams,
    base: &mut OutageTable<'_>,
    rng: &mut R,
) -> TrialOutcome {
    let mut graph = reachable_eligible_links(topology, relays);
    draw_candidate_links(&mut graph, |k, j| base.epsilon(k, j), Directions::Forward, rng);
    let path = match fewest_hops_path(&graph, topology.destination(), rng) {
        Ok(path) => path,
        Err(_) => {
            return TrialOutcome::discovery_failure(Protocol::Aodv, FailureStage::NoPath, 0, delivery)
        }
    };
    if !aodv_ack_traverse(&path, |k, j| base.epsilon(k, j), rng) {
        return TrialOutcome::discovery_failure(
            Protocol::Aodv,
            FailureStage::AckFailure,
            path.hop_count(),
            delivery,
        );
    }
    let epsilons: Vec<f64> = path.links().map(|(i, j)| base.epsilon(i, j)).collect();
    deliver_path(Protocol::Aodv, &path, &epsilons, delivery, rng)
}
