//! Link sets and path selection for greedy forwarding, maximum progress and AODV.

use std::fmt;

use rand::Rng;

use crate::channel::InterferenceProfile;
use crate::topology::{RelaySet, Topology};

/// Why a route could not be established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingFailure {
    /// The current mobile has no usable link that makes progress.
    Void,
    /// No path from source to destination exists in the candidate graph.
    NoPath,
}

impl fmt::Display for RoutingFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingFailure::Void => f.write_str("void"),
            RoutingFailure::NoPath => f.write_str("no path"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directions {
    Forward,
    Both,
}

/// An eligible directed link and the outcome of its discovery draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub from: usize,
    pub to: usize,
    pub epsilon_fwd: Option<f64>,
    pub epsilon_rev: Option<f64>,
    pub candidate: bool,
    pub two_way: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkGraph {
    nodes: usize,
    links: Vec<LinkState>,
}

impl LinkGraph {
    pub fn from_links(nodes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let links = pairs
            .into_iter()
            .map(|(from, to)| LinkState {
                from,
                to,
                epsilon_fwd: None,
                epsilon_rev: None,
                candidate: false,
                two_way: false,
            })
            .collect();
        LinkGraph { nodes, links }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    pub fn links_mut(&mut self) -> &mut [LinkState] {
        &mut self.links
    }

    pub fn eligible(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().map(|l| (l.from, l.to))
    }

    pub fn candidates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().filter(|l| l.candidate).map(|l| (l.from, l.to))
    }

    pub fn two_way_candidates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().filter(|l| l.two_way).map(|l| (l.from, l.to))
    }
}

/// A loop-free route from the source to the destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    hops: Vec<usize>,
}

impl Path {
    pub fn new(hops: Vec<usize>) -> Self {
        assert!(hops.len() >= 2, "a path needs at least one link");
        Path { hops }
    }

    pub fn mobiles(&self) -> &[usize] {
        &self.hops
    }

    pub fn hop_count(&self) -> usize {
        self.hops.len() - 1
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.hops.windows(2).map(|w| (w[0], w[1]))
    }

    /// True when every hop strictly reduces the remaining distance.
    pub fn makes_progress(&self, topology: &Topology) -> bool {
        self.links()
            .all(|(i, j)| j == topology.destination() || topology.remaining(j) < topology.remaining(i))
    }
}

/// The distance criterion: a link must end strictly closer to the destination,
/// and any link into the destination qualifies.
#[inline]
pub fn makes_progress(topology: &Topology, from: usize, to: usize) -> bool {
    to == topology.destination() || topology.remaining(to) < topology.remaining(from)
}

fn may_transmit(relays: &RelaySet, i: usize) -> bool {
    i == 0 || relays.is_relay(i)
}

fn may_receive(relays: &RelaySet, topology: &Topology, j: usize) -> bool {
    j == topology.destination() || relays.is_relay(j)
}

/// Eligible heads of links leaving `from`, in increasing index order.
pub fn eligible_heads<'a>(
    topology: &'a Topology,
    relays: &'a RelaySet,
    from: usize,
) -> impl Iterator<Item = usize> + 'a {
    (1..topology.len())
        .filter(move |&j| j != from && may_receive(relays, topology, j) && makes_progress(topology, from, j))
}

/// All eligible links of the trial.
pub fn eligible_links(topology: &Topology, relays: &RelaySet) -> LinkGraph {
    let pairs = (0..topology.len())
        .filter(|&i| may_transmit(relays, i))
        .flat_map(|i| eligible_heads(topology, relays, i).map(move |j| (i, j)))
        .collect::<Vec<_>>();
    LinkGraph::from_links(topology.len(), pairs)
}

/// Eligible links whose tail can be reached from the source.
///
/// Relays that are no closer to the destination than the source can never lie
/// on a progressing path, so their links are dropped.
pub fn reachable_eligible_links(topology: &Topology, relays: &RelaySet) -> LinkGraph {
    let source_remaining = topology.remaining(0);
    let pairs = (0..topology.len())
        .filter(|&i| i == 0 || (relays.is_relay(i) && topology.remaining(i) < source_remaining))
        .flat_map(|i| eligible_heads(topology, relays, i).map(move |j| (i, j)))
        .collect::<Vec<_>>();
    LinkGraph::from_links(topology.len(), pairs)
}

/// Draws the discovery outcome of every eligible link with one attempt each.
///
/// A link is a candidate when its forward draw succeeds; with
/// `Directions::Both` a candidate is also a two-way candidate when the reverse
/// draw succeeds. The reverse direction is only evaluated for candidates.
pub fn draw_candidate_links<R, F>(
    graph: &mut LinkGraph,
    mut outage: F,
    directions: Directions,
    rng: &mut R,
) where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> f64,
{
    for link in graph.links_mut() {
        let fwd = outage(link.from, link.to);
        link.epsilon_fwd = Some(fwd);
        link.candidate = rng.random::<f64>() >= fwd;
        link.two_way = false;
        link.epsilon_rev = None;
        if directions == Directions::Both && link.candidate {
            let rev = outage(link.to, link.from);
            link.epsilon_rev = Some(rev);
            link.two_way = rng.random::<f64>() >= rev;
        }
    }
}

/// Among `heads`, the mobile closest to the destination; ties go to the lowest index.
pub fn closest_to_destination(
    topology: &Topology,
    heads: impl IntoIterator<Item = usize>,
) -> Option<usize> {
    heads.into_iter().fold(None, |best: Option<usize>, j| match best {
        Some(b)
            if topology.remaining(b) < topology.remaining(j)
                || (topology.remaining(b) == topology.remaining(j) && b < j) =>
        {
            Some(b)
        }
        _ => Some(j),
    })
}

/// Greedy forwarding's next relay from `current`: the eligible head within
/// range `r_t` that is closest to the destination.
pub fn greedy_next_hop(topology: &Topology, relays: &RelaySet, current: usize, r_t: f64) -> Option<usize> {
    closest_to_destination(
        topology,
        eligible_heads(topology, relays, current).filter(|&j| topology.distance(current, j) <= r_t),
    )
}

/// Geometric greedy-forwarding route, ignoring outages.
pub fn greedy_forwarding_path(
    topology: &Topology,
    relays: &RelaySet,
    r_t: f64,
) -> Result<Path, RoutingFailure> {
    assert!(r_t > 0.0, "transmission range must be positive");
    let mut hops = vec![0];
    let mut current = 0;
    while current != topology.destination() {
        current = greedy_next_hop(topology, relays, current, r_t).ok_or(RoutingFailure::Void)?;
        hops.push(current);
    }
    Ok(Path::new(hops))
}

/// Minimum-hop path over the candidate links, chosen uniformly at random among
/// all minimum-hop paths.
pub fn fewest_hops_path<R: Rng + ?Sized>(
    graph: &LinkGraph,
    destination: usize,
    rng: &mut R,
) -> Result<Path, RoutingFailure> {
    let n = graph.nodes();
    let mut incoming = vec![Vec::new(); n];
    let mut outgoing = vec![Vec::new(); n];
    for (i, j) in graph.candidates() {
        incoming[j].push(i);
        outgoing[i].push(j);
    }

    // Hops remaining to the destination, by breadth-first search on reversed links.
    let mut to_go = vec![usize::MAX; n];
    to_go[destination] = 0;
    let mut frontier = vec![destination];
    while !frontier.is_empty() && to_go[0] == usize::MAX {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in &incoming[v] {
                if to_go[u] == usize::MAX {
                    to_go[u] = to_go[v] + 1;
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    if to_go[0] == usize::MAX {
        return Err(RoutingFailure::NoPath);
    }

    // Number of shortest continuations from each mobile, counted in floating
    // point since only their ratios matter.
    let mut ways = vec![0.0f64; n];
    ways[destination] = 1.0;
    let mut by_level: Vec<usize> = (0..n).filter(|&v| to_go[v] <= to_go[0]).collect();
    by_level.sort_by_key(|&v| to_go[v]);
    for &u in by_level.iter().filter(|&&u| u != destination) {
        ways[u] = outgoing[u]
            .iter()
            .filter(|&&v| to_go[v] != usize::MAX && to_go[v] + 1 == to_go[u])
            .map(|&v| ways[v])
            .sum();
    }

    let mut hops = vec![0];
    let mut current = 0;
    while current != destination {
        let mut steps: Vec<usize> = outgoing[current]
            .iter()
            .copied()
            .filter(|&v| to_go[v] != usize::MAX && to_go[v] + 1 == to_go[current])
            .collect();
        steps.sort_unstable();
        let mut pick = rng.random::<f64>() * ways[current];
        let mut chosen = *steps.last().expect("a shortest continuation exists");
        for &v in &steps {
            if pick < ways[v] {
                chosen = v;
                break;
            }
            pick -= ways[v];
        }
        hops.push(chosen);
        current = chosen;
    }
    Ok(Path::new(hops))
}

/// Sends the route acknowledgement back along `path`, one attempt per link.
pub fn aodv_ack_traverse<R, F>(path: &Path, mut reverse_outage: F, rng: &mut R) -> bool
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> f64,
{
    let links: Vec<(usize, usize)> = path.links().collect();
    links
        .iter()
        .rev()
        .all(|&(i, j)| rng.random::<f64>() >= reverse_outage(j, i))
}

/// Maximum-progress route over the two-way candidate links.
pub fn max_progress_path(graph: &LinkGraph, topology: &Topology) -> Result<Path, RoutingFailure> {
    let mut outgoing = vec![Vec::new(); graph.nodes()];
    for (i, j) in graph.two_way_candidates() {
        outgoing[i].push(j);
    }
    let mut hops = vec![0];
    let mut current = 0;
    while current != topology.destination() {
        current = closest_to_destination(topology, outgoing[current].iter().copied())
            .ok_or(RoutingFailure::Void)?;
        hops.push(current);
    }
    Ok(Path::new(hops))
}

/// Mobiles within `r_g` of any mobile on `path`.
pub fn guard_zone_members(topology: &Topology, path: &Path, r_g: f64) -> Vec<usize> {
    (0..topology.len())
        .filter(|&i| {
            !path.mobiles().contains(&i)
                && path.mobiles().iter().any(|&e| topology.distance(i, e) <= r_g)
        })
        .collect()
}

/// Copy of `base` with every mobile inside a guard zone of `path` silenced.
pub fn guard_zone_silencing(
    topology: &Topology,
    path: &Path,
    r_g: f64,
    base: &InterferenceProfile,
) -> InterferenceProfile {
    assert!(r_g >= 0.0, "guard-zone radius must be non-negative");
    base.silenced(guard_zone_members(topology, path, r_g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Source at origin, destination at (1, 0), relays as given.
    fn topo(relays: &[(f64, f64)]) -> Topology {
        let mut pts = vec![Point::new(0.0, 0.0)];
        pts.extend(relays.iter().map(|&(x, y)| Point::new(x, y)));
        pts.push(Point::new(1.0, 0.0));
        Topology::from_positions(pts)
    }

    #[test]
    fn no_relays_only_direct_link() {
        let t = topo(&[(0.5, 0.5), (0.3, -0.2)]);
        let g = eligible_links(&t, &RelaySet::none(&t));
        assert_eq!(g.eligible().collect::<Vec<_>>(), vec![(0, 3)]);
    }

    #[test]
    fn equal_remaining_distance_is_excluded() {
        // Relay on the circle of radius 1 around the destination.
        let t = topo(&[(1.0, 1.0)]);
        let g = eligible_links(&t, &RelaySet::all(&t));
        assert!(!g.eligible().any(|l| l == (0, 1)));
        assert!(g.eligible().any(|l| l == (1, 2)));
    }

    #[test]
    fn eligible_matches_enumeration() {
        let t = topo(&[(0.4, 0.1), (0.7, -0.3), (1.5, 0.2)]);
        let relays = RelaySet::from_flags(vec![false, true, false, true, false]);
        let got: Vec<_> = eligible_links(&t, &relays).eligible().collect();
        let mut want = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let tx = i == 0 || relays.is_relay(i);
                let rx = j == 4 || relays.is_relay(j);
                if i != j && tx && rx && (j == 4 || t.remaining(j) < t.remaining(i)) {
                    want.push((i, j));
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn candidate_extremes() {
        let t = topo(&[(0.4, 0.1), (0.7, -0.3)]);
        let mut g = eligible_links(&t, &RelaySet::all(&t));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        draw_candidate_links(&mut g, |_, _| 0.0, Directions::Both, &mut rng);
        assert_eq!(g.candidates().count(), g.eligible().count());
        assert_eq!(g.two_way_candidates().count(), g.eligible().count());
        draw_candidate_links(&mut g, |_, _| 1.0, Directions::Forward, &mut rng);
        assert_eq!(g.candidates().count(), 0);
    }

    #[test]
    fn candidate_frequency() {
        let t = topo(&[]);
        let mut g = eligible_links(&t, &RelaySet::none(&t));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| {
                draw_candidate_links(&mut g, |_, _| 0.3, Directions::Forward, &mut rng);
                g.candidates().count() == 1
            })
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.7).abs() < 3.0 * (0.21f64 / n as f64).sqrt(), "{freq}");
    }

    #[test]
    fn greedy_single_hop_and_void() {
        let t = topo(&[(0.5, 0.0)]);
        let path = greedy_forwarding_path(&t, &RelaySet::all(&t), 1.5).unwrap();
        assert_eq!(path.mobiles(), &[0, 2]);
        assert_eq!(
            greedy_forwarding_path(&t, &RelaySet::none(&t), 0.5),
            Err(RoutingFailure::Void)
        );
    }

    #[test]
    fn greedy_follows_known_trace() {
        let t = topo(&[(0.3, 0.1), (0.25, -0.05), (0.6, 0.0), (0.55, 0.3)]);
        // From 0 only relays 1 and 2 are in range and 1 is closer to the
        // destination; from 1, relay 3 beats 4; from 3 the destination is 0.4 away.
        let path = greedy_forwarding_path(&t, &RelaySet::all(&t), 0.4).unwrap();
        assert_eq!(path.mobiles(), &[0, 1, 3, 5]);
        assert_eq!(
            greedy_forwarding_path(&t, &RelaySet::all(&t), 0.35),
            Err(RoutingFailure::Void)
        );
    }

    #[test]
    fn fewest_hops_prefers_short_route() {
        // 0 -> 1 -> 2 -> 3 -> dest(5), and 0 -> 4 -> dest.
        let g = {
            let mut g = LinkGraph::from_links(6, [(0, 1), (1, 2), (2, 3), (3, 5), (0, 4), (4, 5)]);
            g.links_mut().iter_mut().for_each(|l| l.candidate = true);
            g
        };
        let path = fewest_hops_path(&g, 5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(path.mobiles(), &[0, 4, 5]);
    }

    #[test]
    fn fewest_hops_direct_and_unreachable() {
        let mut g = LinkGraph::from_links(3, [(0, 2), (0, 1)]);
        g.links_mut()[0].candidate = true;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(fewest_hops_path(&g, 2, &mut rng).unwrap().hop_count(), 1);
        g.links_mut()[0].candidate = false;
        g.links_mut()[1].candidate = true;
        assert_eq!(fewest_hops_path(&g, 2, &mut rng), Err(RoutingFailure::NoPath));
    }

    #[test]
    fn diamond_ties_are_split_evenly() {
        let mut g = LinkGraph::from_links(4, [(0, 1), (0, 2), (1, 3), (2, 3)]);
        g.links_mut().iter_mut().for_each(|l| l.candidate = true);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let via_a = (0..1000)
            .filter(|_| fewest_hops_path(&g, 3, &mut rng).unwrap().mobiles()[1] == 1)
            .count();
        assert!((via_a as f64 / 1000.0 - 0.5).abs() < 0.05, "{via_a}");
    }

    #[test]
    fn ack_traversal() {
        let path = Path::new(vec![0, 1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(aodv_ack_traverse(&path, |_, _| 0.0, &mut rng));
        assert!(!aodv_ack_traverse(&path, |i, _| if i == 2 { 1.0 } else { 0.0 }, &mut rng));
        let n = 10_000;
        let ok = (0..n)
            .filter(|_| {
                aodv_ack_traverse(&path, |i, _| if i == 1 { 0.2 } else { 0.3 }, &mut rng)
            })
            .count();
        assert!((ok as f64 / n as f64 - 0.56).abs() < 0.015);
    }

    #[test]
    fn max_progress_picks_closest() {
        let t = topo(&[(0.6, 0.0), (0.8, 0.0), (0.4, 0.0)]);
        let mut g = LinkGraph::from_links(5, [(0, 1), (0, 2), (0, 3), (2, 4)]);
        g.links_mut().iter_mut().for_each(|l| l.two_way = true);
        assert_eq!(max_progress_path(&g, &t).unwrap().mobiles(), &[0, 2, 4]);
        g.links_mut()[3].two_way = false;
        assert_eq!(max_progress_path(&g, &t), Err(RoutingFailure::Void));
    }

    #[test]
    fn guard_zones() {
        let t = topo(&[(0.1, 0.0), (0.5, 0.05), (0.9, 0.1), (0.5, 0.6)]);
        // Mobile 2 relays on the path and is already silent.
        let base = InterferenceProfile::from_probabilities(vec![0.0, 0.3, 0.0, 0.3, 0.3, 0.0]);
        let path = Path::new(vec![0, 2, 5]);
        assert_eq!(guard_zone_silencing(&t, &path, 0.0, &base), base);
        let all = guard_zone_silencing(&t, &path, 2.0, &base);
        assert!(all.active().next().is_none());
        let some = guard_zone_silencing(&t, &path, 0.15, &base);
        assert_eq!(some.probabilities(), &[0.0, 0.0, 0.0, 0.0, 0.3, 0.0]);
    }
}
