//! Random network realizations under the uniform clustering model.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::error::{Result, SimError};

pub const DEFAULT_PLACEMENT_RETRIES: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// Radius of the circular network region.
    pub r_net: f64,
    /// Number of mobiles other than the source and destination.
    pub mobiles: usize,
    /// Exclusion-zone radius.
    pub r_ex: f64,
    pub source_dest_distance: f64,
    pub max_placement_retries: u32,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            r_net: 1.0,
            mobiles: 200,
            r_ex: 0.05,
            source_dest_distance: 0.5,
            max_placement_retries: DEFAULT_PLACEMENT_RETRIES,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_net > 0.0) {
            return Err(SimError::config(format!("r_net must be positive, got {}", self.r_net)));
        }
        if !(self.r_ex >= 0.0 && self.r_ex <= self.r_net) {
            return Err(SimError::config(format!(
                "r_ex must lie in [0, r_net], got {}",
                self.r_ex
            )));
        }
        let d = self.source_dest_distance;
        if !(d > 0.0 && d <= self.r_net) {
            return Err(SimError::config(format!(
                "source-destination distance must lie in (0, r_net], got {d}"
            )));
        }
        if d < self.r_ex {
            return Err(SimError::config(format!(
                "source-destination distance {d} violates the exclusion radius {}",
                self.r_ex
            )));
        }
        if self.max_placement_retries == 0 {
            return Err(SimError::config("max_placement_retries must be at least 1"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        PI * self.r_net * self.r_net
    }
}

/// Positions of the source (index 0), the `M` other mobiles (1..=M) and the
/// destination (index M+1), with a dense table of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Point>,
    distances: Vec<f64>,
}

impl Topology {
    /// Builds a topology from explicit positions: source first, destination last.
    pub fn from_positions(positions: Vec<Point>) -> Self {
        assert!(positions.len() >= 2, "a topology needs a source and a destination");
        let n = positions.len();
        let mut distances = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = positions[i].distance(&positions[j]);
                distances[i * n + j] = d;
                distances[j * n + i] = d;
            }
        }
        Topology {
            positions,
            distances,
        }
    }

    /// Total number of mobiles, `M + 2`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of potential relays/interferers `M`.
    pub fn mobiles(&self) -> usize {
        self.positions.len() - 2
    }

    pub const fn source(&self) -> usize {
        0
    }

    pub fn destination(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Point {
        self.positions[i]
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.positions.len() + j]
    }

    /// Remaining distance from mobile `i` to the destination.
    #[inline]
    pub fn remaining(&self, i: usize) -> f64 {
        self.distance(i, self.destination())
    }

    /// Smallest separation between two distinct mobiles.
    pub fn min_spacing(&self) -> f64 {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.distance(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Writes `index,x,y` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("index,x,y\n");
        for (i, p) in self.positions.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", p.x, p.y));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| SimError::io(path, e))
    }
}

fn uniform_in_disk<R: Rng + ?Sized>(r_net: f64, rng: &mut R) -> Point {
    let r = r_net * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(r * theta.cos(), r * theta.sin())
}

/// Places the source at the origin, the destination on the positive x-axis and
/// then each remaining mobile uniformly over the disk, redrawing it while it
/// falls inside the exclusion zone of any previously placed mobile.
pub fn place_mobiles<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> Result<Topology> {
    params.validate()?;
    let m = params.mobiles;
    let mut placed = Vec::with_capacity(m + 2);
    placed.push(Point::new(0.0, 0.0));
    placed.push(Point::new(params.source_dest_distance, 0.0));
    let r_ex2 = params.r_ex * params.r_ex;

    for mobile in 1..=m {
        let mut redraws = 0;
        loop {
            let candidate = uniform_in_disk(params.r_net, rng);
            let clear = placed.iter().all(|q| {
                let (dx, dy) = (candidate.x - q.x, candidate.y - q.y);
                dx * dx + dy * dy >= r_ex2
            });
            if clear {
                placed.push(candidate);
                break;
            }
            redraws += 1;
            if redraws >= params.max_placement_retries {
                return Err(SimError::PlacementExhausted {
                    mobile,
                    retries: redraws,
                    mobiles: m,
                    r_ex: params.r_ex,
                    r_net: params.r_net,
                });
            }
        }
    }

    // Destination was placed second; move it to the last slot.
    let destination = placed.remove(1);
    placed.push(destination);
    Ok(Topology::from_positions(placed))
}

/// Per-trial availability of each mobile as a relay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaySet {
    flags: Vec<bool>,
}

impl RelaySet {
    /// `flags` covers all `M + 2` mobiles; the endpoints are forced to `false`.
    pub fn from_flags(mut flags: Vec<bool>) -> Self {
        assert!(flags.len() >= 2);
        let last = flags.len() - 1;
        flags[0] = false;
        flags[last] = false;
        RelaySet { flags }
    }

    pub fn none(topology: &Topology) -> Self {
        RelaySet {
            flags: vec![false; topology.len()],
        }
    }

    pub fn all(topology: &Topology) -> Self {
        Self::from_flags(vec![true; topology.len()])
    }

    #[inline]
    pub fn is_relay(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn relays(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Flags each mobile 1..=M as a potential relay independently with probability `mu`.
pub fn draw_relay_set<R: Rng + ?Sized>(topology: &Topology, mu: f64, rng: &mut R) -> RelaySet {
    assert!((0.0..=1.0).contains(&mu), "service probability out of range: {mu}");
    let n = topology.len();
    let mut flags = vec![false; n];
    for flag in flags.iter_mut().take(n - 1).skip(1) {
        *flag = rng.random::<f64>() < mu;
    }
    RelaySet { flags }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(m: usize, r_ex: f64, d: f64) -> NetworkParams {
        NetworkParams {
            mobiles: m,
            r_ex,
            source_dest_distance: d,
            ..NetworkParams::default()
        }
    }

    #[test]
    fn default_density_respects_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let topo = place_mobiles(&params(200, 0.05, 0.5), &mut rng).unwrap();
        assert_eq!(topo.len(), 202);
        assert!(topo.min_spacing() >= 0.05);
        assert!(topo.positions().iter().all(|p| p.norm() <= 1.0));
        assert!((topo.remaining(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_relays_gives_two_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let topo = place_mobiles(&params(0, 0.05, 0.7), &mut rng).unwrap();
        assert_eq!(topo.positions(), &[Point::new(0.0, 0.0), Point::new(0.7, 0.0)]);
    }

    #[test]
    fn overpacked_region_is_exhausted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = NetworkParams {
            max_placement_retries: 100_000,
            ..params(50, 0.3, 0.5)
        };
        match place_mobiles(&p, &mut rng) {
            Err(SimError::PlacementExhausted { mobiles: 50, .. }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(params(10, 0.05, 1.5).validate().is_err());
        assert!(params(10, 0.05, 0.01).validate().is_err());
        assert!(params(10, -0.1, 0.5).validate().is_err());
    }

    #[test]
    fn relay_set_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let topo = place_mobiles(&params(30, 0.05, 0.5), &mut rng).unwrap();
        assert_eq!(draw_relay_set(&topo, 0.0, &mut rng).count(), 0);
        let all = draw_relay_set(&topo, 1.0, &mut rng);
        assert_eq!(all.count(), 30);
        assert!(!all.is_relay(0) && !all.is_relay(31));
    }

    #[test]
    fn relay_count_matches_binomial_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let topo = place_mobiles(&params(200, 0.05, 0.5), &mut rng).unwrap();
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| draw_relay_set(&topo, 0.4, &mut rng).count())
            .sum();
        let mean = total as f64 / draws as f64;
        let sigma = (200.0f64 * 0.4 * 0.6).sqrt();
        assert!((mean - 80.0).abs() < 3.0 * sigma / (draws as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn radial_marginal_passes_ks() {
        // With no exclusion, r has CDF (r/r_net)^2.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut radii = Vec::new();
        while radii.len() < 20_000 {
            let topo = place_mobiles(&params(1000, 0.0, 0.5), &mut rng).unwrap();
            radii.extend((1..=1000).map(|i| topo.position(i).norm()));
        }
        radii.sort_by(f64::total_cmp);
        let n = radii.len() as f64;
        let d = radii
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cdf = r * r;
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        // Asymptotic KS critical value at significance 0.01.
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn placement_is_deterministic() {
        let p = params(100, 0.05, 0.3);
        let a = place_mobiles(&p, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = place_mobiles(&p, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }
}
