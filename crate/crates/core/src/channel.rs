//! Propagation, fading and link outage.
//!
//! Powers are normalized as in the SINR model: a desired signal from `k` at
//! receiver `j` has normalized power `10^{xi/10} d^{-alpha}`, an interferer
//! additionally carries the despreading factor `h/G`, and noise enters as
//! `1/Gamma` where `Gamma` is the SNR at unit distance.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Result, SimError};
use crate::topology::{RelaySet, Topology};

/// Largest Nakagami parameter the analytic outage evaluator accepts.
pub const MAX_NAKAGAMI_M: u32 = 8;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Reference distance of the power-law path loss.
    pub d0: f64,
    /// Shadowing standard deviation in dB; zero disables shadowing.
    pub sigma_s: f64,
    /// Line-of-sight radius of the distance-dependent fading model.
    pub r_f: f64,
    /// Processing gain over chip factor, `G/h`.
    pub g_over_h: f64,
    /// SNR at unit distance (linear).
    pub gamma: f64,
    /// SINR threshold (linear).
    pub beta: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            alpha: 3.5,
            d0: 0.05,
            sigma_s: 8.0,
            r_f: 0.2,
            g_over_h: 96.0,
            gamma: 1.0,
            beta: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.alpha >= 2.0, "alpha must be at least 2"),
            (self.d0 > 0.0, "d0 must be positive"),
            (self.sigma_s >= 0.0, "sigma_s must be non-negative"),
            (self.r_f > 0.0, "r_f must be positive"),
            (self.g_over_h >= 1.0, "G/h must be at least 1"),
            (self.gamma > 0.0, "Gamma must be positive"),
            (self.beta > 0.0, "beta must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(SimError::config(*msg)),
            None => Ok(()),
        }
    }
}

/// Power-law attenuation `(d/d0)^{-alpha}`, defined in the far field `d >= d0`.
pub fn path_loss(d: f64, alpha: f64, d0: f64) -> Result<f64> {
    if d < d0 {
        return Err(SimError::Domain(format!(
            "distance {d} is inside the reference distance {d0}"
        )));
    }
    Ok((d / d0).powf(-alpha))
}

/// Distance-dependent Nakagami parameter: 3 within `r_f/2`, 2 within `r_f`, else 1.
pub fn nakagami_m(d: f64, r_f: f64) -> u32 {
    if d <= r_f / 2.0 {
        3
    } else if d <= r_f {
        2
    } else {
        1
    }
}

/// Unit-mean power gain of a Nakagami-m amplitude, i.e. a Gamma(m, 1/m) variate.
pub fn sample_fading<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    fading_distribution(m).sample(rng)
}

fn fading_distribution(m: u32) -> Gamma<f64> {
    let shape = f64::from(m);
    Gamma::new(shape, 1.0 / shape).expect("Nakagami m must be positive")
}

/// Reciprocal shadowing factors in dB, fixed for a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowField {
    n: usize,
    xi: Vec<f64>,
}

impl ShadowField {
    pub fn zero(n: usize) -> Self {
        ShadowField {
            n,
            xi: vec![0.0; n * n],
        }
    }

    /// Sets the symmetric pair `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, xi_db: f64) {
        self.xi[i * self.n + j] = xi_db;
        self.xi[j * self.n + i] = xi_db;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.xi[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Off-diagonal entries with `i < j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| self.get(i, j)))
    }
}

pub fn draw_shadow_field<R: Rng + ?Sized>(
    topology: &Topology,
    sigma_s: f64,
    rng: &mut R,
) -> ShadowField {
    let n = topology.len();
    let mut field = ShadowField::zero(n);
    if sigma_s == 0.0 {
        return field;
    }
    let normal = Normal::new(0.0, sigma_s).expect("sigma_s must be finite and non-negative");
    for i in 0..n {
        for j in (i + 1)..n {
            field.set(i, j, normal.sample(rng));
        }
    }
    field
}

/// Per-topology tables of `10^{xi/10} d^{-alpha}` and Nakagami parameters.
///
/// Both tables are symmetric. Diagonal entries are unused.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    n: usize,
    gain: Vec<f64>,
    fading: Vec<u8>,
    g_over_h: f64,
}

impl LinkBudget {
    pub fn new(topology: &Topology, shadow: &ShadowField, params: &ChannelParams) -> Self {
        let n = topology.len();
        assert_eq!(shadow.len(), n, "shadow field does not match topology");
        let mut gain = vec![0.0; n * n];
        let mut fading = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = topology.distance(i, j);
                gain[i * n + j] = db_to_linear(shadow.get(i, j)) * d.powf(-params.alpha);
                fading[i * n + j] = nakagami_m(d, params.r_f) as u8;
            }
        }
        LinkBudget {
            n,
            gain,
            fading,
            g_over_h: params.g_over_h,
        }
    }

    #[inline]
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.gain[i * self.n + j]
    }

    #[inline]
    pub fn fading(&self, i: usize, j: usize) -> u32 {
        u32::from(self.fading[i * self.n + j])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, k: usize, j: usize) -> NormalizedPowerRow {
        assert_ne!(k, j, "a link needs distinct endpoints");
        let omega = (0..self.n)
            .map(|i| {
                if i == k {
                    self.gain(k, j)
                } else if i == j {
                    0.0
                } else {
                    self.gain(i, j) / self.g_over_h
                }
            })
            .collect();
        let fading = (0..self.n)
            .map(|i| if i == j { 1 } else { self.fading(i, j) })
            .collect();
        NormalizedPowerRow {
            transmitter: k,
            receiver: j,
            omega,
            fading,
        }
    }

    /// Exact conditional outage of link `k -> j` under `profile`.
    pub fn analytic_outage(
        &self,
        k: usize,
        j: usize,
        profile: &InterferenceProfile,
        beta: f64,
        gamma: f64,
    ) -> f64 {
        let interferers = profile
            .active()
            .filter(|&i| i != k && i != j)
            .map(|i| (self.gain(i, j) / self.g_over_h, self.fading(i, j), profile.p(i)));
        outage_from_terms(self.gain(k, j), self.fading(k, j), beta, gamma, interferers)
    }
}

/// Normalized powers `Omega_{i,j}` at receiver `j` for desired transmitter `k`.
///
/// `omega[k]` is the desired entry; `omega[j]` is zero. `fading` holds the
/// Nakagami parameter of each signal at `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPowerRow {
    pub transmitter: usize,
    pub receiver: usize,
    pub omega: Vec<f64>,
    pub fading: Vec<u32>,
}

impl NormalizedPowerRow {
    pub fn desired(&self) -> f64 {
        self.omega[self.transmitter]
    }

    /// Indices and powers of every potential interferer of this link.
    pub fn interferers(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.omega
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(i, _)| i != self.transmitter && i != self.receiver)
    }
}

/// Builds the normalized-power row of link `k -> j` assuming equal transmit powers.
pub fn normalized_powers(
    topology: &Topology,
    shadow: &ShadowField,
    k: usize,
    j: usize,
    params: &ChannelParams,
) -> NormalizedPowerRow {
    let n = topology.len();
    assert_ne!(k, j, "a link needs distinct endpoints");
    let mut omega = vec![0.0; n];
    let mut fading = vec![1; n];
    for i in (0..n).filter(|&i| i != j) {
        let d = topology.distance(i, j);
        let power = db_to_linear(shadow.get(i, j)) * d.powf(-params.alpha);
        omega[i] = if i == k { power } else { power / params.g_over_h };
        fading[i] = nakagami_m(d, params.r_f);
    }
    NormalizedPowerRow {
        transmitter: k,
        receiver: j,
        omega,
        fading,
    }
}

/// Probability `p_i` that each mobile transmits during a given interval.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    p: Vec<f64>,
    active: Vec<usize>,
}

impl InterferenceProfile {
    /// Every mobile 1..=M that is not a relay interferes with probability `p`;
    /// relays and the endpoints are silent.
    pub fn from_relays(relays: &RelaySet, p: f64) -> Self {
        let n = relays.len();
        let probs = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 || relays.is_relay(i) {
                    0.0
                } else {
                    p
                }
            })
            .collect();
        Self::from_probabilities(probs)
    }

    /// Explicit per-mobile probabilities; the endpoints are forced to zero.
    pub fn from_probabilities(mut p: Vec<f64>) -> Self {
        assert!(p.len() >= 2);
        assert!(p.iter().all(|q| (0.0..=1.0).contains(q)), "probabilities out of range");
        let last = p.len() - 1;
        p[0] = 0.0;
        p[last] = 0.0;
        let active = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
        InterferenceProfile { p, active }
    }

    #[inline]
    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Mobiles with non-zero activity probability.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().copied()
    }

    /// Copy with the given mobiles silenced.
    pub fn silenced(&self, silenced: impl IntoIterator<Item = usize>) -> Self {
        let mut p = self.p.clone();
        for i in silenced {
            p[i] = 0.0;
        }
        Self::from_probabilities(p)
    }
}

pub fn sinr(desired: f64, interference: f64, gamma: f64) -> f64 {
    desired / (gamma.recip() + interference)
}

/// Draws one instantaneous SINR for the link described by `row`.
///
/// Every potential interferer consumes one uniform and one fading draw
/// whatever its activity probability, so runs that differ only in `p`, the
/// powers, `beta` or `Gamma` see common random numbers.
pub fn sample_sinr<R: Rng + ?Sized>(
    row: &NormalizedPowerRow,
    profile: &InterferenceProfile,
    gamma: f64,
    rng: &mut R,
) -> f64 {
    let fading = FadingTable::for_row(row);
    sample_sinr_with(row, profile, gamma, &fading, rng)
}

struct FadingTable(Vec<Gamma<f64>>);

impl FadingTable {
    fn for_row(row: &NormalizedPowerRow) -> Self {
        FadingTable(row.fading.iter().map(|&m| fading_distribution(m)).collect())
    }
}

fn sample_sinr_with<R: Rng + ?Sized>(
    row: &NormalizedPowerRow,
    profile: &InterferenceProfile,
    gamma: f64,
    fading: &FadingTable,
    rng: &mut R,
) -> f64 {
    let k = row.transmitter;
    let desired = fading.0[k].sample(rng) * row.omega[k];
    let mut interference = 0.0;
    for (i, omega) in row.interferers() {
        let on = rng.random::<f64>() < profile.p(i);
        let g = fading.0[i].sample(rng);
        if on {
            interference += g * omega;
        }
    }
    sinr(desired, interference, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageBackend {
    /// Average of the outage indicator over `samples` fading and activity draws.
    MonteCarlo { samples: usize },
    /// Exact evaluation for integer Nakagami parameters.
    Analytic,
}

impl Default for OutageBackend {
    fn default() -> Self {
        OutageBackend::Analytic
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub epsilon: f64,
    pub std_error: f64,
}

/// Probability that the SINR of the link in `row` is at most `beta`, conditioned
/// on the normalized powers and marginalized over fading and interferer activity.
pub fn conditional_outage<R: Rng + ?Sized>(
    row: &NormalizedPowerRow,
    profile: &InterferenceProfile,
    beta: f64,
    gamma: f64,
    backend: OutageBackend,
    rng: &mut R,
) -> Result<OutageEstimate> {
    match backend {
        OutageBackend::MonteCarlo { samples } => {
            if samples < 1 {
                return Err(SimError::config("Monte Carlo outage needs at least one sample"));
            }
            let fading = FadingTable::for_row(row);
            let outages = (0..samples)
                .filter(|_| sample_sinr_with(row, profile, gamma, &fading, rng) <= beta)
                .count();
            let n = samples as f64;
            let epsilon = outages as f64 / n;
            Ok(OutageEstimate {
                epsilon,
                std_error: (epsilon * (1.0 - epsilon) / n).sqrt(),
            })
        }
        OutageBackend::Analytic => Ok(OutageEstimate {
            epsilon: analytic_outage(row, profile, beta, gamma),
            std_error: 0.0,
        }),
    }
}

/// Exact conditional outage for integer Nakagami parameters.
pub fn analytic_outage(
    row: &NormalizedPowerRow,
    profile: &InterferenceProfile,
    beta: f64,
    gamma: f64,
) -> f64 {
    let interferers = row
        .interferers()
        .filter(|&(i, _)| profile.p(i) > 0.0)
        .map(|(i, omega)| (omega, row.fading[i], profile.p(i)));
    outage_from_terms(
        row.desired(),
        row.fading[row.transmitter],
        beta,
        gamma,
        interferers,
    )
}

/// With a Gamma(m0, 1/m0) desired gain, success is
/// `E[exp(-a(z+Y)) sum_{s<m0} (a(z+Y))^s / s!]` where `a = m0 beta / Omega_0`,
/// `z = 1/Gamma` and `Y` is the interference. Expanding `(z+Y)^s` reduces this
/// to the first `m0` Taylor coefficients of the Laplace transform of `Y` at `a`,
/// which factorizes over independent interferers:
/// `1 - p + p (1 + s Omega/m)^{-m}` each. Every coefficient is taken with its
/// alternating sign absorbed, so all terms are non-negative.
fn outage_from_terms(
    omega0: f64,
    m0: u32,
    beta: f64,
    gamma: f64,
    interferers: impl Iterator<Item = (f64, u32, f64)>,
) -> f64 {
    assert!(
        (1..=MAX_NAKAGAMI_M).contains(&m0),
        "analytic outage supports 1 <= m <= {MAX_NAKAGAMI_M}"
    );
    let order = m0 as usize;
    let a = f64::from(m0) * beta / omega0;
    let z = gamma.recip();

    let mut series = [0.0f64; MAX_NAKAGAMI_M as usize];
    series[0] = 1.0;
    let mut factor = [0.0f64; MAX_NAKAGAMI_M as usize];
    for (omega, m, p) in interferers {
        let c = omega / f64::from(m);
        let x = 1.0 + a * c;
        let q = x.powi(-(m as i32));
        let w = c / x;
        factor[0] = 1.0 - p + p * q;
        let mut coef = p * q;
        for (l, f) in factor.iter_mut().enumerate().take(order).skip(1) {
            coef *= w * f64::from(m + l as u32 - 1) / l as f64;
            *f = coef;
        }
        for t in (0..order).rev() {
            series[t] = (0..=t).map(|l| factor[l] * series[t - l]).sum();
        }
    }

    let mut success = 0.0;
    let mut a_pow = 1.0;
    for s in 0..order {
        let mut inner = 0.0;
        let mut z_term = 1.0; // z^{s-t} / (s-t)!
        for r in 0..=s {
            inner += z_term * series[s - r];
            z_term *= z / (r + 1) as f64;
        }
        success += a_pow * inner;
        a_pow *= a;
    }
    (1.0 - (-a * z).exp() * success).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(desired: f64, m0: u32, interferers: &[(f64, u32)]) -> NormalizedPowerRow {
        // Transmitter 0, receiver last; interferers in between.
        let n = interferers.len() + 2;
        let mut omega = vec![0.0; n];
        let mut fading = vec![1; n];
        omega[0] = desired;
        fading[0] = m0;
        for (i, &(o, m)) in interferers.iter().enumerate() {
            omega[i + 1] = o;
            fading[i + 1] = m;
        }
        NormalizedPowerRow {
            transmitter: 0,
            receiver: n - 1,
            omega,
            fading,
        }
    }

    fn profile(ps: &[f64]) -> InterferenceProfile {
        let mut p = vec![0.0];
        p.extend_from_slice(ps);
        p.push(0.0);
        InterferenceProfile::from_probabilities(p)
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(0.05, 3.5, 0.05).unwrap(), 1.0);
        assert_relative_eq!(path_loss(0.1, 3.5, 0.05).unwrap(), 0.088388347648, epsilon = 1e-10);
        assert!(matches!(path_loss(0.025, 3.5, 0.05), Err(SimError::Domain(_))));
    }

    #[test]
    fn nakagami_bands() {
        assert_eq!(nakagami_m(0.05, 0.2), 3);
        assert_eq!(nakagami_m(0.1, 0.2), 3);
        assert_eq!(nakagami_m(0.15, 0.2), 2);
        assert_eq!(nakagami_m(0.2, 0.2), 2);
        assert_eq!(nakagami_m(0.25, 0.2), 1);
    }

    fn line_topology(n: usize) -> Topology {
        Topology::from_positions((0..n).map(|i| Point::new(0.1 * i as f64, 0.0)).collect())
    }

    #[test]
    fn shadow_field_shape() {
        let topo = line_topology(12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = draw_shadow_field(&topo, 0.0, &mut rng);
        assert!(zero.upper_entries().all(|x| x == 0.0));
        let field = draw_shadow_field(&topo, 8.0, &mut rng);
        assert_eq!(field.get(3, 7), field.get(7, 3));
        assert_eq!(field.get(4, 4), 0.0);
    }

    #[test]
    fn shadow_spread_matches_sigma() {
        let topo = line_topology(460);
        let field = draw_shadow_field(&topo, 8.0, &mut ChaCha8Rng::seed_from_u64(2));
        let xs: Vec<f64> = field.upper_entries().collect();
        assert!(xs.len() >= 100_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 8.0).abs() < 0.16, "sd {sd}");
    }

    #[test]
    fn normalized_power_entries() {
        let topo = Topology::from_positions(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.2, 1.0),
            Point::new(1.0, 0.0),
        ]);
        let shadow = ShadowField::zero(4);
        let params = ChannelParams::default();
        let row = normalized_powers(&topo, &shadow, 0, 3, &params);
        assert_relative_eq!(row.desired(), 1.0);
        assert_relative_eq!(row.omega[1], 1.0 / 96.0, epsilon = 1e-12);
        assert_relative_eq!(row.omega[1], 0.0104167, epsilon = 1e-7);

        let near = Topology::from_positions(vec![
            Point::new(0.0, 0.0),
            Point::new(0.2, 0.0),
            Point::new(-0.4, 0.0),
            Point::new(0.0, 0.0001),
        ]);
        let row = normalized_powers(&near, &ShadowField::zero(4), 1, 0, &params);
        // Interferer 2 sits at 0.4 from the receiver, transmitter at 0.2.
        assert_relative_eq!(row.desired() / (row.omega[2] * 96.0), 2f64.powf(3.5), epsilon = 1e-9);
    }

    #[test]
    fn budget_row_matches_direct_row() {
        let topo = line_topology(6);
        let shadow = draw_shadow_field(&topo, 8.0, &mut ChaCha8Rng::seed_from_u64(3));
        let params = ChannelParams::default();
        let budget = LinkBudget::new(&topo, &shadow, &params);
        let a = budget.row(1, 4);
        let b = normalized_powers(&topo, &shadow, 1, 4, &params);
        for (x, y) in a.omega.iter().zip(&b.omega) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        assert_eq!(a.fading, b.fading);
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr(1.0, 0.0, 1.0), 1.0);
        assert_relative_eq!(sinr(1.0, 1.0 / 96.0, 1.0), 0.98969072, epsilon = 1e-8);
        assert!(sinr(1.0, 0.0, f64::INFINITY).is_infinite());
    }

    #[test]
    fn fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=3 {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_fading(m, &mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((mean - 1.0).abs() < 0.01, "m={m} mean {mean}");
            let target = 1.0 / f64::from(m);
            assert!((var - target).abs() < 0.02 * target, "m={m} var {var}");
        }
    }

    #[test]
    fn zero_threshold_never_outages() {
        let r = row(0.3, 2, &[(5.0, 1), (0.2, 3)]);
        let prof = profile(&[1.0, 0.5]);
        assert_eq!(analytic_outage(&r, &prof, 0.0, 1.0), 0.0);
        let mc = conditional_outage(
            &r,
            &prof,
            0.0,
            1.0,
            OutageBackend::MonteCarlo { samples: 500 },
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        assert_eq!(mc.epsilon, 0.0);
    }

    #[test]
    fn rejects_empty_sample_budget() {
        let r = row(1.0, 1, &[]);
        let res = conditional_outage(
            &r,
            &profile(&[]),
            1.0,
            1.0,
            OutageBackend::MonteCarlo { samples: 0 },
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(res, Err(SimError::Config(_))));
    }

    #[test]
    fn rayleigh_noise_only_closed_form() {
        let r = row(1.0, 1, &[]);
        assert_relative_eq!(
            analytic_outage(&r, &profile(&[]), 1.0, 1.0),
            1.0 - (-1.0f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn nakagami_noise_only_matches_gamma_cdf() {
        // P[g <= x] for g ~ Gamma(3, 1/3) is 1 - e^{-3x}(1 + 3x + (3x)^2/2).
        let r = row(2.0, 3, &[]);
        let x: f64 = 1.5 / (2.0 * 0.8);
        let y = 3.0 * x;
        let expected = 1.0 - (-y).exp() * (1.0 + y + y * y / 2.0);
        assert_relative_eq!(analytic_outage(&r, &profile(&[]), 1.5, 0.8), expected, epsilon = 1e-12);
    }

    #[test]
    fn analytic_agrees_with_monte_carlo_for_mixed_fading() {
        let r = row(4.0, 3, &[(0.8, 2), (1.5, 1), (0.3, 3), (2.5, 2)]);
        let prof = profile(&[0.3, 1.0, 0.6, 0.2]);
        let exact = analytic_outage(&r, &prof, 1.0, 2.0);
        let mc = conditional_outage(
            &r,
            &prof,
            1.0,
            2.0,
            OutageBackend::MonteCarlo { samples: 200_000 },
            &mut ChaCha8Rng::seed_from_u64(6),
        )
        .unwrap();
        assert!(
            (mc.epsilon - exact).abs() < 4.0 * mc.std_error,
            "mc {} exact {exact}",
            mc.epsilon
        );
    }

    #[test]
    fn common_random_numbers_give_monotone_estimates() {
        let r = row(3.0, 2, &[(0.5, 1), (1.0, 2), (0.2, 3)]);
        let mc = |r: &NormalizedPowerRow, ps: &[f64], beta: f64, gamma: f64| {
            conditional_outage(
                r,
                &profile(ps),
                beta,
                gamma,
                OutageBackend::MonteCarlo { samples: 4000 },
                &mut ChaCha8Rng::seed_from_u64(77),
            )
            .unwrap()
            .epsilon
        };
        let base = mc(&r, &[0.3, 0.3, 0.3], 1.0, 1.0);
        assert!(mc(&r, &[0.3, 0.3, 0.3], 2.0, 1.0) >= base);
        assert!(mc(&r, &[0.3, 0.3, 0.3], 1.0, 4.0) <= base);
        assert!(mc(&r, &[0.3, 0.9, 0.3], 1.0, 1.0) >= base);
        let mut louder = r.clone();
        louder.omega[2] *= 3.0;
        assert!(mc(&louder, &[0.3, 0.3, 0.3], 1.0, 1.0) >= base);
        assert_eq!(base, mc(&r, &[0.3, 0.3, 0.3], 1.0, 1.0));
    }

    #[test]
    fn silencing_clears_activity() {
        let prof = profile(&[0.3, 0.3, 0.3]);
        let quiet = prof.silenced([2]);
        assert_eq!(quiet.p(2), 0.0);
        assert_eq!(quiet.active().collect::<Vec<_>>(), vec![1, 3]);
    }
}
