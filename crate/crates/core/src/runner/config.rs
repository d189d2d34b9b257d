//! Experiment configuration: defaults, presets, the flat key-value file format
//! and conversion into the model parameter types.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, ChannelParams, OutageBackend};
use crate::delivery::{DeliveryParams, Protocol};
use crate::error::{Result, SimError};
use crate::metrics::AseFailedPolicy;
use crate::topology::{NetworkParams, DEFAULT_PLACEMENT_RETRIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Full-scale run: 2000 topologies of 10^4 trials.
    Paper,
    /// Reduced run: 50 topologies of 200 trials.
    Desk,
}

impl FromStr for Preset {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(SimError::config(format!("unknown preset '{other}'"))),
        }
    }
}

/// All knobs of a sweep. Keys in config files match the serialized names;
/// `beta`, `Gamma` and `sigma_s` are in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub r_net: f64,
    #[serde(rename = "M")]
    pub mobiles: usize,
    pub r_ex: f64,
    pub max_placement_retries: u32,

    pub alpha: f64,
    pub d0: f64,
    pub sigma_s: f64,
    pub r_f: f64,
    #[serde(rename = "G_over_h")]
    pub g_over_h: f64,
    #[serde(rename = "Gamma")]
    pub gamma_db: f64,
    #[serde(rename = "beta")]
    pub beta_db: f64,

    #[serde(rename = "B")]
    pub max_attempts: u32,
    #[serde(rename = "T")]
    pub t_link: f64,
    #[serde(rename = "T_e")]
    pub t_excess: f64,
    #[serde(rename = "T_d")]
    pub t_discovery: f64,

    pub mu: f64,
    pub p: f64,
    /// Greedy-forwarding transmission ranges; one result series per value.
    pub r_t: Vec<f64>,
    pub r_g: f64,

    pub distance_grid: Vec<f64>,
    pub protocols: Vec<Protocol>,
    #[serde(rename = "Upsilon")]
    pub topologies: usize,
    #[serde(rename = "K_t")]
    pub trials: usize,
    pub master_seed: u64,
    /// Zero uses every available core.
    pub worker_count: usize,
    pub output_directory: PathBuf,

    pub outage_backend: BackendKind,
    pub n_mc: usize,
    pub ase_failed: AseFailedPolicy,
    pub dump_topology: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            r_net: 1.0,
            mobiles: 200,
            r_ex: 0.05,
            max_placement_retries: DEFAULT_PLACEMENT_RETRIES,
            alpha: 3.5,
            d0: 0.05,
            sigma_s: 8.0,
            r_f: 0.2,
            g_over_h: 96.0,
            gamma_db: 0.0,
            beta_db: 0.0,
            max_attempts: 4,
            t_link: 1.0,
            t_excess: 1.2,
            t_discovery: 1.0,
            mu: 0.4,
            p: 0.3,
            r_t: vec![0.35],
            r_g: 0.15,
            distance_grid: parse_distance_grid("0.1:0.1:1.0").expect("valid default grid"),
            protocols: Protocol::ALL.to_vec(),
            topologies: 2000,
            trials: 10_000,
            master_seed: 1,
            worker_count: 0,
            output_directory: PathBuf::from("results"),
            outage_backend: BackendKind::Analytic,
            n_mc: 2000,
            ase_failed: AseFailedPolicy::Excluded,
            dump_topology: false,
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut config = Self::default();
        config.apply_preset(preset);
        config
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        let (topologies, trials) = match preset {
            Preset::Paper => (2000, 10_000),
            Preset::Desk => (50, 200),
        };
        self.topologies = topologies;
        self.trials = trials;
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(SimError::config("protocol list is empty"));
        }
        if self.distance_grid.is_empty() {
            return Err(SimError::config("distance grid is empty"));
        }
        if self.topologies < 1 || self.trials < 1 {
            return Err(SimError::config("Upsilon and K_t must be at least 1"));
        }
        if self.r_ex < self.d0 {
            return Err(SimError::config(format!(
                "r_ex ({}) must be at least d0 ({}) so every link is in the far field",
                self.r_ex, self.d0
            )));
        }
        for (name, v) in [("mu", self.mu), ("p", self.p)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.protocols.contains(&Protocol::GreedyForwarding)
            && (self.r_t.is_empty() || self.r_t.iter().any(|&r| !(r > 0.0)))
        {
            return Err(SimError::config("greedy forwarding needs positive r_t values"));
        }
        if !(self.r_g >= 0.0) {
            return Err(SimError::config("r_g must be non-negative"));
        }
        if self.outage_backend == BackendKind::Mc && self.n_mc < 1 {
            return Err(SimError::config("n_mc must be at least 1"));
        }
        self.channel_params().validate()?;
        self.delivery_params().validate()?;
        for &d in &self.distance_grid {
            self.network_params(d).validate()?;
        }
        Ok(())
    }

    pub fn network_params(&self, source_dest_distance: f64) -> NetworkParams {
        NetworkParams {
            r_net: self.r_net,
            mobiles: self.mobiles,
            r_ex: self.r_ex,
            source_dest_distance,
            max_placement_retries: self.max_placement_retries,
        }
    }

    /// Channel parameters with `beta` and `Gamma` converted to linear scale.
    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha,
            d0: self.d0,
            sigma_s: self.sigma_s,
            r_f: self.r_f,
            g_over_h: self.g_over_h,
            gamma: db_to_linear(self.gamma_db),
            beta: db_to_linear(self.beta_db),
        }
    }

    pub fn delivery_params(&self) -> DeliveryParams {
        DeliveryParams {
            max_attempts: self.max_attempts,
            t_link: self.t_link,
            t_excess: self.t_excess,
            t_discovery: self.t_discovery,
            discovery_overhead: false,
        }
    }

    pub fn backend(&self) -> OutageBackend {
        match self.outage_backend {
            BackendKind::Analytic => OutageBackend::Analytic,
            BackendKind::Mc => OutageBackend::MonteCarlo { samples: self.n_mc },
        }
    }
}

fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Parses either `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_distance_grid(spec: &str) -> Result<Vec<f64>> {
    parse_float_list(spec, "distance grid")
}

/// Same syntax as [`parse_distance_grid`], used for `--rt`.
pub fn parse_float_list(spec: &str, what: &str) -> Result<Vec<f64>> {
    let bad = || SimError::config(format!("cannot parse {what} '{spec}'"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if !(step > 0.0) || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| tidy(start + i as f64 * step)).collect())
        }
        [list] => list.split(',').filter(|s| !s.trim().is_empty()).map(number).collect(),
        _ => Err(bad()),
    }
}

/// Parses a comma-separated protocol list such as `gf,mp,aodv`.
pub fn parse_protocols(spec: &str) -> Result<Vec<Protocol>> {
    let mut out: Vec<Protocol> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Protocol::from_str)
        .collect::<Result<_>>()?;
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_scenario() {
        let c = ExperimentConfig::default();
        assert_eq!((c.mobiles, c.topologies, c.trials), (200, 2000, 10_000));
        assert_eq!(c.channel_params().beta, 1.0);
        assert_eq!(c.channel_params().gamma, 1.0);
        assert_eq!(c.distance_grid.len(), 10);
        assert_eq!(c.distance_grid[2], 0.3);
        c.validate().unwrap();
        let desk = ExperimentConfig::preset(Preset::Desk);
        assert_eq!((desk.topologies, desk.trials), (50, 200));
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_distance_grid("0.2:0.2:0.6").unwrap(), vec![0.2, 0.4, 0.6]);
        assert_eq!(parse_distance_grid("0.3, 0.5").unwrap(), vec![0.3, 0.5]);
        assert!(parse_distance_grid("0.3:0:1").is_err());
        assert!(parse_distance_grid("a,b").is_err());
    }

    #[test]
    fn empty_protocol_list_is_rejected() {
        let c = ExperimentConfig {
            protocols: vec![],
            ..ExperimentConfig::default()
        };
        assert!(matches!(c.validate(), Err(SimError::Config(_))));
        assert_eq!(parse_protocols("gf, AODV").unwrap(), vec![Protocol::GreedyForwarding, Protocol::Aodv]);
        assert!(parse_protocols("ospf").is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut c = ExperimentConfig::preset(Preset::Desk);
        c.distance_grid = vec![0.15, 0.45];
        c.beta_db = 3.0;
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn flat_file_uses_field_names() {
        let c = ExperimentConfig::from_toml_str(
            "M = 50\nUpsilon = 3\nK_t = 10\nbeta = 3.0\nprotocols = [\"mp\"]\nase_failed = \"accumulated\"\n",
        )
        .unwrap();
        assert_eq!((c.mobiles, c.topologies, c.trials), (50, 3, 10));
        assert!((c.channel_params().beta - 1.9952623).abs() < 1e-6);
        assert_eq!(c.ase_failed, AseFailedPolicy::Accumulated);
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }
}
