//! Declarative experiment configuration.
//!
//! Experiments are described by a single TOML document. Every omitted
//! field is filled from per-environment defaults during resolution and
//! the fully resolved config is echoed into the output directory, so a
//! partial config file remains reproducible.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{CartPoleConfig, CrawlerConfig};
use crate::error::{Error, Result};
use crate::pgpe::Hyperparameters;
use crate::policy::{
    build_cartpole_controller, build_hexapod_cpg, build_rescue_controller, CartPoleVariant,
    NetworkTopology,
};
use crate::reward::IrfKind;

/// Default seed list: the first 100 positive integers. Per-run random
/// streams are derived by hashing the experiment id, the gamma index and
/// the seed entry, so consecutive integers give independent streams.
pub fn default_seeds() -> Vec<u64> {
    (1..=100).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Cartpole,
    Locomotion,
    Rescue,
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Cartpole => write!(f, "cartpole"),
            Self::Locomotion => write!(f, "locomotion"),
            Self::Rescue => write!(f, "rescue"),
        }
    }
}

/// Raw `[pgpe]` section; unset fields fall back to environment defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgpeSection {
    pub alpha: Option<f64>,
    pub alpha_sigma: Option<f64>,
    pub delta: Option<f64>,
    pub sigma_init: Option<f64>,
    pub m_init: Option<f64>,
    pub rollouts_per_batch: Option<usize>,
    pub update_rule: Option<crate::pgpe::UpdateRule>,
}

/// Raw `[env]` section: constant overrides for whichever environment the
/// experiment uses.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    // Cart-pole constants.
    pub gravity: Option<f64>,
    pub cart_mass: Option<f64>,
    pub pole_mass: Option<f64>,
    pub half_length: Option<f64>,
    pub dt: Option<f64>,
    pub x_limit: Option<f64>,
    pub force_limit: Option<f64>,
    // Crawler constants.
    pub thc_limit: Option<f64>,
    pub fti_limit: Option<f64>,
    pub joint_lag: Option<f64>,
    pub joint_rate_limit: Option<f64>,
    pub knee_lift_gain: Option<f64>,
    pub stride_gain: Option<f64>,
    pub turn_gain: Option<f64>,
    pub lift_window: Option<usize>,
    pub actuation_noise_std: Option<f64>,
    pub trap_radius: Option<f64>,
    pub wall_height: Option<f64>,
}

impl EnvSection {
    fn cartpole_keys_used(&self) -> bool {
        self.gravity.is_some()
            || self.cart_mass.is_some()
            || self.pole_mass.is_some()
            || self.half_length.is_some()
            || self.dt.is_some()
            || self.x_limit.is_some()
            || self.force_limit.is_some()
    }

    fn crawler_keys_used(&self) -> bool {
        self.thc_limit.is_some()
            || self.fti_limit.is_some()
            || self.joint_lag.is_some()
            || self.joint_rate_limit.is_some()
            || self.knee_lift_gain.is_some()
            || self.stride_gain.is_some()
            || self.turn_gain.is_some()
            || self.lift_window.is_some()
            || self.actuation_noise_std.is_some()
            || self.trap_radius.is_some()
            || self.wall_height.is_some()
    }
}

/// Raw `[irf_config]` section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrfSection {
    /// Bin count for single-channel statistics.
    pub bins: Option<usize>,
    /// Trace channel the single-channel statistic reads (cart-pole pole
    /// angle by default).
    pub channel: Option<usize>,
    /// Number of sampled sensor pairs for pairwise statistics.
    pub pairs: Option<usize>,
    pub bins_per_channel: Option<usize>,
    /// Reference extrinsic reward used in the intrinsic scaling of
    /// episode-terminal payoffs.
    pub reference_reward: Option<f64>,
}

/// An experiment description as read from disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub environment: EnvKind,
    pub controller: Option<String>,
    pub irf: IrfKind,
    pub gammas: Vec<f64>,
    pub batches: usize,
    pub runs: usize,
    pub episode_steps: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub output_dir: PathBuf,
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub mean_only_plots: bool,
    #[serde(default)]
    pub pgpe: PgpeSection,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub irf_config: IrfSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("experiment config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

/// Crawler constants plus the trap geometry for rescue experiments.
#[derive(Debug, Clone, Serialize)]
pub struct CrawlerSettings {
    #[serde(flatten)]
    pub config: CrawlerConfig,
    pub trap_radius: f64,
    pub wall_height: f64,
}

/// Concrete intrinsic-reward settings.
#[derive(Debug, Clone, Serialize)]
pub struct IrfSettings {
    pub bins: usize,
    pub channel: usize,
    pub pairs: usize,
    pub bins_per_channel: usize,
    pub reference_reward: f64,
}

/// A fully resolved experiment: every default filled in, ready to run and
/// to echo into the provenance archive.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub id: String,
    pub environment: EnvKind,
    pub controller: String,
    pub irf: IrfKind,
    pub gammas: Vec<f64>,
    pub batches: usize,
    pub runs: usize,
    pub episode_steps: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub thresholds: Vec<f64>,
    pub mean_only_plots: bool,
    pub pgpe: Hyperparameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cartpole: Option<CartPoleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crawler: Option<CrawlerSettings>,
    pub irf_config: IrfSettings,
}

impl ExperimentConfig {
    /// Fills every omitted field from per-environment defaults and
    /// validates the result.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let env = self.environment;
        let controller = match (&self.controller, env) {
            (Some(c), _) => c.clone(),
            (None, EnvKind::Cartpole) => "B".to_string(),
            (None, EnvKind::Locomotion) => "cpg".to_string(),
            (None, EnvKind::Rescue) => "feedforward".to_string(),
        };

        let (alpha, alpha_sigma, sigma_init, rollouts, steps) = match env {
            EnvKind::Cartpole => (0.1, 0.1, 5.0, 2, 2000),
            EnvKind::Locomotion => (0.1, 0.1, 2.0, 2, 1000),
            EnvKind::Rescue => (0.5, 0.05, 2.0, 1, 1250),
        };
        let pgpe = Hyperparameters {
            alpha: self.pgpe.alpha.unwrap_or(alpha),
            alpha_sigma: self.pgpe.alpha_sigma.unwrap_or(alpha_sigma),
            delta: self.pgpe.delta.unwrap_or(0.1),
            sigma_init: self.pgpe.sigma_init.unwrap_or(sigma_init),
            m_init: self.pgpe.m_init.unwrap_or(f64::MIN),
            rollouts_per_batch: self.pgpe.rollouts_per_batch.unwrap_or(rollouts),
            update_rule: self.pgpe.update_rule.unwrap_or_default(),
        };
        pgpe.validate()?;

        let episode_steps = self.episode_steps.unwrap_or(steps);
        if episode_steps < 2 {
            return Err(Error::InvalidConfig(
                "episode_steps must be at least 2".into(),
            ));
        }

        let (cartpole, crawler) = match env {
            EnvKind::Cartpole => {
                if self.env.crawler_keys_used() {
                    return Err(Error::InvalidConfig(
                        "crawler constants set for a cart-pole experiment".into(),
                    ));
                }
                let d = CartPoleConfig::default();
                let c = CartPoleConfig {
                    gravity: self.env.gravity.unwrap_or(d.gravity),
                    cart_mass: self.env.cart_mass.unwrap_or(d.cart_mass),
                    pole_mass: self.env.pole_mass.unwrap_or(d.pole_mass),
                    half_length: self.env.half_length.unwrap_or(d.half_length),
                    dt: self.env.dt.unwrap_or(d.dt),
                    x_limit: self.env.x_limit.unwrap_or(d.x_limit),
                    force_limit: self.env.force_limit.unwrap_or(d.force_limit),
                };
                (Some(c), None)
            }
            EnvKind::Locomotion | EnvKind::Rescue => {
                if self.env.cartpole_keys_used() {
                    return Err(Error::InvalidConfig(
                        "cart-pole constants set for a crawler experiment".into(),
                    ));
                }
                let d = CrawlerConfig::default();
                let config = CrawlerConfig {
                    thc_limit: self.env.thc_limit.unwrap_or(d.thc_limit),
                    fti_limit: self.env.fti_limit.unwrap_or(d.fti_limit),
                    joint_lag: self.env.joint_lag.unwrap_or(d.joint_lag),
                    joint_rate_limit: self.env.joint_rate_limit.unwrap_or(d.joint_rate_limit),
                    knee_lift_gain: self.env.knee_lift_gain.unwrap_or(d.knee_lift_gain),
                    stride_gain: self.env.stride_gain.unwrap_or(d.stride_gain),
                    turn_gain: self.env.turn_gain.unwrap_or(d.turn_gain),
                    lift_window: self.env.lift_window.unwrap_or(d.lift_window),
                    actuation_noise_std: self
                        .env
                        .actuation_noise_std
                        .unwrap_or(d.actuation_noise_std),
                };
                let trap_radius = self.env.trap_radius.unwrap_or(2.0);
                let wall_height = self.env.wall_height.unwrap_or(0.0);
                if trap_radius <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "trap_radius must be positive, got {trap_radius}"
                    )));
                }
                if wall_height < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "wall_height must be nonnegative, got {wall_height}"
                    )));
                }
                (
                    None,
                    Some(CrawlerSettings {
                        config,
                        trap_radius,
                        wall_height,
                    }),
                )
            }
        };

        let reference_default = match env {
            EnvKind::Cartpole => 2.0,
            EnvKind::Locomotion => 10.0,
            EnvKind::Rescue => 20.0,
        };
        let irf_config = IrfSettings {
            bins: self.irf_config.bins.unwrap_or(30),
            channel: self.irf_config.channel.unwrap_or(2),
            pairs: self.irf_config.pairs.unwrap_or(20),
            bins_per_channel: self.irf_config.bins_per_channel.unwrap_or(10),
            reference_reward: self.irf_config.reference_reward.unwrap_or(reference_default),
        };
        if irf_config.bins < 2 || irf_config.bins_per_channel < 2 {
            return Err(Error::InvalidConfig("bin counts must be at least 2".into()));
        }
        if irf_config.channel >= 4 && env == EnvKind::Cartpole {
            return Err(Error::InvalidConfig(format!(
                "cart-pole traces have 4 channels, channel {} does not exist",
                irf_config.channel
            )));
        }
        if irf_config.pairs == 0 || irf_config.pairs > 66 {
            return Err(Error::InvalidConfig(format!(
                "pairs must lie in 1..=66 for 12 angle channels, got {}",
                irf_config.pairs
            )));
        }
        if !irf_config.reference_reward.is_finite() || irf_config.reference_reward <= 0.0 {
            return Err(Error::InvalidConfig(
                "reference_reward must be positive".into(),
            ));
        }

        let seeds_full = self.seeds.clone().unwrap_or_else(default_seeds);
        {
            let mut sorted = seeds_full.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != seeds_full.len() {
                return Err(Error::InvalidConfig("seed list contains duplicates".into()));
            }
        }
        if self.runs > seeds_full.len() {
            return Err(Error::InvalidConfig(format!(
                "{} runs requested but only {} seeds available",
                self.runs,
                seeds_full.len()
            )));
        }
        let seeds: Vec<u64> = seeds_full.into_iter().take(self.runs).collect();

        if self.gammas.is_empty() {
            return Err(Error::InvalidConfig("gamma list is empty".into()));
        }
        for &g in &self.gammas {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "gamma values must be nonnegative fractions, got {g}"
                )));
            }
        }

        let thresholds = self.thresholds.clone().unwrap_or_else(|| match env {
            EnvKind::Rescue => vec![5.0, 20.0],
            _ => Vec::new(),
        });

        let resolved = ResolvedConfig {
            id: self.id.clone(),
            environment: env,
            controller,
            irf: self.irf,
            gammas: self.gammas.clone(),
            batches: self.batches,
            runs: self.runs,
            episode_steps,
            seeds,
            output_dir: self.output_dir.clone(),
            thresholds,
            mean_only_plots: self.mean_only_plots,
            pgpe,
            cartpole,
            crawler,
            irf_config,
        };
        resolved.build_topology()?; // validates the controller name
        Ok(resolved)
    }
}

impl ResolvedConfig {
    /// Instantiates the configured controller topology.
    pub fn build_topology(&self) -> Result<NetworkTopology> {
        match self.environment {
            EnvKind::Cartpole => {
                let variant: CartPoleVariant = self.controller.parse()?;
                Ok(build_cartpole_controller(variant))
            }
            EnvKind::Locomotion => {
                if self.controller != "cpg" {
                    return Err(Error::InvalidConfig(format!(
                        "locomotion experiments use the 'cpg' controller, got '{}'",
                        self.controller
                    )));
                }
                Ok(build_hexapod_cpg())
            }
            EnvKind::Rescue => {
                if self.controller != "feedforward" {
                    return Err(Error::InvalidConfig(format!(
                        "rescue experiments use the 'feedforward' controller, got '{}'",
                        self.controller
                    )));
                }
                Ok(build_rescue_controller())
            }
        }
    }

    /// Intrinsic scaling for one gamma. Per-step payoffs scale with the
    /// episode length and the per-step maximum; episode-terminal payoffs
    /// use the configured reference reward with a step factor of one.
    pub fn beta(&self, gamma: f64) -> Result<f64> {
        match self.environment {
            EnvKind::Cartpole => {
                crate::reward::beta(gamma, self.episode_steps, 2.0)
            }
            EnvKind::Locomotion | EnvKind::Rescue => {
                crate::reward::beta(gamma, 1, self.irf_config.reference_reward)
            }
        }
    }
}
