//! Combines extrinsic and intrinsic rewards into the scalar episodic
//! reward fed to the optimizer.
//!
//! The intrinsic term is scaled by `beta(gamma) = gamma * T * max_erf` so
//! that a normalized intrinsic value of 1 is worth a fixed fraction of
//! the best achievable extrinsic reward. For episode-terminal payoffs
//! (distance-based tasks) the caller passes `T = 1` and a configured
//! reference reward instead of a per-step maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{
    discretize, normalized_entropy, normalized_pi, pairwise_entropy, pairwise_pi, SensorPairing,
    SensorTrace,
};

/// Which intrinsic reward accompanies the task reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IrfKind {
    #[default]
    None,
    /// One-step predictive information of the sensor stream.
    #[serde(alias = "pi")]
    PredictiveInformation,
    /// Entropy of the sensor stream.
    Entropy,
}

impl std::str::FromStr for IrfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "pi" | "predictive-information" => Ok(Self::PredictiveInformation),
            "entropy" | "h" => Ok(Self::Entropy),
            other => Err(Error::InvalidConfig(format!(
                "unknown intrinsic reward kind '{other}' (expected none, pi or entropy)"
            ))),
        }
    }
}

/// How the intrinsic value is measured on an episode trace.
#[derive(Debug, Clone)]
pub enum IrfMeasure {
    /// Single-channel statistics (cart-pole pole angle).
    SingleChannel { channel: usize, bins: usize },
    /// Mean normalized pairwise statistics over sampled channel pairs
    /// (crawler joint angles).
    Pairwise {
        pairing: SensorPairing,
        bins_per_channel: usize,
    },
}

/// The components of one episode's reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub erf_total: f64,
    /// Normalized intrinsic value in `[0, 1]`.
    pub irf_value: f64,
    pub beta: f64,
    /// `erf_total + beta * irf_value`.
    pub combined: f64,
}

/// Intrinsic scaling factor `gamma * steps * max_erf`.
pub fn beta(gamma: f64, steps: usize, max_erf: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gamma must be a nonnegative fraction, got {gamma}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidConfig("steps must be at least 1".into()));
    }
    if !max_erf.is_finite() || max_erf <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "maximal extrinsic reward must be positive, got {max_erf}"
        )));
    }
    Ok(gamma * steps as f64 * max_erf)
}

/// Combines an episode's extrinsic total with a scaled intrinsic value.
pub fn combine(erf_total: f64, irf_value: f64, beta: f64) -> Result<RewardBreakdown> {
    for (name, v) in [("erf_total", erf_total), ("irf_value", irf_value), ("beta", beta)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{name} = {v}")));
        }
    }
    if !(0.0..=1.0).contains(&irf_value) {
        return Err(Error::InvalidConfig(format!(
            "intrinsic value {irf_value} outside [0, 1]"
        )));
    }
    Ok(RewardBreakdown {
        erf_total,
        irf_value,
        beta,
        combined: erf_total + beta * irf_value,
    })
}

/// Evaluates the intrinsic reward of an episode trace; always in `[0, 1]`.
pub fn episode_irf(trace: &SensorTrace, kind: IrfKind, measure: &IrfMeasure) -> Result<f64> {
    if kind == IrfKind::None {
        return Ok(0.0);
    }
    match measure {
        IrfMeasure::SingleChannel { channel, bins } => {
            let seq = discretize(trace, *channel, *bins)?;
            match kind {
                IrfKind::PredictiveInformation => normalized_pi(&seq),
                IrfKind::Entropy => normalized_entropy(&seq),
                IrfKind::None => unreachable!(),
            }
        }
        IrfMeasure::Pairwise {
            pairing,
            bins_per_channel,
        } => match kind {
            IrfKind::PredictiveInformation => pairwise_pi(trace, pairing, *bins_per_channel),
            IrfKind::Entropy => pairwise_entropy(trace, pairing, *bins_per_channel),
            IrfKind::None => unreachable!(),
        },
    }
}
