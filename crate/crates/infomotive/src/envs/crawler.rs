//! Abstract six-legged crawler: a deterministic planar kinematic-thrust
//! model with 12 position-controlled joints and 18 sensors.
//!
//! Each leg has a shoulder sweep joint (ThC) and a knee joint (FTi). The
//! foot is lifted while the knee angle is positive; grounded legs that
//! sweep backward push the body along its heading, and left/right thrust
//! asymmetry turns it. The model replaces a 3D physics simulation while
//! keeping the same interface contract: joint targets in, actual angles
//! plus binary foot contacts out, and travelled distance as the payoff.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LEGS: usize = 6;
pub const JOINTS: usize = 12;
pub const SENSORS: usize = 18;

/// Model constants; all overridable from experiment configs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrawlerConfig {
    /// Shoulder sweep range `[-thc_limit, thc_limit]` in radians.
    pub thc_limit: f64,
    /// Knee range `[-fti_limit, fti_limit]` in radians.
    pub fti_limit: f64,
    /// Fraction of the remaining gap a joint closes per step.
    pub joint_lag: f64,
    /// Maximal joint movement per step in radians.
    pub joint_rate_limit: f64,
    /// Foot height per radian of positive knee angle, in metres.
    pub knee_lift_gain: f64,
    /// Body travel per radian of stance-leg backward sweep, in metres.
    pub stride_gain: f64,
    /// Heading change per metre of left/right thrust difference.
    pub turn_gain: f64,
    /// Trailing window (steps) for the lift-amplitude trackers.
    pub lift_window: usize,
    /// Standard deviation of additive per-step joint noise in radians;
    /// zero disables the noise entirely.
    pub actuation_noise_std: f64,
}

impl Default for CrawlerConfig {
    fn default() -> Self {
        Self {
            thc_limit: 0.8,
            fti_limit: 1.2,
            joint_lag: 0.35,
            joint_rate_limit: 0.12,
            knee_lift_gain: 0.25,
            stride_gain: 0.25,
            turn_gain: 0.6,
            lift_window: 100,
            actuation_noise_std: 0.02,
        }
    }
}

/// Body pose, joint angles, foot contacts and per-leg lift trackers.
///
/// Joints are stored leg-major as `[ThC0, FTi0, ThC1, FTi1, ...]`; legs
/// 0..3 form the left side (front, middle, hind), legs 3..6 the right.
#[derive(Debug, Clone, PartialEq)]
pub struct CrawlerState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub joints: [f64; JOINTS],
    pub contacts: [bool; LEGS],
    /// Trailing per-step foot heights, newest last.
    lift_history: VecDeque<[f64; LEGS]>,
}

impl CrawlerState {
    fn initial() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            joints: [0.0; JOINTS],
            contacts: [true; LEGS],
            lift_history: VecDeque::new(),
        }
    }

    /// Mean over legs of each leg's maximal foot lift within the trailing
    /// window; zero before any step was taken.
    pub fn mean_lift_amplitude(&self) -> f64 {
        if self.lift_history.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for leg in 0..LEGS {
            let peak = self
                .lift_history
                .iter()
                .map(|h| h[leg])
                .fold(0.0f64, f64::max);
            sum += peak;
        }
        sum / LEGS as f64
    }

    /// Distance of the body centre from the origin.
    pub fn distance_from_origin(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone)]
pub struct Crawler {
    config: CrawlerConfig,
    state: CrawlerState,
}

impl Crawler {
    pub fn new(config: CrawlerConfig) -> Self {
        Self {
            config,
            state: CrawlerState::initial(),
        }
    }

    pub fn state(&self) -> &CrawlerState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut CrawlerState {
        &mut self.state
    }

    pub fn config(&self) -> &CrawlerConfig {
        &self.config
    }

    /// Current sensor vector: 12 joint angles followed by 6 contact flags
    /// (1.0 grounded, 0.0 lifted).
    pub fn sensors(&self) -> [f64; SENSORS] {
        let mut s = [0.0; SENSORS];
        s[..JOINTS].copy_from_slice(&self.state.joints);
        for leg in 0..LEGS {
            s[JOINTS + leg] = if self.state.contacts[leg] { 1.0 } else { 0.0 };
        }
        s
    }

    fn foot_height(&self, fti: f64) -> f64 {
        self.config.knee_lift_gain * fti.max(0.0)
    }

    /// Advances the crawler by one step toward the 12 joint targets
    /// (values in `(-1, 1)`, scaled to the joint ranges).
    ///
    /// Joints follow a rate-limited first-order lag with optional additive
    /// actuation noise. Legs grounded at the start of the step and
    /// sweeping backward generate thrust; per-side mean thrusts move and
    /// turn the body.
    pub fn step<R: Rng>(&mut self, targets: &[f64], rng: &mut R) -> Result<[f64; SENSORS]> {
        if targets.len() != JOINTS {
            return Err(Error::InputMismatch(format!(
                "expected {JOINTS} joint targets, got {}",
                targets.len()
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("joint target".into()));
        }
        let c = self.config;
        let stance_at_entry = self.state.contacts;
        let old_joints = self.state.joints;

        for (j, (joint, &target)) in self.state.joints.iter_mut().zip(targets).enumerate() {
            let limit = if j % 2 == 0 { c.thc_limit } else { c.fti_limit };
            let target = target.clamp(-1.0, 1.0) * limit;
            let mut delta = (c.joint_lag * (target - *joint))
                .clamp(-c.joint_rate_limit, c.joint_rate_limit);
            if c.actuation_noise_std > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                delta += z * c.actuation_noise_std;
            }
            *joint = (*joint + delta).clamp(-limit, limit);
        }

        // Thrust from grounded legs sweeping backward (negative ThC delta).
        let mut side_thrust = [0.0f64; 2];
        let mut side_count = [0usize; 2];
        for leg in 0..LEGS {
            if stance_at_entry[leg] {
                let sweep = self.state.joints[2 * leg] - old_joints[2 * leg];
                let side = leg / 3;
                side_thrust[side] += -sweep * c.stride_gain;
                side_count[side] += 1;
            }
        }
        let mean = |side: usize| {
            if side_count[side] > 0 {
                side_thrust[side] / side_count[side] as f64
            } else {
                0.0
            }
        };
        let (t_left, t_right) = (mean(0), mean(1));
        let displacement = (t_left + t_right) / 2.0;
        self.state.heading += c.turn_gain * (t_right - t_left);
        self.state.x += displacement * self.state.heading.cos();
        self.state.y += displacement * self.state.heading.sin();

        let mut heights = [0.0; LEGS];
        for (leg, height) in heights.iter_mut().enumerate() {
            *height = self.foot_height(self.state.joints[2 * leg + 1]);
            self.state.contacts[leg] = *height <= 0.0;
        }
        self.state.lift_history.push_back(heights);
        while self.state.lift_history.len() > c.lift_window {
            self.state.lift_history.pop_front();
        }

        Ok(self.sensors())
    }
}

/// Clamps the body back to the trap radius when it tries to cross without
/// enough recent foot lift. Tangential motion is unaffected; `h == 0`
/// leaves the barrier inert.
pub fn trap_barrier(state: &mut CrawlerState, trap_radius: f64, wall_height: f64) {
    if wall_height <= 0.0 {
        return;
    }
    let dist = state.distance_from_origin();
    if dist > trap_radius && state.mean_lift_amplitude() < wall_height {
        let scale = trap_radius / dist;
        state.x *= scale;
        state.y *= scale;
    }
}

/// Locomotion payoff: euclidean distance of the final pose from the
/// origin, computed once at episode end.
pub fn locomotion_erf(final_state: &CrawlerState) -> f64 {
    final_state.distance_from_origin()
}

/// Self-rescue payoff: distance beyond the trap radius when positive, zero
/// otherwise.
pub fn rescue_erf(final_state: &CrawlerState, trap_radius: f64) -> f64 {
    debug_assert!(trap_radius > 0.0);
    let excess = final_state.distance_from_origin() - trap_radius;
    if excess > 0.0 {
        excess
    } else {
        0.0
    }
}
