//! Episode execution: runs a controller against an environment for a
//! fixed number of steps and collects the sensor trace plus extrinsic
//! reward.

use rand::Rng;

use crate::envs::cartpole::{cartpole_erf, CartPole, CartPoleConfig, CartPoleState};
use crate::envs::crawler::{
    locomotion_erf, rescue_erf, trap_barrier, Crawler, CrawlerConfig, CrawlerState, JOINTS,
    SENSORS,
};
use crate::error::{Error, Result};
use crate::infotheory::SensorTrace;
use crate::policy::NeuralPolicy;

/// Declared trace range for the cart velocity channel.
pub const CART_VELOCITY_BOUND: f64 = 20.0;
/// Declared trace range for the pole angular velocity channel.
pub const POLE_VELOCITY_BOUND: f64 = 25.0;

/// Which crawler assignment an episode runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrawlerTask {
    /// Walk as far as possible on an open plane.
    Locomotion,
    /// Escape a circular trap of the given radius surrounded by a wall.
    Rescue { trap_radius: f64, wall_height: f64 },
}

/// Final environment state at episode end.
#[derive(Debug, Clone)]
pub enum FinalState {
    CartPole(CartPoleState),
    Crawler(CrawlerState),
}

/// One finished episode: the recorded sensor trace, the extrinsic reward
/// total, and the state the environment ended in.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub trace: SensorTrace,
    pub erf_total: f64,
    /// Per-step extrinsic rewards; only the cart-pole scores per step.
    pub per_step_erf: Option<Vec<f64>>,
    pub final_state: FinalState,
}

/// Declared sensor ranges of the cart-pole trace
/// (x, x', theta, theta').
pub fn cartpole_trace_ranges(config: &CartPoleConfig) -> Vec<(f64, f64)> {
    vec![
        (-config.x_limit, config.x_limit),
        (-CART_VELOCITY_BOUND, CART_VELOCITY_BOUND),
        (-std::f64::consts::PI, std::f64::consts::PI),
        (-POLE_VELOCITY_BOUND, POLE_VELOCITY_BOUND),
    ]
}

/// Declared sensor ranges of the crawler trace (12 joint angles followed
/// by 6 contact flags).
pub fn crawler_trace_ranges(config: &CrawlerConfig) -> Vec<(f64, f64)> {
    let mut ranges = Vec::with_capacity(SENSORS);
    for _ in 0..JOINTS / 2 {
        ranges.push((-config.thc_limit, config.thc_limit));
        ranges.push((-config.fti_limit, config.fti_limit));
    }
    for _ in 0..SENSORS - JOINTS {
        ranges.push((0.0, 1.0));
    }
    ranges
}

/// Runs one cart-pole episode from the hanging start state.
///
/// Each step feeds the current state to the controller, scales its output
/// to a force, advances the dynamics, and records the post-step state
/// into the trace. The per-step reward is summed over the episode.
pub fn run_cartpole_episode(
    policy: &mut NeuralPolicy,
    config: &CartPoleConfig,
    steps: usize,
) -> Result<EpisodeResult> {
    if policy.input_count() != 4 || policy.output_count() != 1 {
        return Err(Error::InputMismatch(format!(
            "cart-pole controllers take 4 sensors and emit 1 force, got {}/{}",
            policy.input_count(),
            policy.output_count()
        )));
    }
    policy.reset();
    let mut env = CartPole::new(*config);
    let mut trace = SensorTrace::new(cartpole_trace_ranges(config))?;
    let mut per_step = Vec::with_capacity(steps);
    let mut total = 0.0;
    for _ in 0..steps {
        let s = *env.state();
        let out = policy.step(&[s.x, s.x_dot, s.theta, s.theta_dot])?;
        let force = out[0] * config.force_limit;
        let s = env.step(force)?;
        let reward = cartpole_erf(s);
        per_step.push(reward);
        total += reward;
        trace.push_step(&[s.x, s.x_dot, s.theta, s.theta_dot])?;
    }
    Ok(EpisodeResult {
        trace,
        erf_total: total,
        per_step_erf: Some(per_step),
        final_state: FinalState::CartPole(*env.state()),
    })
}

/// Runs one crawler episode from the origin.
///
/// Controllers may consume the full 18-sensor vector or only its leading
/// joint-angle block; the sensor slice is truncated to the controller's
/// input width. For the rescue task the trap barrier is applied after
/// every step; the payoff is computed once at episode end.
pub fn run_crawler_episode<R: Rng>(
    policy: &mut NeuralPolicy,
    config: &CrawlerConfig,
    task: CrawlerTask,
    steps: usize,
    rng: &mut R,
) -> Result<EpisodeResult> {
    if policy.output_count() != JOINTS {
        return Err(Error::InputMismatch(format!(
            "crawler controllers must emit {JOINTS} joint targets, got {}",
            policy.output_count()
        )));
    }
    let width = policy.input_count();
    if width > SENSORS {
        return Err(Error::InputMismatch(format!(
            "crawler provides {SENSORS} sensors, controller wants {width}"
        )));
    }
    if let CrawlerTask::Rescue {
        trap_radius,
        wall_height,
    } = task
    {
        if trap_radius <= 0.0 || wall_height < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "rescue task needs trap_radius > 0 and wall_height >= 0, got {trap_radius}/{wall_height}"
            )));
        }
    }
    policy.reset();
    let mut env = Crawler::new(*config);
    let mut trace = SensorTrace::new(crawler_trace_ranges(config))?;
    let mut sensors = env.sensors();
    for _ in 0..steps {
        let targets = policy.step(&sensors[..width])?;
        sensors = env.step(&targets, rng)?;
        if let CrawlerTask::Rescue {
            trap_radius,
            wall_height,
        } = task
        {
            trap_barrier(env.state_mut(), trap_radius, wall_height);
            sensors = env.sensors();
        }
        trace.push_step(&sensors)?;
    }
    let erf_total = match task {
        CrawlerTask::Locomotion => locomotion_erf(env.state()),
        CrawlerTask::Rescue { trap_radius, .. } => rescue_erf(env.state(), trap_radius),
    };
    Ok(EpisodeResult {
        trace,
        erf_total,
        per_step_erf: None,
        final_state: FinalState::Crawler(env.state().clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{
        build_cartpole_controller, build_hexapod_cpg, build_rescue_controller, CartPoleVariant,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cartpole_episode_records_full_trace() {
        let mut policy = NeuralPolicy::new(build_cartpole_controller(CartPoleVariant::B));
        let config = CartPoleConfig::default();
        let result = run_cartpole_episode(&mut policy, &config, 250).unwrap();
        assert_eq!(result.trace.len(), 250);
        assert_eq!(result.trace.channels(), 4);
        assert_eq!(result.per_step_erf.as_ref().unwrap().len(), 250);
        // Zero controller, hanging start: the pole never comes up.
        assert_eq!(result.erf_total, 0.0);
    }

    #[test]
    fn crawler_episode_trace_has_18_channels() {
        let mut policy = NeuralPolicy::new(build_hexapod_cpg());
        let config = CrawlerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let result =
            run_crawler_episode(&mut policy, &config, CrawlerTask::Locomotion, 100, &mut rng)
                .unwrap();
        assert_eq!(result.trace.len(), 100);
        assert_eq!(result.trace.channels(), 18);
        assert!(result.per_step_erf.is_none());
    }

    #[test]
    fn rescue_controller_consumes_angle_sensors_only() {
        let mut policy = NeuralPolicy::new(build_rescue_controller());
        assert_eq!(policy.input_count(), 12);
        let config = CrawlerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let result = run_crawler_episode(
            &mut policy,
            &config,
            CrawlerTask::Rescue {
                trap_radius: 2.0,
                wall_height: 0.0,
            },
            100,
            &mut rng,
        )
        .unwrap();
        assert!(result.erf_total >= 0.0);
    }

    #[test]
    fn rescue_barrier_keeps_low_gaits_inside() {
        // A controller that just drags itself outward without lifting can
        // never pass a wall.
        let topo = build_rescue_controller();
        let mut policy = NeuralPolicy::new(topo);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = vec![0.0; 156];
        // Strong constant biases produce a static sprawl, no lift.
        for (b, p) in params.iter_mut().enumerate().skip(144) {
            *p = if b % 2 == 0 { -3.0 } else { -1.0 };
        }
        policy.bind_parameters(&params).unwrap();
        let result = run_crawler_episode(
            &mut policy,
            &CrawlerConfig::default(),
            CrawlerTask::Rescue {
                trap_radius: 1.0,
                wall_height: 0.2,
            },
            400,
            &mut rng,
        )
        .unwrap();
        if let FinalState::Crawler(state) = &result.final_state {
            assert!(state.distance_from_origin() <= 1.0 + 1e-9);
        } else {
            panic!("expected crawler final state");
        }
        assert_eq!(result.erf_total, 0.0);
    }

    #[test]
    fn episodes_are_deterministic_given_seed() {
        let run = |seed: u64| {
            let mut policy = NeuralPolicy::new(build_hexapod_cpg());
            let params: Vec<f64> = (0..32).map(|i| ((i * 7 + 3) % 11) as f64 * 0.1 - 0.5).collect();
            policy.bind_parameters(&params).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = run_crawler_episode(
                &mut policy,
                &CrawlerConfig::default(),
                CrawlerTask::Locomotion,
                200,
                &mut rng,
            )
            .unwrap();
            r.erf_total
        };
        assert_eq!(run(11), run(11));
    }
}
