//! Cart-pole swing-up: a pole hinged to a cart on a frictionless track,
//! driven by a bounded horizontal force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the cart-pole. All fields are overridable from
/// experiment configs; the defaults follow the classic formulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CartPoleConfig {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length (the pole pivots at one end).
    pub half_length: f64,
    /// Integration step in seconds; 2000 steps correspond to 20 seconds.
    pub dt: f64,
    /// Track half-width; the cart is clamped here with velocity zeroed.
    pub x_limit: f64,
    /// Maximal force magnitude in newtons.
    pub force_limit: f64,
}

impl Default for CartPoleConfig {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            dt: 0.01,
            x_limit: 2.4,
            force_limit: 10.0,
        }
    }
}

/// Cart position/velocity and pole angle/angular velocity. The angle is
/// zero when the pole points up and is wrapped to `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    /// Hanging at rest in the middle of the track.
    pub fn hanging() -> Self {
        Self {
            x: 0.0,
            x_dot: 0.0,
            theta: wrap_angle(std::f64::consts::PI),
            theta_dot: 0.0,
        }
    }
}

/// Wraps an angle to `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let wrapped = (theta + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if wrapped >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone)]
pub struct CartPole {
    config: CartPoleConfig,
    state: CartPoleState,
}

impl CartPole {
    pub fn new(config: CartPoleConfig) -> Self {
        Self {
            config,
            state: CartPoleState::hanging(),
        }
    }

    pub fn with_state(config: CartPoleConfig, mut state: CartPoleState) -> Self {
        state.theta = wrap_angle(state.theta);
        Self { config, state }
    }

    pub fn state(&self) -> &CartPoleState {
        &self.state
    }

    pub fn config(&self) -> &CartPoleConfig {
        &self.config
    }

    fn accelerations(&self, s: &[f64; 4], force: f64) -> (f64, f64) {
        let c = &self.config;
        let total_mass = c.cart_mass + c.pole_mass;
        let pml = c.pole_mass * c.half_length;
        let (sin_t, cos_t) = s[2].sin_cos();
        let temp = (force + pml * s[3] * s[3] * sin_t) / total_mass;
        let theta_acc = (c.gravity * sin_t - cos_t * temp)
            / (c.half_length * (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / total_mass));
        let x_acc = temp - pml * theta_acc * cos_t / total_mass;
        (x_acc, theta_acc)
    }

    fn derivative(&self, s: &[f64; 4], force: f64) -> [f64; 4] {
        let (x_acc, theta_acc) = self.accelerations(s, force);
        [s[1], x_acc, s[3], theta_acc]
    }

    /// Advances the state by one `dt` under the given force (clamped to
    /// `[-force_limit, force_limit]`), using a fourth-order Runge-Kutta
    /// step. The pole angle is wrapped and the cart clamped at the track
    /// limits with its velocity zeroed on contact.
    pub fn step(&mut self, force: f64) -> Result<&CartPoleState> {
        if !force.is_finite() {
            return Err(Error::NonFinite("cart-pole force".into()));
        }
        let force = force.clamp(-self.config.force_limit, self.config.force_limit);
        let dt = self.config.dt;
        let s0 = [
            self.state.x,
            self.state.x_dot,
            self.state.theta,
            self.state.theta_dot,
        ];
        let k1 = self.derivative(&s0, force);
        let half = |k: &[f64; 4]| {
            [
                s0[0] + 0.5 * dt * k[0],
                s0[1] + 0.5 * dt * k[1],
                s0[2] + 0.5 * dt * k[2],
                s0[3] + 0.5 * dt * k[3],
            ]
        };
        let k2 = self.derivative(&half(&k1), force);
        let k3 = self.derivative(&half(&k2), force);
        let s3 = [
            s0[0] + dt * k3[0],
            s0[1] + dt * k3[1],
            s0[2] + dt * k3[2],
            s0[3] + dt * k3[3],
        ];
        let k4 = self.derivative(&s3, force);
        let mut s = [0.0; 4];
        for i in 0..4 {
            s[i] = s0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.state.x = s[0];
        self.state.x_dot = s[1];
        self.state.theta = wrap_angle(s[2]);
        self.state.theta_dot = s[3];
        if self.state.x.abs() >= self.config.x_limit {
            self.state.x = self.config.x_limit.copysign(self.state.x);
            self.state.x_dot = 0.0;
        }
        Ok(&self.state)
    }

    /// Total mechanical energy (kinetic plus potential of the pole's
    /// centre of mass, with the hanging pole as reference direction).
    pub fn mechanical_energy(&self) -> f64 {
        let c = &self.config;
        let s = &self.state;
        let (sin_t, cos_t) = s.theta.sin_cos();
        let vx = s.x_dot + c.half_length * s.theta_dot * cos_t;
        let vy = -c.half_length * s.theta_dot * sin_t;
        let inertia_com = c.pole_mass * c.half_length * c.half_length / 3.0;
        let kinetic = 0.5 * c.cart_mass * s.x_dot * s.x_dot
            + 0.5 * c.pole_mass * (vx * vx + vy * vy)
            + 0.5 * inertia_com * s.theta_dot * s.theta_dot;
        let potential = c.pole_mass * c.gravity * c.half_length * cos_t;
        kinetic + potential
    }
}

/// Per-step extrinsic reward: `2 - |x|` while the pole is within 5 degrees
/// of upright, zero otherwise. Episode totals are the sum over steps.
pub fn cartpole_erf(state: &CartPoleState) -> f64 {
    const FIVE_DEGREES: f64 = 5.0 * std::f64::consts::PI / 180.0;
    if state.theta.abs() < FIVE_DEGREES {
        2.0 - state.x.abs()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hanging_equilibrium_is_a_fixed_point() {
        let mut env = CartPole::with_state(
            CartPoleConfig::default(),
            CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: std::f64::consts::PI,
                theta_dot: 0.0,
            },
        );
        let initial = *env.state();
        for _ in 0..100 {
            env.step(0.0).unwrap();
        }
        assert_abs_diff_eq!(env.state().x, initial.x, epsilon = 1e-12);
        assert_abs_diff_eq!(env.state().theta.abs(), std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(env.state().theta_dot, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn upright_equilibrium_is_exact() {
        let mut env = CartPole::with_state(
            CartPoleConfig::default(),
            CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: 0.0,
                theta_dot: 0.0,
            },
        );
        for _ in 0..50 {
            let s = env.step(0.0).unwrap();
            assert_eq!((s.x, s.x_dot, s.theta, s.theta_dot), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn small_tilt_falls_away_from_upright() {
        let mut env = CartPole::with_state(
            CartPoleConfig::default(),
            CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: 0.1,
                theta_dot: 0.0,
            },
        );
        env.step(0.0).unwrap();
        // Linearized: theta_acc ~ (g / l_eff) * theta > 0.
        assert!(env.state().theta > 0.1);
        assert!(env.state().theta_dot > 0.0);
    }

    #[test]
    fn erf_table() {
        let s = |x: f64, theta_deg: f64| CartPoleState {
            x,
            x_dot: 0.0,
            theta: theta_deg.to_radians(),
            theta_dot: 0.0,
        };
        assert_eq!(cartpole_erf(&s(0.0, 0.0)), 2.0);
        assert_eq!(cartpole_erf(&s(1.5, 2.0)), 0.5);
        assert_eq!(cartpole_erf(&s(0.0, 6.0)), 0.0);
        assert_eq!(cartpole_erf(&s(0.0, -6.0)), 0.0);
        assert_eq!(cartpole_erf(&s(-0.5, -2.0)), 1.5);
    }

    #[test]
    fn force_is_clamped_and_must_be_finite() {
        let mut env = CartPole::new(CartPoleConfig::default());
        assert!(env.step(f64::NAN).is_err());
        assert!(env.step(f64::INFINITY).is_err());
        let mut clamped = CartPole::new(CartPoleConfig::default());
        let mut limited = CartPole::new(CartPoleConfig::default());
        clamped.step(1e9).unwrap();
        limited.step(10.0).unwrap();
        assert_eq!(clamped.state(), limited.state());
    }

    #[test]
    fn free_swing_conserves_energy_and_never_gains() {
        for initial in [
            CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: std::f64::consts::PI - 0.5,
                theta_dot: 0.0,
            },
            CartPoleState {
                x: 0.0,
                x_dot: 0.0,
                theta: 2.0,
                theta_dot: 1.0,
            },
            CartPoleState {
                x: 0.5,
                x_dot: 0.3,
                theta: 0.8,
                theta_dot: -2.0,
            },
        ] {
            let mut env = CartPole::with_state(CartPoleConfig::default(), initial);
            let e0 = env.mechanical_energy();
            let scale = e0.abs().max(1.0);
            let mut prev = e0;
            for step in 0..2000 {
                env.step(0.0).unwrap();
                if env.state().x.abs() >= env.config().x_limit {
                    // Wall contact zeroes the cart velocity; the energy
                    // check covers the free-flight regime only.
                    break;
                }
                let e = env.mechanical_energy();
                assert!(
                    e <= prev + 1e-6 * scale,
                    "energy increased at step {step}: {prev} -> {e}"
                );
                assert!(
                    (e - e0).abs() <= 1e-3 * scale,
                    "energy drifted at step {step}: {e0} -> {e}"
                );
                prev = e;
            }
        }
    }

    #[test]
    fn cart_never_escapes_the_track() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut env = CartPole::new(CartPoleConfig::default());
        let x_limit = env.config().x_limit;
        for _ in 0..100_000 {
            let force = rng.random_range(-10.0..10.0);
            let s = env.step(force).unwrap();
            assert!(s.x.abs() <= x_limit);
            assert!(s.theta >= -std::f64::consts::PI && s.theta < std::f64::consts::PI);
        }
    }

    #[test]
    fn trajectories_are_bit_deterministic() {
        let run = || {
            let mut env = CartPole::new(CartPoleConfig::default());
            let mut stream = Vec::new();
            for t in 0..500 {
                let force = ((t as f64) * 0.05).sin() * 10.0;
                let s = env.step(force).unwrap();
                stream.push((s.x, s.x_dot, s.theta, s.theta_dot));
            }
            stream
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn wrap_angle_halfopen_interval() {
        assert_eq!(wrap_angle(std::f64::consts::PI), -std::f64::consts::PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * std::f64::consts::PI / 2.0),
            -std::f64::consts::PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-3.0 * std::f64::consts::PI), -std::f64::consts::PI, epsilon = 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }
}
