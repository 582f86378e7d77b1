use std::f64::consts::PI;

use rand::Rng;

use super::{EnvError, EnvSpec, Environment, EpisodeClock, StateEncoding, StepResult, TransitionSource};
use crate::seeding::rng_from_seed;

const DT: f64 = 0.2;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_POS_1: f64 = 0.5;
const LINK_COM_POS_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;
const GRAVITY: f64 = 9.8;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

/// Two-link underactuated swing-up, integrated with one RK4 step per action.
///
/// The observation is `[cos θ1, sin θ1, cos θ2, sin θ2, θ1', θ2']`.
/// Reward is −1 on every step, including the one reaching the goal height.
#[derive(Debug, Clone)]
pub struct Acrobot {
    pub(crate) spec: EnvSpec,
    /// `[θ1, θ2, θ1', θ2']`
    state: [f64; 4],
    clock: EpisodeClock,
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new()
    }
}

impl Acrobot {
    pub fn new() -> Self {
        Acrobot {
            spec: EnvSpec {
                name: "acrobot".into(),
                state_dim: 6,
                num_actions: 3,
                max_episode_steps: 500,
                solved_reward: -100.0,
                encoding: StateEncoding::Continuous,
            },
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    pub fn observe(s: [f64; 4]) -> Vec<f64> {
        vec![s[0].cos(), s[0].sin(), s[1].cos(), s[1].sin(), s[2], s[3]]
    }

    fn derivs(s: [f64; 4], torque: f64) -> [f64; 4] {
        let (m1, m2) = (LINK_MASS_1, LINK_MASS_2);
        let l1 = LINK_LENGTH_1;
        let (lc1, lc2) = (LINK_COM_POS_1, LINK_COM_POS_2);
        let (i1, i2) = (LINK_MOI, LINK_MOI);
        let g = GRAVITY;
        let [theta1, theta2, dtheta1, dtheta2] = s;
        let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
        let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
        let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
        let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
            - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
            + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
            + phi2;
        let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
            / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
        let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        [dtheta1, dtheta2, ddtheta1, ddtheta2]
    }

    /// Pure single-step dynamics on the internal angle state.
    pub fn dynamics(s: [f64; 4], action: usize) -> [f64; 4] {
        let torque = TORQUES[action];
        let add = |a: [f64; 4], k: [f64; 4], h: f64| -> [f64; 4] {
            [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]]
        };
        let k1 = Self::derivs(s, torque);
        let k2 = Self::derivs(add(s, k1, DT / 2.0), torque);
        let k3 = Self::derivs(add(s, k2, DT / 2.0), torque);
        let k4 = Self::derivs(add(s, k3, DT), torque);
        let mut ns = [0.0; 4];
        for i in 0..4 {
            ns[i] = s[i] + DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        ns[0] = wrap(ns[0], -PI, PI);
        ns[1] = wrap(ns[1], -PI, PI);
        ns[2] = ns[2].clamp(-MAX_VEL_1, MAX_VEL_1);
        ns[3] = ns[3].clamp(-MAX_VEL_2, MAX_VEL_2);
        ns
    }

    /// Tip above the bar: `-cos θ1 - cos(θ1 + θ2) > 1`.
    pub fn is_terminal_state(&self, obs: &[f64]) -> bool {
        let (c1, s1, c2, s2) = (obs[0], obs[1], obs[2], obs[3]);
        let cos_sum = c1 * c2 - s1 * s2;
        -c1 - cos_sum > 1.0
    }
}

fn wrap(mut x: f64, lo: f64, hi: f64) -> f64 {
    let diff = hi - lo;
    while x > hi {
        x -= diff;
    }
    while x < lo {
        x += diff;
    }
    x
}

impl Environment for Acrobot {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        for v in &mut self.state {
            *v = rng.random_range(-0.1..0.1);
        }
        self.clock.reset();
        Self::observe(self.state)
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        self.clock.check(action, self.spec.num_actions)?;
        self.state = Self::dynamics(self.state, action);
        let obs = Self::observe(self.state);
        let terminal = self.is_terminal_state(&obs);
        let (done, truncated) = self.clock.tick(terminal, self.spec.max_episode_steps);
        Ok(StepResult {
            next_state: obs,
            reward: -1.0,
            done,
            truncated,
            steps_elapsed: self.clock.steps,
            real_reward: Some(-1.0),
        })
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Real
    }
}
