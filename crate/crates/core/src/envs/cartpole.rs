use rand::Rng;

use super::{EnvError, EnvSpec, Environment, EpisodeClock, StateEncoding, StepResult, TransitionSource};
use crate::seeding::rng_from_seed;

pub const GRAVITY: f64 = 9.8;
pub const MASS_CART: f64 = 1.0;
pub const MASS_POLE: f64 = 0.1;
/// Half the pole length.
pub const HALF_LENGTH: f64 = 0.5;
pub const FORCE_MAG: f64 = 10.0;
pub const TAU: f64 = 0.02;
pub const X_THRESHOLD: f64 = 2.4;
/// 12 degrees.
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Cart-pole balancing with Euler integration; action 0 pushes left, 1 pushes right.
#[derive(Debug, Clone)]
pub struct CartPole {
    pub(crate) spec: EnvSpec,
    state: [f64; 4],
    clock: EpisodeClock,
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl CartPole {
    pub fn new() -> Self {
        CartPole {
            spec: EnvSpec {
                name: "cartpole".into(),
                state_dim: 4,
                num_actions: 2,
                max_episode_steps: 200,
                solved_reward: 195.0,
                encoding: StateEncoding::Continuous,
            },
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    /// Pure single-step dynamics.
    pub fn dynamics(state: [f64; 4], action: usize) -> [f64; 4] {
        let [x, x_dot, theta, theta_dot] = state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let total_mass = MASS_CART + MASS_POLE;
        let polemass_length = MASS_POLE * HALF_LENGTH;
        let (sin, cos) = theta.sin_cos();
        let temp = (force + polemass_length * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / total_mass));
        let x_acc = temp - polemass_length * theta_acc * cos / total_mass;
        [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ]
    }

    pub fn is_terminal_state(&self, state: &[f64]) -> bool {
        let x = state[0];
        let theta = state[2];
        !(-X_THRESHOLD..=X_THRESHOLD).contains(&x) || !(-THETA_THRESHOLD..=THETA_THRESHOLD).contains(&theta)
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }
}

impl Environment for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        for v in &mut self.state {
            *v = rng.random_range(-0.05..0.05);
        }
        self.clock.reset();
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        self.clock.check(action, self.spec.num_actions)?;
        self.state = Self::dynamics(self.state, action);
        let terminal = self.is_terminal_state(&self.state);
        let (done, truncated) = self.clock.tick(terminal, self.spec.max_episode_steps);
        Ok(StepResult {
            next_state: self.state.to_vec(),
            reward: 1.0,
            done,
            truncated,
            steps_elapsed: self.clock.steps,
            real_reward: Some(1.0),
        })
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Real
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Second transcription of the classic-control equations, written
    /// against the textbook form (Florian 2007, with the sign convention of
    /// the reference implementation).
    fn oracle_step(s: [f64; 4], push_right: bool) -> [f64; 4] {
        let g = 9.8;
        let mc = 1.0;
        let mp = 0.1;
        let l = 0.5;
        let f = if push_right { 10.0 } else { -10.0 };
        let dt = 0.02;
        let (x, xd, th, thd) = (s[0], s[1], s[2], s[3]);
        let m = mc + mp;
        let num = g * th.sin() + th.cos() * ((-f - mp * l * thd.powi(2) * th.sin()) / m);
        let den = l * (4.0 / 3.0 - mp * th.cos().powi(2) / m);
        let thdd = num / den;
        let xdd = (f + mp * l * (thd.powi(2) * th.sin() - thdd * th.cos())) / m;
        [x + dt * xd, xd + dt * xdd, th + dt * thd, thd + dt * thdd]
    }

    #[test]
    fn single_step_matches_oracle() {
        let got = CartPole::dynamics([0.0; 4], 1);
        let want = oracle_step([0.0; 4], true);
        for i in 0..4 {
            assert!((got[i] - want[i]).abs() < 1e-12, "{got:?} vs {want:?}");
        }
        // From rest, pushing right accelerates the cart right and tips the pole left.
        assert_eq!(got[0], 0.0);
        assert!(got[1] > 0.0 && got[3] < 0.0);

        let s = [0.1, -0.3, 0.05, 0.2];
        for a in 0..2 {
            let got = CartPole::dynamics(s, a);
            let want = oracle_step(s, a == 1);
            for i in 0..4 {
                assert!((got[i] - want[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reset_is_seeded_and_bounded() {
        let mut env = CartPole::new();
        let a = env.reset(7);
        let b = env.reset(7);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-0.05..=0.05).contains(v)));
        assert_ne!(env.reset(8), a);
    }

    #[test]
    fn termination_bounds() {
        let env = CartPole::new();
        assert!(env.is_terminal_state(&[0.0, 0.0, 0.3, 0.0]));
        assert!(env.is_terminal_state(&[0.0, 0.0, -0.21, 0.0]));
        assert!(!env.is_terminal_state(&[0.0, 0.0, 0.2094, 0.0]));
        assert!(env.is_terminal_state(&[2.41, 0.0, 0.0, 0.0]));
        assert!(!env.is_terminal_state(&[2.39, 0.0, 0.0, 0.0]));
        assert!(!env.is_terminal_state(&[0.0; 4]));
    }

    #[test]
    fn push_right_falls_before_limit() {
        let mut env = CartPole::new();
        env.reset(3);
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let r = env.step(1).unwrap();
            total += r.reward;
            steps += 1;
            if r.done {
                assert!(!r.truncated);
                break;
            }
        }
        assert!(steps < 200);
        assert_eq!(total, steps as f64);
        assert_eq!(env.step(0), Err(EnvError::EpisodeFinished));
    }
}
