//! Discrete-action environments and the stepping interface shared by real
//! tasks, synthetic environments and reward-shaped wrappers.

mod acrobot;
mod cartpole;
mod cliff;
mod gridworld;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use cliff::{CliffCell, CliffWalking, CLIFF_COLS, CLIFF_ROWS};
pub use gridworld::GridWorld;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("step called on a finished episode; call reset first")]
    EpisodeFinished,
    #[error("step called before reset")]
    NotReset,
    #[error("action {action} out of range for {num_actions} actions")]
    InvalidAction { action: usize, num_actions: usize },
    #[error("state has length {got}, expected {expected}")]
    StateDim { got: usize, expected: usize },
    #[error("unknown environment '{0}'")]
    UnknownEnv(String),
    #[error("proxy produced a non-finite output")]
    NonFinite,
}

/// How a state vector maps to a discrete cell, for tabular consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateEncoding {
    Continuous,
    /// State is `(row / (rows - 1), col / (cols - 1))`.
    Grid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    pub num_actions: usize,
    pub max_episode_steps: usize,
    pub solved_reward: f64,
    pub encoding: StateEncoding,
}

impl EnvSpec {
    pub fn num_discrete_states(&self) -> Option<usize> {
        match self.encoding {
            StateEncoding::Continuous => None,
            StateEncoding::Grid { rows, cols } => Some(rows * cols),
        }
    }

    /// Nearest grid cell for a (possibly synthetic, off-grid) state vector.
    /// Coordinates are rounded and clamped into the grid.
    pub fn discrete_index(&self, state: &[f64]) -> Option<usize> {
        match self.encoding {
            StateEncoding::Continuous => None,
            StateEncoding::Grid { rows, cols } => {
                let row = decode_axis(state.first().copied().unwrap_or(0.0), rows);
                let col = decode_axis(state.get(1).copied().unwrap_or(0.0), cols);
                Some(row * cols + col)
            }
        }
    }

    /// Total return bounds reachable in one episode, used to sanity-check
    /// evaluation records.
    pub fn return_bounds(&self) -> (f64, f64) {
        let steps = self.max_episode_steps as f64;
        match self.name.as_str() {
            "cartpole" => (1.0, steps),
            "acrobot" => (-steps, -1.0),
            "cliff" => (-100.0 - (steps - 1.0), -13.0),
            _ => (-steps, 10.0),
        }
    }
}

fn decode_axis(v: f64, n: usize) -> usize {
    if n <= 1 || !v.is_finite() {
        return 0;
    }
    let scaled = (v * (n - 1) as f64).round();
    scaled.clamp(0.0, (n - 1) as f64) as usize
}

pub(crate) fn encode_axis(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionSource {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    /// Reward presented to the agent.
    pub reward: f64,
    pub done: bool,
    /// Episode ended only because of the step limit.
    pub truncated: bool,
    pub steps_elapsed: usize,
    /// Unshaped real-environment reward, when real dynamics produced the step.
    pub real_reward: Option<f64>,
}

impl StepResult {
    /// True when the next state is a genuine terminal state (TD target
    /// must not bootstrap).
    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

/// Anything an agent can be trained on.
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
    fn source(&self) -> TransitionSource;
}

/// Shared step-counter bookkeeping for the real tasks.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    pub steps: usize,
    pub started: bool,
    pub finished: bool,
}

impl EpisodeClock {
    pub fn reset(&mut self) {
        self.steps = 0;
        self.started = true;
        self.finished = false;
    }

    pub fn check(&self, action: usize, num_actions: usize) -> Result<(), EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        if action >= num_actions {
            return Err(EnvError::InvalidAction { action, num_actions });
        }
        Ok(())
    }

    /// Advance one step; returns (done, truncated).
    pub fn tick(&mut self, terminal: bool, max_steps: usize) -> (bool, bool) {
        self.steps += 1;
        let truncated = !terminal && self.steps >= max_steps;
        let done = terminal || truncated;
        self.finished = done;
        (done, truncated)
    }
}

/// Environment names accepted in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    CartPole,
    Acrobot,
    Cliff,
    GridWorld { rows: usize, cols: usize },
}

impl EnvKind {
    pub fn spec(&self) -> EnvSpec {
        self.build().spec().clone()
    }

    pub fn build(&self) -> RealEnv {
        match *self {
            EnvKind::CartPole => RealEnv::CartPole(CartPole::new()),
            EnvKind::Acrobot => RealEnv::Acrobot(Acrobot::new()),
            EnvKind::Cliff => RealEnv::Cliff(CliffWalking::new()),
            EnvKind::GridWorld { rows, cols } => RealEnv::GridWorld(GridWorld::new(rows, cols)),
        }
    }
}

impl FromStr for EnvKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "cartpole" | "cartpole-v0" => return Ok(EnvKind::CartPole),
            "acrobot" | "acrobot-v1" => return Ok(EnvKind::Acrobot),
            "cliff" | "cliffwalking" => return Ok(EnvKind::Cliff),
            _ => {}
        }
        let dims = lower
            .strip_prefix("gridworld:")
            .and_then(|d| d.split_once('x'))
            .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)));
        match dims {
            Some((rows, cols)) if rows >= 1 && cols >= 1 && rows * cols >= 2 => {
                Ok(EnvKind::GridWorld { rows, cols })
            }
            _ => Err(EnvError::UnknownEnv(s.to_string())),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvKind::CartPole => f.write_str("cartpole"),
            EnvKind::Acrobot => f.write_str("acrobot"),
            EnvKind::Cliff => f.write_str("cliff"),
            EnvKind::GridWorld { rows, cols } => write!(f, "gridworld:{rows}x{cols}"),
        }
    }
}

/// One of the real tasks.
#[derive(Debug, Clone)]
pub enum RealEnv {
    CartPole(CartPole),
    Acrobot(Acrobot),
    Cliff(CliffWalking),
    GridWorld(GridWorld),
}

impl RealEnv {
    /// True iff `state` terminates an episode under the task rules,
    /// ignoring the step limit.
    pub fn is_terminal_state(&self, state: &[f64]) -> bool {
        match self {
            RealEnv::CartPole(e) => e.is_terminal_state(state),
            RealEnv::Acrobot(e) => e.is_terminal_state(state),
            RealEnv::Cliff(e) => e.is_terminal_state(state),
            RealEnv::GridWorld(e) => e.is_terminal_state(state),
        }
    }

    /// Override the step limit (used by configs that shorten episodes).
    pub fn set_max_episode_steps(&mut self, steps: usize) {
        let spec = match self {
            RealEnv::CartPole(e) => &mut e.spec,
            RealEnv::Acrobot(e) => &mut e.spec,
            RealEnv::Cliff(e) => &mut e.spec,
            RealEnv::GridWorld(e) => &mut e.spec,
        };
        spec.max_episode_steps = steps.max(1);
    }

    fn inner(&self) -> &dyn Environment {
        match self {
            RealEnv::CartPole(e) => e,
            RealEnv::Acrobot(e) => e,
            RealEnv::Cliff(e) => e,
            RealEnv::GridWorld(e) => e,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Environment {
        match self {
            RealEnv::CartPole(e) => e,
            RealEnv::Acrobot(e) => e,
            RealEnv::Cliff(e) => e,
            RealEnv::GridWorld(e) => e,
        }
    }
}

impl Environment for RealEnv {
    fn spec(&self) -> &EnvSpec {
        self.inner().spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.inner_mut().reset(seed)
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        self.inner_mut().step(action)
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Real
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_env_names() {
        assert_eq!("cartpole".parse::<EnvKind>().unwrap(), EnvKind::CartPole);
        assert_eq!("Acrobot".parse::<EnvKind>().unwrap(), EnvKind::Acrobot);
        assert_eq!("cliff".parse::<EnvKind>().unwrap(), EnvKind::Cliff);
        assert_eq!(
            "gridworld:2x3".parse::<EnvKind>().unwrap(),
            EnvKind::GridWorld { rows: 2, cols: 3 }
        );
        assert!("gridworld:1x1".parse::<EnvKind>().is_err());
        assert!("mujoco".parse::<EnvKind>().is_err());
        for k in [EnvKind::CartPole, EnvKind::Acrobot, EnvKind::Cliff, EnvKind::GridWorld { rows: 2, cols: 2 }] {
            assert_eq!(k.to_string().parse::<EnvKind>().unwrap(), k);
        }
    }

    #[test]
    fn spec_invariants_hold() {
        let expected = [
            (EnvKind::CartPole, 4, 2, 200, 195.0),
            (EnvKind::Acrobot, 6, 3, 500, -100.0),
            (EnvKind::Cliff, 2, 4, 50, -20.0),
        ];
        for (kind, dim, actions, steps, solved) in expected {
            let spec = kind.spec();
            assert_eq!(spec.state_dim, dim);
            assert_eq!(spec.num_actions, actions);
            assert_eq!(spec.max_episode_steps, steps);
            assert_eq!(spec.solved_reward, solved);
        }
    }

    #[test]
    fn grid_decoding_rounds_and_clamps() {
        let spec = EnvKind::Cliff.spec();
        assert_eq!(spec.discrete_index(&[1.0, 0.0]), Some(36));
        assert_eq!(spec.discrete_index(&[1.0, 1.0]), Some(47));
        assert_eq!(spec.discrete_index(&[-3.0, 7.0]), Some(11));
        assert_eq!(spec.discrete_index(&[f64::NAN, 0.0]), Some(0));
        assert_eq!(EnvKind::CartPole.spec().discrete_index(&[0.0; 4]), None);
    }
}
