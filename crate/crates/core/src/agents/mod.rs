//! Inner-loop agents: DDQN, Dueling DDQN, tabular Q-Learning and SARSA,
//! with their training and evaluation loops.

mod dqn;
mod hp;
mod replay;
mod tabular;
mod train;

pub use dqn::{ddqn_targets, soft_update, DqnAgent, DuelingSpec, QNetwork};
pub use hp::{HpRanges, HpSample};
pub use replay::ReplayBuffer;
pub use tabular::{tabular_update, CountBonus, TabularAgent, TabularKind};
pub use train::{
    evaluate_agent, evaluate_agent_logged, greedy_episode, real_solved, synthetic_converged, train_agent,
    train_episode, EarlyStopConfig, EarlyStopMode, EpisodeStats, EpsilonSchedule, StopReason, TrainConfig,
    TrainOutcome,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::envs::{EnvError, EnvSpec, TransitionSource};
use crate::neural::{Activation, NeuralError};
use crate::seeding::SimRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("SARSA update requires the next action")]
    MissingNextAction,
    #[error("agent diverged (non-finite loss or Q-values)")]
    Diverged,
    #[error("tabular agents need a grid-encoded environment, got '{0}'")]
    NotTabular(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("unknown agent kind '{0}'")]
    UnknownKind(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Ddqn,
    DuelingDdqn,
    QLearning,
    Sarsa,
}

impl AgentKind {
    pub fn is_tabular(self) -> bool {
        matches!(self, AgentKind::QLearning | AgentKind::Sarsa)
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ddqn" => Ok(AgentKind::Ddqn),
            "dueling_ddqn" | "dueling-ddqn" => Ok(AgentKind::DuelingDdqn),
            "qlearning" | "q_learning" => Ok(AgentKind::QLearning),
            "sarsa" => Ok(AgentKind::Sarsa),
            other => Err(AgentError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Ddqn => "ddqn",
            AgentKind::DuelingDdqn => "dueling_ddqn",
            AgentKind::QLearning => "qlearning",
            AgentKind::Sarsa => "sarsa",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentHyperparams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub discount: f64,
    pub target_update_rate: f64,
    pub eps_init: f64,
    pub eps_min: f64,
    pub eps_decay: f64,
    pub initial_episodes: usize,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub replay_capacity: usize,
    /// Dueling trunk output and stream hidden width.
    pub feature_dim: usize,
    pub grad_clip: f64,
    /// Count-based exploration bonus weight (tabular only, 0 disables).
    pub count_bonus_beta: f64,
}

impl Default for AgentHyperparams {
    /// Default deep-agent profile.
    fn default() -> Self {
        AgentHyperparams {
            learning_rate: 1e-3,
            batch_size: 128,
            discount: 0.99,
            target_update_rate: 0.01,
            eps_init: 1.0,
            eps_min: 0.1,
            eps_decay: 0.9,
            initial_episodes: 10,
            hidden_sizes: vec![128, 128],
            activation: Activation::Relu,
            replay_capacity: 100_000,
            feature_dim: 128,
            grad_clip: 10.0,
            count_bonus_beta: 0.0,
        }
    }
}

impl AgentHyperparams {
    /// Default Q-Learning / SARSA profile for Cliff Walking.
    pub fn tabular_default() -> Self {
        AgentHyperparams {
            learning_rate: 1.0,
            discount: 0.8,
            eps_init: 0.1,
            eps_min: 0.1,
            eps_decay: 0.0,
            initial_episodes: 0,
            ..AgentHyperparams::default()
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::InvalidHyperparams(m.to_string()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if self.batch_size < 1 || self.batch_size > self.replay_capacity {
            return bad("batch_size must be in 1..=replay_capacity");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must be in (0, 1]");
        }
        if !(self.target_update_rate > 0.0 && self.target_update_rate <= 1.0) {
            return bad("target_update_rate must be in (0, 1]");
        }
        if !(0.0 <= self.eps_min && self.eps_min <= self.eps_init && self.eps_init <= 1.0) {
            return bad("need 0 <= eps_min <= eps_init <= 1");
        }
        if !(0.0..=1.0).contains(&self.eps_decay) {
            return bad("eps_decay must be in [0, 1]");
        }
        if self.count_bonus_beta < 0.0 {
            return bad("count_bonus_beta must be >= 0");
        }
        Ok(())
    }
}

/// One environment interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Genuine terminal next state; TD targets do not bootstrap.
    pub terminal: bool,
    /// Episode ended at the step limit.
    pub truncated: bool,
    pub source: TransitionSource,
}

/// ε-greedy over `q`; ties go to the lowest action index.
pub fn epsilon_greedy(q: &[f64], eps: f64, rng: &mut SimRng) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        return rng.random_range(0..q.len());
    }
    argmax(q)
}

pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub enum Agent {
    Dqn(DqnAgent),
    Tabular(TabularAgent),
}

impl Agent {
    /// Fresh agent with randomly initialized networks (or a zero table).
    pub fn new(kind: AgentKind, hp: &AgentHyperparams, env: &EnvSpec, seed: u64) -> Result<Agent, AgentError> {
        hp.validate()?;
        Ok(match kind {
            AgentKind::Ddqn => Agent::Dqn(DqnAgent::new(hp, env, false, seed)?),
            AgentKind::DuelingDdqn => Agent::Dqn(DqnAgent::new(hp, env, true, seed)?),
            AgentKind::QLearning => Agent::Tabular(TabularAgent::new(hp, env, TabularKind::QLearning)?),
            AgentKind::Sarsa => Agent::Tabular(TabularAgent::new(hp, env, TabularKind::Sarsa)?),
        })
    }

    pub fn kind(&self) -> AgentKind {
        match self {
            Agent::Dqn(a) if a.is_dueling() => AgentKind::DuelingDdqn,
            Agent::Dqn(_) => AgentKind::Ddqn,
            Agent::Tabular(a) => match a.kind() {
                TabularKind::QLearning => AgentKind::QLearning,
                TabularKind::Sarsa => AgentKind::Sarsa,
            },
        }
    }

    pub fn hyperparams(&self) -> &AgentHyperparams {
        match self {
            Agent::Dqn(a) => a.hyperparams(),
            Agent::Tabular(a) => a.hyperparams(),
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        match self {
            Agent::Dqn(a) => a.q_values(state),
            Agent::Tabular(a) => Ok(a.q_values(state).to_vec()),
        }
    }

    pub fn select_action(&self, state: &[f64], eps: f64, rng: &mut SimRng) -> Result<usize, AgentError> {
        let q = self.q_values(state)?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(AgentError::Diverged);
        }
        Ok(epsilon_greedy(&q, eps, rng))
    }

    /// Learn from one transition. `next_action` is the action the behaviour
    /// policy picked in `next_state` (used by SARSA). Returns the loss of a
    /// gradient step when one was taken.
    pub fn learn(
        &mut self,
        t: &Transition,
        next_action: Option<usize>,
        episode: usize,
        rng: &mut SimRng,
    ) -> Result<Option<f64>, AgentError> {
        match self {
            Agent::Dqn(a) => a.learn(t, episode, rng),
            Agent::Tabular(a) => a.learn(t, next_action).map(|_| None),
        }
    }
}
