use crate::agents::{
    evaluate_agent, train_agent, Agent, AgentError, AgentHyperparams, AgentKind, EarlyStopMode, HpRanges, TrainConfig,
    TrainOutcome,
};
use crate::envs::{EnvKind, Environment};
use crate::neural::{NetworkSpec, ParameterVector};
use crate::proxies::{RewardNetwork, RewardShapedEnv, RewardVariant, SyntheticEnvironment};
use crate::seeding::{derive_seed, rng_from_parts};

use super::ObjectiveKind;

/// Result of training and testing one agent on one candidate proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberEval {
    pub raw_score: f64,
    /// Inner-loop training steps (on the proxy).
    pub train_steps: usize,
    pub train_episodes: usize,
    /// Training steps that used real dynamics.
    pub real_train_steps: usize,
    /// Non-finite proxy output or agent divergence; `raw_score` is the floor.
    pub failed: bool,
    pub wall_ms: u64,
}

/// Black-box objective maximized by the outer loop.
pub trait Fitness: Sync {
    /// Score parameters `params`; all randomness must derive from `seed`.
    fn evaluate(&self, params: &ParameterVector, seed: u64) -> MemberEval;
}

/// Worst finite score, assigned to failed members.
pub fn failure_floor(objective: ObjectiveKind, max_episode_steps: usize, inner_budget: usize) -> f64 {
    match objective {
        ObjectiveKind::MaxReward | ObjectiveKind::Auc => -1e6,
        ObjectiveKind::RewardThreshold { c_sol, w_sol } => {
            -((max_episode_steps * inner_budget) as f64 + w_sol * c_sol.abs() * 10.0)
        }
    }
}

/// The agent-side half of a member evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerLoop {
    pub agent_kind: AgentKind,
    pub hyperparams: AgentHyperparams,
    /// Resample hyperparameters around `hyperparams` for every evaluation.
    pub hp_ranges: Option<HpRanges>,
    pub train: TrainConfig,
    pub test_episodes: usize,
    pub objective: ObjectiveKind,
}

impl InnerLoop {
    /// Hyperparameters for the evaluation seeded with `seed`.
    pub fn hyperparams_for(&self, seed: u64) -> AgentHyperparams {
        match self.hp_ranges {
            Some(ranges) => ranges.sample(self.agent_kind, &self.hyperparams, &mut rng_from_parts(&[seed, 3])).0,
            None => self.hyperparams.clone(),
        }
    }

    fn wants_probe(&self) -> bool {
        self.train.probe_each_episode
            || self.train.early_stop.mode == EarlyStopMode::RealSolved
            || self.objective == ObjectiveKind::Auc
    }

    /// Train a fresh agent on `train_env`, then test it on `real`.
    /// Returns the trained agent, the training outcome and the mean test return.
    pub fn run(
        &self,
        hp: &AgentHyperparams,
        train_env: &mut dyn Environment,
        real: &mut dyn Environment,
        probe: Option<&mut dyn Environment>,
        seed: u64,
    ) -> Result<(Agent, TrainOutcome, f64), AgentError> {
        let mut agent = Agent::new(self.agent_kind, hp, train_env.spec(), derive_seed(&[seed, 0]))?;
        let mut rng = rng_from_parts(&[seed, 1]);
        let mut cfg = self.train.clone();
        cfg.probe_each_episode = self.wants_probe();
        let outcome = train_agent(&mut agent, train_env, &cfg, probe, None, &mut rng)?;
        let test = evaluate_agent(&agent, real, self.test_episodes, derive_seed(&[seed, 2]))?;
        Ok((agent, outcome, test))
    }

    fn score(&self, outcome: &TrainOutcome, test: f64, use_real_steps: bool) -> f64 {
        let steps = if use_real_steps {
            outcome.solved_at_real_steps.unwrap_or(outcome.real_env_steps)
        } else {
            outcome.env_steps_used
        };
        self.objective.score(steps, test, &outcome.probe_returns)
    }
}

fn timed(f: impl FnOnce() -> MemberEval) -> MemberEval {
    let start = std::time::Instant::now();
    let mut eval = f();
    eval.wall_ms = start.elapsed().as_millis() as u64;
    eval
}

/// Scores a synthetic environment by training an agent on it alone and
/// testing that agent on the real task.
#[derive(Debug, Clone)]
pub struct SeFitness {
    pub env: EnvKind,
    pub net: NetworkSpec,
    pub inner: InnerLoop,
}

impl SeFitness {
    fn floor(&self) -> f64 {
        failure_floor(self.inner.objective, self.env.spec().max_episode_steps, self.inner.train.max_episodes)
    }

    fn try_evaluate(&self, params: &ParameterVector, seed: u64) -> Result<MemberEval, AgentError> {
        let mut se = SyntheticEnvironment::new(self.env, self.net.clone(), params.clone())
            .map_err(|e| AgentError::InvalidHyperparams(e.to_string()))?;
        let mut real = self.env.build();
        let mut probe = self.env.build();
        let hp = self.inner.hyperparams_for(seed);
        let probe_env: Option<&mut dyn Environment> = if self.inner.wants_probe() { Some(&mut probe) } else { None };
        let (_, outcome, test) = self.inner.run(&hp, &mut se, &mut real, probe_env, seed)?;
        Ok(MemberEval {
            raw_score: self.inner.score(&outcome, test, false),
            train_steps: outcome.env_steps_used,
            train_episodes: outcome.episodes_used,
            real_train_steps: outcome.real_env_steps,
            failed: false,
            wall_ms: 0,
        })
    }
}

impl Fitness for SeFitness {
    fn evaluate(&self, params: &ParameterVector, seed: u64) -> MemberEval {
        timed(|| {
            self.try_evaluate(params, seed).unwrap_or_else(|e| {
                log::debug!("synthetic env member failed: {e}");
                MemberEval {
                    raw_score: self.floor(),
                    train_steps: 0,
                    train_episodes: 0,
                    real_train_steps: 0,
                    failed: true,
                    wall_ms: 0,
                }
            })
        })
    }
}

/// Scores a reward network by training an agent on the shaped real
/// environment.
#[derive(Debug, Clone)]
pub struct RnFitness {
    pub env: EnvKind,
    pub phi: NetworkSpec,
    pub variant: RewardVariant,
    /// Shaping discount; `None` uses the agent's discount.
    pub gamma: Option<f64>,
    pub inner: InnerLoop,
}

impl RnFitness {
    fn floor(&self) -> f64 {
        failure_floor(self.inner.objective, self.env.spec().max_episode_steps, self.inner.train.max_episodes)
    }

    pub fn reward_network(&self, params: &ParameterVector, hp: &AgentHyperparams) -> Result<RewardNetwork, AgentError> {
        RewardNetwork::new(self.phi.clone(), params.clone(), self.variant, self.gamma.unwrap_or(hp.discount))
            .map_err(|e| AgentError::InvalidHyperparams(e.to_string()))
    }

    fn try_evaluate(&self, params: &ParameterVector, seed: u64) -> Result<MemberEval, AgentError> {
        let hp = self.inner.hyperparams_for(seed);
        let rn = self.reward_network(params, &hp)?;
        let mut shaped =
            RewardShapedEnv::new(self.env.build(), rn).map_err(|e| AgentError::InvalidHyperparams(e.to_string()))?;
        let mut real = self.env.build();
        let mut probe = self.env.build();
        let probe_env: Option<&mut dyn Environment> = if self.inner.wants_probe() { Some(&mut probe) } else { None };
        let (_, outcome, test) = self.inner.run(&hp, &mut shaped, &mut real, probe_env, seed)?;
        Ok(MemberEval {
            raw_score: self.inner.score(&outcome, test, true),
            train_steps: outcome.env_steps_used,
            train_episodes: outcome.episodes_used,
            real_train_steps: outcome.real_env_steps,
            failed: false,
            wall_ms: 0,
        })
    }
}

impl Fitness for RnFitness {
    fn evaluate(&self, params: &ParameterVector, seed: u64) -> MemberEval {
        timed(|| {
            self.try_evaluate(params, seed).unwrap_or_else(|e| {
                log::debug!("reward network member failed: {e}");
                MemberEval {
                    raw_score: self.floor(),
                    train_steps: 0,
                    train_episodes: 0,
                    real_train_steps: 0,
                    failed: true,
                    wall_ms: 0,
                }
            })
        })
    }
}
