//! Training and evaluation loops shared by every agent kind.

use rand::Rng;

use super::{Agent, AgentError, AgentHyperparams, AgentKind, Transition};
use crate::envs::Environment;
use crate::seeding::{derive_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarlyStopMode {
    /// Stop once training returns on the (synthetic) environment plateau.
    SyntheticConvergence,
    /// Stop once the trailing greedy test returns reach the solved reward.
    RealSolved,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopConfig {
    /// Window length `d`.
    pub window: usize,
    /// Relative tolerance `C_diff`.
    pub c_diff: f64,
    pub mode: EarlyStopMode,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        EarlyStopConfig { window: 10, c_diff: 0.01, mode: EarlyStopMode::SyntheticConvergence }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EarlyStopConverged,
    EarlyStopSolved,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Episode budget `n_e`.
    pub max_episodes: usize,
    pub early_stop: EarlyStopConfig,
    pub solved_reward: f64,
    /// Run one greedy probe episode on the real environment after every
    /// training episode even when the stop rule does not need it.
    pub probe_each_episode: bool,
}

impl TrainConfig {
    pub fn new(max_episodes: usize, early_stop: EarlyStopConfig, solved_reward: f64) -> Self {
        TrainConfig { max_episodes, early_stop, solved_reward, probe_each_episode: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub episodes_used: usize,
    /// Steps taken on the training environment.
    pub env_steps_used: usize,
    /// Steps whose dynamics came from the real environment.
    pub real_env_steps: usize,
    /// Per-episode returns as seen by the agent.
    pub episode_rewards: Vec<f64>,
    /// Per-episode unshaped real returns (empty when training on a synthetic env).
    pub real_episode_returns: Vec<f64>,
    /// Greedy probe returns on the real environment, one per episode when probing.
    pub probe_returns: Vec<f64>,
    /// Real training steps at the moment the solved rule first fired.
    pub solved_at_real_steps: Option<usize>,
    pub stop_reason: StopReason,
}

impl TrainOutcome {
    fn empty() -> Self {
        TrainOutcome {
            episodes_used: 0,
            env_steps_used: 0,
            real_env_steps: 0,
            episode_rewards: Vec::new(),
            real_episode_returns: Vec::new(),
            probe_returns: Vec::new(),
            solved_at_real_steps: None,
            stop_reason: StopReason::BudgetExhausted,
        }
    }
}

/// Per-episode multiplicative ε decay, floored at `eps_min`.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonSchedule {
    current: f64,
    min: f64,
    decay: f64,
}

impl EpsilonSchedule {
    pub fn new(hp: &AgentHyperparams) -> Self {
        EpsilonSchedule { current: hp.eps_init, min: hp.eps_min, decay: hp.eps_decay }
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn decay(&mut self) {
        self.current = (self.current * self.decay).max(self.min);
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `|C̄_d − C̄_2d| / |C̄_2d| ≤ C_diff` over the last `d` and the `d` before
/// them. Undefined (false) with fewer than `2d` returns or `C̄_2d = 0`.
pub fn synthetic_converged(returns: &[f64], window: usize, c_diff: f64) -> bool {
    let d = window.max(1);
    if returns.len() < 2 * d {
        return false;
    }
    let n = returns.len();
    let recent = mean(&returns[n - d..]);
    let prior = mean(&returns[n - 2 * d..n - d]);
    if prior == 0.0 {
        return false;
    }
    (recent - prior).abs() / prior.abs() <= c_diff
}

/// Mean of the last `d` test returns reaches `solved_reward`.
pub fn real_solved(test_returns: &[f64], window: usize, solved_reward: f64) -> bool {
    let d = window.max(1);
    test_returns.len() >= d && mean(&test_returns[test_returns.len() - d..]) >= solved_reward
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub agent_return: f64,
    pub real_return: Option<f64>,
    pub steps: usize,
    pub real_steps: usize,
}

/// Run one ε-greedy training episode, learning online.
pub fn train_episode<'f>(
    agent: &mut Agent,
    env: &mut dyn Environment,
    eps: f64,
    episode: usize,
    mut observer: Option<&mut (dyn FnMut(&Transition) + 'f)>,
    rng: &mut SimRng,
) -> Result<EpisodeStats, AgentError> {
    let on_policy = agent.kind() == AgentKind::Sarsa;
    let source = env.source();
    let mut state = env.reset(rng.random());
    let mut action = agent.select_action(&state, eps, rng)?;
    let mut stats = EpisodeStats { agent_return: 0.0, real_return: None, steps: 0, real_steps: 0 };
    loop {
        let r = env.step(action)?;
        stats.steps += 1;
        stats.agent_return += r.reward;
        if let Some(real) = r.real_reward {
            stats.real_steps += 1;
            *stats.real_return.get_or_insert(0.0) += real;
        }
        let terminal = r.terminal();
        let t = Transition {
            state,
            action,
            reward: r.reward,
            next_state: r.next_state,
            terminal,
            truncated: r.truncated,
            source,
        };
        if let Some(obs) = observer.as_deref_mut() {
            obs(&t);
        }
        let next_action = if on_policy {
            let a = if terminal { 0 } else { agent.select_action(&t.next_state, eps, rng)? };
            agent.learn(&t, Some(a), episode, rng)?;
            a
        } else {
            agent.learn(&t, None, episode, rng)?;
            if r.done {
                0
            } else {
                agent.select_action(&t.next_state, eps, rng)?
            }
        };
        if r.done {
            return Ok(stats);
        }
        state = t.next_state;
        action = next_action;
    }
}

/// Run one greedy episode without learning. Returns (return, steps).
pub fn greedy_episode(
    agent: &Agent,
    env: &mut dyn Environment,
    seed: u64,
    mut log: Option<&mut Vec<Transition>>,
) -> Result<(f64, usize), AgentError> {
    let source = env.source();
    let mut state = env.reset(seed);
    let mut total = 0.0;
    let mut steps = 0;
    loop {
        let q = agent.q_values(&state)?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(AgentError::Diverged);
        }
        let action = super::argmax(&q);
        let r = env.step(action)?;
        total += r.reward;
        steps += 1;
        if let Some(log) = log.as_deref_mut() {
            log.push(Transition {
                state: state.clone(),
                action,
                reward: r.reward,
                next_state: r.next_state.clone(),
                terminal: r.terminal(),
                truncated: r.truncated,
                source,
            });
        }
        if r.done {
            return Ok((total, steps));
        }
        state = r.next_state;
    }
}

/// Train until an early-stop rule fires or the episode budget runs out.
///
/// `probe` is a separate real-environment instance used for greedy test
/// episodes; it is required for [`EarlyStopMode::RealSolved`] to use test
/// returns (otherwise the unshaped training returns are used).
pub fn train_agent(
    agent: &mut Agent,
    env: &mut dyn Environment,
    cfg: &TrainConfig,
    mut probe: Option<&mut dyn Environment>,
    mut observer: Option<&mut dyn FnMut(&Transition)>,
    rng: &mut SimRng,
) -> Result<TrainOutcome, AgentError> {
    let mut out = TrainOutcome::empty();
    let mut eps = EpsilonSchedule::new(agent.hyperparams());
    let es = cfg.early_stop;
    let wants_probe = cfg.probe_each_episode || es.mode == EarlyStopMode::RealSolved;
    for episode in 0..cfg.max_episodes {
        let stats = train_episode(agent, env, eps.current(), episode, observer.as_deref_mut(), rng)?;
        eps.decay();
        out.episodes_used += 1;
        out.env_steps_used += stats.steps;
        out.real_env_steps += stats.real_steps;
        out.episode_rewards.push(stats.agent_return);
        if let Some(r) = stats.real_return {
            out.real_episode_returns.push(r);
        }
        if wants_probe {
            if let Some(p) = probe.as_deref_mut() {
                let (ret, _) = greedy_episode(agent, p, rng.random(), None)?;
                out.probe_returns.push(ret);
            }
        }
        let stop = match es.mode {
            EarlyStopMode::SyntheticConvergence => {
                synthetic_converged(&out.episode_rewards, es.window, es.c_diff).then_some(StopReason::EarlyStopConverged)
            }
            EarlyStopMode::RealSolved => {
                let series = if probe.is_some() { &out.probe_returns } else { &out.real_episode_returns };
                real_solved(series, es.window, cfg.solved_reward).then_some(StopReason::EarlyStopSolved)
            }
            EarlyStopMode::Disabled => None,
        };
        if let Some(reason) = stop {
            if reason == StopReason::EarlyStopSolved {
                out.solved_at_real_steps = Some(out.real_env_steps);
            }
            out.stop_reason = reason;
            break;
        }
    }
    Ok(out)
}

/// Mean greedy return over `n_te` real-environment episodes.
pub fn evaluate_agent(agent: &Agent, env: &mut dyn Environment, n_te: usize, seed: u64) -> Result<f64, AgentError> {
    Ok(evaluate_agent_logged(agent, env, n_te, seed, None)?.0)
}

/// Like [`evaluate_agent`], also returning the per-episode returns and
/// optionally logging every transition.
pub fn evaluate_agent_logged(
    agent: &Agent,
    env: &mut dyn Environment,
    n_te: usize,
    seed: u64,
    mut log: Option<&mut Vec<Transition>>,
) -> Result<(f64, Vec<f64>), AgentError> {
    let mut returns = Vec::with_capacity(n_te);
    for i in 0..n_te {
        let (ret, _) = greedy_episode(agent, env, derive_seed(&[seed, i as u64]), log.as_deref_mut())?;
        returns.push(ret);
    }
    let m = if returns.is_empty() { 0.0 } else { mean(&returns) };
    Ok((m, returns))
}
