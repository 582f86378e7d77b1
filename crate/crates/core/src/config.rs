//! Run configuration: a flat `key = value` text format with dotted section
//! prefixes (`nes.step_size = 0.5`).
//!
//! Every key has a default and unknown keys are rejected, so a typo never
//! silently falls back to a default. Files are applied in order, then
//! `--set key=value` overrides. [`RunConfig::to_text`] writes every
//! effective value (with `auto` entries resolved), and parsing that text
//! back reproduces the same run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::agents::{AgentHyperparams, AgentKind, EarlyStopConfig, EarlyStopMode, HpRanges, TrainConfig};
use crate::envs::EnvKind;
use crate::evalharness::DensityConfig;
use crate::nes::{InnerLoop, NesConfig, ObjectiveKind, ScoreTransform};
use crate::neural::Activation;
use crate::proxies::RewardVariant;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for config key '{key}': {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("{path}:{line}: expected 'key = value'")]
    Syntax { path: String, line: usize },
    #[error("--set expects key=value, got '{0}'")]
    BadOverride(String),
    #[error("config key '{key}' conflicts with this subcommand: {reason}")]
    Conflict { key: String, reason: String },
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which kind of proxy a run trains or evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyKind {
    Synthetic,
    Reward,
}

impl ProxyKind {
    pub fn name(self) -> &'static str {
        match self {
            ProxyKind::Synthetic => "se",
            ProxyKind::Reward => "rn",
        }
    }
}

/// Agent profile plus variation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentBlock {
    pub kind: AgentKind,
    pub hp: AgentHyperparams,
    /// Resample hyperparameters from `ranges` for every inner-loop agent.
    pub vary: bool,
    pub ranges: HpRanges,
    /// `None` picks the proxy kind's default: synthetic convergence for
    /// SEs, real-task solved for RNs.
    pub early_stop: Option<EarlyStopMode>,
    pub early_stop_window: usize,
    pub c_diff: f64,
}

/// NES settings; `c_sol = None` uses the environment's solved reward.
#[derive(Debug, Clone, PartialEq)]
pub struct NesBlock {
    pub step_size: f64,
    pub noise_sigma: f64,
    pub population_size: usize,
    pub outer_loops: usize,
    pub mirrored: bool,
    pub transform: ScoreTransform,
    pub objective: String,
    pub c_sol: Option<f64>,
    pub w_sol: f64,
    pub inner_budget: usize,
    pub test_episodes: usize,
    pub stop_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyBlock {
    /// `None` takes the kind implied by the subcommand.
    pub kind: Option<ProxyKind>,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub variant: RewardVariant,
    /// Shaping discount; `None` uses the agent's discount.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBlock {
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub run_id: String,
    /// Record member wall-clock times in the generation log. Off by
    /// default so logs are byte-reproducible.
    pub wall_clock: bool,
}

/// Settings for the evaluation subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBlock {
    /// `None` uses `agent.kind`.
    pub agent_kind: Option<AgentKind>,
    pub agents_per_target: usize,
    pub max_episodes: usize,
    pub test_episodes: usize,
    pub vary_hps: bool,
    pub ranges: HpRanges,
    /// Add a "train: real" arm to density and transfer experiments.
    pub baseline: bool,
    pub baseline_instances: usize,
    /// Real-step budget per alternating learning curve.
    pub max_real_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedBlock {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Agents trained on the real environment to produce the transition log.
    pub log_agents: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvKind,
    pub agent: AgentBlock,
    pub nes: NesBlock,
    pub proxy: ProxyBlock,
    pub run: RunBlock,
    pub eval: EvalBlock,
    pub supervised: SupervisedBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nes = NesConfig::default();
        RunConfig {
            env: EnvKind::CartPole,
            agent: AgentBlock {
                kind: AgentKind::Ddqn,
                hp: AgentHyperparams::default(),
                vary: false,
                ranges: HpRanges::SyntheticEnv,
                early_stop: None,
                early_stop_window: 10,
                c_diff: 0.01,
            },
            nes: NesBlock {
                step_size: nes.step_size,
                noise_sigma: nes.noise_sigma,
                population_size: nes.population_size,
                outer_loops: nes.outer_loops,
                mirrored: nes.mirrored,
                transform: nes.transform,
                objective: nes.objective.name().to_string(),
                c_sol: None,
                w_sol: 100.0,
                inner_budget: nes.inner_budget,
                test_episodes: nes.test_episodes,
                stop_score: None,
            },
            proxy: ProxyBlock {
                kind: None,
                hidden_sizes: vec![64],
                activation: Activation::Tanh,
                variant: RewardVariant::AdditiveNonPotential,
                gamma: None,
            },
            run: RunBlock { seed: 0, workers: 1, out_dir: PathBuf::from("runs"), run_id: "run".into(), wall_clock: false },
            eval: EvalBlock {
                agent_kind: None,
                agents_per_target: 10,
                max_episodes: 1000,
                test_episodes: 10,
                vary_hps: true,
                ranges: HpRanges::SyntheticEnv,
                baseline: true,
                baseline_instances: 10,
                max_real_steps: 5000,
            },
            supervised: SupervisedBlock { epochs: 100, batch_size: 1024, learning_rate: 1e-3, log_agents: 10 },
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if value.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn parse_sizes(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

fn join_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_early_stop(key: &str, value: &str) -> Result<Option<EarlyStopMode>, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "auto" => Ok(None),
        "synthetic_convergence" => Ok(Some(EarlyStopMode::SyntheticConvergence)),
        "real_solved" => Ok(Some(EarlyStopMode::RealSolved)),
        "disabled" => Ok(Some(EarlyStopMode::Disabled)),
        _ => Err(ConfigError::InvalidValue {
            key: key.into(),
            value: value.into(),
            reason: "expected auto, synthetic_convergence, real_solved or disabled".into(),
        }),
    }
}

fn early_stop_name(mode: EarlyStopMode) -> &'static str {
    match mode {
        EarlyStopMode::SyntheticConvergence => "synthetic_convergence",
        EarlyStopMode::RealSolved => "real_solved",
        EarlyStopMode::Disabled => "disabled",
    }
}

fn parse_stop_score(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn parse_proxy_kind(key: &str, value: &str) -> Result<Option<ProxyKind>, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "auto" => Ok(None),
        "se" => Ok(Some(ProxyKind::Synthetic)),
        "rn" => Ok(Some(ProxyKind::Reward)),
        _ => Err(ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: "expected auto, se or rn".into() }),
    }
}

const OBJECTIVES: [&str; 3] = ["max_reward", "reward_threshold", "auc"];

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (k, v) = (key.trim(), value.trim());
        let hp = &mut self.agent.hp;
        match k {
            "env.name" => self.env = parse_value(k, v)?,

            "agent.kind" => self.agent.kind = parse_value(k, v)?,
            "agent.learning_rate" => hp.learning_rate = parse_value(k, v)?,
            "agent.batch_size" => hp.batch_size = parse_value(k, v)?,
            "agent.discount" => hp.discount = parse_value(k, v)?,
            "agent.target_update_rate" => hp.target_update_rate = parse_value(k, v)?,
            "agent.eps_init" => hp.eps_init = parse_value(k, v)?,
            "agent.eps_min" => hp.eps_min = parse_value(k, v)?,
            "agent.eps_decay" => hp.eps_decay = parse_value(k, v)?,
            "agent.initial_episodes" => hp.initial_episodes = parse_value(k, v)?,
            "agent.hidden_sizes" => hp.hidden_sizes = parse_sizes(k, v)?,
            "agent.activation" => hp.activation = parse_value(k, v)?,
            "agent.replay_capacity" => hp.replay_capacity = parse_value(k, v)?,
            "agent.feature_dim" => hp.feature_dim = parse_value(k, v)?,
            "agent.grad_clip" => hp.grad_clip = parse_value(k, v)?,
            "agent.count_bonus_beta" => hp.count_bonus_beta = parse_value(k, v)?,
            "agent.vary" => self.agent.vary = parse_value(k, v)?,
            "agent.ranges" => self.agent.ranges = parse_value(k, v)?,
            "agent.early_stop" => self.agent.early_stop = parse_early_stop(k, v)?,
            "agent.early_stop_window" => self.agent.early_stop_window = parse_value(k, v)?,
            "agent.c_diff" => self.agent.c_diff = parse_value(k, v)?,

            "nes.step_size" => self.nes.step_size = parse_value(k, v)?,
            "nes.noise_sigma" => self.nes.noise_sigma = parse_value(k, v)?,
            "nes.population_size" => self.nes.population_size = parse_value(k, v)?,
            "nes.outer_loops" => self.nes.outer_loops = parse_value(k, v)?,
            "nes.mirrored" => self.nes.mirrored = parse_value(k, v)?,
            "nes.transform" => self.nes.transform = parse_value(k, v)?,
            "nes.objective" => {
                let name = v.to_ascii_lowercase();
                if !OBJECTIVES.contains(&name.as_str()) {
                    return Err(ConfigError::InvalidValue {
                        key: k.into(),
                        value: v.into(),
                        reason: format!("expected one of {}", OBJECTIVES.join(", ")),
                    });
                }
                self.nes.objective = name;
            }
            "nes.c_sol" => self.nes.c_sol = parse_auto(k, v)?,
            "nes.w_sol" => self.nes.w_sol = parse_value(k, v)?,
            "nes.inner_budget" => self.nes.inner_budget = parse_value(k, v)?,
            "nes.test_episodes" => self.nes.test_episodes = parse_value(k, v)?,
            "nes.stop_score" => self.nes.stop_score = parse_stop_score(k, v)?,

            "proxy.kind" => self.proxy.kind = parse_proxy_kind(k, v)?,
            "proxy.hidden_sizes" => self.proxy.hidden_sizes = parse_sizes(k, v)?,
            "proxy.activation" => self.proxy.activation = parse_value(k, v)?,
            "proxy.variant" => self.proxy.variant = parse_value(k, v)?,
            "proxy.gamma" => self.proxy.gamma = parse_auto(k, v)?,

            "run.seed" => self.run.seed = parse_value(k, v)?,
            "run.workers" => self.run.workers = parse_value(k, v)?,
            "run.out_dir" => self.run.out_dir = PathBuf::from(v),
            "run.run_id" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(ConfigError::InvalidValue {
                        key: k.into(),
                        value: v.into(),
                        reason: "must be a non-empty file name".into(),
                    });
                }
                self.run.run_id = v.to_string();
            }
            "run.wall_clock" => self.run.wall_clock = parse_value(k, v)?,

            "eval.agent_kind" => self.eval.agent_kind = parse_auto(k, v)?,
            "eval.agents_per_target" => self.eval.agents_per_target = parse_value(k, v)?,
            "eval.max_episodes" => self.eval.max_episodes = parse_value(k, v)?,
            "eval.test_episodes" => self.eval.test_episodes = parse_value(k, v)?,
            "eval.vary_hps" => self.eval.vary_hps = parse_value(k, v)?,
            "eval.ranges" => self.eval.ranges = parse_value(k, v)?,
            "eval.baseline" => self.eval.baseline = parse_value(k, v)?,
            "eval.baseline_instances" => self.eval.baseline_instances = parse_value(k, v)?,
            "eval.max_real_steps" => self.eval.max_real_steps = parse_value(k, v)?,

            "supervised.epochs" => self.supervised.epochs = parse_value(k, v)?,
            "supervised.batch_size" => self.supervised.batch_size = parse_value(k, v)?,
            "supervised.learning_rate" => self.supervised.learning_rate = parse_value(k, v)?,
            "supervised.log_agents" => self.supervised.log_agents = parse_value(k, v)?,

            _ => return Err(ConfigError::UnknownKey(k.to_string())),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text`. Blank lines and lines
    /// starting with `#` are ignored; `source` names the text in errors.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { path: source.to_string(), line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (k, v) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        self.set(k, v)
    }

    /// Defaults, then `files` in order, then `overrides`.
    pub fn load(files: &[PathBuf], overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for f in files {
            cfg.apply_file(f)?;
        }
        for o in overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg)
    }

    /// Fix the proxy kind from the subcommand; an explicit conflicting
    /// `proxy.kind` is an error.
    pub fn bind_proxy_kind(&mut self, kind: ProxyKind) -> Result<(), ConfigError> {
        match self.proxy.kind {
            Some(k) if k != kind => Err(ConfigError::Conflict {
                key: "proxy.kind".into(),
                reason: format!("set to '{}' but the subcommand trains '{}'", k.name(), kind.name()),
            }),
            _ => {
                self.proxy.kind = Some(kind);
                Ok(())
            }
        }
    }

    pub fn c_sol(&self) -> f64 {
        self.nes.c_sol.unwrap_or_else(|| self.env.spec().solved_reward)
    }

    pub fn objective(&self) -> ObjectiveKind {
        match self.nes.objective.as_str() {
            "reward_threshold" => ObjectiveKind::RewardThreshold { c_sol: self.c_sol(), w_sol: self.nes.w_sol },
            "auc" => ObjectiveKind::Auc,
            _ => ObjectiveKind::MaxReward,
        }
    }

    pub fn nes_config(&self) -> NesConfig {
        NesConfig {
            step_size: self.nes.step_size,
            noise_sigma: self.nes.noise_sigma,
            population_size: self.nes.population_size,
            outer_loops: self.nes.outer_loops,
            mirrored: self.nes.mirrored,
            transform: self.nes.transform,
            objective: self.objective(),
            vary_agent_hps: self.agent.vary,
            inner_budget: self.nes.inner_budget,
            test_episodes: self.nes.test_episodes,
            stop_score: self.nes.stop_score,
        }
    }

    fn early_stop_mode(&self) -> EarlyStopMode {
        self.agent.early_stop.unwrap_or(match self.proxy.kind {
            Some(ProxyKind::Reward) => EarlyStopMode::RealSolved,
            _ => EarlyStopMode::SyntheticConvergence,
        })
    }

    /// The agent-side half of an NES member evaluation.
    pub fn inner_loop(&self) -> InnerLoop {
        let early_stop =
            EarlyStopConfig { window: self.agent.early_stop_window, c_diff: self.agent.c_diff, mode: self.early_stop_mode() };
        InnerLoop {
            agent_kind: self.agent.kind,
            hyperparams: self.agent.hp.clone(),
            hp_ranges: self.agent.vary.then_some(self.agent.ranges),
            train: TrainConfig::new(self.nes.inner_budget, early_stop, self.env.spec().solved_reward),
            test_episodes: self.nes.test_episodes,
            objective: self.objective(),
        }
    }

    pub fn eval_agent_kind(&self) -> AgentKind {
        self.eval.agent_kind.unwrap_or(self.agent.kind)
    }

    pub fn density_config(&self) -> DensityConfig {
        DensityConfig {
            agent_kind: self.eval_agent_kind(),
            base_hp: self.agent.hp.clone(),
            hp_ranges: self.eval.vary_hps.then_some(self.eval.ranges),
            agents_per_target: self.eval.agents_per_target,
            max_episodes: self.eval.max_episodes,
            test_episodes: self.eval.test_episodes,
            early_stop_window: self.agent.early_stop_window,
            c_diff: self.agent.c_diff,
            seed: self.run.seed,
            workers: self.run.workers,
        }
    }

    /// Semantic checks that `set` cannot do key by key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, value: String, reason: String| {
            Err(ConfigError::InvalidValue { key: key.into(), value, reason })
        };
        if let Err(e) = self.agent.hp.validate() {
            return invalid("agent", String::new(), e.to_string());
        }
        if let Err(e) = self.nes_config().validate() {
            return invalid("nes", String::new(), e.to_string());
        }
        if self.run.workers == 0 {
            return invalid("run.workers", "0".into(), "need at least one worker".into());
        }
        if let Some(g) = self.proxy.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return invalid("proxy.gamma", g.to_string(), "must be in (0, 1]".into());
            }
        }
        if self.proxy.hidden_sizes.iter().any(|&h| h == 0) {
            return invalid("proxy.hidden_sizes", join_sizes(&self.proxy.hidden_sizes), "sizes must be > 0".into());
        }
        Ok(())
    }

    /// Every key with its effective value, in a fixed order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let hp = &self.agent.hp;
        let proxy_kind = self.proxy.kind.map(ProxyKind::name).unwrap_or("auto");
        vec![
            ("env.name", self.env.to_string()),
            ("agent.kind", self.agent.kind.to_string()),
            ("agent.learning_rate", hp.learning_rate.to_string()),
            ("agent.batch_size", hp.batch_size.to_string()),
            ("agent.discount", hp.discount.to_string()),
            ("agent.target_update_rate", hp.target_update_rate.to_string()),
            ("agent.eps_init", hp.eps_init.to_string()),
            ("agent.eps_min", hp.eps_min.to_string()),
            ("agent.eps_decay", hp.eps_decay.to_string()),
            ("agent.initial_episodes", hp.initial_episodes.to_string()),
            ("agent.hidden_sizes", join_sizes(&hp.hidden_sizes)),
            ("agent.activation", hp.activation.to_string()),
            ("agent.replay_capacity", hp.replay_capacity.to_string()),
            ("agent.feature_dim", hp.feature_dim.to_string()),
            ("agent.grad_clip", hp.grad_clip.to_string()),
            ("agent.count_bonus_beta", hp.count_bonus_beta.to_string()),
            ("agent.vary", self.agent.vary.to_string()),
            ("agent.ranges", self.agent.ranges.to_string()),
            ("agent.early_stop", early_stop_name(self.early_stop_mode()).to_string()),
            ("agent.early_stop_window", self.agent.early_stop_window.to_string()),
            ("agent.c_diff", self.agent.c_diff.to_string()),
            ("nes.step_size", self.nes.step_size.to_string()),
            ("nes.noise_sigma", self.nes.noise_sigma.to_string()),
            ("nes.population_size", self.nes.population_size.to_string()),
            ("nes.outer_loops", self.nes.outer_loops.to_string()),
            ("nes.mirrored", self.nes.mirrored.to_string()),
            ("nes.transform", self.nes.transform.to_string()),
            ("nes.objective", self.nes.objective.clone()),
            ("nes.c_sol", self.c_sol().to_string()),
            ("nes.w_sol", self.nes.w_sol.to_string()),
            ("nes.inner_budget", self.nes.inner_budget.to_string()),
            ("nes.test_episodes", self.nes.test_episodes.to_string()),
            ("nes.stop_score", self.nes.stop_score.map(|s| s.to_string()).unwrap_or_else(|| "none".into())),
            ("proxy.kind", proxy_kind.to_string()),
            ("proxy.hidden_sizes", join_sizes(&self.proxy.hidden_sizes)),
            ("proxy.activation", self.proxy.activation.to_string()),
            ("proxy.variant", self.proxy.variant.to_string()),
            ("proxy.gamma", self.proxy.gamma.unwrap_or(hp.discount).to_string()),
            ("run.seed", self.run.seed.to_string()),
            ("run.workers", self.run.workers.to_string()),
            ("run.out_dir", self.run.out_dir.display().to_string()),
            ("run.run_id", self.run.run_id.clone()),
            ("run.wall_clock", self.run.wall_clock.to_string()),
            ("eval.agent_kind", self.eval_agent_kind().to_string()),
            ("eval.agents_per_target", self.eval.agents_per_target.to_string()),
            ("eval.max_episodes", self.eval.max_episodes.to_string()),
            ("eval.test_episodes", self.eval.test_episodes.to_string()),
            ("eval.vary_hps", self.eval.vary_hps.to_string()),
            ("eval.ranges", self.eval.ranges.to_string()),
            ("eval.baseline", self.eval.baseline.to_string()),
            ("eval.baseline_instances", self.eval.baseline_instances.to_string()),
            ("eval.max_real_steps", self.eval.max_real_steps.to_string()),
            ("supervised.epochs", self.supervised.epochs.to_string()),
            ("supervised.batch_size", self.supervised.batch_size.to_string()),
            ("supervised.learning_rate", self.supervised.learning_rate.to_string()),
            ("supervised.log_agents", self.supervised.log_agents.to_string()),
        ]
    }

    /// The effective configuration as config-file text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (k, v) in self.pairs() {
            let sec = k.split('.').next().unwrap_or("");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "# {sec}");
                section = sec;
            }
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("nes.stepsize = 0.5", "t").unwrap_err();
        assert!(matches!(&err, ConfigError::UnknownKey(k) if k == "nes.stepsize"));
        assert!(err.to_string().contains("nes.stepsize"));
    }

    #[test]
    fn bad_value_names_key() {
        let err = RunConfig::default().apply_override("nes.population_size=many").unwrap_err();
        assert!(err.to_string().contains("nes.population_size"));
        let err = RunConfig::default().apply_override("agent.kind=ppo").unwrap_err();
        assert!(err.to_string().contains("agent.kind"));
    }

    #[test]
    fn comments_blank_lines_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\n\nenv.name = cliff\n  nes.step_size=0.25  \n", "t").unwrap();
        cfg.apply_override("nes.step_size=0.5").unwrap();
        assert_eq!(cfg.env, EnvKind::Cliff);
        assert_eq!(cfg.nes.step_size, 0.5);
        assert!(matches!(cfg.apply_text("just words", "t"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(cfg.apply_override("novalue"), Err(ConfigError::BadOverride(_))));
    }

    #[test]
    fn resolved_text_round_trips_and_lists_every_key() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("env.name = cliff\nagent.kind = qlearning\nnes.objective = reward_threshold\n", "t").unwrap();
        cfg.bind_proxy_kind(ProxyKind::Reward).unwrap();
        let text = cfg.to_text();
        assert!(text.contains("nes.c_sol = -20\n"));
        assert!(text.contains("agent.early_stop = real_solved\n"));
        let mut back = RunConfig::default();
        back.apply_text(&text, "resolved").unwrap();
        assert_eq!(back.nes_config(), cfg.nes_config());
        assert_eq!(back.inner_loop(), cfg.inner_loop());
        assert_eq!(back.to_text(), text);
        // Every emitted key is accepted by the parser.
        for (k, v) in cfg.pairs() {
            RunConfig::default().set(k, &v).unwrap();
        }
    }

    #[test]
    fn reward_threshold_uses_env_solved_reward_by_default() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("env.name = cliff\nnes.objective = reward_threshold\nnes.w_sol = 100", "t").unwrap();
        assert_eq!(cfg.objective(), ObjectiveKind::RewardThreshold { c_sol: -20.0, w_sol: 100.0 });
        cfg.set("nes.c_sol", "-13").unwrap();
        assert_eq!(cfg.objective(), ObjectiveKind::RewardThreshold { c_sol: -13.0, w_sol: 100.0 });
    }

    #[test]
    fn proxy_kind_conflict_is_reported() {
        let mut cfg = RunConfig::default();
        cfg.set("proxy.kind", "se").unwrap();
        let err = cfg.bind_proxy_kind(ProxyKind::Reward).unwrap_err();
        assert!(err.to_string().contains("proxy.kind"));
        assert!(cfg.bind_proxy_kind(ProxyKind::Synthetic).is_ok());
    }

    #[test]
    fn validation_catches_cross_field_errors() {
        let mut cfg = RunConfig::default();
        cfg.set("nes.population_size", "15").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.set("run.workers", "0").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("run.workers"));
        assert!(RunConfig::default().validate().is_ok());
    }
}
