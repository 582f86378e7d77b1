//! Evaluation protocols over trained proxies: density and transfer
//! experiments, alternating learning curves, histogram samples, the Cliff
//! reward grid, the supervised-fit baseline and the shaping-invariance
//! oracle. Every protocol writes plain CSV.

mod curve;
mod grid;
mod histograms;
mod pbrs;
mod supervised;

pub use curve::{alternating_curve, curve_experiment, steps_to_threshold, write_curves, CurveConfig, CurvePoint};
pub use grid::{cliff_reward_grid, write_grid, CliffGrid};
pub use histograms::{histogram_collection, write_histograms, HistogramDataset, HistogramSample, Series};
pub use pbrs::{pbrs_check, pbrs_invariance_check, value_iteration, TabularMdp};
pub use supervised::{collect_real_transitions, supervised_baseline_fit, SupervisedFit};

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{
    evaluate_agent, train_agent, Agent, AgentError, AgentHyperparams, AgentKind, EarlyStopConfig, EarlyStopMode,
    HpRanges, TrainConfig,
};
use crate::envs::{EnvKind, Environment};
use crate::proxies::{ProxyError, ProxyModel};
use crate::seeding::{derive_seed, rng_from_parts};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("transfer needs a different agent kind than the one used for training ({0})")]
    SameAgentKind(AgentKind),
    #[error("empty transition log")]
    EmptyLog,
    #[error("value iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Proxy(#[from] ProxyError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Where agents in a density arm are trained.
#[derive(Debug, Clone)]
pub enum TrainTarget {
    /// A trained proxy, identified by `id` in the records.
    Proxy { id: String, model: ProxyModel },
    /// The real environment (baseline arm).
    Real { id: String, env: EnvKind },
}

impl TrainTarget {
    pub fn id(&self) -> &str {
        match self {
            TrainTarget::Proxy { id, .. } | TrainTarget::Real { id, .. } => id,
        }
    }

    pub fn env(&self) -> EnvKind {
        match self {
            TrainTarget::Proxy { model, .. } => model.env(),
            TrainTarget::Real { env, .. } => *env,
        }
    }

    fn build(&self) -> Result<Box<dyn Environment>, HarnessError> {
        Ok(match self {
            TrainTarget::Proxy { model, .. } => model.build_env()?,
            TrainTarget::Real { env, .. } => Box::new(env.build()),
        })
    }

    fn is_synthetic(&self) -> bool {
        matches!(self, TrainTarget::Proxy { model: ProxyModel::Synthetic { .. }, .. })
    }
}

/// One trained-and-tested agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub proxy_id: String,
    pub agent_kind: AgentKind,
    /// Flattened `key=value;…` of the sampled hyperparameters.
    pub sampled_hps: String,
    /// Mean over the real-environment test episodes.
    pub mean_test_reward: f64,
    pub train_steps: usize,
    pub train_episodes: usize,
    pub seed: u64,
    pub failed: bool,
}

impl ExperimentRecord {
    pub const COLUMNS: [&'static str; 8] = [
        "proxy_id",
        "agent_kind",
        "sampled_hps",
        "mean_test_reward",
        "train_steps",
        "train_episodes",
        "seed",
        "failed",
    ];
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ExperimentRecord::COLUMNS)?;
    for r in records {
        w.write_record([
            r.proxy_id.clone(),
            r.agent_kind.to_string(),
            r.sampled_hps.clone(),
            r.mean_test_reward.to_string(),
            r.train_steps.to_string(),
            r.train_episodes.to_string(),
            r.seed.to_string(),
            r.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityConfig {
    pub agent_kind: AgentKind,
    pub base_hp: AgentHyperparams,
    /// Sample hyperparameters per agent; `None` keeps `base_hp`.
    pub hp_ranges: Option<HpRanges>,
    pub agents_per_target: usize,
    pub max_episodes: usize,
    pub test_episodes: usize,
    /// Early-stop window `d` and tolerance; synthetic targets stop on
    /// convergence, real and reward-shaped targets once solved.
    pub early_stop_window: usize,
    pub c_diff: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            agent_kind: AgentKind::Ddqn,
            base_hp: AgentHyperparams::default(),
            hp_ranges: Some(HpRanges::SyntheticEnv),
            agents_per_target: 10,
            max_episodes: 1000,
            test_episodes: 10,
            early_stop_window: 10,
            c_diff: 0.01,
            seed: 0,
            workers: 1,
        }
    }
}

impl DensityConfig {
    fn train_config(&self, target: &TrainTarget) -> TrainConfig {
        let mode =
            if target.is_synthetic() { EarlyStopMode::SyntheticConvergence } else { EarlyStopMode::RealSolved };
        TrainConfig::new(
            self.max_episodes,
            EarlyStopConfig { window: self.early_stop_window, c_diff: self.c_diff, mode },
            target.env().spec().solved_reward,
        )
    }
}

fn run_cell(cfg: &DensityConfig, target: &TrainTarget, target_idx: usize, agent_idx: usize) -> ExperimentRecord {
    let seed = derive_seed(&[cfg.seed, target_idx as u64, agent_idx as u64]);
    let (hp, sample) = match cfg.hp_ranges {
        Some(r) => {
            let (hp, s) = r.sample(cfg.agent_kind, &cfg.base_hp, &mut rng_from_parts(&[seed, 3]));
            (hp, s.to_string())
        }
        None => (cfg.base_hp.clone(), String::new()),
    };
    let env = target.env();
    let result = (|| -> Result<ExperimentRecord, HarnessError> {
        let mut train_env = target.build()?;
        let mut probe = env.build();
        let mut real = env.build();
        let mut agent = Agent::new(cfg.agent_kind, &hp, train_env.spec(), derive_seed(&[seed, 0]))?;
        let tc = cfg.train_config(target);
        let probe_env: Option<&mut dyn Environment> =
            if tc.early_stop.mode == EarlyStopMode::RealSolved { Some(&mut probe) } else { None };
        let out = train_agent(&mut agent, train_env.as_mut(), &tc, probe_env, None, &mut rng_from_parts(&[seed, 1]))?;
        let mean = evaluate_agent(&agent, &mut real, cfg.test_episodes, derive_seed(&[seed, 2]))?;
        Ok(ExperimentRecord {
            proxy_id: target.id().to_string(),
            agent_kind: cfg.agent_kind,
            sampled_hps: sample.clone(),
            mean_test_reward: mean,
            train_steps: out.env_steps_used,
            train_episodes: out.episodes_used,
            seed,
            failed: false,
        })
    })();
    result.unwrap_or_else(|e| {
        log::warn!("{} agent {agent_idx} failed: {e}", target.id());
        ExperimentRecord {
            proxy_id: target.id().to_string(),
            agent_kind: cfg.agent_kind,
            sampled_hps: sample,
            mean_test_reward: env.spec().return_bounds().0,
            train_steps: 0,
            train_episodes: 0,
            seed,
            failed: true,
        }
    })
}

/// Train `agents_per_target` fresh agents on every target and test each on
/// the real environment. Records come back sorted by (target, agent).
pub fn density_experiment(targets: &[TrainTarget], cfg: &DensityConfig) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let cells: Vec<(usize, usize)> =
        (0..targets.len()).flat_map(|t| (0..cfg.agents_per_target).map(move |a| (t, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(|&(t, a)| run_cell(cfg, &targets[t], t, a)).collect()))
}

/// Density experiment with an agent kind the proxies were not trained with.
pub fn transfer_experiment(
    targets: &[TrainTarget],
    trained_with: AgentKind,
    cfg: &DensityConfig,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    if cfg.agent_kind == trained_with {
        return Err(HarnessError::SameAgentKind(trained_with));
    }
    density_experiment(targets, cfg)
}
