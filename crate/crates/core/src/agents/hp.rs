//! Agent hyperparameter variation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{AgentError, AgentHyperparams, AgentKind};
use crate::seeding::SimRng;

/// Sampling ranges for agent hyperparameter variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpRanges {
    /// Deep agents trained on synthetic environments: lr ∈ [1e-3/3, 3e-3],
    /// batch and hidden size ∈ [42, 384] (all log-uniform), 1–3 layers.
    SyntheticEnv,
    /// Reward-network experiments: Q-Learning lr and γ uniform in [0.1, 1];
    /// DDQN lr ∈ [8.3e-5, 7.5e-4], batch ∈ [11, 96], hidden ∈ [21, 192]
    /// (log-uniform), 1–2 layers.
    RewardNet,
}

/// The hyperparameters drawn for one agent, flattened for logging.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HpSample(pub Vec<(String, String)>);

impl fmt::Display for HpSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(";"))
    }
}

fn log_uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn log_uniform_int(rng: &mut SimRng, lo: usize, hi: usize) -> usize {
    let v = log_uniform(rng, lo as f64 - 0.5, hi as f64 + 0.5).round() as usize;
    v.clamp(lo, hi)
}

impl HpRanges {
    /// Overwrite the varied fields of `base` with a fresh draw.
    pub fn sample(self, kind: AgentKind, base: &AgentHyperparams, rng: &mut SimRng) -> (AgentHyperparams, HpSample) {
        let mut hp = base.clone();
        let mut log = Vec::new();
        if kind.is_tabular() {
            hp.learning_rate = rng.random_range(0.1..=1.0);
            hp.discount = rng.random_range(0.1..=1.0);
            log.push(("learning_rate".into(), format!("{}", hp.learning_rate)));
            log.push(("discount".into(), format!("{}", hp.discount)));
            return (hp, HpSample(log));
        }
        let (lr, batch, hidden, layers) = match self {
            HpRanges::SyntheticEnv => ((1e-3 / 3.0, 3e-3), (42, 384), (42, 384), 3),
            HpRanges::RewardNet => ((8.3e-5, 7.5e-4), (11, 96), (21, 192), 2),
        };
        hp.learning_rate = log_uniform(rng, lr.0, lr.1);
        hp.batch_size = log_uniform_int(rng, batch.0, batch.1).min(hp.replay_capacity);
        let width = log_uniform_int(rng, hidden.0, hidden.1);
        let n_layers = rng.random_range(1..=layers);
        hp.hidden_sizes = vec![width; n_layers];
        log.push(("learning_rate".into(), format!("{}", hp.learning_rate)));
        log.push(("batch_size".into(), hp.batch_size.to_string()));
        log.push(("hidden_size".into(), width.to_string()));
        log.push(("hidden_layers".into(), n_layers.to_string()));
        (hp, HpSample(log))
    }
}

impl FromStr for HpRanges {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "se" | "synthetic" => Ok(HpRanges::SyntheticEnv),
            "rn" | "reward" => Ok(HpRanges::RewardNet),
            other => Err(AgentError::InvalidHyperparams(format!("unknown variation ranges '{other}'"))),
        }
    }
}

impl fmt::Display for HpRanges {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HpRanges::SyntheticEnv => "se",
            HpRanges::RewardNet => "rn",
        })
    }
}
