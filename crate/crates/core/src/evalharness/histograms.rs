use std::fmt;
use std::path::Path;

use crate::agents::{evaluate_agent_logged, train_agent, Agent, AgentHyperparams, AgentKind, TrainConfig, Transition};
use crate::envs::{EnvKind, Environment};
use crate::proxies::SyntheticEnvironment;
use crate::seeding::{derive_seed, rng_from_parts};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    /// Transitions produced by the synthetic environment during training.
    Synthetic,
    /// Transitions of the real environment during greedy test episodes.
    RealTest,
    /// The synthetic environment's outputs for the logged real (s, a) pairs.
    SeOnRealInputs,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Series::Synthetic => "synthetic",
            Series::RealTest => "real_test",
            Series::SeOnRealInputs => "se_on_real_inputs",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSample {
    pub series: Series,
    /// `state_<i>` for next-state components, `reward` for rewards.
    pub dimension: String,
    pub value: f64,
}

/// Raw next-state and reward samples; binning is left to the consumer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistogramDataset {
    pub samples: Vec<HistogramSample>,
}

impl HistogramDataset {
    fn push_transition(&mut self, series: Series, next_state: &[f64], reward: f64) {
        for (i, &v) in next_state.iter().enumerate() {
            self.samples.push(HistogramSample { series, dimension: format!("state_{i}"), value: v });
        }
        self.samples.push(HistogramSample { series, dimension: "reward".into(), value: reward });
    }

    pub fn values(&self, series: Series, dimension: &str) -> Vec<f64> {
        self.samples.iter().filter(|s| s.series == series && s.dimension == dimension).map(|s| s.value).collect()
    }
}

/// Train `n_agents` agents on `se`, logging every synthetic transition, then
/// test each on the real task and replay the logged real (s, a) pairs
/// through the synthetic environment.
pub fn histogram_collection(
    se: &SyntheticEnvironment,
    env: EnvKind,
    agent_kind: AgentKind,
    hp: &AgentHyperparams,
    train: &TrainConfig,
    n_agents: usize,
    test_episodes: usize,
    seed: u64,
) -> Result<HistogramDataset, HarnessError> {
    let mut data = HistogramDataset::default();
    for i in 0..n_agents {
        let s = derive_seed(&[seed, i as u64]);
        let mut synth = se.clone();
        let mut agent = Agent::new(agent_kind, hp, synth.spec(), derive_seed(&[s, 0]))?;
        let mut synthetic: Vec<Transition> = Vec::new();
        let mut obs = |t: &Transition| synthetic.push(t.clone());
        train_agent(&mut agent, &mut synth, train, None, Some(&mut obs), &mut rng_from_parts(&[s, 1]))?;
        for t in &synthetic {
            data.push_transition(Series::Synthetic, &t.next_state, t.reward);
        }
        let mut real = env.build();
        let mut real_log = Vec::new();
        evaluate_agent_logged(&agent, &mut real, test_episodes, derive_seed(&[s, 2]), Some(&mut real_log))?;
        for t in &real_log {
            data.push_transition(Series::RealTest, &t.next_state, t.reward);
        }
        for t in &real_log {
            let (next, r) = se.predict(&t.state, t.action).map_err(crate::agents::AgentError::from)?;
            data.push_transition(Series::SeOnRealInputs, &next, r);
        }
    }
    Ok(data)
}

/// Write `series,dimension,value`.
pub fn write_histograms(path: &Path, data: &HistogramDataset) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["series", "dimension", "value"])?;
    for s in &data.samples {
        w.write_record([s.series.to_string(), s.dimension.clone(), s.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
