use std::path::Path;

use rayon::prelude::*;

use crate::agents::{greedy_episode, train_episode, Agent, AgentHyperparams, AgentKind, EpsilonSchedule, HpRanges};
use crate::envs::Environment;
use crate::seeding::{derive_seed, rng_from_parts};

use super::{HarnessError, TrainTarget};

/// Greedy real-environment return after a training episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Cumulative training steps that used real dynamics.
    pub real_steps: usize,
    /// Cumulative training steps on the training environment.
    pub train_steps: usize,
    pub test_reward: f64,
}

/// Alternate one ε-greedy training episode on `train_env` with one greedy
/// test episode on `real`, until `max_real_steps` real training steps have
/// been used (test episodes are not counted).
pub fn alternating_curve(
    agent: &mut Agent,
    train_env: &mut dyn Environment,
    real: &mut dyn Environment,
    max_real_steps: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>, HarnessError> {
    let mut points = Vec::new();
    let mut eps = EpsilonSchedule::new(agent.hyperparams());
    let mut rng = rng_from_parts(&[seed, 1]);
    let (mut real_steps, mut train_steps) = (0, 0);
    let mut episode = 0;
    while real_steps < max_real_steps {
        let stats = train_episode(agent, train_env, eps.current(), episode, None, &mut rng)?;
        if stats.real_steps == 0 {
            return Err(HarnessError::Invalid("alternating curves need a training env with real dynamics".into()));
        }
        eps.decay();
        real_steps += stats.real_steps;
        train_steps += stats.steps;
        let (ret, _) = greedy_episode(agent, real, derive_seed(&[seed, 2, episode as u64]), None)?;
        points.push(CurvePoint { real_steps, train_steps, test_reward: ret });
        episode += 1;
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub agent_kind: AgentKind,
    pub base_hp: AgentHyperparams,
    /// Sample hyperparameters per agent; `None` keeps `base_hp`.
    pub hp_ranges: Option<HpRanges>,
    pub agents_per_target: usize,
    pub max_real_steps: usize,
    pub seed: u64,
    pub workers: usize,
}

/// One alternating curve per (target, agent), labelled `<target id>/<agent>`.
///
/// Agent `j` on target `i` is seeded from `(seed, i, j)` alone, so two calls
/// with equally long target lists (e.g. reward networks and bare real
/// environments) are paired run for run.
pub fn curve_experiment(
    targets: &[TrainTarget],
    cfg: &CurveConfig,
) -> Result<Vec<(String, Vec<CurvePoint>)>, HarnessError> {
    let cells: Vec<(usize, usize)> =
        (0..targets.len()).flat_map(|t| (0..cfg.agents_per_target).map(move |a| (t, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(t, a)| {
                let target = &targets[t];
                let seed = derive_seed(&[cfg.seed, t as u64, a as u64]);
                let hp = match cfg.hp_ranges {
                    Some(r) => r.sample(cfg.agent_kind, &cfg.base_hp, &mut rng_from_parts(&[seed, 3])).0,
                    None => cfg.base_hp.clone(),
                };
                let mut train_env = target.build()?;
                let mut real = target.env().build();
                let mut agent = Agent::new(cfg.agent_kind, &hp, train_env.spec(), derive_seed(&[seed, 0]))?;
                let curve = alternating_curve(&mut agent, train_env.as_mut(), &mut real, cfg.max_real_steps, seed)?;
                Ok((format!("{}/{a}", target.id()), curve))
            })
            .collect()
    })
}

/// Real steps at the first point whose test reward reaches `threshold`.
pub fn steps_to_threshold(curve: &[CurvePoint], threshold: f64) -> Option<usize> {
    curve.iter().find(|p| p.test_reward >= threshold).map(|p| p.real_steps)
}

/// Write curves as `run_id,real_steps,test_reward,train_steps`.
pub fn write_curves(path: &Path, curves: &[(String, Vec<CurvePoint>)]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run_id", "real_steps", "test_reward", "train_steps"])?;
    for (id, curve) in curves {
        for p in curve {
            w.write_record([id.clone(), p.real_steps.to_string(), p.test_reward.to_string(), p.train_steps.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
