//! Natural evolution strategies over proxy parameters: perturbation
//! sampling, fitness shaping, the parameter update and the outer loop.

mod outer;
mod scoring;

pub use outer::{run_outer_loop, GenerationLog, IterationSummary, MemberRecord, NesRun};
pub use scoring::{failure_floor, Fitness, InnerLoop, MemberEval, RnFitness, SeFitness};

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::neural::ParameterVector;
use crate::seeding::SimRng;

#[derive(Debug, Error)]
pub enum NesError {
    #[error("invalid NES configuration: {0}")]
    Config(String),
    #[error("score transform {0} needs the incumbent score")]
    MissingIncumbent(ScoreTransform),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("unknown {what} '{value}'")]
    Unknown { what: &'static str, value: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Hook(String),
}

/// How raw member scores become update weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreTransform {
    Linear,
    Rank,
    Nes,
    NesUnnormalized,
    SingleBest,
    SingleBetter,
    AllBetter1,
    AllBetter2,
}

impl ScoreTransform {
    pub const ALL: [ScoreTransform; 8] = [
        ScoreTransform::Linear,
        ScoreTransform::Rank,
        ScoreTransform::Nes,
        ScoreTransform::NesUnnormalized,
        ScoreTransform::SingleBest,
        ScoreTransform::SingleBetter,
        ScoreTransform::AllBetter1,
        ScoreTransform::AllBetter2,
    ];

    /// Whether the transform compares members against the incumbent score.
    pub fn needs_incumbent(self) -> bool {
        matches!(self, ScoreTransform::SingleBetter | ScoreTransform::AllBetter1 | ScoreTransform::AllBetter2)
    }
}

impl FromStr for ScoreTransform {
    type Err = NesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        ScoreTransform::ALL
            .into_iter()
            .find(|t| t.to_string() == norm)
            .ok_or(NesError::Unknown { what: "score transform", value: s.to_string() })
    }
}

impl fmt::Display for ScoreTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreTransform::Linear => "linear",
            ScoreTransform::Rank => "rank",
            ScoreTransform::Nes => "nes",
            ScoreTransform::NesUnnormalized => "nes_unnormalized",
            ScoreTransform::SingleBest => "single_best",
            ScoreTransform::SingleBetter => "single_better",
            ScoreTransform::AllBetter1 => "all_better_1",
            ScoreTransform::AllBetter2 => "all_better_2",
        })
    }
}

/// What a member's trained agent is judged on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// Mean greedy return over the test episodes.
    MaxReward,
    /// `−(n_tr + w_sol · max(0, C_sol − C_fin))`: fewer real training steps
    /// to solve, with a penalty for ending below the threshold.
    RewardThreshold { c_sol: f64, w_sol: f64 },
    /// Sum of the per-episode greedy real returns over training.
    Auc,
}

impl ObjectiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::MaxReward => "max_reward",
            ObjectiveKind::RewardThreshold { .. } => "reward_threshold",
            ObjectiveKind::Auc => "auc",
        }
    }

    /// Score of a member given its training outcome summary.
    pub fn score(&self, real_train_steps: usize, final_return: f64, probe_returns: &[f64]) -> f64 {
        match *self {
            ObjectiveKind::MaxReward => final_return,
            ObjectiveKind::RewardThreshold { c_sol, w_sol } => {
                -(real_train_steps as f64 + w_sol * (c_sol - final_return).max(0.0))
            }
            ObjectiveKind::Auc => probe_returns.iter().sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NesConfig {
    /// Step size α.
    pub step_size: f64,
    /// Perturbation standard deviation σ.
    pub noise_sigma: f64,
    /// Population size n_p.
    pub population_size: usize,
    /// Outer iterations n_o.
    pub outer_loops: usize,
    pub mirrored: bool,
    pub transform: ScoreTransform,
    pub objective: ObjectiveKind,
    /// Resample agent hyperparameters for every member evaluation.
    pub vary_agent_hps: bool,
    /// Inner-loop episode budget n_e.
    pub inner_budget: usize,
    /// Real test episodes per member n_te.
    pub test_episodes: usize,
    /// Stop as soon as the incumbent reaches this score.
    pub stop_score: Option<f64>,
}

impl Default for NesConfig {
    fn default() -> Self {
        NesConfig {
            step_size: 0.5,
            noise_sigma: 0.1,
            population_size: 16,
            outer_loops: 50,
            mirrored: true,
            transform: ScoreTransform::AllBetter2,
            objective: ObjectiveKind::MaxReward,
            vary_agent_hps: false,
            inner_budget: 1000,
            test_episodes: 10,
            stop_score: None,
        }
    }
}

impl NesConfig {
    pub fn validate(&self) -> Result<(), NesError> {
        let bad = |m: String| Err(NesError::Config(m));
        if !(self.step_size > 0.0) {
            return bad(format!("step_size must be > 0, got {}", self.step_size));
        }
        if !(self.noise_sigma > 0.0) {
            return bad(format!("noise_sigma must be > 0, got {}", self.noise_sigma));
        }
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if self.mirrored && self.population_size % 2 != 0 {
            return bad(format!("mirrored sampling needs an even population, got {}", self.population_size));
        }
        if self.inner_budget == 0 {
            return bad("inner_budget must be >= 1".into());
        }
        if let ObjectiveKind::RewardThreshold { w_sol, .. } = self.objective {
            if !(w_sol > 0.0) {
                return bad(format!("w_sol must be > 0, got {w_sol}"));
            }
        }
        Ok(())
    }
}

/// Draw `n_p` Gaussian perturbations of length `dim` with std `sigma`.
/// Mirrored sampling stores each draw next to its negation.
pub fn sample_perturbations(
    rng: &mut SimRng,
    n_p: usize,
    sigma: f64,
    dim: usize,
    mirrored: bool,
) -> Result<Vec<Vec<f64>>, NesError> {
    if mirrored && n_p % 2 != 0 {
        return Err(NesError::Config(format!("mirrored sampling needs an even population, got {n_p}")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| NesError::Config(format!("sigma {sigma}: {e}")))?;
    let draws = if mirrored { n_p / 2 } else { n_p };
    let mut out = Vec::with_capacity(n_p);
    for _ in 0..draws {
        let eps: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        if mirrored {
            let neg = eps.iter().map(|v| -v).collect();
            out.push(eps);
            out.push(neg);
        } else {
            out.push(eps);
        }
    }
    Ok(out)
}

/// 0-based ranks, 0 = lowest score; ties are broken by member index so the
/// result is always a permutation.
pub fn ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut r = vec![0; scores.len()];
    for (rank, &i) in order.iter().enumerate() {
        r[i] = rank;
    }
    r
}

fn nes_utilities(ranks: &[usize], subtract_mean: bool) -> Vec<f64> {
    let n = ranks.len();
    let n_f = n as f64;
    // 1-based, 1 = best, so log(rank) is defined for every member.
    let u: Vec<f64> =
        ranks.iter().map(|&r| ((n_f / 2.0 + 1.0).ln() - ((n - r) as f64).ln()).max(0.0)).collect();
    let total: f64 = u.iter().sum();
    let f_hat: Vec<f64> =
        u.iter().map(|&v| v / total - if subtract_mean { 1.0 / n_f } else { 0.0 }).collect();
    let scale = f_hat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return vec![0.0; n];
    }
    f_hat.iter().map(|v| v / scale).collect()
}

fn better_hat(scores: &[f64], incumbent: f64) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|&k| if k > incumbent { (k - incumbent) / (max - incumbent) } else { 0.0 })
        .collect()
}

/// Map raw scores to fitness weights. `incumbent` is required by the
/// Better-family transforms and ignored otherwise.
pub fn transform_scores(
    scores: &[f64],
    kind: ScoreTransform,
    incumbent: Option<f64>,
) -> Result<Vec<f64>, NesError> {
    let n = scores.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let incumbent = || incumbent.ok_or(NesError::MissingIncumbent(kind));
    Ok(match kind {
        ScoreTransform::Linear => {
            let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == min {
                vec![0.0; n]
            } else {
                scores.iter().map(|k| (k - min) / (max - min)).collect()
            }
        }
        ScoreTransform::Rank => {
            let all_equal = scores.iter().all(|&k| k == scores[0]);
            if all_equal || n < 2 {
                vec![0.0; n]
            } else {
                ranks(scores).iter().map(|&r| r as f64 / (n - 1) as f64).collect()
            }
        }
        ScoreTransform::Nes => nes_utilities(&ranks(scores), true),
        ScoreTransform::NesUnnormalized => nes_utilities(&ranks(scores), false),
        ScoreTransform::SingleBest => {
            let r = ranks(scores);
            r.iter().map(|&ri| if ri == n - 1 { 1.0 } else { 0.0 }).collect()
        }
        ScoreTransform::SingleBetter => {
            let k_psi = incumbent()?;
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            scores.iter().map(|&k| if k > k_psi && k == max { 1.0 } else { 0.0 }).collect()
        }
        ScoreTransform::AllBetter1 => {
            let f_hat = better_hat(scores, incumbent()?);
            let max = f_hat.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                f_hat.iter().map(|v| v / max).collect()
            } else {
                vec![0.0; n]
            }
        }
        ScoreTransform::AllBetter2 => {
            let f_hat = better_hat(scores, incumbent()?);
            let sum: f64 = f_hat.iter().sum();
            if sum > 0.0 {
                f_hat.iter().map(|v| v / sum).collect()
            } else {
                vec![0.0; n]
            }
        }
    })
}

/// `ψ + α / (n_p σ) · Σ_i F_i ε_i`, summed in member order.
pub fn nes_update(
    psi: &ParameterVector,
    perturbations: &[Vec<f64>],
    fitness: &[f64],
    step_size: f64,
    sigma: f64,
) -> Result<ParameterVector, NesError> {
    if perturbations.len() != fitness.len() {
        return Err(NesError::Length { expected: perturbations.len(), got: fitness.len() });
    }
    let mut sum = vec![0.0; psi.len()];
    for (eps, &f) in perturbations.iter().zip(fitness) {
        if eps.len() != psi.len() {
            return Err(NesError::Length { expected: psi.len(), got: eps.len() });
        }
        for (s, e) in sum.iter_mut().zip(eps) {
            *s += f * e;
        }
    }
    let scale = step_size / (fitness.len() as f64 * sigma);
    Ok(ParameterVector::new(psi.iter().zip(&sum).map(|(p, s)| p + scale * s).collect()))
}
