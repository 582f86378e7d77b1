use std::fs::File;
use std::path::Path;

use rayon::prelude::*;

use crate::neural::ParameterVector;
use crate::seeding::{derive_seed, rng_from_parts};

use super::{nes_update, ranks, sample_perturbations, transform_scores, Fitness, MemberEval, NesConfig, NesError};

/// Seed-space tags that keep the perturbation stream and the incumbent
/// evaluation apart from member indices.
const PERTURB_TAG: u64 = u64::MAX - 1;
const INCUMBENT_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct MemberRecord {
    pub iter: usize,
    pub member: usize,
    pub raw_score: f64,
    pub rank: usize,
    pub fitness: f64,
    pub eval: MemberEval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationSummary {
    pub iter: usize,
    /// Empty for the final incumbent-only check after the last update.
    pub members: Vec<MemberRecord>,
    /// Score of the unperturbed parameters at the start of the iteration.
    pub incumbent: Option<MemberEval>,
}

impl IterationSummary {
    pub fn mean_score(&self) -> Option<f64> {
        if self.members.is_empty() {
            return None;
        }
        Some(self.members.iter().map(|m| m.raw_score).sum::<f64>() / self.members.len() as f64)
    }

    pub fn best_score(&self) -> Option<f64> {
        self.members.iter().map(|m| m.raw_score).reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct NesRun {
    pub params: ParameterVector,
    pub iterations: Vec<IterationSummary>,
    /// First iteration whose incumbent reached `stop_score`.
    pub solved_at: Option<usize>,
}

/// Run the outer loop from `init`.
///
/// Each iteration optionally scores the incumbent, samples perturbations,
/// scores all members on `workers` threads, shapes the scores and updates
/// ψ. `on_iteration` sees every summary together with the parameters after
/// that iteration (for logs and checkpoints). Results do not depend on
/// `workers`.
pub fn run_outer_loop(
    cfg: &NesConfig,
    fitness: &dyn Fitness,
    init: ParameterVector,
    run_seed: u64,
    workers: usize,
    on_iteration: &mut dyn FnMut(&IterationSummary, &ParameterVector) -> Result<(), NesError>,
) -> Result<NesRun, NesError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| NesError::Pool(e.to_string()))?;
    let track_incumbent = cfg.transform.needs_incumbent() || cfg.stop_score.is_some();
    let mut psi = init;
    let mut run = NesRun { params: psi.clone(), iterations: Vec::new(), solved_at: None };

    for iter in 0..=cfg.outer_loops {
        let last = iter == cfg.outer_loops;
        if last && !track_incumbent {
            break;
        }
        let incumbent =
            track_incumbent.then(|| fitness.evaluate(&psi, derive_seed(&[run_seed, iter as u64, INCUMBENT_TAG])));
        let reached = match (&incumbent, cfg.stop_score) {
            (Some(inc), Some(target)) => !inc.failed && inc.raw_score >= target,
            _ => false,
        };
        if last || reached {
            if reached {
                run.solved_at = Some(iter);
            }
            let summary = IterationSummary { iter, members: Vec::new(), incumbent };
            on_iteration(&summary, &psi)?;
            run.iterations.push(summary);
            break;
        }

        let mut rng = rng_from_parts(&[run_seed, iter as u64, PERTURB_TAG]);
        let eps = sample_perturbations(&mut rng, cfg.population_size, cfg.noise_sigma, psi.len(), cfg.mirrored)?;
        let members: Vec<ParameterVector> =
            eps.iter().map(|e| psi.perturb(e)).collect::<Result<_, _>>().map_err(|e| NesError::Hook(e.to_string()))?;
        let evals: Vec<MemberEval> = pool.install(|| {
            members
                .par_iter()
                .enumerate()
                .map(|(i, p)| fitness.evaluate(p, derive_seed(&[run_seed, iter as u64, i as u64])))
                .collect()
        });
        let scores: Vec<f64> = evals.iter().map(|e| e.raw_score).collect();
        let fit = transform_scores(&scores, cfg.transform, incumbent.as_ref().map(|i| i.raw_score))?;
        let rank = ranks(&scores);
        psi = nes_update(&psi, &eps, &fit, cfg.step_size, cfg.noise_sigma)?;

        let records = evals
            .into_iter()
            .enumerate()
            .map(|(i, eval)| MemberRecord { iter, member: i, raw_score: eval.raw_score, rank: rank[i], fitness: fit[i], eval })
            .collect();
        let summary = IterationSummary { iter, members: records, incumbent };
        log::info!(
            "iter {iter}: mean {:.3} best {:.3}{}",
            summary.mean_score().unwrap_or(f64::NAN),
            summary.best_score().unwrap_or(f64::NAN),
            summary.incumbent.as_ref().map(|i| format!(" incumbent {:.3}", i.raw_score)).unwrap_or_default()
        );
        on_iteration(&summary, &psi)?;
        run.iterations.push(summary);
    }
    run.params = psi;
    Ok(run)
}

/// CSV sinks for member rows (`generations.csv`) and incumbent scores
/// (`incumbent.csv`).
pub struct GenerationLog {
    members: csv::Writer<File>,
    incumbent: csv::Writer<File>,
    wall_clock: bool,
}

impl GenerationLog {
    pub const MEMBER_COLUMNS: [&'static str; 8] =
        ["iter", "member", "raw_score", "rank", "fitness", "train_steps", "train_episodes", "wall_ms"];
    pub const INCUMBENT_COLUMNS: [&'static str; 5] = ["iter", "raw_score", "train_steps", "train_episodes", "failed"];

    /// `wall_clock = false` writes 0 in the `wall_ms` column so logs are
    /// byte-identical across reruns.
    pub fn create(dir: &Path, wall_clock: bool) -> Result<Self, NesError> {
        let mut members = csv::Writer::from_path(dir.join("generations.csv"))?;
        members.write_record(Self::MEMBER_COLUMNS)?;
        let mut incumbent = csv::Writer::from_path(dir.join("incumbent.csv"))?;
        incumbent.write_record(Self::INCUMBENT_COLUMNS)?;
        Ok(GenerationLog { members, incumbent, wall_clock })
    }

    pub fn write(&mut self, summary: &IterationSummary) -> Result<(), NesError> {
        for m in &summary.members {
            let wall = if self.wall_clock { m.eval.wall_ms } else { 0 };
            self.members.write_record([
                m.iter.to_string(),
                m.member.to_string(),
                m.raw_score.to_string(),
                m.rank.to_string(),
                m.fitness.to_string(),
                m.eval.train_steps.to_string(),
                m.eval.train_episodes.to_string(),
                wall.to_string(),
            ])?;
        }
        if let Some(inc) = &summary.incumbent {
            self.incumbent.write_record([
                summary.iter.to_string(),
                inc.raw_score.to_string(),
                inc.train_steps.to_string(),
                inc.train_episodes.to_string(),
                inc.failed.to_string(),
            ])?;
        }
        self.members.flush()?;
        self.incumbent.flush()?;
        Ok(())
    }
}
