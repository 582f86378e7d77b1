//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on configuration or
//! usage errors. Every subcommand that takes a configuration writes its
//! outputs under `<run.out_dir>/<run.run_id>/`, starting with
//! `resolved.cfg`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use thiserror::Error;

use crate::agents::{AgentKind, EarlyStopConfig, EarlyStopMode, TrainConfig};
use crate::config::{ConfigError, ProxyKind, RunConfig};
use crate::envs::EnvKind;
use crate::evalharness::{
    cliff_reward_grid, collect_real_transitions, curve_experiment, density_experiment, histogram_collection,
    pbrs_check, steps_to_threshold, supervised_baseline_fit, transfer_experiment, write_curves, write_grid,
    write_histograms, write_records, CurveConfig, TabularMdp, TrainTarget,
};
use crate::nes::{
    run_outer_loop, transform_scores, Fitness, GenerationLog, NesError, RnFitness, ScoreTransform, SeFitness,
};
use crate::neural::{NetworkSpec, ParameterVector};
use crate::proxies::{ProxyModel, RewardNetwork, RewardVariant, SyntheticEnvironment};
use crate::seeding::rng_from_seed;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "synthenv", version, about = "Learn synthetic environments and reward networks with NES")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Config file (`key = value` lines); repeat to layer several files.
    #[arg(long = "config", value_name = "PATH")]
    pub configs: Vec<PathBuf>,
    /// Override one key, applied after all config files.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Trained proxy model file; repeat for several.
    #[arg(long = "proxy", value_name = "PATH", required = true)]
    pub proxies: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a synthetic environment with NES.
    TrainSe(ConfigArgs),
    /// Learn a reward network with NES.
    TrainRn(ConfigArgs),
    /// Density experiment: train agents on proxies (and the real env) and test them.
    EvalProxy(ProxyArgs),
    /// Density experiment with an agent kind the proxies were not trained with (`eval.agent_kind`).
    Transfer(ProxyArgs),
    /// Alternating train/eval learning curves for reward networks against bare agents.
    Curve(ProxyArgs),
    /// Next-state and reward samples of one synthetic environment.
    Histograms(ProxyArgs),
    /// Shaped-reward grid of Cliff Walking reward networks.
    CliffGrid(ProxyArgs),
    /// Fit a synthetic environment to real transitions with MSE and Adam.
    SupervisedBaseline(ConfigArgs),
    /// Check policy invariance of reward shaping with random potential tables.
    PbrsCheck(PbrsArgs),
    /// Print all score transformations of one population's scores.
    ScoreTransformTable(TransformArgs),
}

#[derive(Debug, Args)]
pub struct PbrsArgs {
    /// Tabular environment: `cliff` or `gridworld:<N>x<M>`.
    #[arg(long, default_value = "cliff")]
    pub env: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shaping variant to test.
    #[arg(long, default_value = "additive_potential")]
    pub variant: String,
    /// Potentials are drawn uniformly from [-scale, scale].
    #[arg(long, default_value_t = 50.0)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Comma-separated raw member scores.
    #[arg(long, default_value = "1,5,3,5", allow_hyphen_values = true)]
    pub scores: String,
    /// Incumbent score, used by the transforms that need one.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub incumbent: f64,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::TrainSe(a) => train(&a, ProxyKind::Synthetic),
        Command::TrainRn(a) => train(&a, ProxyKind::Reward),
        Command::EvalProxy(a) => eval_proxy(&a, false),
        Command::Transfer(a) => eval_proxy(&a, true),
        Command::Curve(a) => curve(&a),
        Command::Histograms(a) => histograms(&a),
        Command::CliffGrid(a) => cliff_grid(&a),
        Command::SupervisedBaseline(a) => supervised(&a),
        Command::PbrsCheck(a) => pbrs(&a),
        Command::ScoreTransformTable(a) => transform_table(&a),
    }
}

fn load_config(args: &ConfigArgs, kind: Option<ProxyKind>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&args.configs, &args.sets)?;
    if let Some(k) = kind {
        cfg.bind_proxy_kind(k)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Create the run directory and write `resolved.cfg` into it.
fn prepare_run_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.run.out_dir.join(&cfg.run.run_id);
    fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join("resolved.cfg");
    fs::write(&path, cfg.to_text()).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(dir)
}

/// Builds a storable proxy from outer-loop parameters.
type ModelBuilder = Box<dyn Fn(&ParameterVector) -> Result<ProxyModel, CliError>>;

fn train(args: &ConfigArgs, kind: ProxyKind) -> Result<(), CliError> {
    let cfg = load_config(args, Some(kind))?;
    let inner = cfg.inner_loop();
    if inner.agent_kind.is_tabular() && cfg.env.spec().num_discrete_states().is_none() {
        return Err(ConfigError::Conflict {
            key: "agent.kind".into(),
            reason: format!("tabular agents cannot run on {}", cfg.env),
        }
        .into());
    }
    let env = cfg.env;
    let hidden = cfg.proxy.hidden_sizes.clone();
    let (fitness, net, build): (Box<dyn Fitness>, NetworkSpec, ModelBuilder) = match kind {
        ProxyKind::Synthetic => {
            let net = SyntheticEnvironment::network_for(env, hidden, cfg.proxy.activation).map_err(runtime)?;
            let n = net.clone();
            let build: ModelBuilder =
                Box::new(move |p| Ok(ProxyModel::Synthetic { env, net: n.clone(), params: p.clone() }));
            (Box::new(SeFitness { env, net: net.clone(), inner }), net, build)
        }
        ProxyKind::Reward => {
            let phi = RewardNetwork::network_for(env, hidden, cfg.proxy.activation).map_err(runtime)?;
            let (n, variant) = (phi.clone(), cfg.proxy.variant);
            let gamma = cfg.proxy.gamma.unwrap_or(cfg.agent.hp.discount);
            let build: ModelBuilder = Box::new(move |p| {
                let rn = RewardNetwork::new(n.clone(), p.clone(), variant, gamma).map_err(runtime)?;
                Ok(ProxyModel::Reward { env, rn })
            });
            let fit = RnFitness { env, phi: phi.clone(), variant, gamma: cfg.proxy.gamma, inner };
            (Box::new(fit), phi, build)
        }
    };

    let dir = prepare_run_dir(&cfg)?;
    let run_id = &cfg.run.run_id;
    let trained_with = cfg.agent.kind.to_string();
    let mut log = GenerationLog::create(&dir, cfg.run.wall_clock).map_err(runtime)?;
    let mut on_iter = |summary: &crate::nes::IterationSummary, psi: &ParameterVector| -> Result<(), NesError> {
        log.write(summary)?;
        let model = build(psi).map_err(|e| NesError::Hook(e.to_string()))?;
        model
            .save(&dir.join(format!("{run_id}_iter{}", summary.iter)), &trained_with)
            .map_err(|e| NesError::Hook(e.to_string()))
    };
    let nes = cfg.nes_config();
    let init = net.init_params(cfg.run.seed);
    let result = run_outer_loop(&nes, fitness.as_ref(), init, cfg.run.seed, cfg.run.workers, &mut on_iter)
        .map_err(runtime)?;
    let final_path = dir.join(format!("{run_id}_final"));
    build(&result.params)?.save(&final_path, &trained_with).map_err(runtime)?;
    let last = result.iterations.last();
    println!(
        "{} {}: {} iterations, final model {}{}",
        kind.name(),
        run_id,
        result.iterations.len(),
        final_path.display(),
        match (result.solved_at, last.and_then(|s| s.incumbent.as_ref())) {
            (Some(k), _) => format!(", stop score reached at iteration {k}"),
            (None, Some(inc)) => format!(", final incumbent score {}", inc.raw_score),
            _ => String::new(),
        }
    );
    Ok(())
}

fn proxy_id(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Load proxies, check they all match `env.name` and return them with the
/// agent kind they were trained with.
fn load_proxies(cfg: &RunConfig, paths: &[PathBuf]) -> Result<(Vec<TrainTarget>, Vec<String>), CliError> {
    let mut targets = Vec::new();
    let mut trained_with = Vec::new();
    for path in paths {
        let saved = ProxyModel::load(path).map_err(runtime)?;
        if saved.model.env() != cfg.env {
            return Err(ConfigError::Conflict {
                key: "env.name".into(),
                reason: format!("is {} but {} was trained on {}", cfg.env, path.display(), saved.model.env()),
            }
            .into());
        }
        targets.push(TrainTarget::Proxy { id: proxy_id(path), model: saved.model });
        trained_with.push(saved.trained_with);
    }
    Ok((targets, trained_with))
}

fn real_targets(cfg: &RunConfig) -> Vec<TrainTarget> {
    (0..cfg.eval.baseline_instances).map(|i| TrainTarget::Real { id: format!("real_{i}"), env: cfg.env }).collect()
}

fn eval_proxy(args: &ProxyArgs, transfer: bool) -> Result<(), CliError> {
    let cfg = load_config(&args.config, None)?;
    let (targets, trained_with) = load_proxies(&cfg, &args.proxies)?;
    let density = cfg.density_config();
    let mut records = if transfer {
        let first = trained_with[0].as_str();
        if trained_with.iter().any(|t| t != first) {
            return Err(CliError::Usage("transfer needs proxies trained with the same agent kind".into()));
        }
        let with: AgentKind = first
            .parse()
            .map_err(|_| runtime(format!("proxy does not record a known training agent ('{first}')")))?;
        if with == density.agent_kind {
            return Err(ConfigError::Conflict {
                key: "eval.agent_kind".into(),
                reason: format!("transfer needs an agent other than the training agent '{with}'"),
            }
            .into());
        }
        transfer_experiment(&targets, with, &density).map_err(runtime)?
    } else {
        density_experiment(&targets, &density).map_err(runtime)?
    };
    if cfg.eval.baseline {
        records.extend(density_experiment(&real_targets(&cfg), &density).map_err(runtime)?);
    }
    let dir = prepare_run_dir(&cfg)?;
    let path = dir.join("records.csv");
    write_records(&path, &records).map_err(runtime)?;
    println!("{} records written to {}", records.len(), path.display());
    Ok(())
}

fn curve(args: &ProxyArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config, None)?;
    let (targets, _) = load_proxies(&cfg, &args.proxies)?;
    if targets.iter().any(|t| matches!(t, TrainTarget::Proxy { model: ProxyModel::Synthetic { .. }, .. })) {
        return Err(CliError::Usage("curve expects reward-network proxies".into()));
    }
    let curve_cfg = CurveConfig {
        agent_kind: cfg.eval_agent_kind(),
        base_hp: cfg.agent.hp.clone(),
        hp_ranges: cfg.eval.vary_hps.then_some(cfg.eval.ranges),
        agents_per_target: cfg.eval.agents_per_target,
        max_real_steps: cfg.eval.max_real_steps,
        seed: cfg.run.seed,
        workers: cfg.run.workers,
    };
    let mut curves = curve_experiment(&targets, &curve_cfg).map_err(runtime)?;
    let proxy_curves = curves.len();
    if cfg.eval.baseline {
        // One bare arm per proxy so runs pair up seed for seed.
        let bare: Vec<TrainTarget> =
            (0..targets.len()).map(|i| TrainTarget::Real { id: format!("bare_{i}"), env: cfg.env }).collect();
        curves.extend(curve_experiment(&bare, &curve_cfg).map_err(runtime)?);
    }
    let dir = prepare_run_dir(&cfg)?;
    let path = dir.join("curves.csv");
    write_curves(&path, &curves).map_err(runtime)?;
    let solved = cfg.env.spec().solved_reward;
    let median = |cs: &[(String, Vec<crate::evalharness::CurvePoint>)]| {
        let mut v: Vec<usize> =
            cs.iter().map(|(_, c)| steps_to_threshold(c, solved).unwrap_or(cfg.eval.max_real_steps)).collect();
        v.sort_unstable();
        v.get(v.len() / 2).copied()
    };
    println!(
        "{} curves written to {}; median real steps to {solved}: proxies {:?}, bare {:?}",
        curves.len(),
        path.display(),
        median(&curves[..proxy_curves]),
        median(&curves[proxy_curves..])
    );
    Ok(())
}

fn histograms(args: &ProxyArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config, None)?;
    let (targets, _) = load_proxies(&cfg, &args.proxies)?;
    let [TrainTarget::Proxy { model: ProxyModel::Synthetic { env, net, params }, .. }] = targets.as_slice() else {
        return Err(CliError::Usage("histograms expects exactly one synthetic-environment proxy".into()));
    };
    let se = SyntheticEnvironment::new(*env, net.clone(), params.clone()).map_err(runtime)?;
    let train = TrainConfig::new(
        cfg.eval.max_episodes,
        EarlyStopConfig {
            window: cfg.agent.early_stop_window,
            c_diff: cfg.agent.c_diff,
            mode: EarlyStopMode::SyntheticConvergence,
        },
        env.spec().solved_reward,
    );
    let data = histogram_collection(
        &se,
        *env,
        cfg.eval_agent_kind(),
        &cfg.agent.hp,
        &train,
        cfg.eval.agents_per_target,
        cfg.eval.test_episodes,
        cfg.run.seed,
    )
    .map_err(runtime)?;
    let dir = prepare_run_dir(&cfg)?;
    let path = dir.join("histograms.csv");
    write_histograms(&path, &data).map_err(runtime)?;
    println!("{} samples written to {}", data.samples.len(), path.display());
    Ok(())
}

fn cliff_grid(args: &ProxyArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config, None)?;
    if cfg.env != EnvKind::Cliff {
        return Err(ConfigError::Conflict { key: "env.name".into(), reason: "cliff-grid needs env.name = cliff".into() }.into());
    }
    let (targets, _) = load_proxies(&cfg, &args.proxies)?;
    let rns = targets
        .into_iter()
        .map(|t| match t {
            TrainTarget::Proxy { model: ProxyModel::Reward { rn, .. }, .. } => Ok(rn),
            _ => Err(CliError::Usage("cliff-grid expects reward-network proxies".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let grid = cliff_reward_grid(&rns).map_err(runtime)?;
    let dir = prepare_run_dir(&cfg)?;
    let path = dir.join("grid.csv");
    write_grid(&path, &grid).map_err(runtime)?;
    println!("grid of {} reward networks written to {}", rns.len(), path.display());
    Ok(())
}

fn supervised(args: &ConfigArgs) -> Result<(), CliError> {
    let cfg = load_config(args, Some(ProxyKind::Synthetic))?;
    let env = cfg.env;
    let train = TrainConfig::new(
        cfg.eval.max_episodes,
        EarlyStopConfig { window: cfg.agent.early_stop_window, c_diff: cfg.agent.c_diff, mode: EarlyStopMode::RealSolved },
        env.spec().solved_reward,
    );
    let log = collect_real_transitions(
        env,
        cfg.agent.kind,
        &cfg.agent.hp,
        &train,
        cfg.supervised.log_agents,
        cfg.eval.test_episodes,
        cfg.run.seed,
    )
    .map_err(runtime)?;
    let net = SyntheticEnvironment::network_for(env, cfg.proxy.hidden_sizes.clone(), cfg.proxy.activation)
        .map_err(runtime)?;
    let fit = supervised_baseline_fit(
        &log,
        env,
        &net,
        cfg.supervised.epochs,
        cfg.supervised.batch_size,
        cfg.supervised.learning_rate,
        cfg.run.seed,
    )
    .map_err(runtime)?;
    let dir = prepare_run_dir(&cfg)?;
    let model_path = dir.join(format!("{}_supervised", cfg.run.run_id));
    fit.model.save(&model_path, &cfg.agent.kind.to_string()).map_err(runtime)?;
    let mut w = csv::Writer::from_path(dir.join("fit.csv")).map_err(runtime)?;
    w.write_record(["epoch", "mse"]).map_err(runtime)?;
    for (i, m) in fit.epoch_mse.iter().enumerate() {
        w.write_record([i.to_string(), m.to_string()]).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    println!(
        "fitted {} transitions, final mse {}, model {}",
        log.len(),
        fit.final_mse,
        model_path.display()
    );
    Ok(())
}

fn pbrs(args: &PbrsArgs) -> Result<(), CliError> {
    let env: EnvKind = args.env.parse().map_err(|e| CliError::Usage(format!("--env: {e}")))?;
    let mdp = TabularMdp::for_env(env)
        .ok_or_else(|| CliError::Usage(format!("--env: {env} is not a tabular environment")))?;
    let variant: RewardVariant = args.variant.parse().map_err(|e| CliError::Usage(format!("--variant: {e}")))?;
    if !(args.scale >= 0.0) {
        return Err(CliError::Usage("--scale must be >= 0".into()));
    }
    let mut rng = rng_from_seed(args.seed);
    let (mut pass, mut fail) = (0, 0);
    for _ in 0..args.trials {
        let phi: Vec<f64> = (0..mdp.num_states).map(|_| rng.random_range(-args.scale..=args.scale)).collect();
        if pbrs_check(&mdp, &phi, args.gamma, variant).map_err(|e| CliError::Usage(e.to_string()))? {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    println!("env={env} variant={variant} gamma={} trials={} pass={pass} fail={fail}", args.gamma, args.trials);
    Ok(())
}

fn transform_table(args: &TransformArgs) -> Result<(), CliError> {
    let scores: Vec<f64> = args
        .scores
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--scores: '{s}' is not a number"))))
        .collect::<Result<_, _>>()?;
    let mut header = vec!["transform".to_string()];
    header.extend((0..scores.len()).map(|i| format!("member_{i}")));
    println!("{}", header.join(","));
    println!("raw,{}", scores.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    for t in ScoreTransform::ALL {
        let f = transform_scores(&scores, t, Some(args.incumbent)).map_err(|e| CliError::Usage(e.to_string()))?;
        println!("{t},{}", f.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","));
    }
    Ok(())
}
