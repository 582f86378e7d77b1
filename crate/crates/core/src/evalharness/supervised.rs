use rand::seq::SliceRandom;

use crate::agents::{evaluate_agent_logged, train_agent, Agent, AgentHyperparams, AgentKind, TrainConfig, Transition};
use crate::envs::{EnvKind, Environment};
use crate::neural::{adam_step, AdamState, NetworkSpec, ParameterVector};
use crate::proxies::{ProxyModel, SyntheticEnvironment};
use crate::seeding::{derive_seed, rng_from_parts};

use super::HarnessError;

#[derive(Debug, Clone)]
pub struct SupervisedFit {
    pub model: ProxyModel,
    /// Mean squared error over the whole log after the last epoch.
    pub final_mse: f64,
    pub epoch_mse: Vec<f64>,
}

/// Train agents on the real environment and log every real transition they
/// see, during training and during their greedy test episodes.
pub fn collect_real_transitions(
    env: EnvKind,
    agent_kind: AgentKind,
    hp: &AgentHyperparams,
    train: &TrainConfig,
    n_agents: usize,
    test_episodes: usize,
    seed: u64,
) -> Result<Vec<Transition>, HarnessError> {
    let mut log = Vec::new();
    for i in 0..n_agents {
        let s = derive_seed(&[seed, i as u64]);
        let mut real = env.build();
        let mut agent = Agent::new(agent_kind, hp, real.spec(), derive_seed(&[s, 0]))?;
        let mut obs = |t: &Transition| log.push(t.clone());
        train_agent(&mut agent, &mut real, train, None, Some(&mut obs), &mut rng_from_parts(&[s, 1]))?;
        evaluate_agent_logged(&agent, &mut real, test_episodes, derive_seed(&[s, 2]), Some(&mut log))?;
    }
    Ok(log)
}

fn encode_input(t: &Transition, num_actions: usize) -> Vec<f64> {
    let mut x = t.state.clone();
    x.extend((0..num_actions).map(|a| if a == t.action { 1.0 } else { 0.0 }));
    x
}

fn encode_target(t: &Transition) -> Vec<f64> {
    let mut y = t.next_state.clone();
    y.push(t.reward);
    y
}

/// Fit a synthetic-environment network to logged `(s, a) → (s', r)` pairs
/// by minimizing mean squared error with Adam.
pub fn supervised_baseline_fit(
    log: &[Transition],
    env: EnvKind,
    net: &NetworkSpec,
    epochs: usize,
    batch_size: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<SupervisedFit, HarnessError> {
    if log.is_empty() {
        return Err(HarnessError::EmptyLog);
    }
    let spec = env.spec();
    let inputs: Vec<Vec<f64>> = log.iter().map(|t| encode_input(t, spec.num_actions)).collect();
    let targets: Vec<Vec<f64>> = log.iter().map(encode_target).collect();
    // Validate shapes through the proxy constructor before training.
    SyntheticEnvironment::new(env, net.clone(), net.init_params(seed))?;

    let mut params = net.init_params(seed).into_inner();
    let mut adam = AdamState::new(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..log.len()).collect();
    let mut rng = rng_from_parts(&[seed, 7]);
    let out_dim = net.output_dim as f64;
    let mut epoch_mse = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size.max(1)) {
            grad.fill(0.0);
            let scale = 2.0 / (batch.len() as f64 * out_dim);
            for &i in batch {
                let trace = net.forward_trace(&params, &inputs[i]).map_err(crate::agents::AgentError::from)?;
                let upstream: Vec<f64> = trace.output.iter().zip(&targets[i]).map(|(o, y)| scale * (o - y)).collect();
                net.backward_into(&params, &trace, &upstream, &mut grad).map_err(crate::agents::AgentError::from)?;
            }
            adam_step(&mut params, &grad, &mut adam, learning_rate).map_err(crate::agents::AgentError::from)?;
        }
        epoch_mse.push(mse(net, &params, &inputs, &targets)?);
    }
    let final_mse = match epoch_mse.last() {
        Some(&m) => m,
        None => mse(net, &params, &inputs, &targets)?,
    };
    Ok(SupervisedFit {
        model: ProxyModel::Synthetic { env, net: net.clone(), params: ParameterVector::new(params) },
        final_mse,
        epoch_mse,
    })
}

fn mse(net: &NetworkSpec, params: &[f64], inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64, HarnessError> {
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        let out = net.forward(params, x).map_err(crate::agents::AgentError::from)?;
        total += out.iter().zip(y).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
    }
    Ok(total / (inputs.len() * net.output_dim) as f64)
}
