use super::{AgentError, AgentHyperparams, ReplayBuffer, Transition};
use crate::envs::EnvSpec;
use crate::neural::{adam_step, clip_grad_norm, Activation, AdamState, NetworkSpec, NeuralError, Trace};
use crate::seeding::SimRng;

/// Double-Q target: the online network picks the next action, the target
/// network evaluates it.
pub fn ddqn_targets(reward: f64, terminal: bool, discount: f64, online_next: &[f64], target_next: &[f64]) -> f64 {
    if terminal {
        return reward;
    }
    let a = super::argmax(online_next);
    reward + discount * target_next[a]
}

/// Polyak averaging `target ← τ·online + (1−τ)·target`.
pub fn soft_update(online: &[f64], target: &mut [f64], tau: f64) -> Result<(), NeuralError> {
    if online.len() != target.len() {
        return Err(NeuralError::DimMismatch { expected: target.len(), got: online.len() });
    }
    for (t, o) in target.iter_mut().zip(online) {
        *t = tau * o + (1.0 - tau) * *t;
    }
    Ok(())
}

/// Shared trunk with separate value and advantage streams,
/// `Q = V + A − mean(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuelingSpec {
    pub trunk: NetworkSpec,
    pub value: NetworkSpec,
    pub advantage: NetworkSpec,
}

impl DuelingSpec {
    pub fn new(input_dim: usize, hidden: &[usize], feature_dim: usize, num_actions: usize, act: Activation) -> Result<Self, NeuralError> {
        // The trunk may carry up to three hidden layers before the feature layer.
        let trunk = NetworkSpec::new(input_dim, hidden.to_vec(), feature_dim, act)?;
        let value = NetworkSpec::new(feature_dim, vec![feature_dim], 1, act)?;
        let advantage = NetworkSpec::new(feature_dim, vec![feature_dim], num_actions, act)?;
        Ok(DuelingSpec { trunk, value, advantage })
    }

    fn has_feature_slope(&self) -> bool {
        self.trunk.activation.has_slope()
    }

    /// `[trunk | feature slope? | value | advantage]`
    fn offsets(&self) -> (usize, usize, usize, usize) {
        let t = self.trunk.num_params();
        let s = usize::from(self.has_feature_slope());
        let v = self.value.num_params();
        let a = self.advantage.num_params();
        (t, t + s, t + s + v, t + s + v + a)
    }

    pub fn num_params(&self) -> usize {
        self.offsets().3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QNetwork {
    Plain(NetworkSpec),
    Dueling(DuelingSpec),
}

pub struct DuelingTrace {
    trunk: Trace,
    features: Vec<f64>,
    value: Trace,
    advantage: Trace,
}

impl QNetwork {
    pub fn num_params(&self) -> usize {
        match self {
            QNetwork::Plain(s) => s.num_params(),
            QNetwork::Dueling(d) => d.num_params(),
        }
    }

    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        match self {
            QNetwork::Plain(s) => s.init_params(seed).into_inner(),
            QNetwork::Dueling(d) => {
                let (t, ts, tv, _) = d.offsets();
                let mut p = d.trunk.init_params(seed).into_inner();
                if ts > t {
                    p.push(crate::neural::PRELU_INIT_SLOPE);
                }
                debug_assert_eq!(p.len(), ts);
                p.extend(d.value.init_params(seed.wrapping_add(1)).iter());
                debug_assert_eq!(p.len(), tv);
                p.extend(d.advantage.init_params(seed.wrapping_add(2)).iter());
                p
            }
        }
    }

    pub fn q_values(&self, params: &[f64], state: &[f64]) -> Result<Vec<f64>, NeuralError> {
        match self {
            QNetwork::Plain(s) => s.forward(params, state),
            QNetwork::Dueling(d) => Ok(dueling_combine(&self.dueling_trace(d, params, state)?)),
        }
    }

    fn dueling_trace(&self, d: &DuelingSpec, params: &[f64], state: &[f64]) -> Result<DuelingTrace, NeuralError> {
        if params.len() != d.num_params() {
            return Err(NeuralError::DimMismatch { expected: d.num_params(), got: params.len() });
        }
        let (t, ts, tv, ta) = d.offsets();
        let trunk = d.trunk.forward_trace(&params[..t], state)?;
        let slope = if ts > t { params[t] } else { 0.0 };
        let features: Vec<f64> = trunk.output.iter().map(|&z| d.trunk.activation.apply(z, slope)).collect();
        let value = d.value.forward_trace(&params[ts..tv], &features)?;
        let advantage = d.advantage.forward_trace(&params[tv..ta], &features)?;
        Ok(DuelingTrace { trunk, features, value, advantage })
    }

    /// Forward pass keeping the intermediates needed by [`QNetwork::backward`].
    pub fn forward_trace(&self, params: &[f64], state: &[f64]) -> Result<QTrace, NeuralError> {
        match self {
            QNetwork::Plain(s) => Ok(QTrace::Plain(s.forward_trace(params, state)?)),
            QNetwork::Dueling(d) => {
                let tr = self.dueling_trace(d, params, state)?;
                let q = dueling_combine(&tr);
                Ok(QTrace::Dueling(Box::new(tr), q))
            }
        }
    }

    /// Accumulate the parameter gradient for `dLoss/dQ = dq` into `grad`.
    pub fn backward(&self, params: &[f64], trace: &QTrace, dq: &[f64], grad: &mut [f64]) -> Result<(), NeuralError> {
        match (self, trace) {
            (QNetwork::Plain(s), QTrace::Plain(tr)) => {
                s.backward_into(params, tr, dq, grad)?;
            }
            (QNetwork::Dueling(d), QTrace::Dueling(tr, _)) => {
                let (t, ts, tv, ta) = d.offsets();
                let n = dq.len() as f64;
                let dv: f64 = dq.iter().sum();
                let mean_dq = dv / n;
                let da: Vec<f64> = dq.iter().map(|g| g - mean_dq).collect();
                let dh_v = d.value.backward_into(&params[ts..tv], &tr.value, &[dv], &mut grad[ts..tv])?;
                let dh_a = d.advantage.backward_into(&params[tv..ta], &tr.advantage, &da, &mut grad[tv..ta])?;
                let slope = if ts > t { params[t] } else { 0.0 };
                let act = d.trunk.activation;
                let mut d_slope = 0.0;
                let dz: Vec<f64> = tr
                    .trunk
                    .output
                    .iter()
                    .zip(&tr.features)
                    .enumerate()
                    .map(|(i, (&z, &h))| {
                        let dh = dh_v[i] + dh_a[i];
                        if z <= 0.0 {
                            d_slope += dh * z;
                        }
                        dh * act.derivative(z, h, slope)
                    })
                    .collect();
                if ts > t {
                    grad[t] += d_slope;
                }
                d.trunk.backward_into(&params[..t], &tr.trunk, &dz, &mut grad[..t])?;
            }
            _ => return Err(NeuralError::InvalidSpec("trace does not match network".into())),
        }
        Ok(())
    }

    /// Forward and backward in one call; returns the Q-values.
    pub fn accumulate_grad(&self, params: &[f64], state: &[f64], dq: &[f64], grad: &mut [f64]) -> Result<Vec<f64>, NeuralError> {
        let trace = self.forward_trace(params, state)?;
        self.backward(params, &trace, dq, grad)?;
        Ok(trace.q_values().to_vec())
    }
}

pub enum QTrace {
    Plain(Trace),
    Dueling(Box<DuelingTrace>, Vec<f64>),
}

impl QTrace {
    pub fn q_values(&self) -> &[f64] {
        match self {
            QTrace::Plain(t) => &t.output,
            QTrace::Dueling(_, q) => q,
        }
    }
}

fn dueling_combine(tr: &DuelingTrace) -> Vec<f64> {
    let v = tr.value.output[0];
    let adv = &tr.advantage.output;
    let mean = adv.iter().sum::<f64>() / adv.len() as f64;
    adv.iter().map(|a| v + a - mean).collect()
}

/// DDQN / Dueling DDQN with replay and Polyak-averaged target network.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    net: QNetwork,
    online: Vec<f64>,
    target: Vec<f64>,
    adam: AdamState,
    replay: ReplayBuffer,
    hp: AgentHyperparams,
    num_actions: usize,
}

impl DqnAgent {
    pub fn new(hp: &AgentHyperparams, env: &EnvSpec, dueling: bool, seed: u64) -> Result<Self, AgentError> {
        let net = if dueling {
            QNetwork::Dueling(DuelingSpec::new(env.state_dim, &hp.hidden_sizes, hp.feature_dim, env.num_actions, hp.activation)?)
        } else {
            QNetwork::Plain(NetworkSpec::new(env.state_dim, hp.hidden_sizes.clone(), env.num_actions, hp.activation)?)
        };
        let online = net.init_params(seed);
        Ok(DqnAgent {
            adam: AdamState::new(online.len()),
            target: online.clone(),
            online,
            net,
            replay: ReplayBuffer::new(hp.replay_capacity),
            hp: hp.clone(),
            num_actions: env.num_actions,
        })
    }

    pub fn is_dueling(&self) -> bool {
        matches!(self.net, QNetwork::Dueling(_))
    }

    pub fn hyperparams(&self) -> &AgentHyperparams {
        &self.hp
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    pub fn online_params(&self) -> &[f64] {
        &self.online
    }

    pub fn target_params(&self) -> &[f64] {
        &self.target
    }

    /// Replace both networks' parameters (the target is synchronized).
    pub fn set_params(&mut self, online: Vec<f64>, target: Vec<f64>) -> Result<(), AgentError> {
        let n = self.net.num_params();
        if online.len() != n || target.len() != n {
            return Err(NeuralError::DimMismatch { expected: n, got: online.len() }.into());
        }
        self.online = online;
        self.target = target;
        Ok(())
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(self.net.q_values(&self.online, state)?)
    }

    /// One MSE gradient step on the double-Q targets of `batch`. Returns
    /// the loss before the step.
    pub fn ddqn_update(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let n = batch.len() as f64;
        let mut grad = vec![0.0; self.online.len()];
        let mut loss = 0.0;
        let mut dq = vec![0.0; self.num_actions];
        for t in batch {
            let y = if t.terminal {
                t.reward
            } else {
                let online_next = self.net.q_values(&self.online, &t.next_state)?;
                let target_next = self.net.q_values(&self.target, &t.next_state)?;
                ddqn_targets(t.reward, false, self.hp.discount, &online_next, &target_next)
            };
            let trace = self.net.forward_trace(&self.online, &t.state)?;
            let err = trace.q_values()[t.action] - y;
            loss += err * err / n;
            dq.iter_mut().for_each(|g| *g = 0.0);
            dq[t.action] = 2.0 * err / n;
            self.net.backward(&self.online, &trace, &dq, &mut grad)?;
        }
        if !loss.is_finite() {
            return Err(AgentError::Diverged);
        }
        clip_grad_norm(&mut grad, self.hp.grad_clip);
        adam_step(&mut self.online, &grad, &mut self.adam, self.hp.learning_rate)?;
        Ok(loss)
    }

    pub fn learn(&mut self, t: &Transition, episode: usize, rng: &mut SimRng) -> Result<Option<f64>, AgentError> {
        self.replay.push(t.clone());
        if episode < self.hp.initial_episodes {
            return Ok(None);
        }
        let batch: Vec<Transition> = self.replay.sample(self.hp.batch_size, rng).into_iter().cloned().collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let loss = self.ddqn_update(&refs)?;
        soft_update(&self.online, &mut self.target, self.hp.target_update_rate)?;
        Ok(Some(loss))
    }
}
