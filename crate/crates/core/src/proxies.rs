//! Learnable proxy models: synthetic environments that replace the whole
//! transition function, and reward networks that reshape the reward of a
//! real environment. Both step through the common [`Environment`] trait.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::envs::{EnvError, EnvKind, EnvSpec, Environment, RealEnv, StepResult, TransitionSource};
use crate::neural::{Activation, ModelFile, NetworkSpec, NeuralError, ParameterVector};

#[derive(Debug, Error)]
pub enum ProxyError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("proxy file: {0}")]
    Format(String),
    #[error("io error on '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A network mapping `[state ‖ one_hot(action)]` to `[next_state ‖ reward]`.
///
/// Episodes start from the real task's initial-state distribution and only
/// end at the step limit.
#[derive(Debug, Clone)]
pub struct SyntheticEnvironment {
    net: NetworkSpec,
    params: ParameterVector,
    real: RealEnv,
    spec: EnvSpec,
    input: Vec<f64>,
    state: Vec<f64>,
    steps: usize,
    started: bool,
    finished: bool,
}

impl SyntheticEnvironment {
    /// Network shape for a synthetic version of `kind`.
    pub fn network_for(kind: EnvKind, hidden_sizes: Vec<usize>, activation: Activation) -> Result<NetworkSpec, NeuralError> {
        let spec = kind.spec();
        NetworkSpec::new(spec.state_dim + spec.num_actions, hidden_sizes, spec.state_dim + 1, activation)
    }

    pub fn new(kind: EnvKind, net: NetworkSpec, params: ParameterVector) -> Result<Self, ProxyError> {
        let real = kind.build();
        let spec = real.spec().clone();
        if net.input_dim != spec.state_dim + spec.num_actions || net.output_dim != spec.state_dim + 1 {
            return Err(ProxyError::Format(format!(
                "network {}→{} does not fit {} (needs {}→{})",
                net.input_dim,
                net.output_dim,
                kind,
                spec.state_dim + spec.num_actions,
                spec.state_dim + 1
            )));
        }
        if params.len() != net.num_params() {
            return Err(NeuralError::DimMismatch { expected: net.num_params(), got: params.len() }.into());
        }
        Ok(SyntheticEnvironment {
            input: vec![0.0; net.input_dim],
            net,
            params,
            real,
            spec,
            state: Vec::new(),
            steps: 0,
            started: false,
            finished: false,
        })
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.net
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn set_max_episode_steps(&mut self, steps: usize) {
        self.spec.max_episode_steps = steps.max(1);
    }

    /// One forward pass: (next_state, reward). Pure in (ψ, state, action).
    pub fn predict(&self, state: &[f64], action: usize) -> Result<(Vec<f64>, f64), EnvError> {
        let mut input = vec![0.0; self.net.input_dim];
        self.predict_into(&mut input, state, action)
    }

    fn predict_into(&self, input: &mut [f64], state: &[f64], action: usize) -> Result<(Vec<f64>, f64), EnvError> {
        let n = self.spec.state_dim;
        if state.len() != n {
            return Err(EnvError::StateDim { got: state.len(), expected: n });
        }
        if action >= self.spec.num_actions {
            return Err(EnvError::InvalidAction { action, num_actions: self.spec.num_actions });
        }
        input[..n].copy_from_slice(state);
        input[n..].fill(0.0);
        input[n + action] = 1.0;
        let mut out = self.net.forward(&self.params, input).map_err(|_| EnvError::NonFinite)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(EnvError::NonFinite);
        }
        let reward = out.pop().unwrap_or(0.0);
        Ok((out, reward))
    }
}

impl Environment for SyntheticEnvironment {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.state = self.real.reset(seed);
        self.steps = 0;
        self.started = true;
        self.finished = false;
        self.state.clone()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        let mut input = std::mem::take(&mut self.input);
        let result = self.predict_into(&mut input, &self.state, action);
        self.input = input;
        let (next_state, reward) = result?;
        self.steps += 1;
        let done = self.steps >= self.spec.max_episode_steps;
        self.finished = done;
        self.state.clone_from(&next_state);
        Ok(StepResult { next_state, reward, done, truncated: done, steps_elapsed: self.steps, real_reward: None })
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Synthetic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardVariant {
    AdditivePotential,
    ExclusivePotential,
    AdditiveNonPotential,
    ExclusiveNonPotential,
}

impl RewardVariant {
    pub const ALL: [RewardVariant; 4] = [
        RewardVariant::AdditivePotential,
        RewardVariant::ExclusivePotential,
        RewardVariant::AdditiveNonPotential,
        RewardVariant::ExclusiveNonPotential,
    ];

    pub fn is_additive(self) -> bool {
        matches!(self, RewardVariant::AdditivePotential | RewardVariant::AdditiveNonPotential)
    }

    pub fn is_potential(self) -> bool {
        matches!(self, RewardVariant::AdditivePotential | RewardVariant::ExclusivePotential)
    }
}

impl FromStr for RewardVariant {
    type Err = ProxyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "additive_potential" => Ok(RewardVariant::AdditivePotential),
            "exclusive_potential" => Ok(RewardVariant::ExclusivePotential),
            "additive_non_potential" => Ok(RewardVariant::AdditiveNonPotential),
            "exclusive_non_potential" => Ok(RewardVariant::ExclusiveNonPotential),
            other => Err(ProxyError::Format(format!("unknown reward network variant '{other}'"))),
        }
    }
}

impl fmt::Display for RewardVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardVariant::AdditivePotential => "additive_potential",
            RewardVariant::ExclusivePotential => "exclusive_potential",
            RewardVariant::AdditiveNonPotential => "additive_non_potential",
            RewardVariant::ExclusiveNonPotential => "exclusive_non_potential",
        })
    }
}

/// A scalar network Φ over states plus the rule combining it with the real reward.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardNetwork {
    pub phi: NetworkSpec,
    pub params: ParameterVector,
    pub variant: RewardVariant,
    pub gamma: f64,
}

impl RewardNetwork {
    pub fn network_for(kind: EnvKind, hidden_sizes: Vec<usize>, activation: Activation) -> Result<NetworkSpec, NeuralError> {
        NetworkSpec::new(kind.spec().state_dim, hidden_sizes, 1, activation)
    }

    pub fn new(phi: NetworkSpec, params: ParameterVector, variant: RewardVariant, gamma: f64) -> Result<Self, ProxyError> {
        if phi.output_dim != 1 {
            return Err(ProxyError::Format(format!("potential must be scalar, got output_dim {}", phi.output_dim)));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(ProxyError::Format(format!("shaping discount must be in (0, 1], got {gamma}")));
        }
        if params.len() != phi.num_params() {
            return Err(NeuralError::DimMismatch { expected: phi.num_params(), got: params.len() }.into());
        }
        Ok(RewardNetwork { phi, params, variant, gamma })
    }

    pub fn potential(&self, state: &[f64]) -> Result<f64, EnvError> {
        let out = self.phi.forward(&self.params, state).map_err(|e| match e {
            NeuralError::DimMismatch { expected, got } => EnvError::StateDim { got, expected },
            _ => EnvError::NonFinite,
        })?;
        let v = out[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EnvError::NonFinite)
        }
    }

    /// Reward shown to the agent for the real transition `s → s'` with reward `real_r`.
    pub fn reward(&self, s: &[f64], s_next: &[f64], real_r: f64) -> Result<f64, EnvError> {
        let phi_next = self.potential(s_next)?;
        let r = match self.variant {
            RewardVariant::AdditivePotential => real_r + self.gamma * phi_next - self.potential(s)?,
            RewardVariant::ExclusivePotential => self.gamma * phi_next - self.potential(s)?,
            RewardVariant::AdditiveNonPotential => real_r + phi_next,
            RewardVariant::ExclusiveNonPotential => phi_next,
        };
        if r.is_finite() {
            Ok(r)
        } else {
            Err(EnvError::NonFinite)
        }
    }
}

/// The real environment with its reward replaced by a [`RewardNetwork`].
/// Unshaped rewards are kept in [`RewardShapedEnv::real_rewards`] and in
/// [`StepResult::real_reward`].
#[derive(Debug, Clone)]
pub struct RewardShapedEnv {
    real: RealEnv,
    rn: RewardNetwork,
    state: Vec<f64>,
    real_log: Vec<f64>,
}

impl RewardShapedEnv {
    pub fn new(real: RealEnv, rn: RewardNetwork) -> Result<Self, ProxyError> {
        if rn.phi.input_dim != real.spec().state_dim {
            return Err(ProxyError::Format(format!(
                "potential input_dim {} does not match state_dim {}",
                rn.phi.input_dim,
                real.spec().state_dim
            )));
        }
        Ok(RewardShapedEnv { real, rn, state: Vec::new(), real_log: Vec::new() })
    }

    pub fn reward_network(&self) -> &RewardNetwork {
        &self.rn
    }

    /// Real rewards of the current episode.
    pub fn real_rewards(&self) -> &[f64] {
        &self.real_log
    }

    pub fn real_mut(&mut self) -> &mut RealEnv {
        &mut self.real
    }
}

impl Environment for RewardShapedEnv {
    fn spec(&self) -> &EnvSpec {
        self.real.spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.real_log.clear();
        self.state = self.real.reset(seed);
        self.state.clone()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let mut r = self.real.step(action)?;
        let real_r = r.reward;
        r.reward = self.rn.reward(&self.state, &r.next_state, real_r)?;
        r.real_reward = Some(real_r);
        self.real_log.push(real_r);
        self.state.clone_from(&r.next_state);
        Ok(r)
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Real
    }
}

/// A trained proxy as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxyModel {
    Synthetic { env: EnvKind, net: NetworkSpec, params: ParameterVector },
    Reward { env: EnvKind, rn: RewardNetwork },
}

/// A proxy plus the name of the agent it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedProxy {
    pub model: ProxyModel,
    pub trained_with: String,
}

impl ProxyModel {
    pub fn env(&self) -> EnvKind {
        match self {
            ProxyModel::Synthetic { env, .. } | ProxyModel::Reward { env, .. } => *env,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProxyModel::Synthetic { .. } => "se",
            ProxyModel::Reward { .. } => "rn",
        }
    }

    pub fn params(&self) -> &ParameterVector {
        match self {
            ProxyModel::Synthetic { params, .. } => params,
            ProxyModel::Reward { rn, .. } => &rn.params,
        }
    }

    /// Environment an agent trains on when using this proxy.
    pub fn build_env(&self) -> Result<Box<dyn Environment>, ProxyError> {
        Ok(match self {
            ProxyModel::Synthetic { env, net, params } => {
                Box::new(SyntheticEnvironment::new(*env, net.clone(), params.clone())?)
            }
            ProxyModel::Reward { env, rn } => Box::new(RewardShapedEnv::new(env.build(), rn.clone())?),
        })
    }

    pub fn to_model_file(&self, trained_with: &str) -> ModelFile {
        match self {
            ProxyModel::Synthetic { env, net, params } => ModelFile::new(net.clone(), params.clone())
                .with("kind", "se")
                .with("env", env)
                .with("trained_with", trained_with),
            ProxyModel::Reward { env, rn } => ModelFile::new(rn.phi.clone(), rn.params.clone())
                .with("kind", "rn")
                .with("env", env)
                .with("variant", rn.variant)
                .with("gamma", format!("{:.17e}", rn.gamma))
                .with("trained_with", trained_with),
        }
    }

    pub fn from_model_file(file: ModelFile) -> Result<SavedProxy, ProxyError> {
        let need = |k: &str| file.get(k).ok_or_else(|| ProxyError::Format(format!("missing header field '{k}'")));
        let env: EnvKind = need("env")?.parse()?;
        let trained_with = file.get("trained_with").unwrap_or("").to_string();
        let model = match need("kind")? {
            "se" => {
                let se = SyntheticEnvironment::new(env, file.spec.clone(), file.params.clone())?;
                ProxyModel::Synthetic { env, net: se.net, params: se.params }
            }
            "rn" => {
                let variant: RewardVariant = need("variant")?.parse()?;
                let gamma: f64 =
                    need("gamma")?.parse().map_err(|_| ProxyError::Format("gamma is not a number".into()))?;
                let rn = RewardNetwork::new(file.spec.clone(), file.params.clone(), variant, gamma)?;
                if rn.phi.input_dim != env.spec().state_dim {
                    return Err(ProxyError::Format(format!("potential input_dim does not match {env}")));
                }
                ProxyModel::Reward { env, rn }
            }
            other => return Err(ProxyError::Format(format!("unknown proxy kind '{other}'"))),
        };
        Ok(SavedProxy { model, trained_with })
    }

    pub fn save(&self, path: &Path, trained_with: &str) -> Result<(), ProxyError> {
        std::fs::write(path, self.to_model_file(trained_with).to_text())
            .map_err(|source| ProxyError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<SavedProxy, ProxyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ProxyError::Io { path: path.display().to_string(), source })?;
        Self::from_model_file(ModelFile::parse(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cartpole_se(seed: u64) -> SyntheticEnvironment {
        let net = SyntheticEnvironment::network_for(EnvKind::CartPole, vec![8], Activation::Tanh).unwrap();
        let params = net.init_params(seed);
        SyntheticEnvironment::new(EnvKind::CartPole, net, params).unwrap()
    }

    fn constant_rn(kind: EnvKind, c: f64, variant: RewardVariant, gamma: f64) -> RewardNetwork {
        let phi = RewardNetwork::network_for(kind, vec![4], Activation::Relu).unwrap();
        let mut params = ParameterVector::zeros(phi.num_params());
        let last = params.len() - 1;
        params[last] = c;
        RewardNetwork::new(phi, params, variant, gamma).unwrap()
    }

    /// Straightforward single-hidden-layer evaluation, written independently
    /// of the library's layer loop: [W1 (h×n), b1, W2 (o×h), b2].
    fn oracle_forward(params: &[f64], n: usize, h: usize, o: usize, x: &[f64]) -> Vec<f64> {
        let (w1, rest) = params.split_at(h * n);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(o * h);
        let hidden: Vec<f64> = (0..h)
            .map(|j| (b1[j] + (0..n).map(|i| w1[j * n + i] * x[i]).sum::<f64>()).tanh())
            .collect();
        (0..o).map(|k| b2[k] + (0..h).map(|j| w2[k * h + j] * hidden[j]).sum::<f64>()).collect()
    }

    #[test]
    fn zero_network_is_zero_everywhere() {
        let net = SyntheticEnvironment::network_for(EnvKind::CartPole, vec![8], Activation::Tanh).unwrap();
        let se = SyntheticEnvironment::new(EnvKind::CartPole, net.clone(), ParameterVector::zeros(net.num_params())).unwrap();
        for a in 0..2 {
            let (s, r) = se.predict(&[0.3, -1.0, 0.1, 2.0], a).unwrap();
            assert_eq!(s, vec![0.0; 4]);
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn step_matches_forward_oracle() {
        let se = cartpole_se(11);
        let state = [0.01, -0.2, 0.03, 0.4];
        for a in 0..2 {
            let mut x = state.to_vec();
            x.extend([0.0, 0.0]);
            x[4 + a] = 1.0;
            let expected = oracle_forward(se.params(), 6, 8, 5, &x);
            let (s, r) = se.predict(&state, a).unwrap();
            for (got, want) in s.iter().zip(&expected) {
                approx::assert_relative_eq!(*got, *want, epsilon = 1e-12);
            }
            approx::assert_relative_eq!(r, expected[4], epsilon = 1e-12);
        }
    }

    #[test]
    fn synthetic_episode_ends_exactly_at_limit() {
        let mut se = cartpole_se(3);
        se.reset(0);
        for t in 1..=200 {
            let r = se.step(t % 2).unwrap();
            assert_eq!(r.done, t == 200, "step {t}");
            assert_eq!(r.truncated, r.done);
            assert!(!r.terminal());
            assert_eq!(r.real_reward, None);
        }
        assert_eq!(se.step(0), Err(EnvError::EpisodeFinished));
        assert_eq!(se.source(), TransitionSource::Synthetic);
    }

    #[test]
    fn reset_delegates_to_real_env() {
        let mut se = cartpole_se(3);
        let mut real = EnvKind::CartPole.build();
        for seed in 0..20 {
            let s = se.reset(seed);
            assert_eq!(s, real.reset(seed));
            assert!(s.iter().all(|v| v.abs() <= 0.05));
        }
        let net = SyntheticEnvironment::network_for(EnvKind::Cliff, vec![4], Activation::Relu).unwrap();
        let p = net.init_params(0);
        let mut cliff = SyntheticEnvironment::new(EnvKind::Cliff, net, p).unwrap();
        assert_eq!(cliff.reset(7), crate::envs::CliffCell::START.encode());
    }

    #[test]
    fn synthetic_stepping_is_pure() {
        let mut a = cartpole_se(5);
        let mut b = cartpole_se(5);
        a.reset(1);
        b.reset(1);
        for t in 0..50 {
            assert_eq!(a.step(t % 2).unwrap(), b.step(t % 2).unwrap());
        }
    }

    #[test]
    fn non_finite_output_is_reported() {
        let mut se = cartpole_se(5);
        se.params[0] = f64::NAN;
        se.reset(0);
        assert_eq!(se.step(0), Err(EnvError::NonFinite));
        let mut rn = constant_rn(EnvKind::Cliff, 0.0, RewardVariant::AdditivePotential, 0.9);
        let last = rn.params.len() - 1;
        rn.params[last] = f64::NAN;
        assert!(rn.reward(&[0.0, 1.0], &[1.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn mismatched_network_rejected() {
        let net = NetworkSpec::new(5, vec![4], 5, Activation::Relu).unwrap();
        let p = net.init_params(0);
        assert!(SyntheticEnvironment::new(EnvKind::CartPole, net, p).is_err());
    }

    #[test]
    fn reward_variant_arithmetic() {
        // Φ(s) = 1 at s = 0 and Φ(s') = 3 at s' = 2 via Φ(x) = 1 + x[0] on a ReLU net.
        let phi = NetworkSpec::new(2, vec![1], 1, Activation::Relu).unwrap();
        // [W1 (1×2), b1, W2 (1×1), b2]
        let params = ParameterVector::new(vec![1.0, 0.0, 0.0, 1.0, 1.0]);
        let rn = RewardNetwork::new(phi, params, RewardVariant::AdditivePotential, 0.99).unwrap();
        let r = rn.reward(&[0.0, 0.0], &[2.0, 0.0], -1.0).unwrap();
        approx::assert_relative_eq!(r, 0.97, epsilon = 1e-12);

        let c = constant_rn(EnvKind::Cliff, 4.2, RewardVariant::ExclusivePotential, 1.0);
        assert_eq!(c.reward(&[0.1, 0.5], &[0.7, 0.2], -100.0).unwrap(), 0.0);
        let z = constant_rn(EnvKind::Cliff, 0.0, RewardVariant::AdditiveNonPotential, 0.9);
        assert_eq!(z.reward(&[0.1, 0.5], &[0.7, 0.2], -7.0).unwrap(), -7.0);
        let e = constant_rn(EnvKind::Cliff, 2.5, RewardVariant::ExclusiveNonPotential, 0.9);
        assert_eq!(e.reward(&[0.1, 0.5], &[0.7, 0.2], -7.0).unwrap(), 2.5);
    }

    #[test]
    fn variants_parse_and_print() {
        for v in RewardVariant::ALL {
            assert_eq!(v.to_string().parse::<RewardVariant>().unwrap(), v);
        }
        assert!("potential".parse::<RewardVariant>().is_err());
    }

    #[test]
    fn zero_additive_wrapper_matches_bare_env() {
        let rn = constant_rn(EnvKind::Cliff, 0.0, RewardVariant::AdditiveNonPotential, 0.9);
        let mut wrapped = RewardShapedEnv::new(EnvKind::Cliff.build(), rn).unwrap();
        let mut bare = EnvKind::Cliff.build();
        let actions = [0, 1, 1, 2, 1, 1, 1, 1, 2, 3, 0, 0];
        assert_eq!(wrapped.reset(3), bare.reset(3));
        let mut bare_return = 0.0;
        for &a in &actions {
            let w = wrapped.step(a).unwrap();
            let b = bare.step(a).unwrap();
            bare_return += b.reward;
            assert_eq!(w.next_state, b.next_state);
            assert_eq!(w.reward, b.reward);
            assert_eq!((w.done, w.truncated), (b.done, b.truncated));
            assert_eq!(w.real_reward, Some(b.reward));
            if w.done {
                break;
            }
        }
        assert_eq!(wrapped.real_rewards().iter().sum::<f64>(), bare_return);
    }

    #[test]
    fn exclusive_wrapper_hides_real_reward() {
        let rn = constant_rn(EnvKind::Cliff, 1.5, RewardVariant::ExclusivePotential, 1.0);
        let mut env = RewardShapedEnv::new(EnvKind::Cliff.build(), rn).unwrap();
        env.reset(0);
        // Walk straight into the cliff: real reward −100, shaped reward 0.
        let r = env.step(1).unwrap();
        assert!(r.done && !r.truncated);
        assert_eq!(r.reward, 0.0);
        assert_eq!(env.real_rewards(), &[-100.0]);
    }

    #[test]
    fn proxy_files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let se = cartpole_se(9);
        let model = ProxyModel::Synthetic { env: EnvKind::CartPole, net: se.net.clone(), params: se.params.clone() };
        let path = dir.path().join("se.model");
        model.save(&path, "ddqn").unwrap();
        let back = ProxyModel::load(&path).unwrap();
        assert_eq!(back.model, model);
        assert_eq!(back.trained_with, "ddqn");

        let phi = RewardNetwork::network_for(EnvKind::Cliff, vec![32], Activation::PRelu).unwrap();
        let p = phi.init_params(4);
        let rn = RewardNetwork::new(phi, p, RewardVariant::ExclusiveNonPotential, 0.8).unwrap();
        let model = ProxyModel::Reward { env: EnvKind::Cliff, rn };
        let path = dir.path().join("rn.model");
        model.save(&path, "qlearning").unwrap();
        let back = ProxyModel::load(&path).unwrap();
        assert_eq!(back.model, model);
        assert_eq!(back.model.kind_name(), "rn");
    }

    proptest! {
        #[test]
        fn shaped_reward_is_linear_in_potential(
            c1 in -5.0f64..5.0, k in -3.0f64..3.0, real_r in -10.0f64..10.0, vi in 0usize..4
        ) {
            // Scaling every parameter of the output layer by k scales Φ by k; with
            // a constant Φ, r(kΦ) − r(0) = k (r(Φ) − r(0)).
            let variant = RewardVariant::ALL[vi];
            let rn = constant_rn(EnvKind::Cliff, c1, variant, 0.9);
            let scaled = constant_rn(EnvKind::Cliff, k * c1, variant, 0.9);
            let zero = constant_rn(EnvKind::Cliff, 0.0, variant, 0.9);
            let s = [0.2, 0.4];
            let s2 = [0.6, 0.1];
            let base = zero.reward(&s, &s2, real_r).unwrap();
            let lhs = scaled.reward(&s, &s2, real_r).unwrap() - base;
            let rhs = k * (rn.reward(&s, &s2, real_r).unwrap() - base);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
