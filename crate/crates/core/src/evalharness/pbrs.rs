use crate::envs::{CliffCell, CliffWalking, EnvKind, GridWorld, CLIFF_COLS, CLIFF_ROWS};
use crate::proxies::RewardVariant;

use super::HarnessError;

const VI_TOLERANCE: f64 = 1e-12;
const VI_MAX_SWEEPS: usize = 100_000;
const ARGMAX_TOLERANCE: f64 = 1e-9;

/// A finite deterministic MDP with absorbing terminal states.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub num_states: usize,
    pub num_actions: usize,
    /// `next[s * A + a]`.
    pub next: Vec<usize>,
    pub reward: Vec<f64>,
    /// Terminal states have no outgoing decisions and value 0.
    pub terminal: Vec<bool>,
}

impl TabularMdp {
    pub fn cliff() -> Self {
        let n = CLIFF_ROWS * CLIFF_COLS;
        let mut mdp = TabularMdp { num_states: n, num_actions: 4, next: vec![0; n * 4], reward: vec![0.0; n * 4], terminal: vec![false; n] };
        for s in 0..n {
            let cell = CliffCell::from_index(s);
            mdp.terminal[s] = cell.is_terminal();
            for a in 0..4 {
                let (next, r, _) = CliffWalking::transition(cell, a);
                mdp.next[s * 4 + a] = next.index();
                mdp.reward[s * 4 + a] = r;
            }
        }
        mdp
    }

    pub fn gridworld(rows: usize, cols: usize) -> Self {
        let g = GridWorld::new(rows, cols);
        let n = rows * cols;
        let mut mdp = TabularMdp { num_states: n, num_actions: 4, next: vec![0; n * 4], reward: vec![0.0; n * 4], terminal: vec![false; n] };
        for s in 0..n {
            let cell = (s / cols, s % cols);
            mdp.terminal[s] = cell == g.goal();
            for a in 0..4 {
                let ((r2, c2), r, _) = g.transition(cell, a);
                mdp.next[s * 4 + a] = r2 * cols + c2;
                mdp.reward[s * 4 + a] = r;
            }
        }
        mdp
    }

    pub fn for_env(kind: EnvKind) -> Option<Self> {
        match kind {
            EnvKind::Cliff => Some(Self::cliff()),
            EnvKind::GridWorld { rows, cols } => Some(Self::gridworld(rows, cols)),
            _ => None,
        }
    }

    /// Rewards after shaping with potential table `phi`. For the potential
    /// variants Φ of a terminal successor counts as 0, so every episode's
    /// shaping terms telescope to −Φ(s₀).
    pub fn shaped_rewards(&self, phi: &[f64], gamma: f64, variant: RewardVariant) -> Vec<f64> {
        let mut out = self.reward.clone();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let i = s * self.num_actions + a;
                let s2 = self.next[i];
                let phi_next = if self.terminal[s2] && variant.is_potential() { 0.0 } else { phi[s2] };
                let r = self.reward[i];
                out[i] = match variant {
                    RewardVariant::AdditivePotential => r + gamma * phi_next - phi[s],
                    RewardVariant::ExclusivePotential => gamma * phi_next - phi[s],
                    RewardVariant::AdditiveNonPotential => r + phi_next,
                    RewardVariant::ExclusiveNonPotential => phi_next,
                };
            }
        }
        out
    }
}

/// Optimal Q-values by value iteration, to a max-norm residual of 1e-12.
pub fn value_iteration(mdp: &TabularMdp, rewards: &[f64], gamma: f64) -> Result<Vec<f64>, HarnessError> {
    let a_n = mdp.num_actions;
    let mut v = vec![0.0; mdp.num_states];
    let mut q = vec![0.0; mdp.num_states * a_n];
    for _ in 0..VI_MAX_SWEEPS {
        let mut residual: f64 = 0.0;
        for s in 0..mdp.num_states {
            if mdp.terminal[s] {
                continue;
            }
            for a in 0..a_n {
                let i = s * a_n + a;
                let s2 = mdp.next[i];
                q[i] = rewards[i] + if mdp.terminal[s2] { 0.0 } else { gamma * v[s2] };
            }
            let best = q[s * a_n..(s + 1) * a_n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            residual = residual.max((best - v[s]).abs());
            v[s] = best;
        }
        if residual < VI_TOLERANCE {
            return Ok(q);
        }
    }
    Err(HarnessError::NoConvergence(VI_MAX_SWEEPS))
}

fn argmax_sets(q: &[f64], mdp: &TabularMdp) -> Vec<Vec<usize>> {
    (0..mdp.num_states)
        .filter(|&s| !mdp.terminal[s])
        .map(|s| {
            let row = &q[s * mdp.num_actions..(s + 1) * mdp.num_actions];
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..row.len()).filter(|&a| row[a] >= best - ARGMAX_TOLERANCE).collect()
        })
        .collect()
}

/// True iff shaping with `variant` leaves every non-terminal state's set of
/// optimal actions unchanged.
pub fn pbrs_check(mdp: &TabularMdp, phi: &[f64], gamma: f64, variant: RewardVariant) -> Result<bool, HarnessError> {
    if phi.len() != mdp.num_states {
        return Err(HarnessError::Invalid(format!("potential table has {} entries, expected {}", phi.len(), mdp.num_states)));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(HarnessError::Invalid(format!("discount must be in (0, 1), got {gamma}")));
    }
    let base = value_iteration(mdp, &mdp.reward, gamma)?;
    let shaped = value_iteration(mdp, &mdp.shaped_rewards(phi, gamma, variant), gamma)?;
    Ok(argmax_sets(&base, mdp) == argmax_sets(&shaped, mdp))
}

/// [`pbrs_check`] for potential-based additive shaping.
pub fn pbrs_invariance_check(mdp: &TabularMdp, phi: &[f64], gamma: f64) -> Result<bool, HarnessError> {
    pbrs_check(mdp, phi, gamma, RewardVariant::AdditivePotential)
}
