use super::{argmax, AgentError, AgentHyperparams, Transition};
use crate::envs::EnvSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabularKind {
    QLearning,
    Sarsa,
}

/// Visit counter for the `β / n(s, a)` exploration bonus.
#[derive(Debug, Clone)]
pub struct CountBonus {
    counts: Vec<u32>,
    num_actions: usize,
    beta: f64,
}

impl CountBonus {
    pub fn new(num_states: usize, num_actions: usize, beta: f64) -> Self {
        CountBonus { counts: vec![0; num_states * num_actions], num_actions, beta }
    }

    /// Count the visit, then return `β / n(s, a)`.
    pub fn bonus(&mut self, state: usize, action: usize) -> f64 {
        let n = &mut self.counts[state * self.num_actions + action];
        *n += 1;
        self.beta / *n as f64
    }
}

/// One temporal-difference update of a row-major `|S|×|A|` table.
/// SARSA bootstraps from `next_action`, Q-Learning from the greedy value.
#[allow(clippy::too_many_arguments)]
pub fn tabular_update(
    table: &mut [f64],
    num_actions: usize,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    terminal: bool,
    lr: f64,
    discount: f64,
    kind: TabularKind,
    next_action: Option<usize>,
) -> Result<(), AgentError> {
    let target = if terminal {
        reward
    } else {
        let next_row = &table[next_state * num_actions..(next_state + 1) * num_actions];
        let bootstrap = match kind {
            TabularKind::QLearning => next_row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            TabularKind::Sarsa => next_row[next_action.ok_or(AgentError::MissingNextAction)?],
        };
        reward + discount * bootstrap
    };
    let q = &mut table[state * num_actions + action];
    *q += lr * (target - *q);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TabularAgent {
    table: Vec<f64>,
    spec: EnvSpec,
    kind: TabularKind,
    hp: AgentHyperparams,
    bonus: Option<CountBonus>,
}

impl TabularAgent {
    pub fn new(hp: &AgentHyperparams, spec: &EnvSpec, kind: TabularKind) -> Result<Self, AgentError> {
        let states = spec.num_discrete_states().ok_or_else(|| AgentError::NotTabular(spec.name.clone()))?;
        let bonus = (hp.count_bonus_beta > 0.0).then(|| CountBonus::new(states, spec.num_actions, hp.count_bonus_beta));
        Ok(TabularAgent {
            table: vec![0.0; states * spec.num_actions],
            spec: spec.clone(),
            kind,
            hp: hp.clone(),
            bonus,
        })
    }

    pub fn kind(&self) -> TabularKind {
        self.kind
    }

    pub fn hyperparams(&self) -> &AgentHyperparams {
        &self.hp
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn index(&self, state: &[f64]) -> usize {
        self.spec.discrete_index(state).unwrap_or(0)
    }

    pub fn q_values(&self, state: &[f64]) -> &[f64] {
        let a = self.spec.num_actions;
        let s = self.index(state);
        &self.table[s * a..(s + 1) * a]
    }

    pub fn greedy(&self, state: &[f64]) -> usize {
        argmax(self.q_values(state))
    }

    pub fn learn(&mut self, t: &Transition, next_action: Option<usize>) -> Result<(), AgentError> {
        let s = self.index(&t.state);
        let s2 = self.index(&t.next_state);
        let mut reward = t.reward;
        if let Some(bonus) = self.bonus.as_mut() {
            reward += bonus.bonus(s, t.action);
        }
        if !reward.is_finite() {
            return Err(AgentError::Diverged);
        }
        tabular_update(
            &mut self.table,
            self.spec.num_actions,
            s,
            t.action,
            reward,
            s2,
            t.terminal,
            self.hp.learning_rate,
            self.hp.discount,
            self.kind,
            next_action,
        )
    }
}
