use super::{encode_axis, EnvError, EnvSpec, Environment, EpisodeClock, StateEncoding, StepResult, TransitionSource};

pub const CLIFF_ROWS: usize = 4;
pub const CLIFF_COLS: usize = 12;

pub const UP: usize = 0;
pub const RIGHT: usize = 1;
pub const DOWN: usize = 2;
pub const LEFT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CliffCell {
    pub row: usize,
    pub col: usize,
}

impl CliffCell {
    pub const START: CliffCell = CliffCell { row: 3, col: 0 };
    pub const GOAL: CliffCell = CliffCell { row: 3, col: 11 };

    pub fn from_index(idx: usize) -> Self {
        CliffCell { row: idx / CLIFF_COLS, col: idx % CLIFF_COLS }
    }

    pub fn index(self) -> usize {
        self.row * CLIFF_COLS + self.col
    }

    pub fn is_cliff(self) -> bool {
        self.row == CLIFF_ROWS - 1 && (1..CLIFF_COLS - 1).contains(&self.col)
    }

    pub fn is_terminal(self) -> bool {
        self.is_cliff() || self == Self::GOAL
    }

    pub fn encode(self) -> Vec<f64> {
        vec![encode_axis(self.row, CLIFF_ROWS), encode_axis(self.col, CLIFF_COLS)]
    }
}

/// 4×12 cliff walk. Actions: 0 up, 1 right, 2 down, 3 left. Entering a
/// cliff cell costs −100 and ends the episode; every other move costs −1.
#[derive(Debug, Clone)]
pub struct CliffWalking {
    pub(crate) spec: EnvSpec,
    cell: CliffCell,
    clock: EpisodeClock,
}

impl Default for CliffWalking {
    fn default() -> Self {
        Self::new()
    }
}

impl CliffWalking {
    pub fn new() -> Self {
        CliffWalking {
            spec: EnvSpec {
                name: "cliff".into(),
                state_dim: 2,
                num_actions: 4,
                max_episode_steps: 50,
                solved_reward: -20.0,
                encoding: StateEncoding::Grid { rows: CLIFF_ROWS, cols: CLIFF_COLS },
            },
            cell: CliffCell::START,
            clock: EpisodeClock::default(),
        }
    }

    /// Pure transition rule: `(next_cell, reward, terminal)`.
    pub fn transition(cell: CliffCell, action: usize) -> (CliffCell, f64, bool) {
        let mut next = cell;
        match action {
            UP => next.row = cell.row.saturating_sub(1),
            RIGHT => next.col = (cell.col + 1).min(CLIFF_COLS - 1),
            DOWN => next.row = (cell.row + 1).min(CLIFF_ROWS - 1),
            LEFT => next.col = cell.col.saturating_sub(1),
            _ => {}
        }
        let reward = if next.is_cliff() { -100.0 } else { -1.0 };
        (next, reward, next.is_terminal())
    }

    pub fn cell(&self) -> CliffCell {
        self.cell
    }

    pub fn is_terminal_state(&self, state: &[f64]) -> bool {
        self.spec
            .discrete_index(state)
            .map(|i| CliffCell::from_index(i).is_terminal())
            .unwrap_or(false)
    }
}

impl Environment for CliffWalking {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.cell = CliffCell::START;
        self.clock.reset();
        self.cell.encode()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        self.clock.check(action, self.spec.num_actions)?;
        let (next, reward, terminal) = Self::transition(self.cell, action);
        self.cell = next;
        let (done, truncated) = self.clock.tick(terminal, self.spec.max_episode_steps);
        Ok(StepResult {
            next_state: next.encode(),
            reward,
            done,
            truncated,
            steps_elapsed: self.clock.steps,
            real_reward: Some(reward),
        })
    }

    fn source(&self) -> TransitionSource {
        TransitionSource::Real
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_and_first_moves() {
        let mut env = CliffWalking::new();
        let s = env.reset(123);
        assert_eq!(s, vec![1.0, 0.0]);
        assert_eq!(env.cell(), CliffCell::START);

        let r = env.step(RIGHT).unwrap();
        assert_eq!(r.reward, -100.0);
        assert!(r.done && !r.truncated);

        env.reset(0);
        let r = env.step(LEFT).unwrap();
        assert_eq!(r.reward, -1.0);
        assert!(!r.done);
        assert_eq!(env.cell(), CliffCell::START);
    }

    #[test]
    fn terminal_cells() {
        let env = CliffWalking::new();
        assert!(env.is_terminal_state(&CliffCell::GOAL.encode()));
        assert!(env.is_terminal_state(&CliffCell { row: 3, col: 5 }.encode()));
        assert!(!env.is_terminal_state(&CliffCell::START.encode()));
        assert!(!env.is_terminal_state(&CliffCell { row: 2, col: 5 }.encode()));
    }

    #[test]
    fn optimal_path_returns_minus_thirteen() {
        let mut env = CliffWalking::new();
        env.reset(0);
        let mut actions = vec![UP];
        actions.extend(std::iter::repeat(RIGHT).take(11));
        actions.push(DOWN);
        let mut total = 0.0;
        for (i, a) in actions.iter().enumerate() {
            let r = env.step(*a).unwrap();
            total += r.reward;
            assert_eq!(r.done, i == actions.len() - 1);
        }
        assert_eq!(total, -13.0);
    }

    #[test]
    fn step_limit_truncates() {
        let mut env = CliffWalking::new();
        env.reset(0);
        for i in 1..=50 {
            let r = env.step(LEFT).unwrap();
            assert_eq!(r.done, i == 50);
            assert_eq!(r.truncated, i == 50);
        }
    }
}
