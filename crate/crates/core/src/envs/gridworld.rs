use super::{encode_axis, EnvError, EnvSpec, Environment, EpisodeClock, StateEncoding, StepResult, TransitionSource};

pub const GOAL_REWARD: f64 = 10.0;
pub const STEP_REWARD: f64 = -1.0;
pub const STEP_LIMIT: usize = 20;

/// Deterministic N×M grid: start at (0, 0), goal at (N−1, M−1).
/// Moves cost −1, entering the goal pays +10 and ends the episode.
/// Actions follow the cliff ordering: 0 up, 1 right, 2 down, 3 left.
#[derive(Debug, Clone)]
pub struct GridWorld {
    pub(crate) spec: EnvSpec,
    rows: usize,
    cols: usize,
    cell: (usize, usize),
    clock: EpisodeClock,
}

impl GridWorld {
    pub fn new(rows: usize, cols: usize) -> Self {
        let rows = rows.max(1);
        let cols = cols.max(1);
        let path = (rows - 1) + (cols - 1);
        GridWorld {
            spec: EnvSpec {
                name: format!("gridworld:{rows}x{cols}"),
                state_dim: 2,
                num_actions: 4,
                max_episode_steps: STEP_LIMIT,
                // Return of the shortest path.
                solved_reward: GOAL_REWARD + STEP_REWARD * (path as f64 - 1.0),
                encoding: StateEncoding::Grid { rows, cols },
            },
            rows,
            cols,
            cell: (0, 0),
            clock: EpisodeClock::default(),
        }
    }

    pub fn goal(&self) -> (usize, usize) {
        (self.rows - 1, self.cols - 1)
    }

    pub fn transition(&self, cell: (usize, usize), action: usize) -> ((usize, usize), f64, bool) {
        let (r, c) = cell;
        let next = match action {
            0 => (r.saturating_sub(1), c),
            1 => (r, (c + 1).min(self.cols - 1)),
            2 => ((r + 1).min(self.rows - 1), c),
            3 => (r, c.saturating_sub(1)),
            _ => cell,
        };
        if next == self.goal() {
            (next, GOAL_REWARD, true)
        } else {
            (next, STEP_REWARD, false)
        }
    }

    pub fn encode(&self, cell: (usize, usize)) -> Vec<f64> {
        vec![encode_axis(cell.0, self.rows), encode_axis(cell.1, self.cols)]
    }

    pub fn is_terminal_state(&self, state: &[f64]) -> bool {
        let goal = self.goal();
        self.spec.discrete_index(state) == Some(goal.0 * self.cols + goal.1)
    }
}

impl Environment for GridWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.cell = (0, 0);
        self.clock.reset();
        self.encode(self.cell)
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        self.clock.check(action, self.spec.num_actions)?;
        let (next, reward, terminal) = self.transition(self.cell, action);
        self.cell = next;
        let (done, truncated) = self.clock.tick(terminal, self.spec.max_episode_steps);
        Ok(StepResult {
            next_state: self.encode(next),
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
