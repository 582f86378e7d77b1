use std::path::Path;

use crate::envs::{CliffCell, CliffWalking, CLIFF_COLS, CLIFF_ROWS};
use crate::proxies::RewardNetwork;

use super::HarnessError;

/// Rewards at or below this are dropped before renormalizing the masked grid.
pub const MASK_THRESHOLD: f64 = -50.0;

/// Per (row, col, action) shaped rewards averaged over reward networks,
/// min-max normalized to [0, 1]. `masked` is `None` where the raw average
/// was masked out.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffGrid {
    pub raw: Vec<f64>,
    pub values: Vec<f64>,
    pub masked: Vec<Option<f64>>,
}

impl CliffGrid {
    pub fn index(row: usize, col: usize, action: usize) -> usize {
        (row * CLIFF_COLS + col) * 4 + action
    }
}

/// Min-max scaler over `vals`; a constant range maps everything to 1.
fn normalize(vals: impl Iterator<Item = f64>) -> Scaler {
    let (min, max) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Scaler { min, max }
}

#[derive(Clone, Copy)]
struct Scaler {
    min: f64,
    max: f64,
}

impl Scaler {
    fn apply(self, v: f64) -> f64 {
        if self.max > self.min { (v - self.min) / (self.max - self.min) } else { 1.0 }
    }
}

/// Shaped reward for every state-action pair of Cliff Walking, from one
/// real transition probe per pair, averaged over `rns`.
pub fn cliff_reward_grid(rns: &[RewardNetwork]) -> Result<CliffGrid, HarnessError> {
    if rns.is_empty() {
        return Err(HarnessError::Invalid("cliff reward grid needs at least one reward network".into()));
    }
    let n = CLIFF_ROWS * CLIFF_COLS * 4;
    let mut raw = vec![0.0; n];
    for row in 0..CLIFF_ROWS {
        for col in 0..CLIFF_COLS {
            let cell = CliffCell { row, col };
            for action in 0..4 {
                let (next, real_r, _) = CliffWalking::transition(cell, action);
                let mut sum = 0.0;
                for rn in rns {
                    sum += rn
                        .reward(&cell.encode(), &next.encode(), real_r)
                        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
                }
                raw[CliffGrid::index(row, col, action)] = sum / rns.len() as f64;
            }
        }
    }
    let norm = normalize(raw.iter().copied());
    let values = raw.iter().map(|&v| norm.apply(v)).collect();
    let kept = raw.iter().copied().filter(|&v| v > MASK_THRESHOLD);
    let norm_masked = normalize(kept);
    let masked = raw.iter().map(|&v| (v > MASK_THRESHOLD).then(|| norm_masked.apply(v))).collect();
    Ok(CliffGrid { raw, values, masked })
}

/// Write `row,col,action,value,masked_value`; masked-out cells leave the last field empty.
pub fn write_grid(path: &Path, grid: &CliffGrid) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row", "col", "action", "value", "masked_value"])?;
    for row in 0..CLIFF_ROWS {
        for col in 0..CLIFF_COLS {
            for action in 0..4 {
                let i = CliffGrid::index(row, col, action);
                w.write_record([
                    row.to_string(),
                    col.to_string(),
                    action.to_string(),
                    grid.values[i].to_string(),
                    grid.masked[i].map(|v| v.to_string()).unwrap_or_default(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
