use super::{SolverConfig, StepStatus};
use crate::{Error, Result};

/// Updates smaller than this many ulps of the state are at the rounding level.
const ROUNDING_FLOOR_ULPS: f64 = 16.0;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Solution<const N: usize> {
    pub value: [f64; N],
    pub iterations: u32,
    pub residual: f64,
    pub status: StepStatus,
}

/// Iterates `u ← map(u)` from `start` until the sup-norm update drops to
/// `cfg.tol`, stops decreasing at the rounding floor, or `cfg.max_iter`
/// evaluations have been spent.
pub(crate) fn solve<const N: usize>(
    start: [f64; N],
    cfg: &SolverConfig,
    t: f64,
    mut map: impl FnMut(&[f64; N]) -> [f64; N],
) -> Result<Solution<N>> {
    let mut u = start;
    let mut previous = f64::INFINITY;
    let mut update = f64::INFINITY;
    for k in 1..=cfg.max_iter {
        let next = map(&u);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t, iterations: k });
        }
        update = u.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        if update <= cfg.tol {
            return Ok(Solution { value: u, iterations: k, residual: update, status: StepStatus::Converged });
        }
        let magnitude = u.iter().map(|v| v.abs()).fold(1.0, f64::max);
        if update >= previous && update <= ROUNDING_FLOOR_ULPS * f64::EPSILON * magnitude {
            return Ok(Solution { value: u, iterations: k, residual: update, status: StepStatus::RoundingFloor });
        }
        previous = update;
    }
    Ok(Solution { value: u, iterations: cfg.max_iter, residual: update, status: StepStatus::Stalled })
}
