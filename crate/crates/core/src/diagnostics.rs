//! Trajectory post-processing: invariant drift, energy decrement, global
//! errors, convergence order and Duffing basin classification.

use std::fmt;

use crate::integrators::{SolverConfig, SolverStats, Trajectory, TrajectoryMeta};
use crate::model::{eval_k, exact_damped_harmonic, PhaseState, SystemKind, SystemModel};
use crate::{Error, Result};

/// Denominators smaller than this leave a gap in a decrement series.
const DIVISION_GUARD: f64 = 1e-300;

/// Relative tolerance for two grids to count as the same.
const GRID_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecrementMode {
    /// `R_i = H_{i+1} / H_i`.
    Direct,
    /// `R_i = (K_0 - z_{i+1}) / (K_0 - z_i)`.
    Reservoir,
}

/// What the numerical decrement is compared against.
#[derive(Clone, Copy, Debug)]
pub enum TheorySource<'a> {
    /// Closed-form damped oscillator started from `(x0, y0)` at `t = 0`.
    Exact { x0: f64, y0: f64 },
    /// A reference trajectory on the same grid.
    Reference(&'a Trajectory),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basin {
    Left,
    Right,
    Undecided,
}

impl fmt::Display for Basin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basin::Left => "Left",
            Basin::Right => "Right",
            Basin::Undecided => "Undecided",
        })
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den.abs() >= DIVISION_GUARD).then(|| num / den)
}

fn ratios(values: &[f64]) -> Vec<Option<f64>> {
    values.windows(2).map(|w| ratio(w[1], w[0])).collect()
}

/// Per-step energy decrement; one entry per step, `None` where the
/// denominator vanishes.
pub fn energy_decrement(model: &SystemModel, traj: &Trajectory, mode: DecrementMode) -> Vec<Option<f64>> {
    let values: Vec<f64> = match mode {
        DecrementMode::Direct => traj.samples.iter().map(|s| model.energy(s.x, s.y)).collect(),
        DecrementMode::Reservoir => {
            let Some(first) = traj.samples.first() else { return Vec::new() };
            let k0 = eval_k(model, first);
            traj.samples.iter().map(|s| k0 - s.z).collect()
        }
    };
    ratios(&values)
}

fn same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} samples vs {}", a.len(), b.len())));
    }
    for (i, (&ta, &tb)) in a.iter().zip(b).enumerate() {
        if (ta - tb).abs() > GRID_TOL * ta.abs().max(tb.abs()) {
            return Err(Error::GridMismatch(format!("sample {i}: t = {ta} vs {tb}")));
        }
    }
    Ok(())
}

/// `R_i^theory = H(state at t_{i+1}) / H(state at t_i)` along the exact
/// solution or a reference trajectory.
pub fn decrement_theory(model: &SystemModel, times: &[f64], source: TheorySource<'_>) -> Result<Vec<Option<f64>>> {
    let energies: Vec<f64> = match source {
        TheorySource::Exact { x0, y0 } => {
            let SystemKind::DampedHarmonic { b } = model.kind() else {
                return Err(Error::Unsupported(format!(
                    "no closed-form solution for `{}`; use a reference trajectory",
                    model.name()
                )));
            };
            times
                .iter()
                .map(|&t| exact_damped_harmonic(b, x0, y0, t).map(|(x, y)| model.energy(x, y)))
                .collect::<Result<_>>()?
        }
        TheorySource::Reference(reference) => {
            same_grid(times, &reference.times())?;
            reference.samples.iter().map(|s| model.energy(s.x, s.y)).collect()
        }
    };
    Ok(ratios(&energies))
}

/// `|R_i - R_i^theory|`, with gaps wherever either side has one.
pub fn decrement_deviation(numeric: &[Option<f64>], theory: &[Option<f64>]) -> Vec<Option<f64>> {
    numeric.iter().zip(theory).map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs())).collect()
}

/// `|K_i - K_0|` per sample.
pub fn k_drift(model: &SystemModel, traj: &Trajectory) -> Vec<f64> {
    let Some(first) = traj.samples.first() else { return Vec::new() };
    let k0 = eval_k(model, first);
    traj.samples.iter().map(|s| (eval_k(model, s) - k0).abs()).collect()
}

/// Per-sample `(|Δx|, |Δy|)` against `reference`. The grids must coincide;
/// nothing is interpolated.
pub fn global_error(traj: &Trajectory, reference: &Trajectory) -> Result<(Vec<f64>, Vec<f64>)> {
    same_grid(&traj.times(), &reference.times())?;
    Ok(traj.samples.iter().zip(&reference.samples).map(|(a, b)| ((a.x - b.x).abs(), (a.y - b.y).abs())).unzip())
}

/// The closed-form damped oscillator sampled on `i·h`, `i = 0..=steps`, as a
/// trajectory. Its reservoir is the exact dissipated energy `H_0 - H(t)`.
pub fn exact_trajectory(model: &SystemModel, ic: (f64, f64), h: f64, steps: usize) -> Result<Trajectory> {
    let SystemKind::DampedHarmonic { b } = model.kind() else {
        return Err(Error::Unsupported(format!("no closed-form solution for `{}`", model.name())));
    };
    let h0 = model.energy(ic.0, ic.1);
    let samples = (0..=steps)
        .map(|i| {
            let t = i as f64 * h;
            let (x, y) = exact_damped_harmonic(b, ic.0, ic.1, t)?;
            Ok(PhaseState { t, x, y, z: h0 - model.energy(x, y) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            system: model.name().to_string(),
            params: model.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            integrator: "exact".to_string(),
            config: SolverConfig::default().with_h(h),
            t0: 0.0,
            h,
            stride: 1,
        },
        stats: SolverStats::default(),
    })
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(Error::DegenerateFit("need at least two (h, error) pairs".into()));
    }
    if errors.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::DegenerateFit("step sizes must be strictly decreasing".into()));
    }
    if let Some(&(h, e)) = errors.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit(format!("entry (h = {h}, error = {e}) is not positive")));
    }
    let n = errors.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = errors.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Which Duffing well the trailing `tail_fraction` of the run sits in, by
/// the mean of `x` (within 0.5 of -1 or +1).
pub fn classify_basin(traj: &Trajectory, tail_fraction: f64) -> Basin {
    let n = traj.samples.len();
    if n == 0 || !(tail_fraction > 0.0) {
        return Basin::Undecided;
    }
    let tail = ((n as f64 * tail_fraction.min(1.0)).ceil() as usize).clamp(1, n);
    let mean = traj.samples[n - tail..].iter().map(|s| s.x).sum::<f64>() / tail as f64;
    if (mean + 1.0).abs() < 0.5 {
        Basin::Left
    } else if (mean - 1.0).abs() < 0.5 {
        Basin::Right
    } else {
        Basin::Undecided
    }
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

/// Largest and last value of a series; gaps are skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Extent {
    pub max: f64,
    pub last: f64,
}

impl Extent {
    pub fn of<'a>(series: impl IntoIterator<Item = &'a f64>) -> Self {
        series.into_iter().fold(Extent::default(), |acc, &v| Extent { max: acc.max.max(v), last: v })
    }

    pub fn of_gappy(series: &[Option<f64>]) -> Self {
        Extent::of(series.iter().flatten())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub k_drift: Vec<f64>,
    /// Empty without a reference.
    pub decrement_dev: Vec<Option<f64>>,
    /// `(|Δx|, |Δy|)`; empty without a reference.
    pub global_err: (Vec<f64>, Vec<f64>),
    pub k_drift_extent: Extent,
    pub decrement_extent: Extent,
    pub err_x_extent: Extent,
    pub err_y_extent: Extent,
    /// Only for Duffing runs.
    pub basin: Option<Basin>,
    pub max_iterations: u32,
    pub mean_iterations: f64,
    pub stalled_steps: usize,
}

impl DiagnosticsReport {
    pub fn new(
        model: &SystemModel,
        traj: &Trajectory,
        reference: Option<&Trajectory>,
        mode: DecrementMode,
    ) -> Result<Self> {
        let k_drift = k_drift(model, traj);
        let (decrement_dev, global_err) = match reference {
            Some(reference) => {
                let theory = decrement_theory(model, &traj.times(), TheorySource::Reference(reference))?;
                let numeric = energy_decrement(model, traj, mode);
                (decrement_deviation(&numeric, &theory), global_error(traj, reference)?)
            }
            None => (Vec::new(), (Vec::new(), Vec::new())),
        };
        let basin =
            matches!(model.kind(), SystemKind::Duffing { .. }).then(|| classify_basin(traj, DEFAULT_TAIL_FRACTION));
        Ok(DiagnosticsReport {
            k_drift_extent: Extent::of(&k_drift),
            decrement_extent: Extent::of_gappy(&decrement_dev),
            err_x_extent: Extent::of(&global_err.0),
            err_y_extent: Extent::of(&global_err.1),
            k_drift,
            decrement_dev,
            global_err,
            basin,
            max_iterations: traj.stats.max_iterations,
            mean_iterations: traj.stats.mean_iterations(),
            stalled_steps: traj.stats.stalled_steps,
        })
    }
}
