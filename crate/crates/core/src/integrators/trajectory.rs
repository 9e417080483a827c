use super::{attach_reservoir, Method, Rk4ThreeEighths, SolverConfig, Starred, StepResult, StepStatus, Stepper};
use crate::model::{PhaseState, SystemModel};
use crate::{Error, Result};

/// Receives samples as they are produced.
pub trait SampleSink {
    fn accept(&mut self, sample: &PhaseState) -> Result<()>;
}

impl SampleSink for Vec<PhaseState> {
    fn accept(&mut self, sample: &PhaseState) -> Result<()> {
        self.push(*sample);
        Ok(())
    }
}

/// Fixed-point bookkeeping over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverStats {
    pub steps: usize,
    pub max_iterations: u32,
    pub total_iterations: u64,
    pub rounding_floor_steps: usize,
    pub stalled_steps: usize,
    pub max_residual: f64,
}

impl SolverStats {
    fn record(&mut self, r: &StepResult) {
        self.steps += 1;
        self.max_iterations = self.max_iterations.max(r.iterations);
        self.total_iterations += u64::from(r.iterations);
        self.max_residual = self.max_residual.max(r.residual);
        match r.status {
            StepStatus::Converged => {}
            StepStatus::RoundingFloor => self.rounding_floor_steps += 1,
            StepStatus::Stalled => self.stalled_steps += 1,
        }
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.steps as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub system: String,
    pub params: Vec<(String, f64)>,
    pub integrator: String,
    pub config: SolverConfig,
    pub t0: f64,
    /// Spacing of the retained samples.
    pub h: f64,
    /// Integration steps per retained sample.
    pub stride: usize,
}

/// Samples on the grid `t_i = t0 + i·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub meta: TrajectoryMeta,
    pub stats: SolverStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.samples.last()
    }
}

fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {h}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("integration time must be positive, got {t_end}")));
    }
    let n = (t_end / h).round();
    if !(1.0..=1e12).contains(&n) {
        return Err(Error::InvalidConfig(format!("T/h = {} steps is out of range", t_end / h)));
    }
    Ok(n as usize)
}

fn meta(model: &SystemModel, integrator: String, cfg: &SolverConfig, stride: usize) -> TrajectoryMeta {
    TrajectoryMeta {
        system: model.name().to_string(),
        params: model.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        integrator,
        config: *cfg,
        t0: 0.0,
        h: cfg.h * stride as f64,
        stride,
    }
}

/// Runs `steps` steps from `ic`, passing every `stride`-th state to `sink`.
///
/// Times are recomputed as `i·h` rather than accumulated.
fn drive(
    model: &SystemModel,
    stepper: &dyn Stepper,
    ic: (f64, f64),
    cfg: &SolverConfig,
    steps: usize,
    stride: usize,
    sink: &mut dyn SampleSink,
) -> Result<SolverStats> {
    cfg.validate()?;
    let mut s = PhaseState::new(0.0, ic.0, ic.1);
    if !s.is_finite() {
        return Err(Error::NonFinite { what: "initial condition", x: ic.0, y: ic.1 });
    }
    sink.accept(&s)?;
    let mut stats = SolverStats::default();
    for i in 0..steps {
        let r = stepper.step(model, &s, cfg).map_err(|e| Error::StepFailed { index: i, source: Box::new(e) })?;
        stats.record(&r);
        s = r.next;
        s.t = (i + 1) as f64 * cfg.h;
        if (i + 1) % stride == 0 {
            sink.accept(&s)?;
        }
    }
    Ok(stats)
}

/// Integrates from `(x0, y0)` at `t = 0` over `round(T/h)` steps, streaming
/// every sample to `sink`.
pub fn integrate_into(
    model: &SystemModel,
    stepper: &dyn Stepper,
    ic: (f64, f64),
    cfg: &SolverConfig,
    t_end: f64,
    sink: &mut dyn SampleSink,
) -> Result<SolverStats> {
    let n = step_count(t_end, cfg.h)?;
    drive(model, stepper, ic, cfg, n, 1, sink)
}

pub fn integrate_with(
    model: &SystemModel,
    stepper: &dyn Stepper,
    ic: (f64, f64),
    cfg: &SolverConfig,
    t_end: f64,
) -> Result<Trajectory> {
    let n = step_count(t_end, cfg.h)?;
    let mut samples = Vec::with_capacity(n + 1);
    let stats = drive(model, stepper, ic, cfg, n, 1, &mut samples)?;
    Ok(Trajectory { samples, meta: meta(model, stepper.name(), cfg, 1), stats })
}

pub fn integrate(
    model: &SystemModel,
    method: Method,
    ic: (f64, f64),
    cfg: &SolverConfig,
    t_end: f64,
) -> Result<Trajectory> {
    integrate_with(model, method.stepper(cfg).as_ref(), ic, cfg, t_end)
}

/// RK4 (3/8 rule) run at `h_ref`, keeping every `stride`-th sample so the
/// result lands on the grid of spacing `stride·h_ref`. Memory is
/// proportional to the retained samples only.
pub fn generate_reference(
    model: &SystemModel,
    ic: (f64, f64),
    h_ref: f64,
    stride: usize,
    t_end: f64,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    let coarse = step_count(t_end, h_ref * stride as f64)?;
    let cfg = SolverConfig::default().with_h(h_ref);
    let stepper = attach_reservoir(Rk4ThreeEighths, Starred::LeftEndpoint);
    let mut samples = Vec::with_capacity(coarse + 1);
    let stats = drive(model, &stepper, ic, &cfg, coarse * stride, stride, &mut samples)?;
    Ok(Trajectory { samples, meta: meta(model, stepper.name(), &cfg, stride), stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_k;

    #[test]
    fn sample_count_and_grid() {
        let m = SystemModel::damped_harmonic(0.2);
        let cfg = SolverConfig::default();
        let tr = integrate(&m, Method::EnGr, (1.3, -2.2), &cfg, cfg.h).unwrap();
        assert_eq!(tr.len(), 2);

        let tr = integrate(&m, Method::EnGr, (1.3, -2.2), &cfg, 2.0).unwrap();
        assert_eq!(tr.len(), 2001);
        assert_eq!(tr.samples[0], PhaseState::new(0.0, 1.3, -2.2));
        for (i, s) in tr.samples.iter().enumerate() {
            let t = i as f64 * cfg.h;
            assert!((s.t - t).abs() <= 1e-12 * t.max(1e-300));
        }
        assert_eq!(tr.meta.integrator, "en-gr");
        assert_eq!(tr.stats.steps, 2000);
    }

    #[test]
    fn rejects_bad_horizon() {
        let m = SystemModel::damped_harmonic(0.2);
        let cfg = SolverConfig::default();
        assert!(integrate(&m, Method::Imr, (1.0, 0.0), &cfg, 0.0).is_err());
        assert!(integrate(&m, Method::Imr, (1.0, 0.0), &cfg.with_h(0.0), 1.0).is_err());
        assert!(integrate(&m, Method::Imr, (f64::NAN, 0.0), &cfg, 1.0).is_err());
    }

    #[test]
    fn step_errors_carry_index() {
        let m = SystemModel::duffing(0.2);
        let cfg = SolverConfig::default().with_h(0.5);
        let err = integrate(&m, Method::Euler, (50.0, 0.0), &cfg, 100.0).unwrap_err();
        assert!(matches!(err, Error::StepFailed { .. }), "{err}");
    }

    #[test]
    fn stride_one_reference_matches_integrate() {
        let m = SystemModel::duffing(0.2);
        let reference = generate_reference(&m, (-6.0, 2.5), 1e-3, 1, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let direct = integrate(&m, Method::Rk4_38, (-6.0, 2.5), &cfg, 1.0).unwrap();
        assert_eq!(reference.samples, direct.samples);
    }

    #[test]
    fn strided_reference_lands_on_coarse_grid() {
        let m = SystemModel::damped_harmonic(0.2);
        let reference = generate_reference(&m, (1.3, -2.2), 1e-4, 10, 1.0).unwrap();
        assert_eq!(reference.len(), 1001);
        assert!((reference.meta.h - 1e-3).abs() < 1e-15);
        let fine = generate_reference(&m, (1.3, -2.2), 1e-4, 1, 1.0).unwrap();
        for (k, s) in reference.samples.iter().enumerate() {
            assert_eq!(*s, fine.samples[10 * k]);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let m = SystemModel::van_der_pol(1.0);
        let cfg = SolverConfig::default();
        let a = integrate(&m, Method::EnGr, (3.42, 2.5), &cfg, 5.0).unwrap();
        let b = integrate(&m, Method::EnGr, (3.42, 2.5), &cfg, 5.0).unwrap();
        assert_eq!(a, b);
        let k0 = eval_k(&m, &a.samples[0]);
        assert!(a.samples.iter().all(|s| (eval_k(&m, s) - k0).abs() < 1e-11));
    }
}
