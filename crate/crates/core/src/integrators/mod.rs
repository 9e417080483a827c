//! One-step maps, the implicit solver behind them, and trajectory drivers.

mod fixed_point;
mod schemes;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use crate::model::{PhaseState, SystemModel};
use crate::{Error, Result};

pub use schemes::{
    step_en_gr, step_euler, step_imr, step_rk4_38, step_st_gr, step_sv, EnhancedGradient, ExplicitEuler,
    ImplicitMidpoint, Rk4ThreeEighths, StandardGradient, StormerVerlet,
};
pub use trajectory::{
    generate_reference, integrate, integrate_into, integrate_with, SampleSink, SolverStats, Trajectory, TrajectoryMeta,
};

/// Where the damping term is evaluated inside a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Starred {
    /// `((x + x')/2, (y + y')/2)`.
    #[default]
    Midpoint,
    /// `(x, y)`, the start of the step.
    LeftEndpoint,
}

impl Starred {
    pub fn point(self, x: f64, y: f64, x_next: f64, y_next: f64) -> (f64, f64) {
        match self {
            Starred::Midpoint => (0.5 * (x + x_next), 0.5 * (y + y_next)),
            Starred::LeftEndpoint => (x, y),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Starred::Midpoint => "midpoint",
            Starred::LeftEndpoint => "left",
        }
    }
}

impl FromStr for Starred {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Starred::Midpoint),
            "left" | "left-endpoint" => Ok(Starred::LeftEndpoint),
            other => Err(Error::InvalidConfig(format!("unknown starred strategy `{other}`"))),
        }
    }
}

/// Initial guess for the implicit solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Predictor {
    #[default]
    ExplicitEuler,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    /// Sup-norm bound on the last fixed-point update.
    pub tol: f64,
    pub max_iter: u32,
    pub starred: Starred,
    pub reservoir: bool,
    pub predictor: Predictor,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 1e-3,
            tol: 1e-15,
            max_iter: 50,
            starred: Starred::Midpoint,
            reservoir: true,
            predictor: Predictor::ExplicitEuler,
        }
    }
}

impl SolverConfig {
    pub fn with_h(self, h: f64) -> Self {
        SolverConfig { h, ..self }
    }

    pub fn with_starred(self, starred: Starred) -> Self {
        SolverConfig { starred, ..self }
    }

    pub fn with_reservoir(self, reservoir: bool) -> Self {
        SolverConfig { reservoir, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        // h = 0 is a legal (identity) step; negative or non-finite is not.
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("step size must be finite and >= 0, got {}", self.h)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// How an implicit solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    /// Last update `<= tol` (explicit steps always report this).
    Converged,
    /// The update stopped decreasing at the rounding level of the state
    /// before reaching `tol`.
    RoundingFloor,
    /// `max_iter` reached with the update above the rounding floor.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    pub next: PhaseState,
    pub iterations: u32,
    pub residual: f64,
    pub status: StepStatus,
}

impl StepResult {
    pub(crate) fn explicit(next: PhaseState) -> Self {
        StepResult { next, iterations: 0, residual: 0.0, status: StepStatus::Converged }
    }
}

pub trait Stepper: Send + Sync {
    fn name(&self) -> String;

    fn step(&self, model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult>;

    /// Whether the step already updates the reservoir itself.
    fn tracks_reservoir(&self) -> bool {
        false
    }
}

impl<S: Stepper + ?Sized> Stepper for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&self, model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
        (**self).step(model, s, cfg)
    }

    fn tracks_reservoir(&self) -> bool {
        (**self).tracks_reservoir()
    }
}

/// A stepper whose output reservoir is `z' = z + D(x*, y*)·(x' - x)`.
#[derive(Clone, Copy, Debug)]
pub struct WithReservoir<S> {
    inner: S,
    starred: Starred,
}

/// Adds reservoir bookkeeping to `step`. Steppers that already track the
/// reservoir (en-GR, or an already wrapped stepper) pass through unchanged.
pub fn attach_reservoir<S: Stepper>(step: S, starred: Starred) -> WithReservoir<S> {
    WithReservoir { inner: step, starred }
}

impl<S: Stepper> Stepper for WithReservoir<S> {
    fn name(&self) -> String {
        if self.inner.tracks_reservoir() {
            self.inner.name()
        } else {
            format!("{}+reservoir", self.inner.name())
        }
    }

    fn step(&self, model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
        let mut r = self.inner.step(model, s, cfg)?;
        if !self.inner.tracks_reservoir() {
            let (xs, ys) = self.starred.point(s.x, s.y, r.next.x, r.next.y);
            r.next.z = s.z + model.damping(xs, ys) * (r.next.x - s.x);
        }
        Ok(r)
    }

    fn tracks_reservoir(&self) -> bool {
        true
    }
}

/// The integrators available by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    EnGr,
    StGr,
    Imr,
    Sv,
    Euler,
    Rk4_38,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::EnGr, Method::StGr, Method::Imr, Method::Sv, Method::Euler, Method::Rk4_38];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::EnGr => "en-gr",
            Method::StGr => "st-gr",
            Method::Imr => "imr",
            Method::Sv => "sv",
            Method::Euler => "euler",
            Method::Rk4_38 => "rk4-38",
        }
    }

    /// Builds the stepper for `cfg`.
    ///
    /// With `cfg.reservoir` set, IMR and SV get a reservoir evaluated at
    /// `cfg.starred`, Euler and RK4 one evaluated at the step's initial point.
    /// st-GR never carries a reservoir.
    pub fn stepper(self, cfg: &SolverConfig) -> Box<dyn Stepper> {
        let r = cfg.reservoir;
        match self {
            Method::EnGr => Box::new(EnhancedGradient),
            Method::StGr => Box::new(StandardGradient),
            Method::Imr if r => Box::new(attach_reservoir(ImplicitMidpoint, cfg.starred)),
            Method::Imr => Box::new(ImplicitMidpoint),
            Method::Sv if r => Box::new(attach_reservoir(StormerVerlet, cfg.starred)),
            Method::Sv => Box::new(StormerVerlet),
            Method::Euler if r => Box::new(attach_reservoir(ExplicitEuler, Starred::LeftEndpoint)),
            Method::Euler => Box::new(ExplicitEuler),
            Method::Rk4_38 if r => Box::new(attach_reservoir(Rk4ThreeEighths, Starred::LeftEndpoint)),
            Method::Rk4_38 => Box::new(Rk4ThreeEighths),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown integrator `{s}`")))
    }
}
