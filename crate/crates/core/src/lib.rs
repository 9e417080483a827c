//! Structure-preserving one-step integrators for planar non-conservative
//! systems of the form
//!
//! ```text
//! x' = ∂H/∂y,   y' = -∂H/∂x - D(x, y)
//! ```
//!
//! The centrepiece is the reservoir-enhanced discrete gradient scheme
//! ([`EnhancedGradient`]). It carries an auxiliary reservoir `z` with
//! `z' = y·D(x, y)` and conserves `K = H + z` to solver precision, even
//! though `H` itself decays (or grows) along the flow.
//!
//! Sign convention: the reservoir absorbs what the damping removes, so
//! `dz/dt = +y·D` and `dK/dt = 0` along exact solutions.
//!
//! Baselines (implicit midpoint, Störmer–Verlet, explicit Euler and the
//! 3/8-rule Runge–Kutta method) share the same [`Stepper`] interface, and
//! [`diagnostics`] turns trajectories into drift, decrement and error series.

pub mod dgrad;
pub mod diagnostics;
mod error;
pub mod integrators;
pub mod model;

pub use dgrad::{itoh_abe_dgrad, validate_closed_forms, DGradPair, DEFAULT_EPS_SWITCH};
pub use diagnostics::{
    classify_basin, convergence_order, decrement_deviation, decrement_theory, energy_decrement, exact_trajectory,
    global_error, k_drift, Basin, DecrementMode, DiagnosticsReport, Extent, TheorySource,
};
pub use error::Error;
pub use integrators::{
    attach_reservoir, generate_reference, integrate, integrate_into, integrate_with, step_en_gr, step_euler, step_imr,
    step_rk4_38, step_st_gr, step_sv, EnhancedGradient, ExplicitEuler, ImplicitMidpoint, Method, Predictor,
    Rk4ThreeEighths, SampleSink, SolverConfig, SolverStats, StandardGradient, Starred, StepResult, StepStatus, Stepper,
    StormerVerlet, Trajectory, TrajectoryMeta, WithReservoir,
};
pub use model::{eval_k, exact_damped_harmonic, PhaseState, SystemKind, SystemModel};

pub type Result<T, E = Error> = std::result::Result<T, E>;
