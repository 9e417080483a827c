use super::fixed_point::{self, Solution};
use super::{Predictor, SolverConfig, StepResult, StepStatus, Stepper};
use crate::model::{PhaseState, SystemModel};
use crate::{Error, Result};

fn predict(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> [f64; 2] {
    match cfg.predictor {
        Predictor::ExplicitEuler => {
            let (vx, vy) = model.vector_field(s.x, s.y);
            [s.x + cfg.h * vx, s.y + cfg.h * vy]
        }
    }
}

fn advance(s: &PhaseState, h: f64, sol: Solution<2>, z: f64) -> StepResult {
    let [x, y] = sol.value;
    StepResult {
        next: PhaseState { t: s.t + h, x, y, z },
        iterations: sol.iterations,
        residual: sol.residual,
        status: sol.status,
    }
}

fn finite(next: PhaseState) -> Result<PhaseState> {
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { what: "state", x: next.x, y: next.y })
    }
}

/// Solves the discrete gradient equations shared by en-GR and st-GR:
///
/// ```text
/// (x' - x)/h =  ∂̄H/∂y(x', y, y')
/// (y' - y)/h = -∂̄H/∂x(x, x', y) - D(x*, y*)
/// ```
fn discrete_gradient_solve(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<Solution<2>> {
    cfg.validate()?;
    let (x, y, h) = (s.x, s.y, cfg.h);
    fixed_point::solve(predict(model, s, cfg), cfg, s.t, |&[xn, yn]| {
        let (xs, ys) = cfg.starred.point(x, y, xn, yn);
        [x + h * model.dgrad_y(xn, y, yn), y - h * (model.dgrad_x(x, xn, y) + model.damping(xs, ys))]
    })
}

/// Reservoir-enhanced discrete gradient step.
///
/// The reservoir update `z' = z + D(x*, y*)·(x' - x)` is evaluated on the
/// converged `(x', y')`. Since `z` does not feed back into the `(x', y')`
/// equations, this is the fixed point of the joint `(x', y', z')` iteration.
/// Cross-multiplying the two state equations gives `K(next) = K(s)`.
pub fn step_en_gr(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    if !cfg.reservoir {
        return Err(Error::InvalidConfig("en-GR needs the reservoir enabled".into()));
    }
    let sol = discrete_gradient_solve(model, s, cfg)?;
    let [xn, yn] = sol.value;
    let (xs, ys) = cfg.starred.point(s.x, s.y, xn, yn);
    let z = s.z + model.damping(xs, ys) * (xn - s.x);
    let r = advance(s, cfg.h, sol, z);
    finite(r.next)?;
    Ok(r)
}

/// Standard discrete gradient step: the en-GR state update without the
/// reservoir (`z` is carried through unchanged).
pub fn step_st_gr(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    let sol = discrete_gradient_solve(model, s, cfg)?;
    Ok(advance(s, cfg.h, sol, s.z))
}

/// Implicit midpoint rule on the unaugmented vector field.
pub fn step_imr(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    cfg.validate()?;
    let (x, y, h) = (s.x, s.y, cfg.h);
    let sol = fixed_point::solve(predict(model, s, cfg), cfg, s.t, |&[xn, yn]| {
        let (vx, vy) = model.vector_field(0.5 * (x + xn), 0.5 * (y + yn));
        [x + h * vx, y + h * vy]
    })?;
    Ok(advance(s, h, sol, s.z))
}

/// Störmer–Verlet in kick-drift-kick form.
///
/// The first half-kick is implicit in the half-step velocity
/// `v = y + h/2·(-∂H/∂x(x, v) - D(x, v))`; the closing half-kick is its
/// explicit adjoint, which keeps the composition symmetric.
pub fn step_sv(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    cfg.validate()?;
    let (x, y, h) = (s.x, s.y, cfg.h);
    let half = 0.5 * h;

    let (y_half, x_next, iterations, residual, status) = match model.damping_slope(x) {
        Some(c) => {
            // D = c(x)·v and ∂H/∂x independent of v: the kick is linear in v,
            // and H is separable, so the drift is explicit.
            let (hx, _) = model.grad(x, y);
            let v = (y - half * hx) / (1.0 + half * c);
            (v, x + h * v, 0, 0.0, StepStatus::Converged)
        }
        None => {
            let kick = fixed_point::solve([y], cfg, s.t, |&[v]| {
                let (hx, _) = model.grad(x, v);
                [y + half * (-hx - model.damping(x, v))]
            })?;
            let [v] = kick.value;
            let hy0 = model.grad(x, v).1;
            let drift = fixed_point::solve([x + h * hy0], cfg, s.t, |&[u]| [x + half * (hy0 + model.grad(u, v).1)])?;
            let status = if kick.status == StepStatus::Stalled || drift.status == StepStatus::Stalled {
                StepStatus::Stalled
            } else if kick.status == StepStatus::RoundingFloor || drift.status == StepStatus::RoundingFloor {
                StepStatus::RoundingFloor
            } else {
                StepStatus::Converged
            };
            (v, drift.value[0], kick.iterations + drift.iterations, kick.residual.max(drift.residual), status)
        }
    };

    let (hx, _) = model.grad(x_next, y_half);
    let y_next = y_half + half * (-hx - model.damping(x_next, y_half));
    let next = finite(PhaseState { t: s.t + h, x: x_next, y: y_next, z: s.z })?;
    Ok(StepResult { next, iterations, residual, status })
}

/// Four-stage Runge–Kutta 3/8 rule: nodes (0, 1/3, 2/3, 1), weights
/// (1/8, 3/8, 3/8, 1/8).
pub fn step_rk4_38(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    cfg.validate()?;
    let (x, y, h) = (s.x, s.y, cfg.h);
    let third = 1.0 / 3.0;
    let k1 = model.vector_field(x, y);
    let k2 = model.vector_field(x + h * third * k1.0, y + h * third * k1.1);
    let k3 = model.vector_field(x + h * (k2.0 - third * k1.0), y + h * (k2.1 - third * k1.1));
    let k4 = model.vector_field(x + h * (k1.0 - k2.0 + k3.0), y + h * (k1.1 - k2.1 + k3.1));
    let next = PhaseState {
        t: s.t + h,
        x: x + h * 0.125 * (k1.0 + 3.0 * (k2.0 + k3.0) + k4.0),
        y: y + h * 0.125 * (k1.1 + 3.0 * (k2.1 + k3.1) + k4.1),
        z: s.z,
    };
    Ok(StepResult::explicit(finite(next)?))
}

pub fn step_euler(model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
    cfg.validate()?;
    let (vx, vy) = model.vector_field(s.x, s.y);
    let next = PhaseState { t: s.t + cfg.h, x: s.x + cfg.h * vx, y: s.y + cfg.h * vy, z: s.z };
    Ok(StepResult::explicit(finite(next)?))
}

macro_rules! stepper {
    ($(#[$doc:meta])* $ty:ident, $name:literal, $f:ident, $tracks:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, Default)]
        pub struct $ty;

        impl Stepper for $ty {
            fn name(&self) -> String {
                $name.to_string()
            }

            fn step(&self, model: &SystemModel, s: &PhaseState, cfg: &SolverConfig) -> Result<StepResult> {
                $f(model, s, cfg)
            }

            fn tracks_reservoir(&self) -> bool {
                $tracks
            }
        }
    };
}

stepper!(
    /// See [`step_en_gr`].
    EnhancedGradient, "en-gr", step_en_gr, true
);
stepper!(StandardGradient, "st-gr", step_st_gr, false);
stepper!(ImplicitMidpoint, "imr", step_imr, false);
stepper!(StormerVerlet, "sv", step_sv, false);
stepper!(ExplicitEuler, "euler", step_euler, false);
stepper!(Rk4ThreeEighths, "rk4-38", step_rk4_38, false);
