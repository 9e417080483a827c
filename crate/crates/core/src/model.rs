//! Planar systems `x' = ∂H/∂y, y' = -∂H/∂x - D(x, y)` and their discrete
//! partial derivatives.

use std::fmt;

use crate::dgrad;
use crate::{Error, Result};

/// One sample of the augmented trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Reservoir: energy removed by the damping so far.
    pub z: f64,
}

impl PhaseState {
    /// Initial state with an empty reservoir.
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        PhaseState { t, x, y, z: 0.0 }
    }

    pub fn with_reservoir(self, z: f64) -> Self {
        PhaseState { z, ..self }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Energy map of a user-supplied conservative system.
pub type EnergyFn = fn(f64, f64) -> f64;

#[derive(Clone, Copy)]
pub enum SystemKind {
    /// `H = (x² + y²)/2`, `D = b·y`.
    DampedHarmonic { b: f64 },
    /// `H = (x² + y²)/2`, `D = -a(1 - x²)·y`.
    VanDerPol { a: f64 },
    /// `H = y²/2 - x²/2 + x⁴/4`, `D = b·y`.
    Duffing { b: f64 },
    /// Only `H` is known; `D ≡ 0` and all derivatives are generic.
    Conservative { name: &'static str, energy: EnergyFn },
}

impl fmt::Debug for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::DampedHarmonic { b } => write!(f, "DampedHarmonic {{ b: {b} }}"),
            SystemKind::VanDerPol { a } => write!(f, "VanDerPol {{ a: {a} }}"),
            SystemKind::Duffing { b } => write!(f, "Duffing {{ b: {b} }}"),
            SystemKind::Conservative { name, .. } => write!(f, "Conservative({name})"),
        }
    }
}

/// A planar system: Hamiltonian, damping, exact and discrete partials.
///
/// Immutable after construction, so it can be shared freely across threads.
#[derive(Clone, Copy, Debug)]
pub struct SystemModel {
    kind: SystemKind,
}

impl SystemModel {
    pub fn damped_harmonic(b: f64) -> Self {
        SystemModel { kind: SystemKind::DampedHarmonic { b } }
    }

    pub fn van_der_pol(a: f64) -> Self {
        SystemModel { kind: SystemKind::VanDerPol { a } }
    }

    pub fn duffing(b: f64) -> Self {
        SystemModel { kind: SystemKind::Duffing { b } }
    }

    pub fn conservative(name: &'static str, energy: EnergyFn) -> Self {
        SystemModel { kind: SystemKind::Conservative { name, energy } }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SystemKind::DampedHarmonic { .. } => "damped-ho",
            SystemKind::VanDerPol { .. } => "vdp",
            SystemKind::Duffing { .. } => "duffing",
            SystemKind::Conservative { name, .. } => name,
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.kind {
            SystemKind::DampedHarmonic { b } | SystemKind::Duffing { b } => vec![("b", b)],
            SystemKind::VanDerPol { a } => vec![("a", a)],
            SystemKind::Conservative { .. } => Vec::new(),
        }
    }

    pub fn is_van_der_pol(&self) -> bool {
        matches!(self.kind, SystemKind::VanDerPol { .. })
    }

    /// `H(x, y)`.
    pub fn energy(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            SystemKind::DampedHarmonic { .. } | SystemKind::VanDerPol { .. } => 0.5 * (x * x + y * y),
            SystemKind::Duffing { .. } => 0.5 * y * y - 0.5 * x * x + 0.25 * x * x * x * x,
            SystemKind::Conservative { energy, .. } => energy(x, y),
        }
    }

    /// `(∂H/∂x, ∂H/∂y)`.
    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        match self.kind {
            SystemKind::DampedHarmonic { .. } | SystemKind::VanDerPol { .. } => (x, y),
            SystemKind::Duffing { .. } => (-x + x * x * x, y),
            SystemKind::Conservative { energy, .. } => {
                (dgrad::central_difference(|u| energy(u, y), x), dgrad::central_difference(|v| energy(x, v), y))
            }
        }
    }

    /// Damping force `D(x, y)`; it enters as `y' = -∂H/∂x - D`.
    pub fn damping(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            SystemKind::DampedHarmonic { b } | SystemKind::Duffing { b } => b * y,
            SystemKind::VanDerPol { a } => -a * (1.0 - x * x) * y,
            SystemKind::Conservative { .. } => 0.0,
        }
    }

    /// `c(x)` when the damping has the form `D = c(x)·y` and `∂H/∂x` does not
    /// depend on `y`, which lets the Verlet half-kick be solved in closed form.
    pub fn damping_slope(&self, x: f64) -> Option<f64> {
        match self.kind {
            SystemKind::DampedHarmonic { b } | SystemKind::Duffing { b } => Some(b),
            SystemKind::VanDerPol { a } => Some(-a * (1.0 - x * x)),
            SystemKind::Conservative { .. } => None,
        }
    }

    /// Discrete x-partial: `(H(x_b, y) - H(x_a, y)) / (x_b - x_a)`, in closed
    /// form for the builtin systems.
    pub fn dgrad_x(&self, x_a: f64, x_b: f64, y: f64) -> f64 {
        match self.kind {
            SystemKind::DampedHarmonic { .. } | SystemKind::VanDerPol { .. } => 0.5 * (x_a + x_b),
            SystemKind::Duffing { .. } => {
                let s = x_a + x_b;
                -0.5 * s + 0.25 * s * (x_a * x_a + x_b * x_b)
            }
            SystemKind::Conservative { energy, .. } => dgrad::partial_x(energy, x_a, x_b, y, dgrad::DEFAULT_EPS_SWITCH),
        }
    }

    /// Discrete y-partial: `(H(x, y_b) - H(x, y_a)) / (y_b - y_a)`.
    pub fn dgrad_y(&self, x: f64, y_a: f64, y_b: f64) -> f64 {
        match self.kind {
            SystemKind::DampedHarmonic { .. } | SystemKind::VanDerPol { .. } | SystemKind::Duffing { .. } => {
                0.5 * (y_a + y_b)
            }
            SystemKind::Conservative { energy, .. } => dgrad::partial_y(energy, x, y_a, y_b, dgrad::DEFAULT_EPS_SWITCH),
        }
    }

    /// Vector field `(x', y')` of the unaugmented system.
    pub fn vector_field(&self, x: f64, y: f64) -> (f64, f64) {
        let (hx, hy) = self.grad(x, y);
        (hy, -hx - self.damping(x, y))
    }
}

/// Computational invariant `K = H + z`.
pub fn eval_k(model: &SystemModel, s: &PhaseState) -> f64 {
    model.energy(s.x, s.y) + s.z
}

/// Closed-form solution of `x'' + b x' + x = 0` (underdamped branch only).
pub fn exact_damped_harmonic(b: f64, x0: f64, y0: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0..2.0).contains(&b) {
        return Err(Error::NotUnderdamped(b));
    }
    let omega = (1.0 - 0.25 * b * b).sqrt();
    let c1 = x0;
    let c2 = (y0 + 0.5 * b * x0) / omega;
    let decay = (-0.5 * b * t).exp();
    let (sin, cos) = (omega * t).sin_cos();
    let osc = c1 * cos + c2 * sin;
    let dosc = omega * (c2 * cos - c1 * sin);
    Ok((decay * osc, decay * (dosc - 0.5 * b * osc)))
}
