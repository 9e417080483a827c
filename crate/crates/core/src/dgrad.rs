//! Coordinate-increment (Itoh–Abe) discrete gradients built from `H` alone.
//!
//! The x-increment is taken first at the old `y`, then the y-increment at
//! the new `x`, so the two quotients telescope:
//!
//! ```text
//! dx·(x_b - x_a) + dy·(y_b - y_a) = H(x_b, y_b) - H(x_a, y_a)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{SystemKind, SystemModel};
use crate::{Error, Result};

/// Increments at or below this magnitude fall back to a derivative evaluation.
pub const DEFAULT_EPS_SWITCH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DGradPair {
    /// Discrete `∂H/∂x`.
    pub dx_part: f64,
    /// Discrete `∂H/∂y`.
    pub dy_part: f64,
}

/// Central difference `f'(u)` with a step scaled to `|u|`.
pub(crate) fn central_difference(f: impl Fn(f64) -> f64, u: f64) -> f64 {
    let step = f64::EPSILON.cbrt() * u.abs().max(1.0);
    (f(u + step) - f(u - step)) / (2.0 * step)
}

fn divided_difference(f: impl Fn(f64) -> f64, a: f64, b: f64, eps_switch: f64) -> f64 {
    let delta = b - a;
    if delta.abs() > eps_switch {
        (f(b) - f(a)) / delta
    } else {
        central_difference(f, 0.5 * (a + b))
    }
}

pub(crate) fn partial_x(energy: impl Fn(f64, f64) -> f64, x_a: f64, x_b: f64, y: f64, eps_switch: f64) -> f64 {
    divided_difference(|u| energy(u, y), x_a, x_b, eps_switch)
}

pub(crate) fn partial_y(energy: impl Fn(f64, f64) -> f64, x: f64, y_a: f64, y_b: f64, eps_switch: f64) -> f64 {
    divided_difference(|v| energy(x, v), y_a, y_b, eps_switch)
}

/// Discrete gradient of `energy` between `(x_a, y_a)` and `(x_b, y_b)`.
pub fn itoh_abe_dgrad(
    energy: impl Fn(f64, f64) -> f64,
    x_a: f64,
    x_b: f64,
    y_a: f64,
    y_b: f64,
    eps_switch: f64,
) -> Result<DGradPair> {
    if !(eps_switch > 0.0) {
        return Err(Error::InvalidConfig(format!("eps_switch must be positive, got {eps_switch}")));
    }
    for (x, y) in [(x_a, y_a), (x_b, y_a), (x_b, y_b)] {
        if !energy(x, y).is_finite() {
            return Err(Error::NonFinite { what: "energy", x, y });
        }
    }
    let pair = DGradPair {
        dx_part: partial_x(&energy, x_a, x_b, y_a, eps_switch),
        dy_part: partial_y(&energy, x_b, y_a, y_b, eps_switch),
    };
    if !(pair.dx_part.is_finite() && pair.dy_part.is_finite()) {
        return Err(Error::NonFinite { what: "discrete gradient", x: x_b, y: y_b });
    }
    Ok(pair)
}

/// Largest discrepancy between `model`'s closed-form discrete partials and
/// the generic divided differences, over `n_samples` random points of
/// `[-10, 10]⁴`.
///
/// Discrepancies are measured on the energy increments they produce
/// (`|closed - generic|·|Δ|`), relative to the larger endpoint energy. That
/// is the scale at which a divided difference can be resolved at all.
pub fn validate_closed_forms(model: &SystemModel, n_samples: usize, seed: u64) -> f64 {
    if let SystemKind::Conservative { .. } = model.kind() {
        // Closed and generic forms are the same function.
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let energy = |x, y| model.energy(x, y);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples.max(1) {
        let [x_a, x_b, y_a, y_b]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..=10.0));

        let dx = x_b - x_a;
        if dx.abs() > DEFAULT_EPS_SWITCH {
            let generic = partial_x(energy, x_a, x_b, y_a, DEFAULT_EPS_SWITCH);
            let closed = model.dgrad_x(x_a, x_b, y_a);
            let scale = energy(x_a, y_a).abs().max(energy(x_b, y_a).abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((closed - generic).abs() * dx.abs() / scale);
        }

        let dy = y_b - y_a;
        if dy.abs() > DEFAULT_EPS_SWITCH {
            let generic = partial_y(energy, x_b, y_a, y_b, DEFAULT_EPS_SWITCH);
            let closed = model.dgrad_y(x_b, y_a, y_b);
            let scale = energy(x_b, y_a).abs().max(energy(x_b, y_b).abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((closed - generic).abs() * dy.abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: f64, y: f64) -> f64 {
        0.5 * (x * x + y * y)
    }

    fn duffing(x: f64, y: f64) -> f64 {
        0.5 * y * y - 0.5 * x * x + 0.25 * x.powi(4)
    }

    #[test]
    fn quadratic_mean() {
        let p = itoh_abe_dgrad(quadratic, 0.0, 0.0, 1.0, 3.0, DEFAULT_EPS_SWITCH).unwrap();
        assert_eq!(p.dy_part, 2.0);
    }

    #[test]
    fn degenerate_increment_uses_derivative() {
        let p = itoh_abe_dgrad(quadratic, 0.0, 0.0, 1.0, 1.0, DEFAULT_EPS_SWITCH).unwrap();
        assert!((p.dy_part - 1.0).abs() < 1e-9);
        assert!(p.dx_part.abs() < 1e-9);
    }

    #[test]
    fn duffing_x_part_matches_brute_force() {
        for y in [-3.0, 0.0, 2.5] {
            let brute = (duffing(2.0, y) - duffing(0.0, y)) / 2.0;
            assert_eq!(brute, 1.0);
            let p = itoh_abe_dgrad(duffing, 0.0, 2.0, y, y + 1.0, DEFAULT_EPS_SWITCH).unwrap();
            assert_eq!(p.dx_part, brute);
            assert_eq!(SystemModel::duffing(0.2).dgrad_x(0.0, 2.0, y), p.dx_part);
        }
    }

    #[test]
    fn rejects_bad_switch_and_non_finite_energy() {
        assert!(matches!(itoh_abe_dgrad(quadratic, 0.0, 1.0, 0.0, 1.0, 0.0), Err(Error::InvalidConfig(_))));
        let blowup = |x: f64, _y: f64| 1.0 / x;
        assert!(matches!(itoh_abe_dgrad(blowup, 0.0, 1.0, 0.0, 1.0, DEFAULT_EPS_SWITCH), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn closed_forms_agree_with_generic() {
        let ho = validate_closed_forms(&SystemModel::damped_harmonic(0.2), 1000, 1);
        assert!(ho <= 1e-12, "damped HO discrepancy {ho:e}");
        let vdp = validate_closed_forms(&SystemModel::van_der_pol(1.0), 1000, 1);
        assert!(vdp <= 1e-12, "VdP discrepancy {vdp:e}");
        let duf = validate_closed_forms(&SystemModel::duffing(0.2), 1000, 1);
        assert!(duf <= 1e-10, "Duffing discrepancy {duf:e}");
        assert!(validate_closed_forms(&SystemModel::duffing(0.2), 1, 99) >= 0.0);
    }

    #[test]
    fn validation_is_deterministic() {
        let m = SystemModel::duffing(0.2);
        assert_eq!(validate_closed_forms(&m, 200, 7), validate_closed_forms(&m, 200, 7));
    }

    /// Largest gap between the divided-difference and derivative branches
    /// for increments on either side of `eps`, over a grid of base points.
    fn branch_gap(energy: fn(f64, f64) -> f64, eps: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let u = -10.0 + 0.5 * i as f64;
            for delta in [0.5 * eps, 0.99 * eps, 1.01 * eps, 2.0 * eps] {
                let divided = partial_x(energy, u, u + delta, 0.7, eps);
                let derivative = central_difference(|v| energy(v, 0.7), u + 0.5 * delta);
                worst = worst.max((divided - derivative).abs());
                let divided = partial_y(energy, 0.7, u, u + delta, eps);
                let derivative = central_difference(|v| energy(0.7, v), u + 0.5 * delta);
                worst = worst.max((divided - derivative).abs());
            }
        }
        worst
    }

    #[test]
    fn branches_meet_at_switch() {
        // At the default threshold cancellation in the divided difference
        // dominates (gaps near 0.5 at |x| = 10 for Duffing). With the switch
        // at 1e-6 the branches meet to 1e-6.
        for energy in [quadratic as fn(f64, f64) -> f64, duffing] {
            let gap = branch_gap(energy, 1e-6);
            assert!(gap <= 1e-6, "gap {gap:e}");
        }
    }
}
