//! Shared fixtures for the stepper benchmarks.

use egr_core::SystemModel;

/// The three standard systems with their usual initial conditions.
pub fn systems() -> [(&'static str, SystemModel, (f64, f64)); 3] {
    [
        ("damped-ho", SystemModel::damped_harmonic(0.2), (1.3, -2.2)),
        ("vdp", SystemModel::van_der_pol(1.0), (3.42, 2.5)),
        ("duffing", SystemModel::duffing(0.2), (-6.0, 2.5)),
    ]
}
