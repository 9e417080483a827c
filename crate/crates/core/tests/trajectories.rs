use egr_core::diagnostics::exact_trajectory;
use egr_core::{
    convergence_order, exact_damped_harmonic, generate_reference, global_error, integrate, Method, SolverConfig,
    Starred, SystemModel, Trajectory,
};

fn sup_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    let (ex, ey) = global_error(a, b).unwrap();
    ex.iter().chain(&ey).copied().fold(0.0, f64::max)
}

fn order_vs_exact(method: Method, t_end: f64) -> f64 {
    let m = SystemModel::damped_harmonic(0.2);
    let rows: Vec<(f64, f64)> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&h| {
            let traj = integrate(&m, method, (1.3, -2.2), &SolverConfig::default().with_h(h), t_end).unwrap();
            let exact = exact_trajectory(&m, (1.3, -2.2), h, traj.len() - 1).unwrap();
            (h, sup_diff(&traj, &exact))
        })
        .collect();
    convergence_order(&rows).unwrap()
}

#[test]
fn observed_orders() {
    for (method, t_end, lo, hi) in [
        (Method::EnGr, 10.0, 1.9, 2.1),
        (Method::Imr, 10.0, 1.9, 2.1),
        (Method::Euler, 10.0, 0.9, 1.1),
        (Method::Rk4_38, 1.0, 3.8, 4.2),
    ] {
        let p = order_vs_exact(method, t_end);
        assert!((lo..=hi).contains(&p), "{method}: order {p}");
    }
}

#[test]
fn en_gr_is_imr_on_quadratic_energy() {
    let cfg = SolverConfig::default();
    for (m, ic) in [(SystemModel::damped_harmonic(0.2), (1.3, -2.2)), (SystemModel::van_der_pol(1.0), (3.42, 2.5))] {
        let a = integrate(&m, Method::EnGr, ic, &cfg, 100.0).unwrap();
        let b = integrate(&m, Method::Imr, ic, &cfg, 100.0).unwrap();
        assert_eq!(a.len(), 100_001);
        assert!(sup_diff(&a, &b) <= 1e-10, "{}: {}", m.name(), sup_diff(&a, &b));
    }
}

#[test]
fn en_gr_is_st_gr_in_phase_space() {
    for starred in [Starred::Midpoint, Starred::LeftEndpoint] {
        let cfg = SolverConfig::default().with_starred(starred);
        for (m, ic) in [
            (SystemModel::damped_harmonic(0.2), (1.3, -2.2)),
            (SystemModel::van_der_pol(1.0), (3.42, 2.5)),
            (SystemModel::duffing(0.2), (-6.0, 2.5)),
        ] {
            let a = integrate(&m, Method::EnGr, ic, &cfg, 100.0).unwrap();
            let b = integrate(&m, Method::StGr, ic, &cfg, 100.0).unwrap();
            assert!(sup_diff(&a, &b) <= 1e-12, "{} {starred:?}", m.name());
            assert!(b.samples.iter().all(|s| s.z == 0.0));
        }
    }
}

#[test]
fn rk4_million_steps_hits_exact_solution() {
    let m = SystemModel::damped_harmonic(0.2);
    let traj = integrate(&m, Method::Rk4_38, (1.3, -2.2), &SolverConfig::default().with_h(1e-6), 1.0).unwrap();
    let last = traj.last().unwrap();
    let (x, y) = exact_damped_harmonic(0.2, 1.3, -2.2, 1.0).unwrap();
    assert_eq!(last.t, 1.0);
    assert!((last.x - x).abs() <= 1e-12 && (last.y - y).abs() <= 1e-12, "{last:?} vs ({x}, {y})");
}

#[test]
fn rk4_rotation_step() {
    let m = SystemModel::damped_harmonic(0.0);
    let traj = integrate(&m, Method::Rk4_38, (1.0, 0.0), &SolverConfig::default().with_h(0.1), 0.1).unwrap();
    let s = traj.last().unwrap();
    assert!((s.x - 0.1f64.cos()).abs() < 1e-6 && (s.y + 0.1f64.sin()).abs() < 1e-6);
}

#[test]
fn van_der_pol_settles_on_limit_cycle() {
    let m = SystemModel::van_der_pol(1.0);
    let traj = integrate(&m, Method::EnGr, (3.42, 2.5), &SolverConfig::default(), 100.0).unwrap();
    let tail = &traj.samples[traj.len() * 4 / 5..];
    let amplitude = tail.iter().map(|s| s.x.abs()).fold(0.0, f64::max);
    assert!((amplitude - 2.0).abs() <= 0.2, "amplitude {amplitude}");
}

/// dH/dt = -y·D along a fine reference, by central differences of H.
#[test]
fn energy_rate_matches_damping_power() {
    for (m, ic) in [
        (SystemModel::damped_harmonic(0.2), (1.3, -2.2)),
        (SystemModel::van_der_pol(1.0), (3.42, 2.5)),
        (SystemModel::duffing(0.2), (-6.0, 2.5)),
    ] {
        let traj = generate_reference(&m, ic, 1e-5, 10, 2.0).unwrap();
        let dt = traj.meta.h;
        let s = &traj.samples;
        let worst = (1..s.len() - 1)
            .map(|i| {
                let rate = (m.energy(s[i + 1].x, s[i + 1].y) - m.energy(s[i - 1].x, s[i - 1].y)) / (2.0 * dt);
                (rate + s[i].y * m.damping(s[i].x, s[i].y)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{}: {worst}", m.name());
    }
}

#[test]
fn sv_reservoir_drifts_where_en_gr_does_not() {
    let m = SystemModel::damped_harmonic(0.2);
    let cfg = SolverConfig::default();
    let drift = |method| {
        let traj = integrate(&m, method, (1.3, -2.2), &cfg, 100.0).unwrap();
        egr_core::k_drift(&m, &traj).into_iter().fold(0.0, f64::max)
    };
    let (en, sv) = (drift(Method::EnGr), drift(Method::Sv));
    assert!(en <= 1e-10, "en-gr {en}");
    assert!(sv >= 100.0 * en, "sv {sv} vs en-gr {en}");
}

#[test]
fn implicit_steps_converge_quickly() {
    for (m, ic) in [
        (SystemModel::damped_harmonic(0.2), (1.3, -2.2)),
        (SystemModel::van_der_pol(1.0), (3.42, 2.5)),
        (SystemModel::duffing(0.2), (-6.0, 2.5)),
    ] {
        for method in [Method::EnGr, Method::StGr, Method::Imr, Method::Sv] {
            let traj = integrate(&m, method, ic, &SolverConfig::default(), 100.0).unwrap();
            assert!(traj.stats.max_iterations <= 25, "{} {method}: {:?}", m.name(), traj.stats);
            assert_eq!(traj.stats.stalled_steps, 0);
        }
    }
}
