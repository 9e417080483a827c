use rayon::prelude::*;

use egr_core::diagnostics::exact_trajectory;
use egr_core::{
    convergence_order, eval_k, global_error, integrate, DecrementMode, DiagnosticsReport, Method, SolverConfig,
    SystemKind, SystemModel, Trajectory,
};

use crate::cache::{ReferenceCache, ReferenceKey};
use crate::spec::{check_compat, ReferenceSpec, RunSpec};
use crate::table::{fmt_f64, Column, Table};
use crate::CliError;

/// A table for the CSV output plus the human-readable summary lines.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
    /// Steps whose fixed-point solve hit `max_iter` above the rounding floor.
    pub stalled_steps: usize,
}

/// en-GR decrements are read off the reservoir; every other integrator's
/// directly from `H`.
pub fn decrement_mode(method: Method) -> DecrementMode {
    if method == Method::EnGr {
        DecrementMode::Reservoir
    } else {
        DecrementMode::Direct
    }
}

fn step_count(t_end: f64, h: f64) -> usize {
    (t_end / h).round() as usize
}

pub fn obtain_reference(
    model: &SystemModel,
    ic: (f64, f64),
    h: f64,
    t_end: f64,
    reference: ReferenceSpec,
    cache: Option<&ReferenceCache>,
) -> Result<Option<Trajectory>, CliError> {
    match reference {
        ReferenceSpec::None => Ok(None),
        ReferenceSpec::Exact => Ok(Some(exact_trajectory(model, ic, h, step_count(t_end, h))?)),
        ReferenceSpec::Rk4 { h_ref, stride } => {
            let key = ReferenceKey { model, ic, h_ref, stride, t_end };
            let traj = match cache {
                Some(cache) => cache.load_or_generate(&key)?,
                None => key.generate()?,
            };
            Ok(Some(traj))
        }
    }
}

fn summary_line(label: &str, traj: &Trajectory, report: &DiagnosticsReport, with_reference: bool) -> String {
    let mut parts = vec![
        format!("integrator={label}"),
        format!("samples={}", traj.len()),
        format!("max_K_drift={:.3e}", report.k_drift_extent.max),
    ];
    if with_reference {
        parts.push(format!("max_R_dev={:.3e}", report.decrement_extent.max));
        parts.push(format!("max_err_x={:.3e}", report.err_x_extent.max));
        parts.push(format!("max_err_y={:.3e}", report.err_y_extent.max));
    }
    if let Some(basin) = report.basin {
        parts.push(format!("basin={basin}"));
    }
    parts.push(format!("iter_max={}", report.max_iterations));
    parts.push(format!("iter_mean={:.3}", report.mean_iterations));
    parts.push(format!("stalled={}", report.stalled_steps));
    format!("summary {}", parts.join(" "))
}

/// Decrement deviation padded to one entry per sample (the last row has no
/// step after it).
fn per_sample(mut series: Vec<Option<f64>>, samples: usize) -> Vec<Option<f64>> {
    series.resize(samples, None);
    series
}

/// Single integration: trajectory columns `t,x,y,z,H,K`, plus
/// `err_x,err_y,R_dev,K_dev` against the reference when one is attached.
pub fn cmd_run(spec: &RunSpec) -> Result<Outcome, CliError> {
    check_compat(&spec.system, spec.integrator, spec.strict)?;
    let model = &spec.system;
    let cache = spec.cache_dir.as_ref().map(ReferenceCache::new);
    let traj = integrate(model, spec.integrator, spec.ic, &spec.cfg, spec.t_end)?;
    let reference = obtain_reference(model, spec.ic, spec.cfg.h, spec.t_end, spec.reference, cache.as_ref())?;
    let report = DiagnosticsReport::new(model, &traj, reference.as_ref(), decrement_mode(spec.integrator))?;

    let s = &traj.samples;
    let mut columns = vec![
        Column::new("t", s.iter().map(|p| p.t)),
        Column::new("x", s.iter().map(|p| p.x)),
        Column::new("y", s.iter().map(|p| p.y)),
        Column::new("z", s.iter().map(|p| p.z)),
        Column::new("H", s.iter().map(|p| model.energy(p.x, p.y))),
        Column::new("K", s.iter().map(|p| eval_k(model, p))),
    ];
    if reference.is_some() {
        columns.push(Column::new("err_x", report.global_err.0.iter().copied()));
        columns.push(Column::new("err_y", report.global_err.1.iter().copied()));
        columns.push(Column::gappy("R_dev", per_sample(report.decrement_dev.clone(), s.len())));
        columns.push(Column::new("K_dev", report.k_drift.iter().copied()));
    }
    let summary = summary_line(&traj.meta.integrator, &traj, &report, reference.is_some());
    Ok(Outcome {
        table: Table { meta: spec.metadata(), columns, trailer: Vec::new() },
        summary: vec![summary],
        stalled_steps: report.stalled_steps,
    })
}

fn same_experiment(a: &RunSpec, b: &RunSpec) -> bool {
    a.system.name() == b.system.name()
        && a.system.params() == b.system.params()
        && a.ic == b.ic
        && a.cfg.h == b.cfg.h
        && a.t_end == b.t_end
        && a.reference == b.reference
}

/// Several integrators on one system, initial condition and grid, each
/// measured against the shared reference.
pub fn cmd_compare(specs: &[RunSpec]) -> Result<Outcome, CliError> {
    let Some(first) = specs.first() else {
        return Err(CliError::Usage("compare needs at least one integrator".into()));
    };
    if specs.len() == 1 {
        return cmd_run(first);
    }
    if let Some(odd) = specs.iter().find(|s| !same_experiment(first, s)) {
        return Err(CliError::Usage(format!(
            "grid mismatch: {} does not share the system, initial condition and grid of {}",
            odd.integrator, first.integrator
        )));
    }
    for s in specs {
        check_compat(&s.system, s.integrator, s.strict)?;
    }
    let model = &first.system;
    let cache = first.cache_dir.as_ref().map(ReferenceCache::new);
    let trajectories: Vec<Trajectory> = specs
        .par_iter()
        .map(|s| integrate(&s.system, s.integrator, s.ic, &s.cfg, s.t_end))
        .collect::<Result<_, _>>()?;
    let reference = obtain_reference(model, first.ic, first.cfg.h, first.t_end, first.reference, cache.as_ref())?;

    let mut columns = vec![Column::new("t", trajectories[0].samples.iter().map(|p| p.t))];
    let mut summary = Vec::new();
    let mut stalled = 0;
    for (spec, traj) in specs.iter().zip(&trajectories) {
        let report = DiagnosticsReport::new(model, traj, reference.as_ref(), decrement_mode(spec.integrator))?;
        let name = spec.integrator.as_str();
        let s = &traj.samples;
        columns.push(Column::new(format!("{name}_x"), s.iter().map(|p| p.x)));
        columns.push(Column::new(format!("{name}_y"), s.iter().map(|p| p.y)));
        columns.push(Column::new(format!("{name}_z"), s.iter().map(|p| p.z)));
        columns.push(Column::new(format!("{name}_K_dev"), report.k_drift.iter().copied()));
        if reference.is_some() {
            columns.push(Column::new(format!("{name}_err_x"), report.global_err.0.iter().copied()));
            columns.push(Column::new(format!("{name}_err_y"), report.global_err.1.iter().copied()));
            columns.push(Column::gappy(format!("{name}_R_dev"), per_sample(report.decrement_dev.clone(), s.len())));
        }
        summary.push(summary_line(&traj.meta.integrator, traj, &report, reference.is_some()));
        stalled += report.stalled_steps;
    }

    let mut meta = first.metadata();
    let names: Vec<&str> = specs.iter().map(|s| s.integrator.as_str()).collect();
    meta[2] = format!("integrators={}", names.join(","));
    Ok(Outcome { table: Table { meta, columns, trailer: Vec::new() }, summary, stalled_steps: stalled })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// `(h, max over samples of max(|Δx|, |Δy|))`.
    pub rows: Vec<(f64, f64)>,
    pub order: f64,
}

/// Refinement factor between the finest `h` and the RK4 reference step for
/// systems without a closed-form solution.
const REFERENCE_REFINEMENT: f64 = 100.0;

pub fn cmd_convergence(
    model: &SystemModel,
    method: Method,
    ic: (f64, f64),
    base: &SolverConfig,
    hs: &[f64],
    t_end: f64,
    strict: bool,
) -> Result<ConvergenceTable, CliError> {
    check_compat(model, method, strict)?;
    if hs.len() < 2 {
        return Err(CliError::Usage("--hs needs at least two step sizes".into()));
    }
    if hs.iter().any(|&h| !(h > 0.0)) {
        return Err(CliError::Usage("step sizes must be positive".into()));
    }
    let exact = matches!(model.kind(), SystemKind::DampedHarmonic { b } if (0.0..2.0).contains(&b));
    let h_ref = hs.iter().copied().fold(f64::INFINITY, f64::min) / REFERENCE_REFINEMENT;

    let rows = hs
        .par_iter()
        .map(|&h| {
            let cfg = base.with_h(h);
            let traj = integrate(model, method, ic, &cfg, t_end)?;
            let reference = if exact {
                ReferenceSpec::Exact
            } else {
                let stride = (h / h_ref).round() as usize;
                if ((stride as f64) * h_ref - h).abs() > 1e-12 * h {
                    return Err(CliError::Usage(format!(
                        "h = {h:e} is not an integer multiple of the reference step {h_ref:e}"
                    )));
                }
                ReferenceSpec::Rk4 { h_ref, stride }
            };
            let reference = obtain_reference(model, ic, h, t_end, reference, None)?.expect("reference requested");
            let (ex, ey) = global_error(&traj, &reference)?;
            let err = ex.iter().chain(&ey).copied().fold(0.0, f64::max);
            Ok((h, err))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let order = convergence_order(&rows).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(ConvergenceTable { rows, order })
}

impl ConvergenceTable {
    pub fn render(&self) -> String {
        let mut out = String::from("h,max_error\n");
        for (h, e) in &self.rows {
            out.push_str(&format!("{},{}\n", fmt_f64(*h), fmt_f64(*e)));
        }
        out.push_str(&format!("# order={:.4}\n", self.order));
        out
    }
}
