//! Datasets behind the standard figures. Each figure fixes its system,
//! initial condition and integrator set; only the grid, solver tolerance,
//! reference resolution and cache location are adjustable.

use std::path::PathBuf;

use rayon::prelude::*;

use egr_core::{integrate, DiagnosticsReport, Method, Predictor, SolverConfig, Starred, SystemModel, Trajectory};

use crate::cache::ReferenceCache;
use crate::commands::{decrement_mode, obtain_reference, Outcome};
use crate::spec::{check_reference, ReferenceSpec};
use crate::table::{fmt_f64, Column, Table};
use crate::CliError;

pub const FIGURE_IDS: [&str; 6] = ["3.1", "3.2", "4.1", "4.2", "4.3", "4.4"];

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub h: f64,
    pub t_end: f64,
    /// RK4 reference for the nonlinear systems; damped-HO figures use the
    /// closed-form solution.
    pub reference: ReferenceSpec,
    pub tol: f64,
    pub max_iter: u32,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Series {
    KDev,
    RDev,
    ErrX,
    ErrY,
}

impl Series {
    fn suffix(self) -> &'static str {
        match self {
            Series::KDev => "K_dev",
            Series::RDev => "R_dev",
            Series::ErrX => "err_x",
            Series::ErrY => "err_y",
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Variant {
    label: &'static str,
    method: Method,
    starred: Starred,
    reservoir: bool,
}

const fn variant(label: &'static str, method: Method) -> Variant {
    Variant { label, method, starred: Starred::Midpoint, reservoir: true }
}

struct Figure {
    description: &'static str,
    model: SystemModel,
    ic: (f64, f64),
    variants: Vec<Variant>,
    series: Series,
    /// Whether the closed-form solution replaces the RK4 reference.
    exact: bool,
    basins: bool,
}

fn figure(id: &str) -> Result<Figure, CliError> {
    let damped = SystemModel::damped_harmonic(0.2);
    let vdp = SystemModel::van_der_pol(1.0);
    let duffing = SystemModel::duffing(0.2);
    let st_gr_left =
        Variant { label: "st-gr-left", method: Method::StGr, starred: Starred::LeftEndpoint, reservoir: false };
    let fig = match id {
        "3.1" => Figure {
            description: "K deviation, damped oscillator",
            model: damped,
            ic: (1.3, -2.2),
            variants: vec![variant("en-gr", Method::EnGr), variant("sv", Method::Sv)],
            series: Series::KDev,
            exact: true,
            basins: false,
        },
        "3.2" => Figure {
            description: "energy decrement deviation, damped oscillator",
            model: damped,
            ic: (1.3, -2.2),
            variants: vec![variant("en-gr", Method::EnGr), variant("imr", Method::Imr)],
            series: Series::RDev,
            exact: true,
            basins: false,
        },
        "4.1" => Figure {
            description: "y error against the RK4 reference, Van der Pol",
            model: vdp,
            ic: (3.42, 2.5),
            variants: vec![variant("en-gr", Method::EnGr), variant("imr", Method::Imr), variant("sv", Method::Sv)],
            series: Series::ErrY,
            exact: false,
            basins: false,
        },
        "4.2" => Figure {
            description: "K deviation, Van der Pol",
            model: vdp,
            ic: (3.42, 2.5),
            variants: vec![variant("en-gr", Method::EnGr)],
            series: Series::KDev,
            exact: false,
            basins: false,
        },
        "4.3" => Figure {
            description: "energy decrement deviation, Duffing",
            model: duffing,
            ic: (-6.0, 2.5),
            variants: vec![
                variant("en-gr", Method::EnGr),
                variant("imr", Method::Imr),
                variant("st-gr", Method::StGr),
                st_gr_left,
            ],
            series: Series::RDev,
            exact: false,
            basins: false,
        },
        "4.4" => Figure {
            description: "x error against the RK4 reference, Duffing",
            model: duffing,
            ic: (-6.0, 2.5),
            variants: vec![
                variant("en-gr", Method::EnGr),
                variant("imr", Method::Imr),
                variant("sv", Method::Sv),
                variant("st-gr", Method::StGr),
                st_gr_left,
            ],
            series: Series::ErrX,
            exact: false,
            basins: true,
        },
        _ => return Err(CliError::Usage(format!("unknown figure `{id}`; expected one of {}", FIGURE_IDS.join(", ")))),
    };
    Ok(fig)
}

fn needs_reference(series: Series) -> bool {
    series != Series::KDev
}

pub fn cmd_figure(id: &str, opts: &FigureOptions) -> Result<Outcome, CliError> {
    let fig = figure(id)?;
    if !(opts.h > 0.0) || !(opts.t_end > 0.0) {
        return Err(CliError::Usage("--h and --T must be positive".into()));
    }
    let reference_spec = if !needs_reference(fig.series) && !fig.basins {
        ReferenceSpec::None
    } else if fig.exact {
        ReferenceSpec::Exact
    } else {
        opts.reference
    };
    if reference_spec == ReferenceSpec::None && needs_reference(fig.series) {
        return Err(CliError::Usage(format!("figure {id} needs an RK4 reference")));
    }
    check_reference(&fig.model, opts.h, reference_spec)?;

    let base = SolverConfig {
        h: opts.h,
        tol: opts.tol,
        max_iter: opts.max_iter,
        starred: Starred::Midpoint,
        reservoir: true,
        predictor: Predictor::ExplicitEuler,
    };
    base.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let cache = opts.cache_dir.as_ref().map(ReferenceCache::new);
    let runs: Vec<Trajectory> = fig
        .variants
        .par_iter()
        .map(|v| {
            let cfg = base.with_starred(v.starred).with_reservoir(v.reservoir);
            integrate(&fig.model, v.method, fig.ic, &cfg, opts.t_end)
        })
        .collect::<Result<_, _>>()?;
    let reference = obtain_reference(&fig.model, fig.ic, opts.h, opts.t_end, reference_spec, cache.as_ref())?;

    let mut columns = vec![Column::new("t", runs[0].samples.iter().map(|p| p.t))];
    let mut summary = Vec::new();
    let mut trailer = Vec::new();
    let mut stalled = 0;
    for (v, traj) in fig.variants.iter().zip(&runs) {
        let report = DiagnosticsReport::new(&fig.model, traj, reference.as_ref(), decrement_mode(v.method))?;
        let name = format!("{}_{}", v.label, fig.series.suffix());
        let column = match fig.series {
            Series::KDev => Column::new(name, report.k_drift.iter().copied()),
            Series::RDev => {
                let mut dev = report.decrement_dev.clone();
                dev.resize(traj.len(), None);
                Column::gappy(name, dev)
            }
            Series::ErrX => Column::new(name, report.global_err.0.iter().copied()),
            Series::ErrY => Column::new(name, report.global_err.1.iter().copied()),
        };
        let extent = match fig.series {
            Series::KDev => report.k_drift_extent,
            Series::RDev => report.decrement_extent,
            Series::ErrX => report.err_x_extent,
            Series::ErrY => report.err_y_extent,
        };
        summary.push(format!(
            "summary figure={id} series={} max={:.3e} iter_max={} stalled={}",
            column.name, extent.max, report.max_iterations, report.stalled_steps
        ));
        columns.push(column);
        if fig.basins {
            if let Some(basin) = report.basin {
                trailer.push(format!("basin {}={basin}", v.label));
            }
        }
        stalled += report.stalled_steps;
    }
    if fig.basins {
        if let Some(r) = &reference {
            let basin = egr_core::classify_basin(r, egr_core::diagnostics::DEFAULT_TAIL_FRACTION);
            trailer.push(format!("basin reference={basin}"));
        }
    }

    let labels: Vec<&str> = fig.variants.iter().map(|v| v.label).collect();
    let params: Vec<String> = fig.model.params().iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
    let meta = vec![
        format!("figure={id}"),
        format!("description={}", fig.description),
        format!("system={}", fig.model.name()),
        format!("params={}", params.join(";")),
        format!("integrators={}", labels.join(",")),
        format!("x0={}", fmt_f64(fig.ic.0)),
        format!("y0={}", fmt_f64(fig.ic.1)),
        format!("h={}", fmt_f64(opts.h)),
        format!("T={}", fmt_f64(opts.t_end)),
        format!("tol={}", fmt_f64(opts.tol)),
        format!("max_iter={}", opts.max_iter),
        "starred=midpoint".to_string(),
        "predictor=explicit-euler".to_string(),
        format!("reference={}", reference_spec.describe()),
        "convention=dz/dt=+y*D(x,y);K=H+z".to_string(),
    ];
    summary.extend(trailer.iter().map(|l| format!("summary {l}")));
    Ok(Outcome { table: Table { meta, columns, trailer }, summary, stalled_steps: stalled })
}
