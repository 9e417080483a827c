use std::path::PathBuf;

use egr_core::{Method, Predictor, SolverConfig, SystemModel};

use crate::args::{GridArgs, OnOff, SolverArgs, SystemArgs, SystemName};
use crate::table::fmt_f64;
use crate::CliError;

/// Relative slack when checking `stride·h_ref` against the run's `h`.
const GRID_MATCH_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceSpec {
    None,
    Exact,
    Rk4 { h_ref: f64, stride: usize },
}

impl ReferenceSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "none" => Ok(ReferenceSpec::None),
            "exact" => Ok(ReferenceSpec::Exact),
            _ => {
                let bad =
                    || CliError::Usage(format!("bad --reference `{s}`; expected none, exact or rk4:H_REF:STRIDE"));
                let rest = s.strip_prefix("rk4:").ok_or_else(bad)?;
                let (h, stride) = rest.split_once(':').ok_or_else(bad)?;
                let h_ref: f64 = h.parse().map_err(|_| bad())?;
                let stride: usize = stride.parse().map_err(|_| bad())?;
                if !(h_ref > 0.0) || stride == 0 {
                    return Err(bad());
                }
                Ok(ReferenceSpec::Rk4 { h_ref, stride })
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ReferenceSpec::None => "none".into(),
            ReferenceSpec::Exact => "exact".into(),
            ReferenceSpec::Rk4 { h_ref, stride } => format!("rk4:{h_ref:e}:{stride}"),
        }
    }
}

/// Fully resolved description of one integration.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub system: SystemModel,
    pub integrator: Method,
    pub ic: (f64, f64),
    pub cfg: SolverConfig,
    pub t_end: f64,
    pub output: Option<PathBuf>,
    pub reference: ReferenceSpec,
    pub strict: bool,
    pub cache_dir: Option<PathBuf>,
}

fn param(params: &[(String, f64)], key: &str, default: f64) -> f64 {
    params.iter().rev().find(|(k, _)| k == key).map_or(default, |&(_, v)| v)
}

/// Builds the model and initial condition, defaulting to the standard
/// parameters (b = 0.2, a = 1.0) and initial conditions of each system.
pub fn resolve_system(args: &SystemArgs) -> Result<(SystemModel, (f64, f64)), CliError> {
    let params = args
        .params
        .iter()
        .map(|p| {
            let (k, v) =
                p.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects KEY=VALUE, got `{p}`")))?;
            let v: f64 =
                v.trim().parse().map_err(|_| CliError::Usage(format!("--param {k}: `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let allowed: &[&str] = match args.system {
        SystemName::DampedHo | SystemName::Duffing => &["b"],
        SystemName::Vdp => &["a"],
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown parameter `{k}` for this system (expected {})", allowed[0])));
    }
    if params.iter().any(|(_, v)| !v.is_finite()) {
        return Err(CliError::Usage("parameters must be finite".into()));
    }

    let (model, default_ic) = match args.system {
        SystemName::DampedHo => (SystemModel::damped_harmonic(param(&params, "b", 0.2)), (1.3, -2.2)),
        SystemName::Vdp => (SystemModel::van_der_pol(param(&params, "a", 1.0)), (3.42, 2.5)),
        SystemName::Duffing => {
            let b = param(&params, "b", 0.2);
            if b < 0.0 {
                return Err(CliError::Usage(format!("duffing damping must be >= 0, got {b}")));
            }
            (SystemModel::duffing(b), (-6.0, 2.5))
        }
    };
    Ok((model, (args.x0.unwrap_or(default_ic.0), args.y0.unwrap_or(default_ic.1))))
}

pub fn resolve_config(h: f64, solver: &SolverArgs) -> Result<SolverConfig, CliError> {
    let cfg = SolverConfig {
        h,
        tol: solver.tol,
        max_iter: solver.max_iter,
        starred: solver.starred.into(),
        reservoir: solver.reservoir == OnOff::On,
        predictor: Predictor::ExplicitEuler,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if !(h > 0.0) {
        return Err(CliError::Usage(format!("--h must be positive, got {h}")));
    }
    Ok(cfg)
}

pub fn check_compat(model: &SystemModel, method: Method, strict: bool) -> Result<(), CliError> {
    if strict && method == Method::StGr && model.is_van_der_pol() {
        return Err(CliError::Usage(
            "strict mode: st-GR is not applicable to the Van der Pol oscillator, which has neither a \
             conserved energy nor a Lyapunov function for a standard discrete gradient to preserve \
             (use en-gr, which carries the reservoir)"
                .into(),
        ));
    }
    Ok(())
}

pub fn check_reference(model: &SystemModel, h: f64, reference: ReferenceSpec) -> Result<(), CliError> {
    match reference {
        ReferenceSpec::None => Ok(()),
        ReferenceSpec::Exact => match model.kind() {
            egr_core::SystemKind::DampedHarmonic { b } if (0.0..2.0).contains(&b) => Ok(()),
            _ => Err(CliError::Usage("--reference exact needs an underdamped damped-ho system".into())),
        },
        ReferenceSpec::Rk4 { h_ref, stride } => {
            let coarse = h_ref * stride as f64;
            if (coarse - h).abs() > GRID_MATCH_TOL * h {
                Err(CliError::Usage(format!("reference grid {h_ref:e}·{stride} = {coarse:e} does not match --h {h:e}")))
            } else {
                Ok(())
            }
        }
    }
}

impl RunSpec {
    pub fn from_args(
        system: &SystemArgs,
        integrator: Method,
        solver: &SolverArgs,
        grid: &GridArgs,
    ) -> Result<Self, CliError> {
        let (model, ic) = resolve_system(system)?;
        let cfg = resolve_config(grid.h, solver)?;
        if !(grid.t_end > 0.0) {
            return Err(CliError::Usage(format!("--T must be positive, got {}", grid.t_end)));
        }
        let reference = ReferenceSpec::parse(&grid.reference)?;
        check_compat(&model, integrator, solver.strict)?;
        check_reference(&model, grid.h, reference)?;
        Ok(RunSpec {
            system: model,
            integrator,
            ic,
            cfg,
            t_end: grid.t_end,
            output: grid.out.clone(),
            reference,
            strict: solver.strict,
            cache_dir: grid.cache_dir.clone(),
        })
    }

    /// `#`-prefixed echo of every setting, written ahead of the CSV header.
    pub fn metadata(&self) -> Vec<String> {
        let params: Vec<String> = self.system.params().iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        vec![
            format!("system={}", self.system.name()),
            format!("params={}", params.join(";")),
            format!("integrator={}", self.integrator),
            format!("x0={}", fmt_f64(self.ic.0)),
            format!("y0={}", fmt_f64(self.ic.1)),
            format!("h={}", fmt_f64(self.cfg.h)),
            format!("T={}", fmt_f64(self.t_end)),
            format!("tol={}", fmt_f64(self.cfg.tol)),
            format!("max_iter={}", self.cfg.max_iter),
            format!("starred={}", self.cfg.starred.as_str()),
            format!("reservoir={}", if self.cfg.reservoir { "on" } else { "off" }),
            "predictor=explicit-euler".to_string(),
            format!("reference={}", self.reference.describe()),
            format!("strict={}", self.strict),
            "convention=dz/dt=+y*D(x,y);K=H+z".to_string(),
        ]
    }
}
