//! On-disk cache of RK4 reference trajectories.
//!
//! A 10⁸-step reference is expensive, so retained samples are stored as a
//! table keyed by `(system, params, ic, h_ref, stride, T)`. The header carries
//! the key and a SHA-256 of the data rows; a mismatch on either side means
//! the entry is regenerated.

use std::fs;
use std::path::{Path, PathBuf};

use egr_core::{generate_reference, PhaseState, SolverConfig, SolverStats, SystemModel, Trajectory, TrajectoryMeta};
use sha2::{Digest, Sha256};

use crate::table::{fmt_f64, Column, Table};
use crate::CliError;

const FORMAT_TAG: &str = "egr-reference v1";

#[derive(Clone, Debug)]
pub struct ReferenceCache {
    dir: PathBuf,
}

#[derive(Clone, Copy, Debug)]
pub struct ReferenceKey<'a> {
    pub model: &'a SystemModel,
    pub ic: (f64, f64),
    pub h_ref: f64,
    pub stride: usize,
    pub t_end: f64,
}

impl ReferenceKey<'_> {
    fn canonical(&self) -> String {
        let params: Vec<String> = self.model.params().iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        format!(
            "system={};params={};x0={};y0={};h_ref={};stride={};T={}",
            self.model.name(),
            params.join(":"),
            fmt_f64(self.ic.0),
            fmt_f64(self.ic.1),
            fmt_f64(self.h_ref),
            self.stride,
            fmt_f64(self.t_end)
        )
    }

    /// Metadata of the trajectory `generate` would produce.
    fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            system: self.model.name().to_string(),
            params: self.model.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            integrator: "rk4-38+reservoir".to_string(),
            config: SolverConfig::default().with_h(self.h_ref),
            t0: 0.0,
            h: self.h_ref * self.stride as f64,
            stride: self.stride,
        }
    }

    pub fn generate(&self) -> Result<Trajectory, CliError> {
        Ok(generate_reference(self.model, self.ic, self.h_ref, self.stride, self.t_end)?)
    }
}

fn hex_digest(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

fn body_of(traj: &Trajectory) -> String {
    let s = &traj.samples;
    Table {
        meta: Vec::new(),
        columns: vec![
            Column::new("t", s.iter().map(|p| p.t)),
            Column::new("x", s.iter().map(|p| p.x)),
            Column::new("y", s.iter().map(|p| p.y)),
            Column::new("z", s.iter().map(|p| p.z)),
        ],
        trailer: Vec::new(),
    }
    .to_string_lossy()
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReferenceCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &ReferenceKey<'_>) -> PathBuf {
        let name = &hex_digest(key.canonical().as_bytes())[..24];
        self.dir.join(format!("ref-{name}.csv"))
    }

    /// Returns the cached trajectory for `key`, generating and storing it if
    /// the entry is missing or fails its integrity check.
    pub fn load_or_generate(&self, key: &ReferenceKey<'_>) -> Result<Trajectory, CliError> {
        let path = self.path_for(key);
        if let Some(traj) = self.load(key, &path) {
            return Ok(traj);
        }
        let traj = key.generate()?;
        self.store(key, &path, &traj)?;
        Ok(traj)
    }

    fn load(&self, key: &ReferenceKey<'_>, path: &Path) -> Option<Trajectory> {
        let text = fs::read_to_string(path).ok()?;
        let mut lines = text.splitn(4, '\n');
        if lines.next()? != format!("# {FORMAT_TAG}") || lines.next()? != format!("# key={}", key.canonical()) {
            return None;
        }
        let digest = lines.next()?.strip_prefix("# sha256=")?;
        let body = lines.next()?;
        if hex_digest(body.as_bytes()) != digest {
            return None;
        }
        let table = Table::parse(body).ok()?;
        let col = |n: &str| table.column(n).map(|c| &c.values);
        let (t, x, y, z) = (col("t")?, col("x")?, col("y")?, col("z")?);
        let samples = (0..t.len())
            .map(|i| Some(PhaseState { t: t[i]?, x: x[i]?, y: y[i]?, z: z[i]? }))
            .collect::<Option<Vec<_>>>()?;
        let steps = samples.len().saturating_sub(1) * key.stride;
        Some(Trajectory { samples, meta: key.meta(), stats: SolverStats { steps, ..SolverStats::default() } })
    }

    fn store(&self, key: &ReferenceKey<'_>, path: &Path, traj: &Trajectory) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        let body = body_of(traj);
        let text =
            format!("# {FORMAT_TAG}\n# key={}\n# sha256={}\n{body}", key.canonical(), hex_digest(body.as_bytes()));
        let tmp = path.with_extension("csv.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}
