//! Experiment configuration read from a TOML file.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wavecone_core::data::{random_compact_data, Bump, InitialData};
use wavecone_core::geometry::ConeParams;
use wavecone_core::nonlinear::{Nonlinearity, SchemeParams};
use wavecone_core::{BoundaryPolicy, Dimension, EtaRange, RadialGrid, RadialState};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: u32,
    pub grid: GridConfig,
    pub scheme: SchemeConfig,
    pub data: DataConfig,
    pub run: RunConfig,
    pub diagnostics: DiagnosticsConfig,
    pub geometry: GeometryConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 3,
            grid: GridConfig::default(),
            scheme: SchemeConfig::default(),
            data: DataConfig::default(),
            run: RunConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            geometry: GeometryConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub dr: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { r_max: 24.0, dr: 1.0 / 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub threshold: f64,
    pub stride: usize,
    pub policy: BoundaryPolicy,
    pub nonlinearity: Nonlinearity,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        let p = SchemeParams::default();
        Self { cfl: p.cfl, threshold: p.threshold, stride: p.stride, policy: p.policy, nonlinearity: p.nonlinearity }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataConfig {
    Zero,
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    VelocityBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    GroundState {
        amplitude: f64,
        lambda: f64,
    },
    /// Seeded random bumps supported in r <= radius.
    Random {
        radius: f64,
    },
    /// Columns r,u,ut, resampled linearly onto the grid and zero beyond the last row.
    Csv {
        path: PathBuf,
    },
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Bump { amplitude: 0.05, center: 0.0, width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { t: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Cone offsets for the exterior defect.
    pub a_list: Vec<f64>,
    /// Times at which the exterior defect is reported; empty means every unit time.
    pub defect_times: Vec<f64>,
    /// Virial cutoff scale and centre offset along e_1.
    pub alpha: f64,
    pub center_offset: f64,
    /// Radiation window; a missing end defaults to the widest range the grid supports.
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub d_eta: Option<f64>,
    /// Time at which the inverse construction starts its correction from zero.
    pub t_far: Option<f64>,
    /// Relative size of the profile ends still treated as compact support.
    pub support_tolerance: f64,
    /// Largest relative L² error of the radiation round trip that passes.
    pub roundtrip_tolerance: f64,
    /// Boost speeds for the soliton energy law.
    pub ell_list: Vec<f64>,
    /// Observation times for the channels curve; empty means every unit time.
    pub channel_times: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            a_list: vec![0.0],
            defect_times: Vec::new(),
            alpha: 4.0,
            center_offset: 0.0,
            eta_min: None,
            eta_max: None,
            d_eta: None,
            t_far: None,
            support_tolerance: 1e-4,
            roundtrip_tolerance: 1e-2,
            ell_list: vec![0.0, 0.5, 0.9],
            channel_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub tau: f64,
    pub theta: f64,
    pub ell: f64,
    pub samples: usize,
    pub cosine_points: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { tau: 10.0, theta: 0.1, ell: 1.0, samples: 1_000_000, cosine_points: 10_000 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(one_line(&e.to_string())))?;
        if let DataConfig::Csv { path: p } = &mut cfg.data {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML of the resolved configuration, the input of the manifest hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.dim()?;
        self.grid()?;
        self.scheme_params().validate()?;
        if !(self.run.t > 0.0 && self.run.t.is_finite()) {
            return Err(CliError::Config(format!("run.t must be positive, got {}", self.run.t)));
        }
        if let DataConfig::Csv { path } = &self.data {
            if !path.is_file() {
                return Err(CliError::Config(format!("data file {} does not exist", path.display())));
            }
        }
        if let Some(a) = self.diagnostics.a_list.iter().find(|a| !a.is_finite()) {
            return Err(CliError::Config(format!("a_list entry {a} is not finite")));
        }
        if let Some(l) = self.diagnostics.ell_list.iter().find(|l| !(l.abs() < 1.0)) {
            return Err(CliError::Config(format!("ell_list entry {l} must satisfy |ell| < 1")));
        }
        if !(self.diagnostics.support_tolerance >= 0.0) {
            return Err(CliError::Config("support_tolerance must be nonnegative".into()));
        }
        if !(self.diagnostics.alpha > 0.0) {
            return Err(CliError::Config(format!("alpha must be positive, got {}", self.diagnostics.alpha)));
        }
        for times in [&self.diagnostics.defect_times, &self.diagnostics.channel_times] {
            if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !(*t >= 0.0)) {
                return Err(CliError::Config("time lists must be nonnegative and increasing".into()));
            }
        }
        self.cone_params()?;
        if self.geometry.samples == 0 || self.geometry.cosine_points < 2 {
            return Err(CliError::Config("geometry needs samples >= 1 and cosine_points >= 2".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> CliResult<Dimension> {
        Ok(Dimension::new(self.dimension)?)
    }

    pub fn grid(&self) -> CliResult<RadialGrid> {
        Ok(RadialGrid::with_spacing(self.grid.r_max, self.grid.dr)?)
    }

    pub fn scheme_params(&self) -> SchemeParams {
        let s = &self.scheme;
        SchemeParams {
            cfl: s.cfl,
            threshold: s.threshold,
            stride: s.stride,
            policy: s.policy,
            nonlinearity: s.nonlinearity,
        }
    }

    pub fn cone_params(&self) -> CliResult<ConeParams> {
        let g = &self.geometry;
        Ok(ConeParams::new(g.tau, g.theta, g.ell)?)
    }

    /// The initial datum on the configured grid; `seed` drives random data.
    pub fn initial_state(&self, seed: u64) -> CliResult<RadialState> {
        let grid = self.grid()?;
        let dim = self.dim()?;
        let data = match &self.data {
            DataConfig::Zero => InitialData::Zero,
            &DataConfig::Bump { amplitude, center, width } => InitialData::Bump(Bump::new(amplitude, center, width)?),
            &DataConfig::VelocityBump { amplitude, center, width } => {
                InitialData::VelocityBump(Bump::new(amplitude, center, width)?)
            }
            &DataConfig::GroundState { amplitude, lambda } => InitialData::GroundState { amplitude, lambda },
            &DataConfig::Random { radius } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                return Ok(random_compact_data(&mut rng, grid, radius)?);
            }
            DataConfig::Csv { path } => return read_state_csv(path, grid),
        };
        Ok(data.sample(grid, dim)?)
    }

    /// η-window at observation time `t`.
    pub fn eta_range(&self, t: f64) -> CliResult<EtaRange> {
        let dr = self.grid.dr;
        let d = &self.diagnostics;
        let lo = d.eta_min.unwrap_or(dr - t);
        let hi = d.eta_max.unwrap_or(self.grid.r_max - t - 2.0 * dr);
        Ok(EtaRange::new(lo, hi, d.d_eta.unwrap_or(dr))?)
    }

    pub fn defect_times(&self) -> Vec<f64> {
        unit_times(&self.diagnostics.defect_times, self.run.t)
    }

    pub fn channel_times(&self) -> Vec<f64> {
        unit_times(&self.diagnostics.channel_times, self.run.t)
    }
}

fn unit_times(given: &[f64], t: f64) -> Vec<f64> {
    if !given.is_empty() {
        return given.to_vec();
    }
    let mut out: Vec<f64> = (0..).map(f64::from).take_while(|&s| s < t).collect();
    out.push(t);
    out
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn read_state_csv(path: &Path, grid: RadialGrid) -> CliResult<RadialState> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "u", "ut"] {
        return Err(CliError::Config(format!("{} must have columns r,u,ut", path.display())));
    }
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let mut row = [0.0; 3];
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = rec[k]
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{}: bad number {:?}", path.display(), &rec[k])))?;
        }
        rows.push(row);
    }
    if rows.len() < 2 || rows.windows(2).any(|w| !(w[1][0] > w[0][0])) || rows[0][0] != 0.0 {
        return Err(CliError::Config(format!("{}: r must start at 0 and increase", path.display())));
    }
    let sample = |r: f64, k: usize| -> f64 {
        let j = rows.partition_point(|row| row[0] <= r);
        if j == rows.len() {
            return if r == rows[j - 1][0] { rows[j - 1][k] } else { 0.0 };
        }
        let (a, b) = (rows[j - 1], rows[j]);
        a[k] + (b[k] - a[k]) * (r - a[0]) / (b[0] - a[0])
    };
    Ok(RadialState::from_fn(grid, |r| sample(r, 1), |r| sample(r, 2))?)
}
