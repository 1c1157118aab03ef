//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use herzscope::verify::{FamilySelection, SuiteConfig, TheoremSetup, DEFAULT_DRIFT_CAP, DEFAULT_SLOPE_TOL};
use herzscope::{Descriptor, Grid, RieszMethod};

/// The only schema this build reads.
pub const SCHEMA: &str = "herzscope/experiment-v1";

/// Calibration experiment used when no `--config` is given.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub l_min: i32,
    pub l_max: i32,
    pub points_per_axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub slope_tol: f64,
    pub drift_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            slope_tol: DEFAULT_SLOPE_TOL,
            drift_cap: DEFAULT_DRIFT_CAP,
        }
    }
}

/// Function handed to `norm` and `riesz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    /// Indicator of the closed ball `B_l`.
    Ball { l: i32 },
    /// Indicator of the annulus `A_l`.
    Annulus { l: i32 },
    /// Smooth seeded bump of the given radius near the origin.
    Bump { radius: f64, seed: u64 },
    /// Central atom on `B_r` with vanishing moments up to order `s`.
    Atom { r: i32, s: u32, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Lebesgue,
    Herz,
    HerzHardy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub grid: GridSpec,
    pub p1: Descriptor<f64>,
    pub alpha: Descriptor<f64>,
    pub beta: f64,
    pub q1: f64,
    pub q2: f64,
    pub lambda: f64,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub family: FamilySelection,
    /// Atom levels for the decay check; empty selects every admissible level.
    #[serde(default)]
    pub decay_levels: Vec<i32>,
    /// Order `N` of the grand maximal function. Recorded only: the maximal
    /// proxy does not depend on it.
    #[serde(default)]
    pub maximal_order: Option<u32>,
    #[serde(default)]
    pub refine: bool,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub space: Space,
    #[serde(default = "default_method")]
    pub method: RieszMethod,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_method() -> RieszMethod {
    RieszMethod::Fft
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema {found:?}, expected {SCHEMA:?}")]
    Schema { found: String },
    #[error(transparent)]
    Model(#[from] herzscope::Error),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA {
            return Err(ConfigError::Schema { found: cfg.schema });
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Self::parse(DEFAULT_CONFIG),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text)
            }
        }
    }

    pub fn grid(&self) -> Result<Grid<f64>, ConfigError> {
        let g = &self.grid;
        Ok(Grid::new(g.dim, g.l_min, g.l_max, g.points_per_axis)?)
    }

    pub fn theorem(&self) -> Result<TheoremSetup<f64>, ConfigError> {
        Ok(TheoremSetup {
            grid: self.grid()?,
            p1: self.p1.clone(),
            alpha: self.alpha.clone(),
            beta: self.beta,
            q1: self.q1,
            q2: self.q2,
            lambda: self.lambda,
            seed: self.seed,
            family: self.family,
            drift_cap: self.tolerances.drift_cap,
            refine: self.refine,
        })
    }

    pub fn suite(&self) -> Result<SuiteConfig<f64>, ConfigError> {
        let mut s = SuiteConfig::new(self.theorem()?);
        s.decay_levels = self.decay_levels.clone();
        s.slope_tol = self.tolerances.slope_tol;
        s.rel_tol = self.tolerances.rel_tol;
        Ok(s)
    }
}
