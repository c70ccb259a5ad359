use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Experiment identifiers of the batch runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    /// BBM energy of a linear field against the closed form.
    E1,
    /// Vortex-scaled energy sweep against `C_rho |M|`.
    E2,
    /// Sampled XY energy sweep against `4 pi |M|`.
    E3,
    /// Extracted vortices against the field's atoms over shrinking margins.
    E4,
    /// Axis-aligned against rotated extraction.
    E5,
    /// Three-dimensional product vortex energy.
    E6,
    /// Scaled distances between axis-aligned and rotated interpolants.
    E7,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

fn default_kernel() -> String {
    "indicator:1".into()
}

fn default_grid_ratio() -> f64 {
    8.0
}

fn default_margins() -> Vec<f64> {
    vec![0.1, 0.2]
}

fn default_theta() -> f64 {
    30.0
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One experiment run, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub domain: String,
    pub field: String,
    pub eps_list: Vec<f64>,
    /// `h = eps / grid_ratio` for energy quadrature.
    #[serde(default = "default_grid_ratio")]
    pub grid_ratio: f64,
    /// Radial and angular node counts of the `xi` grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polar: Option<[usize; 2]>,
    /// Boundary margins for convergence and diagnostics.
    #[serde(default = "default_margins")]
    pub margins: Vec<f64>,
    /// Rotation angle in degrees for rotated lattices.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub seed: u64,
    /// Writes measured wall times instead of zeros.
    #[serde(default, skip_serializing_if = "is_false")]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("eps {e} must lie in (0, 1)")));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if !(self.grid_ratio >= 4.0) {
            return Err(Error::Config(format!(
                "grid_ratio {} must be at least 4",
                self.grid_ratio
            )));
        }
        if self.margins.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Config("margins must be positive".into()));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the serialized configuration, excluding the output directory.
    pub fn hash(&self) -> Result<String> {
        let mut canon = self.clone();
        canon.out = None;
        let digest = Sha256::digest(canon.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
