//! Run configuration, from defaults, an optional TOML file and command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::Format;
use crate::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    /// Restricts suites to one ambient dimension.
    pub n: Option<usize>,
    /// Band limit of random test data.
    pub band_limit: usize,
    /// Overrides the tolerance of every spectral check.
    pub tol_spectral: Option<f64>,
    /// Overrides the tolerance of every quadrature-limited check.
    pub tol_quadrature: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub svg: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { n: None, band_limit: 12, tol_spectral: None, tol_quadrature: None, seed: 20240917, format: Format::Table, svg: None }
    }
}

impl Config {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if !(1..=3).contains(&n) {
                return Err(CliError::Config(format!("--n must be 1, 2 or 3, got {n}")));
            }
        }
        if !(2..=64).contains(&self.band_limit) {
            return Err(CliError::Config(format!("--band-limit must lie in 2..=64, got {}", self.band_limit)));
        }
        for t in [self.tol_spectral, self.tol_quadrature].into_iter().flatten() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("tolerances must be positive, got {t}")));
            }
        }
        Ok(())
    }
}
