use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracfield::{DiffusionParams, GridSpec, KernelSpec, QuadSpec, VarianceSeriesSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory receiving the output files.
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_format() -> Format {
    Format::Csv
}

fn default_kernel() -> KernelSpec {
    KernelSpec::Gaussian { scale: 1.0 }
}

/// Versioned run description; every section is validated on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub params: DiffusionParams,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default)]
    pub series: VarianceSeriesSpec,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| fracfield::Error::InvalidSpec(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            bail!(fracfield::Error::InvalidSpec(format!(
                "unsupported config version {}",
                self.version
            )));
        }
        self.params.validate()?;
        self.kernel.validate(self.params.dim)?;
        self.quad.validate()?;
        self.series.validate()?;
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        Ok(())
    }
}
