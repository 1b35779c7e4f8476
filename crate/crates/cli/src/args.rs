use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use fracfield::{DiffusionParams, KernelSpec};

/// A parsed list of numbers, kept as a single argument value.
pub type Points = Vec<f64>;

/// `a:b:n`, `n` evenly spaced points including both ends.
pub fn parse_range(s: &str) -> Result<Points, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected a:b:n, got '{s}'"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| format!("bad start in '{s}'"))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| format!("bad end in '{s}'"))?;
    let n: usize = parts[2].trim().parse().map_err(|_| format!("bad count in '{s}'"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("range '{s}' needs finite ends and n >= 1"));
    }
    if n == 1 {
        if a != b {
            return Err(format!("range '{s}' has one point but distinct ends"));
        }
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// `a:b` with `a < b`.
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad start in '{s}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad end in '{s}'"))?;
    if a >= b || a.is_nan() || b.is_nan() {
        return Err(format!("interval '{s}' must have start < end"));
    }
    Ok((a, b))
}

/// Comma separated numbers.
pub fn parse_list(s: &str) -> Result<Points, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number '{p}' in '{s}'"))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Fractional order in (0, 2)
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Diffusivity of the local part
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Jump intensity of the nonlocal part
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    /// Noise amplitude
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Spatial dimension
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Jump kernel family
    #[arg(long, value_enum, default_value_t = KernelKind::Gaussian)]
    pub kernel: KernelKind,
    /// Gaussian scale or uniform half width
    #[arg(long, default_value_t = 1.0)]
    pub kernel_width: f64,
}

impl ParamArgs {
    pub fn alpha_or(&self, default: Option<f64>) -> Result<f64> {
        match self.alpha.or(default) {
            Some(a) => Ok(a),
            None => bail!(fracfield::Error::InvalidSpec("--alpha is required".into())),
        }
    }

    pub fn params(&self, alpha: f64) -> Result<DiffusionParams> {
        Ok(DiffusionParams::new(alpha, self.lambda, self.mu, self.sigma, self.dim)?)
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        let k = match self.kernel {
            KernelKind::Gaussian => KernelSpec::Gaussian {
                scale: self.kernel_width,
            },
            KernelKind::Uniform => KernelSpec::Uniform {
                half_width: self.kernel_width,
            },
        };
        k.validate(self.dim)?;
        Ok(k)
    }
}

/// Output target: a file when a path is given, stdout otherwise.
pub fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(stdout),
    })
}

/// `dir/name.csv` -> `dir/name.cross.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

pub fn write_all(mut w: impl Write, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
