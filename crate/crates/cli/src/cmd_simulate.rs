use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use fracfield::simulate::{InitialCondition, Simulator};
use fracfield::GridSpec;
use serde::Serialize;
use serde_json::json;

use crate::args::{write_all, ParamArgs};
use crate::config::{Format, RunConfig};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IcArg {
    Dirac,
    Zero,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Run configuration JSON; replaces the parameter and grid flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Half length L of the periodic box [-L, L)
    #[arg(long, default_value_t = 20.0)]
    pub half_length: f64,
    /// Grid points, a power of two
    #[arg(long, default_value_t = 512)]
    pub n_points: usize,
    #[arg(long, default_value_t = 128)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = IcArg::Dirac)]
    pub ic: IcArg,
    /// Number of output times
    #[arg(long, default_value_t = 8)]
    pub snapshots: usize,
    /// Ensemble size; statistics are written when it is at least 2
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Seed of the single path and master seed of the ensemble
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulate parameters that are not mild
    #[arg(long)]
    pub force: bool,
    /// Output directory; without it the main table goes to stdout
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

fn from_flags(a: &SimulateArgs) -> Result<RunConfig> {
    let alpha = a.params.alpha_or(None)?;
    let ic = match a.ic {
        IcArg::Dirac => InitialCondition::DiracSpectral,
        IcArg::Zero => InitialCondition::Zero,
    };
    let grid = GridSpec {
        half_length: a.half_length,
        n_points: a.n_points,
        n_steps: a.n_steps,
        t_end: a.t_end,
        ic,
        n_snapshots: a.snapshots,
    };
    let cfg = RunConfig {
        version: 1,
        params: a.params.params(alpha)?,
        kernel: a.params.kernel()?,
        grid: Some(grid),
        quad: Default::default(),
        series: Default::default(),
        output: None,
        seed: 0,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_all(BufWriter::new(file), f)
}

fn write_json<S: Serialize>(path: &Path, v: &S) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v)?;
        writeln!(w)
    })
}

pub fn run(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<Status> {
    let cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => from_flags(a)?,
    };
    let grid = cfg
        .grid
        .ok_or_else(|| fracfield::Error::InvalidSpec("the configuration has no grid section".into()))?;
    let seed = a.seed.unwrap_or(cfg.seed);
    let format = match (a.format, &cfg.output) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Csv), _) => Format::Csv,
        (None, Some(o)) => o.format,
        (None, None) => Format::Csv,
    };
    let out_dir = a
        .out_dir
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));

    let started = Instant::now();
    let sim = Simulator::new(&cfg.params, &cfg.kernel, &grid, a.force)?;
    let path = sim.run(seed);
    let stats = if a.samples >= 2 {
        Some(sim.ensemble(a.samples, seed)?)
    } else {
        None
    };
    let wall = started.elapsed().as_secs_f64();

    let Some(dir) = out_dir else {
        match &stats {
            Some(s) => write_all(stdout, |w| s.write_csv(w))?,
            None => write_all(stdout, |w| path.write_csv(w))?,
        }
        return Ok(Status::Ok);
    };
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path_file = dir.join(format!("path.{ext}"));
    match format {
        Format::Csv => write_file(&path_file, |w| path.write_csv(w))?,
        Format::Json => write_json(&path_file, &path)?,
    }
    if let Some(s) = &stats {
        let stats_file = dir.join(format!("stats.{ext}"));
        match format {
            Format::Csv => write_file(&stats_file, |w| s.write_csv(w))?,
            Format::Json => write_json(&stats_file, s)?,
        }
    }
    let n_seeds = if stats.is_some() { a.samples as u64 } else { 0 };
    let sample_seeds: Vec<u64> = (0..n_seeds)
        .map(|i| fracfield::simulate::sample_seed(seed, i))
        .collect();
    let meta = json!({
        "params": cfg.params,
        "kernel": cfg.kernel,
        "grid": grid,
        "seed": seed,
        "n_samples": a.samples,
        "sample_seeds": sample_seeds,
        "snapshot_times": sim.snapshot_times(),
        "mild": path.mild,
        "imag_residue": path.imag_residue,
        "wall_time_s": wall,
    });
    write_json(&dir.join("metadata.json"), &meta)?;
    Ok(Status::Ok)
}
