use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use fracfield::fields::{
    beta_coeff, heat_kernel, mean_fourier, mean_half_closed, mean_mainardi, var_classical_closed,
    var_classical_quadrature, var_frac_quadrature, var_series, Method, ProfileMeta,
};
use fracfield::{CrossCheck, DiffusionParams, Error, EvalPolicy, KernelSpec, Profile, QuadSpec, VarianceSeriesSpec};

use crate::args::{parse_list, parse_range, sibling, sink, write_all, ParamArgs, Points};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Mean field at alpha = 1
    Fig1,
    /// Classical variance, closed form against quadrature
    Fig2,
    /// Mean field at alpha = 0.6
    Fig3,
    /// Decay of the variance series coefficients
    Fig4,
    /// Fractional variance at alpha = 0.6
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeanMethod {
    Fourier,
    Mainardi,
    #[value(name = "heat_kernel", alias = "heat-kernel")]
    HeatKernel,
    /// Closed form at alpha = 1/2
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarMethod {
    Quadrature,
    Series,
    Closed,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Single time
    #[arg(long, conflicts_with = "t_list")]
    pub t: Option<f64>,
    /// Comma separated increasing times
    #[arg(long, value_parser = parse_list)]
    pub t_list: Option<Points>,
    /// Single position
    #[arg(long, allow_hyphen_values = true, conflicts_with = "x_range")]
    pub x: Option<f64>,
    /// Positions a:b:n
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub x_range: Option<Points>,
    /// Profile CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cross-check CSV; defaults to `<out>.cross.csv`, or stderr without --out
    #[arg(long)]
    pub cross_out: Option<PathBuf>,
}

impl GridArgs {
    fn axes(&self, preset: Option<(&[f64], Vec<f64>)>) -> Result<(Vec<f64>, Vec<f64>)> {
        let ts = match (&self.t, &self.t_list, &preset) {
            (Some(t), _, _) => vec![*t],
            (_, Some(l), _) => l.clone(),
            (_, _, Some((t, _))) => t.to_vec(),
            _ => bail!(Error::InvalidSpec("--t or --t-list is required".into())),
        };
        let xs = match (&self.x, &self.x_range, preset) {
            (Some(x), _, _) => vec![*x],
            (_, Some(r), _) => r.clone(),
            (_, _, Some((_, x))) => x,
            _ => bail!(Error::InvalidSpec("--x or --x-range is required".into())),
        };
        Ok((ts, xs))
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = MeanMethod::Fourier)]
    pub method: MeanMethod,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frequency cutoff floor for the Fourier route
    #[arg(long)]
    pub freq_cutoff: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = VarMethod::Quadrature)]
    pub method: VarMethod,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of series terms
    #[arg(long, default_value_t = 30)]
    pub max_terms: usize,
    /// Distance from 1/(m+1) treated as resonant
    #[arg(long, default_value_t = 1e-9)]
    pub resonance_guard: f64,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

fn quad_spec(freq_cutoff: Option<f64>, rel_tol: Option<f64>) -> Result<QuadSpec> {
    let mut q = QuadSpec::default();
    if let Some(k) = freq_cutoff {
        q.freq_cutoff = k;
    }
    if let Some(r) = rel_tol {
        q.rel_tol = r;
    }
    q.validate()?;
    Ok(q)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if !cond {
        bail!(Error::Domain(msg.into()));
    }
    Ok(())
}

fn one_dim(p: &DiffusionParams) -> Result<()> {
    if p.dim != 1 {
        bail!(Error::DimensionMismatch {
            expected: 1,
            got: p.dim
        });
    }
    Ok(())
}

type Eval = Box<dyn Fn(f64, f64) -> fracfield::Result<f64> + Sync>;

fn mean_route(method: MeanMethod, p: DiffusionParams, k: KernelSpec, q: QuadSpec) -> Result<(Method, Eval)> {
    let policy = EvalPolicy::default();
    Ok(match method {
        MeanMethod::Fourier => (
            Method::Fourier,
            Box::new(move |t, x| Ok(mean_fourier(&p, &k, t, x, &q)?.value)),
        ),
        MeanMethod::Mainardi => {
            require(p.mu == 0.0, "the Mainardi route needs mu = 0")?;
            (
                Method::Mainardi,
                Box::new(move |t, x| mean_mainardi(t, x, p.alpha, p.lambda, &policy)),
            )
        }
        MeanMethod::HeatKernel => {
            require(
                p.alpha == 1.0 && p.mu == 0.0,
                "the heat kernel needs alpha = 1 and mu = 0",
            )?;
            (Method::HeatKernel, Box::new(move |t, x| heat_kernel(t, x, p.lambda)))
        }
        MeanMethod::Closed => {
            require(
                p.alpha == 0.5 && p.mu == 0.0,
                "the closed mean needs alpha = 1/2 and mu = 0",
            )?;
            (Method::Mainardi, Box::new(move |t, x| mean_half_closed(t, x, p.lambda)))
        }
    })
}

fn var_route(method: VarMethod, p: DiffusionParams, q: QuadSpec, s: VarianceSeriesSpec) -> Result<(Method, Eval)> {
    let sig = p.sigma;
    Ok(match method {
        VarMethod::Quadrature if p.alpha == 1.0 => (
            Method::VarQuadrature,
            Box::new(move |t, x| var_classical_quadrature(t, x, p.lambda, sig, &q)),
        ),
        VarMethod::Quadrature => {
            require(p.alpha < 1.0, "the variance quadrature needs alpha <= 1")?;
            (
                Method::VarQuadrature,
                Box::new(move |t, x| var_frac_quadrature(t, x, p.alpha, p.lambda, sig, &q)),
            )
        }
        VarMethod::Series => (
            Method::VarSeries,
            Box::new(move |t, x| Ok(var_series(t, x, p.alpha, p.lambda, sig, &s)?.value)),
        ),
        VarMethod::Closed => {
            require(p.alpha == 1.0, "the closed variance needs alpha = 1")?;
            (
                Method::VarClosed,
                Box::new(move |t, x| var_classical_closed(t, x, p.lambda, sig)),
            )
        }
    })
}

fn profile(ts: &[f64], xs: &[f64], meta: ProfileMeta<f64>, f: &Eval) -> fracfield::Result<Profile> {
    Profile::evaluate(ts, xs, meta, f)
}

fn emit(grid: &GridArgs, main: &Profile, cross: Option<CrossCheck>, stdout: &mut dyn Write) -> Result<()> {
    write_all(sink(grid.out.as_deref(), stdout)?, |w| main.write_csv(w))?;
    if let Some(cc) = cross {
        let path = grid
            .cross_out
            .clone()
            .or_else(|| grid.out.as_deref().map(|p| sibling(p, "cross")));
        match path {
            Some(p) => write_all(sink(Some(&p), stdout)?, |w| cc.write_csv(w))?,
            None => write_all(std::io::stderr().lock(), |w| cc.write_csv(w))?,
        }
    }
    Ok(())
}

fn preset_axes(p: Preset) -> (&'static [f64], Vec<f64>) {
    let lin = |a: f64, b: f64, n: usize| (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    match p {
        Preset::Fig1 => (&[0.1, 0.5, 1.0, 2.0], lin(-4.0, 4.0, 161)),
        Preset::Fig2 => (&[0.25, 0.5, 1.0, 2.0], lin(-4.0, 4.0, 81)),
        Preset::Fig3 => (&[0.5, 1.0, 2.0], lin(-4.0, 4.0, 161)),
        Preset::Fig4 => (&[], Vec::new()),
        Preset::Fig5 => (&[0.5, 1.0, 2.0], lin(-3.0, 3.0, 61)),
    }
}

pub fn run_mean(a: &MeanArgs, stdout: &mut dyn Write) -> Result<Status> {
    let (alpha, method, partner) = match a.preset {
        None => (a.params.alpha_or(None)?, a.method, None),
        Some(Preset::Fig1) => (
            a.params.alpha_or(Some(1.0))?,
            MeanMethod::Fourier,
            Some(MeanMethod::HeatKernel),
        ),
        Some(Preset::Fig3) => (
            a.params.alpha_or(Some(0.6))?,
            MeanMethod::Fourier,
            Some(MeanMethod::Mainardi),
        ),
        Some(p) => bail!(Error::InvalidSpec(format!(
            "preset {p:?} belongs to the variance command"
        ))),
    };
    let params = a.params.params(alpha)?;
    one_dim(&params)?;
    let kernel = a.params.kernel()?;
    let quad = quad_spec(a.freq_cutoff, a.rel_tol)?;
    let (ts, xs) = a.grid.axes(a.preset.map(preset_axes))?;
    let partner = partner.or(match method {
        MeanMethod::Fourier if params.mu == 0.0 && alpha == 1.0 => Some(MeanMethod::HeatKernel),
        MeanMethod::Fourier => None,
        _ => Some(MeanMethod::Fourier),
    });
    let (tag, f) = mean_route(method, params, kernel, quad)?;
    let mut meta = ProfileMeta::new(tag);
    meta.params = Some(params);
    meta.kernel = Some(kernel);
    meta.quad = Some(quad);
    let main = profile(&ts, &xs, meta, &f)?;
    let cross = match partner {
        Some(m) => {
            let (tag_b, g) = mean_route(m, params, kernel, quad)?;
            let other = profile(&ts, &xs, ProfileMeta::new(tag_b), &g)?;
            Some(CrossCheck::from_profiles(&main, &other)?)
        }
        None => None,
    };
    emit(&a.grid, &main, cross, stdout)?;
    Ok(Status::Ok)
}

pub fn run_variance(a: &VarianceArgs, stdout: &mut dyn Write) -> Result<Status> {
    let series = VarianceSeriesSpec {
        max_terms: a.max_terms,
        resonance_guard: a.resonance_guard,
    };
    series.validate()?;
    if a.preset == Some(Preset::Fig4) {
        let alpha = a.params.alpha_or(Some(0.6))?;
        require(alpha > 0.0 && alpha < 1.0, "beta coefficients need 0 < alpha < 1")?;
        write_all(sink(a.grid.out.as_deref(), stdout)?, |w| {
            writeln!(w, "m,beta_m")?;
            for m in 0..=series.max_terms {
                writeln!(w, "{m},{:.16e}", beta_coeff(m, alpha))?;
            }
            Ok(())
        })?;
        return Ok(Status::Ok);
    }
    let (alpha, method, partner) = match a.preset {
        None => (a.params.alpha_or(None)?, a.method, None),
        Some(Preset::Fig2) => (
            a.params.alpha_or(Some(1.0))?,
            VarMethod::Closed,
            Some(VarMethod::Quadrature),
        ),
        Some(Preset::Fig5) => (
            a.params.alpha_or(Some(0.6))?,
            VarMethod::Quadrature,
            Some(VarMethod::Series),
        ),
        Some(p) => bail!(Error::InvalidSpec(format!("preset {p:?} belongs to the mean command"))),
    };
    let params = a.params.params(alpha)?;
    one_dim(&params)?;
    let quad = quad_spec(None, a.rel_tol)?;
    let (ts, xs) = a.grid.axes(a.preset.map(preset_axes))?;
    let partner = partner.or(match method {
        VarMethod::Closed => Some(VarMethod::Quadrature),
        VarMethod::Quadrature if alpha == 1.0 => Some(VarMethod::Closed),
        VarMethod::Quadrature => Some(VarMethod::Series),
        VarMethod::Series => Some(VarMethod::Quadrature),
    });
    let (tag, f) = var_route(method, params, quad, series)?;
    let mut meta = ProfileMeta::new(tag);
    meta.params = Some(params);
    meta.quad = Some(quad);
    meta.series = Some(series);
    let main = profile(&ts, &xs, meta, &f)?;
    // a partner route outside its domain (for example a resonant series) is skipped
    let cross = partner
        .and_then(|m| var_route(m, params, quad, series).ok())
        .and_then(|(tag_b, g)| profile(&ts, &xs, ProfileMeta::new(tag_b), &g).ok())
        .map(|other| CrossCheck::from_profiles(&main, &other))
        .transpose()?;
    emit(&a.grid, &main, cross, stdout)?;
    Ok(Status::Ok)
}
