use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use fracfield::special::{
    gamma, ml_asymptotic_full, ml_bounds, ml_bounds_beta, ml_bounds_twin, ml_eval, ml_real_zeros, DEFAULT_ZERO_TOL,
};
use fracfield::{EvalPolicy, MlOrder};

use crate::args::{parse_interval, parse_range, sink, write_all, Points};
use crate::Status;

#[derive(Debug, Clone, Args)]
pub struct MlArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Evaluation points a:b:n
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub x_range: Option<Points>,
    /// Add the lower and upper bracket columns (x <= 0)
    #[arg(long)]
    pub bounds: bool,
    /// Add the large-argument expansion column (x < 0)
    #[arg(long)]
    pub asymptotic: bool,
    /// List the real zeros of E_alpha instead of evaluating
    #[arg(long)]
    pub zeros: bool,
    /// Search interval a:b for --zeros, with b <= 0
    #[arg(long, allow_hyphen_values = true, value_parser = parse_interval, default_value = "-100:0")]
    pub interval: (f64, f64),
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn run(a: &MlArgs, stdout: &mut dyn Write) -> Result<Status> {
    let policy = EvalPolicy::default();
    if a.zeros {
        let (lo, hi) = a.interval;
        let list = ml_real_zeros(a.alpha, lo, DEFAULT_ZERO_TOL, &policy)?;
        let zeros: Vec<f64> = list.zeros.into_iter().filter(|&z| z <= hi).collect();
        write_all(sink(a.out.as_deref(), stdout)?, |w| {
            writeln!(w, "zero")?;
            for z in &zeros {
                writeln!(w, "{z:.16e}")?;
            }
            Ok(())
        })?;
        return Ok(Status::Ok);
    }
    let order = MlOrder::new(a.alpha, a.beta)?;
    let xs = a
        .x_range
        .clone()
        .ok_or_else(|| fracfield::Error::InvalidSpec("--x-range is required unless --zeros is given".into()))?;
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let v = ml_eval(order, x, &policy)?;
        let bracket = if a.bounds { bracket(a.alpha, a.beta, x) } else { None };
        let asym = if a.asymptotic && x < 0.0 {
            ml_asymptotic_full(order, -x, &policy).ok()
        } else {
            None
        };
        rows.push((x, v, bracket, asym));
    }
    write_all(sink(a.out.as_deref(), stdout)?, |w| {
        write!(w, "x,value")?;
        if a.bounds {
            write!(w, ",lower,upper")?;
        }
        if a.asymptotic {
            write!(w, ",asymptotic")?;
        }
        writeln!(w)?;
        for (x, v, br, asym) in &rows {
            write!(w, "{x:.16e},{v:.16e}")?;
            if a.bounds {
                write!(w, ",{},{}", num(br.map(|b| b.0)), num(br.map(|b| b.1)))?;
            }
            if a.asymptotic {
                write!(w, ",{}", num(*asym))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    Ok(Status::Ok)
}

/// Bracket for `E_{alpha,beta}(x)`, `x <= 0`, when one is available.
fn bracket(alpha: f64, beta: f64, x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return None;
    }
    let y = -x;
    if beta == 1.0 {
        return ml_bounds(alpha, y).ok();
    }
    if beta == alpha {
        let g = gamma(alpha).ok()?;
        return ml_bounds_twin(alpha, y).ok().map(|(l, u)| (l / g, u / g));
    }
    let g = gamma(beta).ok()?;
    ml_bounds_beta(alpha, beta, y).ok().map(|(l, u)| (l / g, u / g))
}
