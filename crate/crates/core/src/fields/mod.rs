//! Mean and variance fields in one space dimension, by every available route.

mod mean;
mod variance;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, to_f64, Real};
use crate::symbol::{DiffusionParams, KernelSpec};

pub use mean::{heat_kernel, mean_fourier, mean_half_closed, mean_mainardi};
pub use variance::{
    beta_coeff, fluct_kernel_frac, resonance_set, var_classical_closed, var_classical_quadrature, var_frac_quadrature,
    var_series, SeriesValue, VarianceSeriesSpec,
};

/// Quadrature settings shared by the Fourier inversion and the probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct QuadSpec<T> {
    /// Lower bound for the frequency cutoff.
    pub freq_cutoff: T,
    /// Minimum number of panels on the main interval.
    pub panels: usize,
    pub rel_tol: T,
    /// Cap on adaptive subintervals per integral.
    pub max_refinements: usize,
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        Self {
            freq_cutoff: c(40.0),
            panels: 16,
            rel_tol: c(1e-8),
            max_refinements: 4000,
        }
    }
}

impl<T: Real> QuadSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 8 {
            return Err(Error::InvalidSpec(format!("panels must be >= 8, got {}", self.panels)));
        }
        if !(self.rel_tol > T::zero() && self.rel_tol < c(1e-2)) {
            return Err(Error::InvalidSpec(format!(
                "rel_tol must lie in (0, 1e-2), got {}",
                self.rel_tol
            )));
        }
        if !(self.freq_cutoff > T::zero()) || !self.freq_cutoff.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "freq_cutoff must be positive, got {}",
                self.freq_cutoff
            )));
        }
        if self.max_refinements == 0 {
            return Err(Error::InvalidSpec("max_refinements must be positive".into()));
        }
        Ok(())
    }
}

/// A value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// How the values of a [`Profile`] were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fourier,
    Mainardi,
    HeatKernel,
    VarQuadrature,
    VarSeries,
    VarClosed,
    McEnsembleMean,
    McEnsembleVar,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Fourier => "fourier",
            Method::Mainardi => "mainardi",
            Method::HeatKernel => "heat_kernel",
            Method::VarQuadrature => "var_quadrature",
            Method::VarSeries => "var_series",
            Method::VarClosed => "var_closed",
            Method::McEnsembleMean => "mc_ensemble_mean",
            Method::McEnsembleVar => "mc_ensemble_var",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ProfileMeta<T> {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DiffusionParams<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<VarianceSeriesSpec<T>>,
}

impl<T> ProfileMeta<T> {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            params: None,
            kernel: None,
            quad: None,
            series: None,
        }
    }
}

/// Field values sampled on a time × position grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Profile<T> {
    pub times: Vec<T>,
    pub positions: Vec<T>,
    /// `values[i][j]` is the value at `(times[i], positions[j])`.
    pub values: Vec<Vec<T>>,
    pub meta: ProfileMeta<T>,
}

fn check_axis<T: Real>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidSpec(format!("{name} axis is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidSpec(format!(
            "{name} axis must be finite and strictly increasing"
        )));
    }
    Ok(())
}

impl<T: Real> Profile<T> {
    /// Evaluate `f(t, x)` at every grid point, in parallel.
    pub fn evaluate<F>(times: &[T], positions: &[T], meta: ProfileMeta<T>, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> Result<T> + Sync,
    {
        check_axis("time", times)?;
        check_axis("position", positions)?;
        if !(times[0] > T::zero()) {
            return Err(Error::InvalidSpec("times must be positive".into()));
        }
        let flat: Vec<T> = (0..times.len() * positions.len())
            .into_par_iter()
            .map(|i| f(times[i / positions.len()], positions[i % positions.len()]))
            .collect::<Result<_>>()?;
        let values = flat.chunks(positions.len()).map(<[T]>::to_vec).collect();
        Ok(Self {
            times: times.to_vec(),
            positions: positions.to_vec(),
            values,
            meta,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_axis("time", &self.times)?;
        check_axis("position", &self.positions)?;
        if self.values.len() != self.times.len() || self.values.iter().any(|r| r.len() != self.positions.len()) {
            return Err(Error::InvalidSpec("value matrix does not match the axes".into()));
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i][j]
    }

    /// Largest `|v(t, x) - v(t, -x)|` over positions whose mirror image is on the grid.
    pub fn asymmetry(&self) -> T {
        let n = self.positions.len();
        let mut worst = T::zero();
        for j in 0..n {
            let k = n - 1 - j;
            let tol = c::<T>(1e-12) * (self.positions[j].abs() + T::one());
            if (self.positions[j] + self.positions[k]).abs() > tol {
                continue;
            }
            for row in &self.values {
                worst = worst.max((row[j] - row[k]).abs());
            }
        }
        worst
    }

    /// CSV with header `t,x,value,method` and round-trip decimal formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,value,method")?;
        for (i, &t) in self.times.iter().enumerate() {
            for (j, &x) in self.positions.iter().enumerate() {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{}",
                    to_f64(t),
                    to_f64(x),
                    to_f64(self.values[i][j]),
                    self.meta.method
                )?;
            }
        }
        Ok(())
    }
}

/// One row of a two-route comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRow<T> {
    pub t: T,
    pub x: T,
    pub method_a: String,
    pub value_a: T,
    pub method_b: String,
    pub value_b: T,
}

impl<T: Real> CrossRow<T> {
    pub fn ratio(&self) -> T {
        self.value_a / self.value_b
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck<T> {
    pub rows: Vec<CrossRow<T>>,
}

impl<T: Real> CrossCheck<T> {
    /// Pair two profiles on the same grid point by point.
    pub fn from_profiles(a: &Profile<T>, b: &Profile<T>) -> Result<Self> {
        if a.times != b.times || a.positions != b.positions {
            return Err(Error::GridMismatch("cross-check profiles use different grids".into()));
        }
        let mut rows = Vec::with_capacity(a.times.len() * a.positions.len());
        for (i, &t) in a.times.iter().enumerate() {
            for (j, &x) in a.positions.iter().enumerate() {
                rows.push(CrossRow {
                    t,
                    x,
                    method_a: a.meta.method.tag().into(),
                    value_a: a.values[i][j],
                    method_b: b.meta.method.tag().into(),
                    value_b: b.values[i][j],
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,method_a,value_a,method_b,value_b,ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{},{:.16e},{},{:.16e},{:.16e}",
                to_f64(r.t),
                to_f64(r.x),
                r.method_a,
                to_f64(r.value_a),
                r.method_b,
                to_f64(r.value_b),
                to_f64(r.ratio())
            )?;
        }
        Ok(())
    }
}
