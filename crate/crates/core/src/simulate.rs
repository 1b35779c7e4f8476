//! Spectral Monte Carlo simulation on a periodic grid in one dimension.
//!
//! A path is assembled in Fourier space as
//! `Z_hat(t_n, xi_k) = 1[dirac] E_alpha(-a(xi_k) t_n^alpha) + sigma sum_{m<n} w_{n-m-1}(xi_k) dW_hat_{m,k}`
//! and mapped back with `Z(x_j) = (2L)^-1 sum_k e^(i xi_k x_j) Z_hat_k`.
//! The weight `w_l` is the root mean square of the stochastic convolution kernel
//! `Lambda(s) = s^(alpha-1) E_{alpha,alpha}(-a s^alpha)` over the lag cell
//! `[l dt, (l+1) dt]`, so `sum_l w_l^2 dt` reproduces `int Lambda^2` exactly.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Method, Profile, ProfileMeta};
use crate::mildness::classify;
use crate::scalar::{c, cu, to_f64, Real};
use crate::special::{ml_eval, EvalPolicy, MlOrder};
use crate::symbol::{DiffusionParams, KernelSpec};
use crate::tables::TimeTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `Z(0) = delta_0`, imposed through its transform `1`.
    DiracSpectral,
    Zero,
}

fn default_snapshots() -> usize {
    8
}

/// Periodic grid on `[-L, L)` with uniform time stepping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real"))]
pub struct GridSpec<T> {
    pub half_length: T,
    pub n_points: usize,
    pub n_steps: usize,
    pub t_end: T,
    pub ic: InitialCondition,
    /// Number of evenly spaced output times; the last one is `t_end`.
    #[serde(default = "default_snapshots")]
    pub n_snapshots: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_length: T, n_points: usize, n_steps: usize, t_end: T, ic: InitialCondition) -> Result<Self> {
        let g = Self {
            half_length,
            n_points,
            n_steps,
            t_end,
            ic,
            n_snapshots: default_snapshots(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > T::zero()) || !self.half_length.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "half_length must be positive, got {}",
                self.half_length
            )));
        }
        if self.n_points < 64 || !self.n_points.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "n_points must be a power of two >= 64, got {}",
                self.n_points
            )));
        }
        if self.n_steps < 16 {
            return Err(Error::InvalidSpec(format!(
                "n_steps must be >= 16, got {}",
                self.n_steps
            )));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.n_snapshots == 0 || self.n_snapshots > self.n_steps {
            return Err(Error::InvalidSpec(format!(
                "n_snapshots must lie in 1..={}, got {}",
                self.n_steps, self.n_snapshots
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> T {
        c::<T>(2.0) * self.half_length / cu(self.n_points)
    }

    pub fn dt(&self) -> T {
        self.t_end / cu(self.n_steps)
    }

    /// `x_j = -L + j dx`.
    pub fn positions(&self) -> Vec<T> {
        let dx = self.dx();
        (0..self.n_points).map(|j| -self.half_length + dx * cu(j)).collect()
    }

    /// `|xi_k|` for FFT bin `k`, using the signed index in `-n/2..n/2`.
    pub fn abs_frequency(&self, k: usize) -> T {
        let n = self.n_points;
        let kk = if k <= n / 2 { k } else { n - k };
        T::PI() * cu(kk) / self.half_length
    }

    /// Steps at which snapshots are taken, increasing and ending at `n_steps`.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (1..=self.n_snapshots)
            .map(|s| ((self.n_steps * s) as f64 / self.n_snapshots as f64).round() as usize)
            .map(|s| s.max(1))
            .collect();
        v.dedup();
        v
    }

    pub fn snapshot_times(&self) -> Vec<T> {
        self.snapshot_steps().into_iter().map(|s| self.dt() * cu(s)).collect()
    }
}

/// 64-bit mixer applied to `master + (i + 1) * 0x9E3779B97F4A7C15` to obtain
/// the seed of sample `i`.
pub fn sample_seed(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The transform `dW_hat_k = sum_j e^(-i xi_k x_j) dB_j` of the white-noise
/// increments of step `step`, with `dB_j ~ N(0, dt dx)` i.i.d.
///
/// The generator is ChaCha8 seeded with `seed` on stream `step`; the output is
/// Hermitian by construction.
pub fn noise_increments<T: Real>(grid: &GridSpec<T>, seed: u64, step: usize) -> Vec<Complex<T>> {
    let fft = FftPlanner::new().plan_fft_forward(grid.n_points);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); grid.n_points];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    fill_noise(grid, seed, step, fft.as_ref(), &mut buf, &mut scratch);
    buf
}

fn fill_noise<T: Real>(
    grid: &GridSpec<T>,
    seed: u64,
    step: usize,
    fft: &dyn Fft<T>,
    buf: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step as u64);
    let sd = (to_f64(grid.dt()) * to_f64(grid.dx())).sqrt();
    for z in buf.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *z = Complex::new(c(g * sd), T::zero());
    }
    fft.process_with_scratch(buf, scratch);
    let n = buf.len();
    // x_0 = -L contributes the phase e^(i pi k) = (-1)^k
    for z in buf.iter_mut().skip(1).step_by(2) {
        *z = -*z;
    }
    buf[0].im = T::zero();
    buf[n / 2].im = T::zero();
    for k in 1..n / 2 {
        buf[n - k] = buf[k].conj();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Snapshot<T> {
    pub t: T,
    pub values: Vec<T>,
}

/// One realization of the field at the snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SamplePath<T> {
    pub grid: GridSpec<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub seed: u64,
    /// False when the parameters are not mild and the run was forced.
    pub mild: bool,
    /// Largest imaginary part left by the inverse transform, relative to the largest real part.
    pub imag_residue: T,
}

impl<T: Real> SamplePath<T> {
    /// CSV in the profile layout with method tag `mc_path`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,value,method")?;
        let xs = self.grid.positions();
        for s in &self.snapshots {
            for (x, v) in xs.iter().zip(&s.values) {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},mc_path",
                    to_f64(s.t),
                    to_f64(*x),
                    to_f64(*v)
                )?;
            }
        }
        Ok(())
    }
}

/// Precomputed tables for repeated simulation with fixed parameters and grid.
pub struct Simulator<T: Real> {
    params: DiffusionParams<T>,
    grid: GridSpec<T>,
    steps: Vec<usize>,
    /// `E_alpha(-a t_s^alpha)` per snapshot and `|k|` bin.
    decay: Vec<Vec<T>>,
    /// `w_l` at `weights[kabs * n_steps + l]`.
    weights: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    mild: bool,
}

impl<T: Real> Simulator<T> {
    /// Refuses parameters that are not mild unless `force` is set.
    pub fn new(params: &DiffusionParams<T>, kernel: &KernelSpec<T>, grid: &GridSpec<T>, force: bool) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        if params.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: params.dim,
            });
        }
        kernel.validate(1)?;
        let verdict = classify(params)?;
        if !verdict.mild && !force {
            return Err(Error::NonMild(verdict.detail));
        }
        let alpha = params.alpha;
        if params.sigma != T::zero() && alpha <= c(0.5) {
            return Err(Error::Domain(format!(
                "the stochastic convolution kernel is not square integrable for alpha = {alpha} <= 1/2"
            )));
        }
        if params.lambda > T::zero() {
            let need = c::<T>(10.0) * (params.lambda * grid.t_end.powf(alpha)).sqrt();
            if grid.half_length < need {
                return Err(Error::InvalidSpec(format!(
                    "half_length {} is below 10 sqrt(lambda t_end^alpha) = {need}",
                    grid.half_length
                )));
            }
        }
        let n = grid.n_points;
        let nk = n / 2 + 1;
        let a: Vec<T> = (0..nk)
            .map(|k| params.symbol_radial(kernel, grid.abs_frequency(k)))
            .collect();
        let policy = EvalPolicy::default();
        let order = MlOrder::classic(alpha)?;
        let steps = grid.snapshot_steps();
        let dt = grid.dt();
        let decay = steps
            .iter()
            .map(|&s| {
                let ta = (dt * cu(s)).powf(alpha);
                a.par_iter()
                    .map(|&ak| ml_eval(order, -ak * ta, &policy))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = if params.sigma == T::zero() {
            Vec::new()
        } else {
            weight_table(alpha, &a, grid.n_steps, dt, &policy)?
        };
        let mut planner = FftPlanner::new();
        Ok(Self {
            params: *params,
            grid: *grid,
            steps,
            decay,
            weights,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            mild: verdict.mild,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn snapshot_times(&self) -> Vec<T> {
        let dt = self.grid.dt();
        self.steps.iter().map(|&s| dt * cu(s)).collect()
    }

    fn kabs(&self, k: usize) -> usize {
        let n = self.grid.n_points;
        if k <= n / 2 {
            k
        } else {
            n - k
        }
    }

    /// Snapshot values for one seed, without the bookkeeping of [`SamplePath`].
    fn fields(&self, seed: u64) -> (Vec<Vec<T>>, T) {
        let n = self.grid.n_points;
        let ns = self.grid.n_steps;
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = vec![vec![zero; n]; self.steps.len()];
        if self.params.sigma != T::zero() {
            let mut dw = vec![zero; n];
            let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
            let last = *self.steps.last().unwrap();
            for m in 0..last {
                fill_noise(&self.grid, seed, m, self.forward.as_ref(), &mut dw, &mut scratch);
                for (s, &step) in self.steps.iter().enumerate() {
                    if step <= m {
                        continue;
                    }
                    let l = step - m - 1;
                    for (k, (z, w)) in acc[s].iter_mut().zip(&dw).enumerate() {
                        *z += w.scale(self.weights[self.kabs(k) * ns + l]);
                    }
                }
            }
        }
        let dirac = self.grid.ic == InitialCondition::DiracSpectral;
        let norm = (cu::<T>(n) * self.grid.dx()).recip();
        let mut scratch = vec![zero; self.inverse.get_inplace_scratch_len()];
        let mut residue = T::zero();
        let out = acc
            .into_iter()
            .enumerate()
            .map(|(s, mut z)| {
                for (k, v) in z.iter_mut().enumerate() {
                    let mut h = v.scale(self.params.sigma);
                    if dirac {
                        h.re += self.decay[s][self.kabs(k)];
                    }
                    *v = if k % 2 == 1 { -h } else { h };
                }
                self.inverse.process_with_scratch(&mut z, &mut scratch);
                let re_max = z.iter().fold(T::zero(), |m, v| m.max(v.re.abs()));
                let im_max = z.iter().fold(T::zero(), |m, v| m.max(v.im.abs()));
                if re_max > T::zero() {
                    residue = residue.max(im_max / re_max);
                }
                z.iter().map(|v| v.re * norm).collect()
            })
            .collect();
        (out, residue)
    }

    pub fn run(&self, seed: u64) -> SamplePath<T> {
        let (fields, residue) = self.fields(seed);
        let snapshots = self
            .snapshot_times()
            .into_iter()
            .zip(fields)
            .map(|(t, values)| Snapshot { t, values })
            .collect();
        SamplePath {
            grid: self.grid,
            snapshots,
            seed,
            mild: self.mild,
            imag_residue: residue,
        }
    }

    /// Mean and unbiased variance over `n_samples` paths seeded by [`sample_seed`].
    ///
    /// Samples are processed in fixed chunks whose partial statistics are merged
    /// along a fixed binary tree, so the result does not depend on scheduling.
    pub fn ensemble(&self, n_samples: usize, master_seed: u64) -> Result<EnsembleStats<T>> {
        if n_samples < 2 {
            return Err(Error::InvalidSpec(format!("n_samples must be >= 2, got {n_samples}")));
        }
        const CHUNK: usize = 16;
        let chunks = n_samples.div_ceil(CHUNK);
        let partials: Vec<Moments<T>> = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut m = Moments::empty(self.steps.len() * self.grid.n_points);
                for i in ci * CHUNK..((ci + 1) * CHUNK).min(n_samples) {
                    let (f, _) = self.fields(sample_seed(master_seed, i as u64));
                    m.push(f.iter().flatten().copied());
                }
                m
            })
            .collect();
        let total = tree_merge(partials);
        let np = self.grid.n_points;
        let denom = cu::<T>(n_samples - 1);
        let mean = total.mean.chunks(np).map(<[T]>::to_vec).collect();
        let variance = total
            .m2
            .chunks(np)
            .map(|r| r.iter().map(|&v| v / denom).collect())
            .collect();
        Ok(EnsembleStats {
            grid: self.grid,
            n_samples,
            times: self.snapshot_times(),
            positions: self.grid.positions(),
            mean,
            variance,
            master_seed,
            mild: self.mild,
        })
    }
}

fn weight_table<T: Real>(alpha: T, a: &[T], n_steps: usize, dt: T, policy: &EvalPolicy<T>) -> Result<Vec<T>> {
    if alpha == T::one() {
        return Ok(a
            .par_iter()
            .flat_map_iter(|&ak| {
                let x = ak * dt;
                let cell = if x == T::zero() {
                    T::one()
                } else {
                    (-(-c::<T>(2.0) * x).exp_m1() / (c::<T>(2.0) * x)).sqrt()
                };
                (0..n_steps).map(move |l| (-x * cu(l)).exp() * cell)
            })
            .collect());
    }
    let table = TimeTable::new(alpha, policy)?;
    let order = MlOrder::new(alpha, alpha)?;
    let rows: Vec<Vec<T>> = a
        .par_iter()
        .map(|&ak| -> Result<Vec<T>> {
            (0..n_steps)
                .map(|l| {
                    let lo = dt * cu(l);
                    let sq = table.time_integral(ak, lo, lo + dt).max(T::zero());
                    // E_{alpha,alpha}(-x) > 0 for alpha <= 1
                    let sign = if alpha < T::one() {
                        T::one()
                    } else {
                        let mid = lo + dt / c(2.0);
                        ml_eval(order, -ak * mid.powf(alpha), policy)?.signum()
                    };
                    Ok(sign * (sq / dt).sqrt())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// Running mean and sum of squared deviations.
struct Moments<T> {
    n: usize,
    mean: Vec<T>,
    m2: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn empty(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![T::zero(); len],
            m2: vec![T::zero(); len],
        }
    }

    fn push(&mut self, xs: impl Iterator<Item = T>) {
        self.n += 1;
        let n = cu::<T>(self.n);
        for ((m, s), x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let (na, nb) = (cu::<T>(self.n), cu::<T>(other.n));
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.n += other.n;
        self
    }
}

fn tree_merge<T: Real>(mut level: Vec<Moments<T>>) -> Moments<T> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        level = next;
    }
    level.pop().unwrap()
}

/// Simulate one path. Parameters that are not mild are refused unless `force` is set.
pub fn simulate_path<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    grid: &GridSpec<T>,
    seed: u64,
    force: bool,
) -> Result<SamplePath<T>> {
    Ok(Simulator::new(params, kernel, grid, force)?.run(seed))
}

/// Monte Carlo mean and variance at the snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct EnsembleStats<T> {
    pub grid: GridSpec<T>,
    pub n_samples: usize,
    pub times: Vec<T>,
    pub positions: Vec<T>,
    /// `mean[snapshot][position]`.
    pub mean: Vec<Vec<T>>,
    /// Unbiased sample variance, same layout as `mean`.
    pub variance: Vec<Vec<T>>,
    pub master_seed: u64,
    pub mild: bool,
}

pub fn ensemble_stats<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    grid: &GridSpec<T>,
    n_samples: usize,
    master_seed: u64,
    force: bool,
) -> Result<EnsembleStats<T>> {
    Simulator::new(params, kernel, grid, force)?.ensemble(n_samples, master_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Mean,
    Variance,
}

impl<T: Real> EnsembleStats<T> {
    /// Standard error of the mean estimate.
    pub fn mean_se(&self, i: usize, j: usize) -> T {
        (self.variance[i][j] / cu(self.n_samples)).sqrt()
    }

    /// Standard error of the variance estimate under a Gaussian model.
    pub fn variance_se(&self, i: usize, j: usize) -> T {
        self.variance[i][j] * (c::<T>(2.0) / cu(self.n_samples - 1)).sqrt()
    }

    pub fn profile(&self, moment: Moment) -> Profile<T> {
        let (values, method) = match moment {
            Moment::Mean => (self.mean.clone(), Method::McEnsembleMean),
            Moment::Variance => (self.variance.clone(), Method::McEnsembleVar),
        };
        Profile {
            times: self.times.clone(),
            positions: self.positions.clone(),
            values,
            meta: ProfileMeta::new(method),
        }
    }

    /// Mean rows followed by variance rows, in the profile CSV layout.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,value,method")?;
        for (m, tag) in [(&self.mean, "mc_ensemble_mean"), (&self.variance, "mc_ensemble_var")] {
            for (t, row) in self.times.iter().zip(m) {
                for (x, v) in self.positions.iter().zip(row) {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{tag}", to_f64(*t), to_f64(*x), to_f64(*v))?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore<T> {
    pub t: T,
    pub x: T,
    pub estimate: T,
    pub reference: T,
    pub std_error: T,
    pub z: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub moment: Moment,
    pub points: Vec<ZScore<T>>,
    pub max_abs_z: T,
    pub mean_abs_z: T,
}

fn locate<T: Real>(axis: &[T], v: T, scale: T) -> Option<usize> {
    let tol = c::<T>(1e-9) * scale;
    axis.iter().position(|&a| (a - v).abs() <= tol)
}

/// z-scores `(estimate - reference) / standard error` at every reference point.
///
/// Every reference time must be a snapshot time and every reference position a
/// grid position.
pub fn compare_to_analytic<T: Real>(
    stats: &EnsembleStats<T>,
    reference: &Profile<T>,
    moment: Moment,
) -> Result<Comparison<T>> {
    reference.validate()?;
    let t_scale = stats.grid.t_end;
    let x_scale = stats.grid.half_length;
    let mut points = Vec::with_capacity(reference.times.len() * reference.positions.len());
    for (ri, &t) in reference.times.iter().enumerate() {
        let i = locate(&stats.times, t, t_scale)
            .ok_or_else(|| Error::GridMismatch(format!("reference time {t} is not a snapshot time")))?;
        for (rj, &x) in reference.positions.iter().enumerate() {
            let j = locate(&stats.positions, x, x_scale)
                .ok_or_else(|| Error::GridMismatch(format!("reference position {x} is not a grid position")))?;
            let (estimate, std_error) = match moment {
                Moment::Mean => (stats.mean[i][j], stats.mean_se(i, j)),
                Moment::Variance => (stats.variance[i][j], stats.variance_se(i, j)),
            };
            let r = reference.values[ri][rj];
            let d = estimate - r;
            let z = if d == T::zero() {
                T::zero()
            } else if std_error == T::zero() {
                T::infinity()
            } else {
                d / std_error
            };
            points.push(ZScore {
                t,
                x,
                estimate,
                reference: r,
                std_error,
                z,
            });
        }
    }
    let max_abs_z = points.iter().fold(T::zero(), |m, p| m.max(p.z.abs()));
    let mean_abs_z = points.iter().map(|p| p.z.abs()).sum::<T>() / cu(points.len().max(1));
    Ok(Comparison {
        moment,
        points,
        max_abs_z,
        mean_abs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::heat_kernel;

    const G1: KernelSpec<f64> = KernelSpec::Gaussian { scale: 1.0 };

    fn p(alpha: f64, sigma: f64) -> DiffusionParams<f64> {
        DiffusionParams::new(alpha, 1.0, 0.0, sigma, 1).unwrap()
    }

    fn grid(n: usize, steps: usize, t: f64, ic: InitialCondition) -> GridSpec<f64> {
        GridSpec::new(20.0, n, steps, t, ic).unwrap()
    }

    #[test]
    fn grid_validation_and_axes() {
        assert!(GridSpec::new(20.0, 100, 32, 1.0, InitialCondition::Zero).is_err());
        assert!(GridSpec::new(20.0, 32, 32, 1.0, InitialCondition::Zero).is_err());
        assert!(GridSpec::new(20.0, 64, 8, 1.0, InitialCondition::Zero).is_err());
        assert!(GridSpec::new(-1.0, 64, 32, 1.0, InitialCondition::Zero).is_err());
        let g = grid(64, 32, 1.0, InitialCondition::Zero);
        let x = g.positions();
        assert_eq!(x[0], -20.0);
        assert!((x[63] + g.dx() - 20.0).abs() < 1e-12);
        assert_eq!(g.snapshot_steps(), vec![4, 8, 12, 16, 20, 24, 28, 32]);
        assert_eq!(g.abs_frequency(63), g.abs_frequency(1));
        let j: GridSpec<f64> = serde_json::from_str(
            r#"{"half_length": 20, "n_points": 64, "n_steps": 32, "t_end": 1, "ic": "dirac_spectral"}"#,
        )
        .unwrap();
        assert_eq!(j.n_snapshots, 8);
        assert!(serde_json::from_str::<GridSpec<f64>>(
            r#"{"half_length": 20, "n_points": 64, "n_steps": 32, "t_end": 1, "ic": "zero", "x": 1}"#
        )
        .is_err());
    }

    #[test]
    fn seeds_are_distinct() {
        let s: std::collections::HashSet<u64> = (0..10_000).map(|i| sample_seed(7, i)).collect();
        assert_eq!(s.len(), 10_000);
        assert_ne!(sample_seed(1, 0), sample_seed(2, 0));
    }

    #[test]
    fn noise_statistics() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        let n = 10_000;
        let expect = 64.0 * g.dt() * g.dx();
        let mut sum = vec![Complex::new(0.0, 0.0); 64];
        let mut sq = vec![0.0; 64];
        for i in 0..n {
            let w = noise_increments(&g, sample_seed(3, i), 0);
            for k in 1..32 {
                assert_eq!(w[64 - k], w[k].conj());
            }
            assert_eq!(w[0].im, 0.0);
            for k in 0..64 {
                sum[k] += w[k];
                sq[k] += w[k].norm_sqr();
            }
        }
        let se = (expect / n as f64).sqrt();
        for k in 0..64 {
            assert!((sum[k] / n as f64).norm() < 4.0 * se * 2f64.sqrt(), "k={k}");
            assert!(((sq[k] / n as f64) / expect - 1.0).abs() < 0.05, "k={k}");
        }
    }

    #[test]
    fn noise_is_reproducible_per_step() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        assert_eq!(noise_increments(&g, 9, 3), noise_increments(&g, 9, 3));
        assert_ne!(noise_increments(&g, 9, 3), noise_increments(&g, 9, 4));
    }

    #[test]
    fn deterministic_part_is_heat_kernel() {
        let g = grid(1024, 16, 0.5, InitialCondition::DiracSpectral);
        let path = simulate_path(&p(1.0, 0.0), &G1, &g, 1, false).unwrap();
        let last = path.snapshots.last().unwrap();
        assert!((last.t - 0.5).abs() < 1e-15);
        for (x, v) in g.positions().iter().zip(&last.values) {
            let h = heat_kernel(0.5, *x, 1.0).unwrap();
            if h > 1e-8 {
                assert!(((v - h) / h).abs() < 1e-6, "x={x}: {v} vs {h}");
            }
        }
        assert!(path.imag_residue < 1e-10);
    }

    #[test]
    fn zero_initial_data_without_noise() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        let path = simulate_path(&p(1.0, 0.0), &G1, &g, 5, false).unwrap();
        assert!(path.snapshots.iter().all(|s| s.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn fixed_seed_and_linearity() {
        let g = grid(128, 32, 1.0, InitialCondition::Zero);
        let a = simulate_path(&p(0.8, 1.0), &G1, &g, 42, false).unwrap();
        let b = simulate_path(&p(0.8, 1.0), &G1, &g, 42, false).unwrap();
        assert_eq!(a, b);
        let d = simulate_path(&p(0.8, 2.0), &G1, &g, 42, false).unwrap();
        for (s, t) in a.snapshots.iter().zip(&d.snapshots) {
            for (x, y) in s.values.iter().zip(&t.values) {
                assert!((2.0 * x - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1e-300));
            }
        }
        assert!(a.imag_residue < 1e-10);
    }

    #[test]
    fn refuses_non_mild_unless_forced() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        let bad = DiffusionParams::new(0.5, 1.0, 0.0, 1.0, 1).unwrap();
        assert!(matches!(simulate_path(&bad, &G1, &g, 1, false), Err(Error::NonMild(_))));
        let sq = DiffusionParams::new(0.5, 1.0, 0.0, 0.0, 1).unwrap();
        let forced = simulate_path(&sq, &G1, &g, 1, true).unwrap();
        assert!(!forced.mild);
        let small = GridSpec::new(2.0, 64, 16, 1.0, InitialCondition::Zero).unwrap();
        assert!(simulate_path(&p(1.0, 1.0), &G1, &small, 1, false).is_err());
    }

    #[test]
    fn matches_exponential_euler_for_alpha_one() {
        let g = grid(256, 64, 1.0, InitialCondition::DiracSpectral);
        let par = DiffusionParams::new(1.0, 1.0, 0.5, 1.0, 1).unwrap();
        let seed = 11;
        let path = simulate_path(&par, &G1, &g, seed, false).unwrap();
        // independent recursion Y_{m+1} = e^{-a dt} Y_m + c dW_m
        let n = g.n_points;
        let dt = g.dt();
        let mut y: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0); n];
        for m in 0..g.n_steps {
            let w = noise_increments(&g, seed, m);
            for k in 0..n {
                let a = par.symbol_radial(&G1, g.abs_frequency(k));
                let cell = if a == 0.0 {
                    1.0
                } else {
                    ((1.0 - (-2.0 * a * dt).exp()) / (2.0 * a * dt)).sqrt()
                };
                y[k] = y[k] * (-a * dt).exp() + w[k] * cell;
            }
        }
        let xs = g.positions();
        let last = &path.snapshots.last().unwrap().values;
        for (j, x) in xs.iter().enumerate().step_by(7) {
            let mut s = Complex::new(0.0, 0.0);
            for (k, yk) in y.iter().enumerate() {
                let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                let xi = std::f64::consts::PI * kk / g.half_length;
                s += yk * Complex::new(0.0, xi * x).exp();
            }
            let z = s.re / (2.0 * g.half_length);
            assert!(
                (z - last[j]).abs() < 1e-10 * (1.0 + z.abs()),
                "x={x}: {z} vs {}",
                last[j]
            );
        }
    }

    #[test]
    fn weights_reproduce_kernel_energy() {
        let pol = EvalPolicy::<f64>::default();
        let (alpha, a, dt, n) = (0.8, 3.0, 1.0 / 64.0, 64);
        let w = weight_table(alpha, &[a], n, dt, &pol).unwrap();
        let energy: f64 = w.iter().map(|v| v * v * dt).sum();
        let order = MlOrder::new(alpha, alpha).unwrap();
        let f = |s: f64| s.powf(2.0 * alpha - 2.0) * ml_eval(order, -a * s.powf(alpha), &pol).unwrap().powi(2);
        // substitute s = u^(1/(2 alpha - 1)) to remove the endpoint singularity
        let q = 2.0 * alpha - 1.0;
        let g = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                f(u.powf(1.0 / q)) * u.powf(1.0 / q - 1.0) / q
            }
        };
        let want = crate::quad::adaptive(g, &[0.0, 1e-6, 1e-3, 0.1, 1.0], &crate::quad::Tolerance::rel(1e-12)).value;
        assert!(((energy - want) / want).abs() < 1e-6, "{energy} vs {want}");
        assert!(weight_table(1.5, &[a], n, dt, &pol)
            .unwrap()
            .iter()
            .all(|v| v.is_finite()));
    }

    #[test]
    fn ensemble_is_schedule_independent() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        let sim = Simulator::new(&p(1.0, 1.0), &G1, &g, false).unwrap();
        let a = sim.ensemble(40, 99).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sim.ensemble(40, 99).unwrap());
        assert_eq!(a, b);
        assert!(a.variance.iter().flatten().all(|&v| v >= 0.0));
        assert!(sim.ensemble(1, 99).is_err());
    }

    #[test]
    fn tree_merge_matches_two_pass() {
        let data: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 10.0).collect();
        let mut parts = Vec::new();
        for ch in data.chunks(5) {
            let mut m = Moments::empty(1);
            for &x in ch {
                m.push(std::iter::once(x));
            }
            parts.push(m);
        }
        let m = tree_merge(parts);
        let mean = data.iter().sum::<f64>() / 37.0;
        let ss: f64 = data.iter().map(|x| (x - mean).powi(2)).sum();
        assert!((m.mean[0] - mean).abs() < 1e-12);
        assert!((m.m2[0] - ss).abs() < 1e-10);
    }

    #[test]
    fn comparison_reports() {
        let g = grid(64, 16, 1.0, InitialCondition::Zero);
        let stats = ensemble_stats(&p(1.0, 1.0), &G1, &g, 20, 5, false).unwrap();
        let own = stats.profile(Moment::Mean);
        let c = compare_to_analytic(&stats, &own, Moment::Mean).unwrap();
        assert_eq!(c.max_abs_z, 0.0);
        let mut off = own.clone();
        off.positions = off.positions.iter().map(|x| x + 0.01).collect();
        assert!(matches!(
            compare_to_analytic(&stats, &off, Moment::Mean),
            Err(Error::GridMismatch(_))
        ));
        let mut late = own.clone();
        late.times = vec![7.0; 1];
        late.values.truncate(1);
        assert!(compare_to_analytic(&stats, &late, Moment::Mean).is_err());
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 8 * 64);
        assert!(text.lines().last().unwrap().ends_with("mc_ensemble_var"));
    }
}
