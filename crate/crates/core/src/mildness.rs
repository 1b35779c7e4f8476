//! Mildness: the exact classification and numerical integrability probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::QuadSpec;
use crate::quad::{try_adaptive, Tolerance};
use crate::scalar::{c, cu, to_f64, Real};
use crate::special::{ml_eval, rgamma, EvalPolicy, MlOrder};
use crate::symbol::{DiffusionParams, KernelSpec};
use crate::tables::TimeTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MildnessRule {
    LambdaZeroNotMild,
    AlphaOneN1,
    SubdiffusiveN1AlphaAboveTwoThirds,
    SuperdiffusiveN12,
    NotMildOtherwise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MildnessVerdict {
    pub mild: bool,
    pub rule: MildnessRule,
    pub detail: String,
}

/// Which Mittag-Leffler map a membership predicate is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MlMap {
    EAlpha,
    EAlphaAlpha,
}

fn two_thirds<T: Real>() -> T {
    c::<T>(2.0) / c(3.0)
}

/// Exact decision for the parameter tuple.
pub fn classify<T: Real>(params: &DiffusionParams<T>) -> Result<MildnessVerdict> {
    params.validate()?;
    let DiffusionParams {
        alpha, lambda, mu, dim, ..
    } = *params;
    if lambda == T::zero() && mu == T::zero() {
        return Err(Error::DegenerateParams(
            "lambda = mu = 0 leaves no spatial operator".into(),
        ));
    }
    let verdict = |mild, rule, detail: String| MildnessVerdict { mild, rule, detail };
    if lambda == T::zero() {
        return Ok(verdict(
            false,
            MildnessRule::LambdaZeroNotMild,
            format!("lambda = 0: the symbol saturates at mu = {mu}, so E_alpha(-a t^alpha) is not integrable in any dimension"),
        ));
    }
    let one = T::one();
    let (mild, rule, why) = if alpha == one {
        (
            dim == 1,
            MildnessRule::AlphaOneN1,
            "alpha = 1 is mild iff N = 1".to_string(),
        )
    } else if alpha < one {
        (
            dim == 1 && alpha > two_thirds(),
            MildnessRule::SubdiffusiveN1AlphaAboveTwoThirds,
            "0 < alpha < 1 is mild iff N = 1 and alpha > 2/3".to_string(),
        )
    } else {
        (
            dim == 1 || dim == 2,
            MildnessRule::SuperdiffusiveN12,
            "1 < alpha < 2 is mild iff N is 1 or 2".to_string(),
        )
    };
    let rule = if mild { rule } else { MildnessRule::NotMildOtherwise };
    Ok(verdict(mild, rule, format!("alpha = {alpha}, N = {dim}: {why}")))
}

/// Membership of `xi -> E(-|xi|^2)` in `L^p(R^N)`.
pub fn lemma_lp_condition<T: Real>(alpha: T, dim: usize, p: T, which: MlMap) -> Result<bool> {
    if !(alpha > T::zero() && alpha < c(2.0)) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !(p >= T::one()) {
        return Err(Error::Domain(format!("p must be >= 1, got {p}")));
    }
    if alpha >= T::one() {
        return Ok(true);
    }
    let n = cu::<T>(dim);
    Ok(match which {
        MlMap::EAlpha => n < c::<T>(2.0) * p,
        MlMap::EAlphaAlpha => n < c::<T>(4.0) * p,
    })
}

/// Finiteness of the time-frequency integral for `0 < alpha < 1`.
pub fn lemma_b_condition<T: Real>(alpha: T, dim: usize) -> Result<bool> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(dim == 1 && alpha > two_thirds())
}

/// Finiteness for `1 < alpha < 2`: `N < 4 - 2/alpha`.
pub fn prop_superdiffusive_condition<T: Real>(alpha: T, dim: usize) -> Result<bool> {
    if !(alpha > T::one() && alpha < c(2.0)) {
        return Err(Error::Domain(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    Ok(cu::<T>(dim) < c::<T>(4.0) - c::<T>(2.0) / alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeQuantity {
    #[serde(rename = "M1_L1_tail")]
    M1L1Tail,
    #[serde(rename = "M2_spacetime")]
    M2Spacetime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    Converged,
    Diverges,
    Inconclusive,
}

/// Numerical evidence for convergence or divergence of a truncated integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport<T> {
    pub quantity: ProbeQuantity,
    /// `(K, eps)` per refinement; `eps = 0` for the frequency-only probe.
    pub cutoffs: Vec<(T, T)>,
    pub values: Vec<T>,
    pub tail_exponent_fit: T,
    pub diverges: bool,
    pub outcome: ProbeOutcome,
    pub diverges_in_k: bool,
    pub diverges_in_eps: bool,
    /// Extrapolated limit when the values converge.
    pub limit: Option<T>,
    pub tol_used: T,
    pub detail: String,
}

/// Default refinement schedules.
pub fn default_k_schedule<T: Real>() -> Vec<T> {
    vec![c(1e2), c(1e3), c(1e4)]
}

pub fn default_m2_schedule<T: Real>() -> Vec<(T, T)> {
    vec![(c(1e2), c(1e-2)), (c(1e3), c(1e-3)), (c(1e4), c(1e-4))]
}

pub const DEFAULT_PROBE_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug)]
struct Trend<T> {
    outcome: ProbeOutcome,
    slope: T,
    limit: Option<T>,
}

/// Least-squares slope of `ln v` against `ln x`.
fn loglog_slope<T: Real>(x: &[T], v: &[T]) -> T {
    if v.iter().any(|&y| !(y > T::zero())) {
        return T::zero();
    }
    let n = cu::<T>(x.len());
    let lx: Vec<T> = x.iter().map(|a| a.ln()).collect();
    let lv: Vec<T> = v.iter().map(|a| a.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let mv = lv.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in lx.iter().zip(&lv) {
        sxy += (*a - mx) * (*b - mv);
        sxx += (*a - mx) * (*a - mx);
    }
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}

fn rel_inc<T: Real>(prev: T, next: T) -> T {
    if next == T::zero() {
        T::zero()
    } else {
        (next - prev) / next.abs()
    }
}

/// Three-state trend of a refinement sequence.
///
/// Converged when the last two relative increments are below `tol/10`;
/// diverging when both exceed `tol`, the increments do not shrink and the
/// log-log slope exceeds 0.1; geometrically shrinking increments are
/// extrapolated to a limit.
fn assess<T: Real>(x: &[T], v: &[T], tol: T) -> Trend<T> {
    let n = v.len();
    let slope = loglog_slope(x, v);
    let d1 = v[n - 2] - v[n - 3];
    let d2 = v[n - 1] - v[n - 2];
    let r1 = rel_inc(v[n - 3], v[n - 2]);
    let r2 = rel_inc(v[n - 2], v[n - 1]);
    let small = tol * c(0.1);
    if r1.abs() < small && r2.abs() < small {
        return Trend {
            outcome: ProbeOutcome::Converged,
            slope,
            limit: Some(v[n - 1]),
        };
    }
    if d1 > T::zero() && d2 >= T::zero() {
        let ratio = d2 / d1;
        if r1 > tol && r2 > tol && ratio >= c(0.9) && slope > c(0.1) {
            return Trend {
                outcome: ProbeOutcome::Diverges,
                slope,
                limit: None,
            };
        }
        if ratio < c(0.9) {
            return Trend {
                outcome: ProbeOutcome::Converged,
                slope,
                limit: Some(v[n - 1] + d2 * ratio / (T::one() - ratio)),
            };
        }
    }
    Trend {
        outcome: ProbeOutcome::Inconclusive,
        slope,
        limit: None,
    }
}

/// Area of the unit sphere in `R^N`: `2 pi^(N/2) / Gamma(N/2)`.
fn sphere_area<T: Real>(dim: usize) -> T {
    let h = cu::<T>(dim) * c(0.5);
    c::<T>(2.0) * T::PI().powf(h) * rgamma(h)
}

fn validate_probe<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    quad: &QuadSpec<T>,
) -> Result<()> {
    params.validate()?;
    kernel.validate(params.dim)?;
    quad.validate()?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("probe needs t > 0, got {t}")));
    }
    if params.lambda == T::zero() && params.mu == T::zero() {
        return Err(Error::DegenerateParams("lambda = mu = 0".into()));
    }
    Ok(())
}

fn strictly_increasing<T: Real>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Breakpoints for a radial integral on `[lo, hi]`: geometric, 4 per decade.
fn radial_breaks<T: Real>(lo: T, hi: T) -> Vec<T> {
    let mut b = vec![lo];
    let mut x = c::<T>(1e-2).max(lo);
    let step = c::<T>(10.0).powf(c(0.25));
    while x < hi {
        if x > lo {
            b.push(x);
        }
        x *= step;
    }
    b.push(hi);
    b
}

fn integrate_radial<T, F>(f: F, lo: T, hi: T, rel: T, abs: T, what: &str) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let tol = Tolerance::rel(rel).with_abs(abs).with_max_intervals(20_000);
    let r = try_adaptive(f, &radial_breaks(lo, hi), &tol)?;
    if !r.value.is_finite() {
        return Err(Error::QuadratureFailure(format!("{what}: non-finite value")));
    }
    if !r.converged && r.abs_err > c::<T>(1e-4) * r.value.abs() && r.abs_err > abs {
        return Err(Error::QuadratureFailure(format!(
            "{what}: error estimate {} for value {}",
            r.abs_err, r.value
        )));
    }
    Ok(r.value)
}

/// Truncated `L^1` norm of `xi -> E_alpha(-a(xi) t^alpha)` over `|xi| <= K`.
pub fn probe_m1<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    schedule: &[T],
    quad: &QuadSpec<T>,
) -> Result<ProbeReport<T>> {
    validate_probe(params, kernel, t, quad)?;
    if schedule.len() < 3 || !strictly_increasing(schedule) || !(schedule[0] > T::zero()) {
        return Err(Error::InvalidSpec(
            "frequency schedule needs at least 3 strictly increasing positive cutoffs".into(),
        ));
    }
    let policy = EvalPolicy::default();
    let order = MlOrder::classic(params.alpha)?;
    let ta = t.powf(params.alpha);
    let dim = params.dim;
    let weight = sphere_area::<T>(dim);
    let f = |k: T| -> Result<T> {
        let a = params.symbol_radial(kernel, k);
        let e = ml_eval(order, -a * ta, &policy)?;
        Ok(weight * k.powi(dim as i32 - 1) * e.abs())
    };
    let mut edges = vec![T::zero()];
    edges.extend_from_slice(schedule);
    let pieces: Vec<T> = edges
        .par_windows(2)
        .map(|w| integrate_radial(f, w[0], w[1], quad.rel_tol, T::zero(), "M1 probe"))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(schedule.len());
    let mut acc = T::zero();
    for p in pieces {
        acc += p;
        values.push(acc);
    }
    let tol = c::<T>(DEFAULT_PROBE_TOL);
    let trend = assess(schedule, &values, tol);
    let diverges = trend.outcome == ProbeOutcome::Diverges;
    Ok(ProbeReport {
        quantity: ProbeQuantity::M1L1Tail,
        cutoffs: schedule.iter().map(|&k| (k, T::zero())).collect(),
        values,
        tail_exponent_fit: trend.slope,
        diverges,
        outcome: trend.outcome,
        diverges_in_k: diverges,
        diverges_in_eps: false,
        limit: trend.limit,
        tol_used: tol,
        detail: format!(
            "numerical evidence only: truncated L1 norm at t = {t}, outcome {:?}",
            trend.outcome
        ),
    })
}

/// Truncated space-time integral
/// `sigma^2 (2 pi)^-N int_eps^t int_{|xi| <= K} s^(2 alpha - 2) E_{alpha,alpha}(-s^alpha a(xi))^2 dxi ds`.
///
/// Every `(K, eps)` combination of the schedule is evaluated; divergence is
/// assessed separately along `K` (at the smallest `eps`) and along `eps`
/// (at the largest `K`).
pub fn probe_m2<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    schedule: &[(T, T)],
    quad: &QuadSpec<T>,
) -> Result<ProbeReport<T>> {
    validate_probe(params, kernel, t, quad)?;
    let refining = schedule.len() >= 3
        && schedule.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1)
        && schedule.iter().all(|&(k, e)| k > T::zero() && e > T::zero() && e < t);
    if !refining {
        return Err(Error::InvalidSpec(
            "space-time schedule needs at least 3 refinements with K increasing and eps decreasing inside (0, t)"
                .into(),
        ));
    }
    let policy = EvalPolicy::default();
    let table = TimeTable::new(params.alpha, &policy)?;
    let dim = params.dim;
    let sigma2 = if params.sigma == T::zero() {
        T::one()
    } else {
        params.sigma * params.sigma
    };
    let pref = sigma2 * sphere_area::<T>(dim) / (c::<T>(2.0) * T::PI()).powi(dim as i32);
    let ks: Vec<T> = schedule.iter().map(|p| p.0).collect();
    let eps: Vec<T> = schedule.iter().map(|p| p.1).collect();
    let m = schedule.len();
    // grid[i][j] = value at (K_i, eps_j)
    let columns: Vec<Vec<T>> = eps
        .par_iter()
        .map(|&e| -> Result<Vec<T>> {
            let f = |k: T| -> Result<T> {
                let a = params.symbol_radial(kernel, k);
                Ok(pref * k.powi(dim as i32 - 1) * table.time_integral(a, e, t))
            };
            let mut out = Vec::with_capacity(m);
            let mut acc = T::zero();
            let mut lo = T::zero();
            for &k in &ks {
                acc += integrate_radial(f, lo, k, quad.rel_tol, quad.rel_tol * acc, "M2 probe")?;
                out.push(acc);
                lo = k;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| columns[j][i];
    let tol = c::<T>(DEFAULT_PROBE_TOL);
    let k_sweep: Vec<T> = (0..m).map(|i| at(i, m - 1)).collect();
    let e_sweep: Vec<T> = (0..m).map(|j| at(m - 1, j)).collect();
    let inv_eps: Vec<T> = eps.iter().map(|e| e.recip()).collect();
    let tk = assess(&ks, &k_sweep, tol);
    let te = assess(&inv_eps, &e_sweep, tol);
    let values: Vec<T> = (0..m).map(|i| at(i, i)).collect();
    let diag_grows = (m - 2..m).all(|i| rel_inc(values[i - 1], values[i]) > tol);
    let in_k = tk.outcome == ProbeOutcome::Diverges;
    let in_eps = te.outcome == ProbeOutcome::Diverges;
    let diverges = (in_k || in_eps) && diag_grows;
    let outcome = if diverges {
        ProbeOutcome::Diverges
    } else if tk.outcome == ProbeOutcome::Converged && te.outcome == ProbeOutcome::Converged {
        ProbeOutcome::Converged
    } else {
        ProbeOutcome::Inconclusive
    };
    let limit = match (outcome, tk.limit, te.limit) {
        (ProbeOutcome::Converged, Some(lk), Some(le)) => Some(le + (lk - k_sweep[m - 1])),
        _ => None,
    };
    let slope = loglog_slope(&ks, &values);
    Ok(ProbeReport {
        quantity: ProbeQuantity::M2Spacetime,
        cutoffs: schedule.to_vec(),
        values,
        tail_exponent_fit: slope,
        diverges,
        outcome,
        diverges_in_k: in_k,
        diverges_in_eps: in_eps,
        limit,
        tol_used: tol,
        detail: format!(
            "numerical evidence only: K-sweep {:?} (slope {:.3}), eps-sweep {:?} (slope {:.3})",
            tk.outcome,
            to_f64(tk.slope),
            te.outcome,
            to_f64(te.slope)
        ),
    })
}
