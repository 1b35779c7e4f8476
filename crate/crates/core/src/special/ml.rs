//! Mittag-Leffler functions E_{alpha,beta} on the real line.
//!
//! Evaluation regimes:
//! * power series near the origin,
//! * algebraic asymptotic expansion (plus the exact exponential part for
//!   1 < alpha < 2) for large negative arguments, used only when its terms
//!   certify the requested tolerance,
//! * a real ray-integral representation everywhere in between.

use serde::{Deserialize, Serialize};

use super::gamma::{cospi, ln_gamma, rgamma, sinpi};
use crate::error::{Error, Result};
use crate::quad::{try_adaptive, Tolerance};
use crate::scalar::{c, to_f64, KahanSum, Real};

/// Order pair (alpha, beta) of E_{alpha,beta}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlOrder<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> MlOrder<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !(alpha > T::zero()) || !(beta > T::zero()) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "Mittag-Leffler order needs alpha > 0 and beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// E_alpha = E_{alpha,1}.
    pub fn classic(alpha: T) -> Result<Self> {
        Self::new(alpha, T::one())
    }

    /// E_{alpha,alpha}.
    pub fn twin(alpha: T) -> Result<Self> {
        Self::new(alpha, alpha)
    }
}

/// Accuracy and regime controls for Mittag-Leffler evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPolicy<T> {
    pub rel_tol: T,
    pub max_terms: usize,
    pub asymptotic_switch: T,
}

impl<T: Real> Default for EvalPolicy<T> {
    fn default() -> Self {
        Self {
            rel_tol: c::<T>(1e-12).max(c::<T>(100.0) * T::epsilon()),
            max_terms: 500,
            asymptotic_switch: c(50.0),
        }
    }
}

impl<T: Real> EvalPolicy<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) {
            return Err(Error::InvalidSpec("rel_tol must lie in (0, 1)".into()));
        }
        if self.max_terms < 10 {
            return Err(Error::InvalidSpec("max_terms must be at least 10".into()));
        }
        if !(self.asymptotic_switch > T::one()) {
            return Err(Error::InvalidSpec("asymptotic_switch must exceed 1".into()));
        }
        Ok(())
    }

    fn quad_tol(&self) -> T {
        (self.rel_tol * c(0.1)).max(c::<T>(20.0) * T::epsilon())
    }
}

const SERIES_RADIUS: f64 = 1.0;

/// kappa_alpha = sin(pi alpha) Gamma(1 + alpha) / pi.
pub fn kappa_alpha<T: Real>(alpha: T) -> T {
    let g = super::gamma::gamma(T::one() + alpha).unwrap_or(T::nan());
    sinpi(alpha) * g / T::PI()
}

/// Partial sums of sum_k z^k / Gamma(alpha k + beta).
///
/// Stops once three consecutive terms fall below `rel_tol * |sum|`.
pub fn ml_series<T: Real>(order: MlOrder<T>, z: T, policy: &EvalPolicy<T>) -> Result<T> {
    let MlOrder { alpha, beta } = order;
    if z == T::zero() {
        return Ok(rgamma(beta));
    }
    let ln_abs = z.abs().ln();
    let negative = z < T::zero();
    let big = c::<T>(160.0);
    let mut zk = T::one();
    let mut sum = KahanSum::new();
    let mut small = 0usize;
    let mut peak = T::zero();
    for k in 0..policy.max_terms {
        let kf = T::from_usize(k).unwrap();
        let arg = alpha * kf + beta;
        let term = if arg < big && zk.is_finite() {
            zk * rgamma(arg)
        } else {
            let lt = kf * ln_abs - ln_gamma(arg);
            if lt > c(700.0) {
                return Err(Error::Overflow(format!(
                    "E_({alpha},{beta})({z}) series term exceeds the floating range"
                )));
            }
            let m = lt.exp();
            if negative && k % 2 == 1 {
                -m
            } else {
                m
            }
        };
        sum.add(term);
        if zk.is_finite() {
            zk *= z;
        }
        let s = sum.value();
        if !s.is_finite() {
            return Err(Error::Overflow(format!("E_({alpha},{beta})({z}) overflows")));
        }
        peak = peak.max(term.abs());
        if term.abs() <= policy.rel_tol * s.abs() {
            small += 1;
            if small >= 3 {
                if peak * T::epsilon() > policy.rel_tol * s.abs() {
                    return Err(Error::NoConvergence {
                        what: "Mittag-Leffler series (cancellation)",
                        terms: k + 1,
                    });
                }
                return Ok(s);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "Mittag-Leffler series",
        terms: policy.max_terms,
    })
}

/// Sum of the two exponential (residue) contributions to E_{alpha,beta}(-x)
/// for 1 < alpha < 2.
fn oscillatory_part<T: Real>(alpha: T, beta: T, x: T) -> T {
    let r = x.powf(alpha.recip());
    let inv = alpha.recip();
    let amp = c::<T>(2.0) / alpha * x.powf((T::one() - beta) * inv);
    let phase = r * sinpi(inv) + T::PI() * (T::one() - beta) * inv;
    amp * (r * cospi(inv)).exp() * phase.cos()
}

/// Leading-order large-x behaviour of E_{alpha,beta}(-x).
///
/// * 0 < alpha < 1: the first non-vanishing algebraic term; for beta = 1 this
///   is x^-1 / Gamma(1 - alpha), for beta = alpha it is kappa_alpha x^-2.
/// * 1 < alpha < 2: the signed oscillatory term
///   (2/alpha) x^((1-beta)/alpha) exp(x^(1/alpha) cos(pi/alpha))
///   cos(x^(1/alpha) sin(pi/alpha) + pi (1-beta)/alpha).
pub fn ml_asymptotic_neg<T: Real>(order: MlOrder<T>, x: T, policy: &EvalPolicy<T>) -> Result<T> {
    let MlOrder { alpha, beta } = order;
    if !(x >= policy.asymptotic_switch) {
        return Err(Error::Domain(format!(
            "asymptotic branch needs x >= {}, got {x}",
            policy.asymptotic_switch
        )));
    }
    if alpha == T::one() {
        return Err(Error::Domain(
            "alpha = 1 has no algebraic asymptotic; E_1 is the exponential".into(),
        ));
    }
    if alpha < T::one() {
        for k in 1..=64usize {
            let kf = T::from_usize(k).unwrap();
            let g = rgamma(beta - alpha * kf);
            if g != T::zero() {
                let sign = if k % 2 == 1 { T::one() } else { -T::one() };
                return Ok(sign * g * x.powf(-kf));
            }
        }
        return Ok(T::zero());
    }
    if alpha < c(2.0) {
        return Ok(oscillatory_part(alpha, beta, x));
    }
    Err(Error::Unsupported {
        alpha: to_f64(alpha),
        beta: to_f64(beta),
    })
}

/// Full asymptotic expansion of E_{alpha,beta}(-x): the algebraic series
/// -sum_k (-x)^-k / Gamma(beta - alpha k), plus the exponential part when
/// 1 < alpha < 2.
///
/// Fails with `NoConvergence` when the divergent algebraic series cannot
/// reach `rel_tol` before its terms start to grow.
pub fn ml_asymptotic_full<T: Real>(order: MlOrder<T>, x: T, policy: &EvalPolicy<T>) -> Result<T> {
    let MlOrder { alpha, beta } = order;
    if !(x > T::zero()) || alpha == T::one() || alpha >= c(2.0) {
        return Err(Error::Domain(format!(
            "asymptotic expansion not available for alpha = {alpha}, x = {x}"
        )));
    }
    let base = if alpha > T::one() {
        oscillatory_part(alpha, beta, x)
    } else {
        T::zero()
    };
    let tol = policy.rel_tol * c(0.1);
    let mut sum = KahanSum::new();
    let mut xk = T::one();
    let inv = x.recip();
    let mut small = 0usize;
    // The term envelope Gamma(alpha k - beta + 1) x^-k bottoms out near
    // k = x^(1/alpha) / alpha; summing past that only adds error.
    let k_opt = (x.powf(alpha.recip()) / alpha).to_usize().unwrap_or(usize::MAX);
    let k_max = policy.max_terms.min(k_opt);
    for k in 1..=k_max {
        xk *= inv;
        let kf = T::from_usize(k).unwrap();
        let g = rgamma(beta - alpha * kf);
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        let term = sign * g * xk;
        sum.add(term);
        let s = sum.value() + base;
        if term.abs() <= tol * s.abs() {
            small += 1;
            if small >= 3 {
                return Ok(s);
            }
        } else {
            small = 0;
        }
        if xk == T::zero() {
            break;
        }
    }
    Err(Error::NoConvergence {
        what: "Mittag-Leffler asymptotic expansion",
        terms: policy.max_terms,
    })
}

fn check_integral<T: Real>(v: crate::quad::Integral<T>, policy: &EvalPolicy<T>) -> Result<T> {
    let slack = policy.rel_tol.sqrt().max(c(1e-6));
    if v.value.is_finite() && (v.converged || v.abs_err <= slack * v.value.abs()) {
        Ok(v.value)
    } else {
        Err(Error::QuadratureFailure(format!(
            "Mittag-Leffler integral: value {} with error estimate {}",
            v.value, v.abs_err
        )))
    }
}

fn insert_breaks<T: Real>(breaks: &mut Vec<T>, lo: T, hi: T, points: &[T]) {
    for &p in points {
        if p > lo && p < hi {
            breaks.push(p);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
}

/// Ray integral for 0 < alpha < 1, any real z != 0 and beta < 1 + alpha.
fn integral_sub<T: Real>(alpha: T, beta: T, z: T, policy: &EvalPolicy<T>) -> Result<T> {
    let inv = alpha.recip();
    let p = (T::one() - beta) * inv;
    let s1 = sinpi(T::one() - beta);
    let s2 = sinpi(T::one() - beta + alpha);
    let cpa = cospi(alpha);
    let pref = (alpha * T::PI()).recip();
    let r_max = c::<T>(745.0).powf(alpha);
    let kernel = |r: T| -> T {
        let num = r * s1 - z * s2;
        let den = r * r - c::<T>(2.0) * r * z * cpa + z * z;
        pref * (-r.powf(inv)).exp() * num / den
    };
    let az = z.abs();
    let mut breaks = vec![T::zero(), r_max];
    let mut pts = vec![T::one()];
    for s in [0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 10.0] {
        pts.push(az * c(s));
    }
    if cpa * z < T::zero() || z > T::zero() {
        pts.push((z * cpa).abs());
    }
    insert_breaks(&mut breaks, T::zero(), r_max, &pts);
    let tol = Tolerance::rel(policy.quad_tol()).with_max_intervals(2000);
    let raw = if p < T::zero() {
        // r = w^(1/(1+p)) absorbs the r^p endpoint singularity.
        let q = T::one() + p;
        let w_breaks: Vec<T> = breaks.iter().map(|&r| r.powf(q)).collect();
        let g = |w: T| -> Result<T> { Ok(kernel(w.powf(q.recip())) / q) };
        try_adaptive(g, &w_breaks, &tol)?
    } else {
        try_adaptive(|r: T| -> Result<T> { Ok(r.powf(p) * kernel(r)) }, &breaks, &tol)?
    };
    let v = check_integral(raw, policy)?;
    if z > T::zero() {
        let lead = z.powf(p) * z.powf(inv).exp() * inv;
        Ok(lead + v)
    } else {
        Ok(v)
    }
}

/// Ray integral for 1 <= alpha < 2 and negative argument -x.
fn integral_super<T: Real>(alpha: T, beta: T, x: T, policy: &EvalPolicy<T>) -> Result<T> {
    let delta = T::PI() * (alpha + c(2.0)) * c(0.25);
    let theta = delta / alpha;
    let (st, ct) = theta.sin_cos();
    let (sd, cd) = delta.sin_cos();
    let shift = theta * (T::one() - beta) + delta;
    let ab = alpha - beta;
    let f = |u: T| -> Result<T> {
        let ua = u.powf(alpha);
        let dr = ua * cd + x;
        let di = ua * sd;
        let phi = u * st + shift;
        let (sp, cp) = phi.sin_cos();
        let amp = (u * ct).exp() * u.powf(ab);
        Ok(amp * (sp * dr - cp * di) / (dr * dr + di * di) / T::PI())
    };
    let u_max = c::<T>(55.0) / ct.abs();
    let period = c::<T>(2.0) * T::PI() / st;
    let n = (u_max / period).ceil().to_usize().unwrap_or(1).clamp(1, 4000);
    let mut breaks: Vec<T> = (0..=n)
        .map(|i| u_max * T::from_usize(i).unwrap() / T::from_usize(n).unwrap())
        .collect();
    let u0 = x.powf(alpha.recip());
    let pts: Vec<T> = [0.5, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.25, 2.0]
        .iter()
        .map(|&s| u0 * c(s))
        .collect();
    insert_breaks(&mut breaks, T::zero(), u_max, &pts);
    let tol = Tolerance::rel(policy.quad_tol()).with_max_intervals(8000);
    check_integral(try_adaptive(f, &breaks, &tol)?, policy)
}

/// Integral representation of E_{alpha,beta}(z).
///
/// Covers 0 < alpha < 1 for any real z, and 1 <= alpha < 2 for z < 0;
/// requires beta < 1 + alpha.
pub fn ml_integral<T: Real>(order: MlOrder<T>, z: T, policy: &EvalPolicy<T>) -> Result<T> {
    let MlOrder { alpha, beta } = order;
    let unsupported = || Error::Unsupported {
        alpha: to_f64(alpha),
        beta: to_f64(beta),
    };
    if z == T::zero() {
        return Ok(rgamma(beta));
    }
    if !(beta < T::one() + alpha) || alpha >= c(2.0) {
        return Err(unsupported());
    }
    if alpha < T::one() {
        integral_sub(alpha, beta, z, policy)
    } else if z < T::zero() {
        integral_super(alpha, beta, -z, policy)
    } else {
        Err(unsupported())
    }
}

/// Evaluates E_{alpha,beta}(x) for real x, choosing the regime automatically.
pub fn ml_eval<T: Real>(order: MlOrder<T>, x: T, policy: &EvalPolicy<T>) -> Result<T> {
    let MlOrder { alpha, beta } = order;
    if !(alpha > T::zero() && beta > T::zero()) {
        return Err(Error::Domain(format!("invalid order ({alpha}, {beta})")));
    }
    if x.is_nan() {
        return Err(Error::Domain("argument is NaN".into()));
    }
    if alpha > c(2.0) {
        return Err(Error::Unsupported {
            alpha: to_f64(alpha),
            beta: to_f64(beta),
        });
    }
    if x == T::zero() {
        return Ok(rgamma(beta));
    }
    let one = T::one();
    let two = c::<T>(2.0);
    if alpha == one && beta == one {
        return Ok(x.exp());
    }
    if alpha == two && beta == one {
        return Ok(if x > T::zero() {
            x.sqrt().cosh()
        } else {
            (-x).sqrt().cos()
        });
    }
    if alpha == two && beta == two {
        return Ok(if x > T::zero() {
            let s = x.sqrt();
            s.sinh() / s
        } else {
            let s = (-x).sqrt();
            s.sin() / s
        });
    }
    if alpha == two {
        return ml_series(order, x, policy);
    }
    if x > T::zero() {
        if alpha < one && x > c(SERIES_RADIUS) {
            return ml_integral(order, x, policy);
        }
        return ml_series(order, x, policy);
    }
    let ax = -x;
    if ax <= c(SERIES_RADIUS) {
        match ml_series(order, x, policy) {
            Err(Error::NoConvergence { .. }) => {}
            other => return other,
        }
    }
    if ax >= policy.asymptotic_switch && alpha != one {
        if let Ok(v) = ml_asymptotic_full(order, ax, policy) {
            return Ok(v);
        }
    }
    ml_integral(order, x, policy)
}

/// alpha z E_alpha(z) - e_alpha(z), with e_alpha(z) = z exp(z^(1/alpha)) - kappa_alpha.
///
/// For z < 0 the exponential is taken over the branches of z^(1/alpha) that
/// dominate on the negative axis: none for alpha < 1, exp(z) for alpha = 1,
/// and the conjugate pair for 1 < alpha < 2.
pub fn ml_dominant_identity_residual<T: Real>(alpha: T, z: T, policy: &EvalPolicy<T>) -> Result<T> {
    let e = ml_eval(MlOrder::classic(alpha)?, z, policy)?;
    let lhs = alpha * z * e;
    let kappa = kappa_alpha(alpha);
    let dominant = if z >= T::zero() {
        z * z.powf(alpha.recip()).exp()
    } else if alpha < T::one() {
        T::zero()
    } else if alpha == T::one() {
        z * z.exp()
    } else {
        let x = -z;
        let r = x.powf(alpha.recip());
        let inv = alpha.recip();
        z * c::<T>(2.0) * (r * cospi(inv)).exp() * (r * sinpi(inv)).cos()
    };
    Ok(lhs - (dominant - kappa))
}
