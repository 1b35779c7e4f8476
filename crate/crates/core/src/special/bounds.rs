//! Two-sided bounds for Mittag-Leffler functions on the negative axis.

use super::gamma::gamma;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_x<T: Real>(x: T) -> Result<()> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("bounds need finite x >= 0, got {x}")));
    }
    Ok(())
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("bounds need 0 < alpha < 1, got {alpha}")));
    }
    Ok(())
}

/// Bracket `(lower, upper)` for E_alpha(-x), 0 < alpha < 1, x >= 0:
/// 1/(1 + Gamma(1-alpha) x) <= E_alpha(-x) <= 1/(1 + x/Gamma(1+alpha)).
pub fn ml_bounds<T: Real>(alpha: T, x: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    check_x(x)?;
    let one = T::one();
    let lower = one / (one + gamma(one - alpha)? * x);
    let upper = one / (one + x / gamma(one + alpha)?);
    Ok((lower, upper))
}

/// Bracket for Gamma(alpha) E_{alpha,alpha}(-x), 0 < alpha < 1, x >= 0.
pub fn ml_bounds_twin<T: Real>(alpha: T, x: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    check_x(x)?;
    let one = T::one();
    let g1p = gamma(one + alpha)?;
    let lo = (gamma(one - alpha)? / g1p).sqrt();
    let hi = (g1p / gamma(one + alpha + alpha)?).sqrt();
    let lower = one / (one + lo * x).powi(2);
    let upper = one / (one + hi * x).powi(2);
    Ok((lower, upper))
}

/// Bracket for Gamma(beta) E_{alpha,beta}(-x), 0 < alpha <= 1, beta > alpha, x >= 0.
pub fn ml_bounds_beta<T: Real>(alpha: T, beta: T, x: T) -> Result<(T, T)> {
    if !(alpha > T::zero() && alpha <= T::one()) || !(beta > alpha) {
        return Err(Error::Domain(format!(
            "bounds need 0 < alpha <= 1 < ... and beta > alpha, got ({alpha}, {beta})"
        )));
    }
    check_x(x)?;
    let one = T::one();
    let gb = gamma(beta)?;
    let lower = one / (one + gamma(beta - alpha)? / gb * x);
    let upper = one / (one + gb / gamma(beta + alpha)? * x);
    Ok((lower, upper))
}
