use super::gamma::rgamma;
use super::ml::EvalPolicy;
use crate::error::{Error, Result};
use crate::scalar::{c, KahanSum, Real};

/// Mainardi series sum_n (-1)^n u^(2n) / ((2n)! Gamma(alpha n - alpha + 1)).
///
/// For 0 < alpha < 1 the gamma argument alpha (n - 1) + 1 is positive for
/// every n, so no pole is ever hit.
pub fn mainardi_series<T: Real>(alpha: T, u: T, policy: &EvalPolicy<T>) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!(
            "Mainardi series needs 0 < alpha < 1, got {alpha}"
        )));
    }
    if !(u >= T::zero()) {
        return Err(Error::Domain(format!("Mainardi series needs u >= 0, got {u}")));
    }
    let u2 = u * u;
    let mut p = T::one();
    let mut sum = KahanSum::new();
    let mut small = 0usize;
    let mut peaked = false;
    let mut prev = T::zero();
    for n in 0..policy.max_terms {
        if n > 0 {
            let nf = T::from_usize(n).unwrap();
            p = p * u2 / ((c::<T>(2.0) * nf - T::one()) * c::<T>(2.0) * nf);
        }
        let g = rgamma(alpha * T::from_usize(n).unwrap() - alpha + T::one());
        let mag = p * g;
        let term = if n % 2 == 0 { mag } else { -mag };
        sum.add(term);
        let s = sum.value();
        if !s.is_finite() {
            return Err(Error::Overflow("Mainardi series".into()));
        }
        if mag < prev {
            peaked = true;
        }
        prev = mag;
        if peaked && mag <= policy.rel_tol * s.abs() || mag == T::zero() {
            small += 1;
            if small >= 3 {
                return Ok(s);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "Mainardi series",
        terms: policy.max_terms,
    })
}

/// Closed form (1 + u) exp(-u^2/4) / sqrt(pi) at order one half.
pub fn mainardi_half_closed<T: Real>(u: T) -> T {
    (T::one() + u) * (-u * u * c(0.25)).exp() / T::PI().sqrt()
}
