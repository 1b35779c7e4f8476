use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ml::{ml_eval, EvalPolicy, MlOrder};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
const SCAN_STEP: f64 = 0.05;

/// Real zeros of E_alpha on a search interval `[x_min, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroList<T> {
    pub alpha: T,
    pub zeros: Vec<T>,
    pub search_interval: (T, T),
}

/// Locates the real zeros of E_alpha on `[x_min, 0]` by a sign-change scan
/// with step 0.05 followed by bisection.
///
/// For alpha <= 1 the function is completely monotone on the negative axis
/// and the list is empty without scanning.
pub fn ml_real_zeros<T: Real>(alpha: T, x_min: T, zero_tol: T, policy: &EvalPolicy<T>) -> Result<ZeroList<T>> {
    if !(x_min < T::zero()) {
        return Err(Error::Domain(format!("x_min must be negative, got {x_min}")));
    }
    if !(alpha > T::zero() && alpha <= c(2.0)) {
        return Err(Error::Domain(format!("zero search needs 0 < alpha <= 2, got {alpha}")));
    }
    let mut out = ZeroList {
        alpha,
        zeros: Vec::new(),
        search_interval: (x_min, T::zero()),
    };
    if alpha <= T::one() {
        return Ok(out);
    }
    let order = MlOrder::classic(alpha)?;
    let f = |x: T| ml_eval(order, x, policy);
    let step: T = c(SCAN_STEP);
    let n = (-x_min / step).ceil().to_usize().unwrap();
    let grid: Vec<T> = (0..=n)
        .map(|i| (x_min + step * T::from_usize(i).unwrap()).min(T::zero()))
        .collect();
    let values: Vec<T> = grid.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == T::zero() {
            out.zeros.push(a);
            continue;
        }
        if fa * fb < T::zero() {
            out.zeros.push(bisect(&f, a, b, fa, zero_tol)?);
        }
    }
    if values[n] == T::zero() {
        out.zeros.push(grid[n]);
    }
    Ok(out)
}

fn bisect<T: Real, F: Fn(T) -> Result<T>>(f: &F, mut a: T, mut b: T, mut fa: T, tol: T) -> Result<T> {
    let mut best = (a, fa.abs());
    for _ in 0..200 {
        let m = c::<T>(0.5) * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm.abs() < best.1 {
            best = (m, fm.abs());
        }
        if fm == T::zero() {
            return Ok(m);
        }
        if fa * fm < T::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if best.1 <= tol && (b - a) <= T::epsilon() * c::<T>(16.0) * a.abs().max(T::one()) {
            break;
        }
    }
    if best.1 > tol {
        return Err(Error::NoConvergence {
            what: "zero bisection",
            terms: 200,
        });
    }
    Ok(best.0)
}
