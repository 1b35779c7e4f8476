//! Cumulative integrals tabulated on a logarithmic grid.

use rayon::prelude::*;

use crate::error::Result;
use crate::quad::GaussLegendre;
use crate::scalar::{c, cu, Real};
use crate::special::{gamma, ml_eval, rgamma, EvalPolicy, MlOrder};

/// `y -> int_{y_min}^y f`, for `y_min <= y <= y_max`.
///
/// Stored at nodes equally spaced in `ln y`, interpolated by cubic Hermite
/// polynomials in `ln y` using the exact derivative `y f(y)`.
pub(crate) struct LogTable<T> {
    x0: T,
    h: T,
    values: Vec<T>,
    slopes: Vec<T>,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> LogTable<T> {
    pub fn build<F>(f: F, y_min: T, y_max: T, ratio: T) -> Result<Self>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        let x0 = y_min.ln();
        let span = y_max.ln() - x0;
        let n = (span / ratio.ln()).ceil().to_usize().unwrap().max(1);
        let h = span / cu(n);
        let g = |x: T| -> Result<T> {
            let y = x.exp();
            Ok(y * f(y)?)
        };
        let rule = GaussLegendre::<T>::new(10);
        let grid: Vec<T> = (0..=n).map(|i| x0 + h * cu(i)).collect();
        let slopes: Vec<T> = grid.par_iter().map(|&x| g(x)).collect::<Result<_>>()?;
        let pieces: Vec<T> = grid
            .par_windows(2)
            .map(|w| rule.try_integrate(g, w[0], w[1]))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        values.push(acc);
        for p in pieces {
            acc += p;
            values.push(acc);
        }
        Ok(Self {
            x0,
            h,
            values,
            slopes,
            y_min,
            y_max,
        })
    }

    pub fn total(&self) -> T {
        *self.values.last().unwrap()
    }

    /// Interpolated value; `y` is clamped to the table range.
    pub fn eval(&self, y: T) -> T {
        if y <= self.y_min {
            return T::zero();
        }
        if y >= self.y_max {
            return self.total();
        }
        let x = y.ln();
        let n = self.values.len() - 1;
        let i = ((x - self.x0) / self.h).floor().to_usize().unwrap_or(0).min(n - 1);
        let u = (x - self.x0 - self.h * cu(i)) / self.h;
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let two = c::<T>(2.0);
        let three = c::<T>(3.0);
        let u2 = u * u;
        let u3 = u2 * u;
        (two * u3 - three * u2 + T::one()) * f0
            + (u3 - two * u2 + u) * d0
            + (three * u2 - two * u3) * f1
            + (u3 - u2) * d1
    }
}

/// `F(y) = int sigma^(2 alpha - 2) E_{alpha,alpha}(-sigma^alpha)^2 d sigma`,
/// measured from `y_min`. Below `y_min` and above `y_max` the two-term
/// small-argument expansion and the algebraic tail take over.
pub(crate) struct TimeTable<T> {
    alpha: T,
    table: LogTable<T>,
    g0: T,
    g1: T,
    tail: T,
}

/// `int_a^b s^p ds`.
pub(crate) fn power_integral<T: Real>(p: T, a: T, b: T) -> T {
    let q = p + T::one();
    if q.abs() < c(1e-12) {
        (b / a).ln()
    } else {
        (b.powf(q) - a.powf(q)) / q
    }
}

impl<T: Real> TimeTable<T> {
    pub fn new(alpha: T, policy: &EvalPolicy<T>) -> Result<Self> {
        let order = MlOrder::twin(alpha)?;
        let y_max = if alpha >= T::one() {
            c::<T>(1e4).max(c::<T>(40.0) / (T::PI() / alpha).cos().abs())
        } else {
            c(1e4)
        };
        let two = c::<T>(2.0);
        let f = |s: T| -> Result<T> {
            let e = ml_eval(order, -s.powf(alpha), policy)?;
            Ok(s.powf(two * alpha - two) * e * e)
        };
        let table = LogTable::build(f, c(1e-6), y_max, c(1.02))?;
        // E_{alpha,alpha}(-x) ~ -x^-2 / Gamma(-alpha)
        let c2 = if alpha == T::one() {
            T::zero()
        } else {
            -T::one() / gamma(-alpha)?
        };
        Ok(Self {
            alpha,
            table,
            g0: rgamma(alpha),
            g1: rgamma(two * alpha),
            tail: c2 * c2,
        })
    }

    fn small(&self, a: T, b: T) -> T {
        let two = c::<T>(2.0);
        let al = self.alpha;
        self.g0 * self.g0 * power_integral(two * al - two, a, b)
            - two * self.g0 * self.g1 * power_integral(c::<T>(3.0) * al - two, a, b)
    }

    fn eval(&self, y: T) -> T {
        let (y_min, y_max) = (self.table.y_min, self.table.y_max);
        if y <= y_min {
            return -self.small(y, y_min);
        }
        if y >= y_max {
            let q = c::<T>(2.0) * self.alpha + T::one();
            return self.table.total() + self.tail * (y_max.powf(-q) - y.powf(-q)) / q;
        }
        self.table.eval(y)
    }

    /// `int_eps^t s^(2 alpha - 2) E_{alpha,alpha}(-a s^alpha)^2 ds`.
    pub fn time_integral(&self, a: T, eps: T, t: T) -> T {
        let al = self.alpha;
        if a == T::zero() {
            return self.g0 * self.g0 * power_integral(c::<T>(2.0) * al - c(2.0), eps, t);
        }
        let scale = a.powf(al.recip());
        let hi = t * scale;
        if hi <= self.table.y_min {
            let two = c::<T>(2.0);
            return self.g0 * self.g0 * power_integral(two * al - two, eps, t)
                - two * self.g0 * self.g1 * a * power_integral(c::<T>(3.0) * al - two, eps, t);
        }
        let lo = eps * scale;
        a.powf((T::one() - c::<T>(2.0) * al) / al) * (self.eval(hi) - self.eval(lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_power_integral() {
        let t = LogTable::build(|y: f64| Ok(y.powf(-0.3) / (1.0 + y * y)), 1e-4, 1e3, 1.05).unwrap();
        for y in [1e-3, 0.5, 1.0, 7.7, 400.0] {
            let exact = crate::quad::adaptive(
                |s: f64| s.powf(-0.3) / (1.0 + s * s),
                &crate::quad::geometric(1e-4, y, 12),
                &crate::quad::Tolerance::rel(1e-13),
            )
            .value;
            assert!(((t.eval(y) - exact) / exact).abs() < 1e-8, "{y}");
        }
        assert_eq!(t.eval(1e-5), 0.0);
    }
}
