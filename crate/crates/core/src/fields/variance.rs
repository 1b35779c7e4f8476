use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{geometric, try_adaptive, Tolerance};
use crate::scalar::{c, cu, Real};
use crate::special::{erfc, ml_eval, rgamma, EvalPolicy, MlOrder};
use crate::tables::LogTable;

use super::QuadSpec;

fn check_positive<T: Real>(what: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {v}")))
    }
}

/// `sigma^2 int_0^t int_R (4 pi lambda s)^-1 exp(-(x-y)^2 / (2 lambda s)) dy ds`
/// by nested adaptive quadrature.
pub fn var_classical_quadrature<T: Real>(t: T, x: T, lambda: T, sigma: T, quad: &QuadSpec<T>) -> Result<T> {
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    quad.validate()?;
    let tol = Tolerance::rel(quad.rel_tol * c(1e-2)).with_max_intervals(quad.max_refinements);
    let four_pi_lambda = c::<T>(4.0) * T::PI() * lambda;
    // s = u^2 removes the s^-1/2 singularity of the inner integral
    let outer = |u: T| -> Result<T> {
        if u == T::zero() {
            return Ok((c::<T>(2.0) * T::PI() * lambda).sqrt() * c(2.0) / four_pi_lambda);
        }
        let s = u * u;
        let half = (c::<T>(1490.0) * lambda * s).sqrt();
        let g = |y: T| -> Result<T> {
            let d = x - y;
            Ok((-d * d / (c::<T>(2.0) * lambda * s)).exp())
        };
        let inner = try_adaptive(g, &[x - half, x, x + half], &tol)?;
        Ok(inner.value * c(2.0) * u / (four_pi_lambda * s))
    };
    let r = try_adaptive(outer, &[T::zero(), t.sqrt()], &tol)?;
    if !r.converged {
        return Err(Error::QuadratureFailure("classical variance integral".into()));
    }
    Ok(sigma * sigma * r.value)
}

/// `sigma^2 / (4 lambda sqrt(pi t)) erfc(|x| / (4 sqrt(lambda t)))`.
pub fn var_classical_closed<T: Real>(t: T, x: T, lambda: T, sigma: T) -> Result<T> {
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    let arg = x.abs() / (c::<T>(4.0) * (lambda * t).sqrt());
    Ok(sigma * sigma / (c::<T>(4.0) * lambda * (T::PI() * t).sqrt()) * erfc(arg))
}

/// `sigma (4 pi lambda s^alpha)^-1/2 E_{alpha,alpha}(-(x - x1)^2 / (4 lambda s^alpha))`, `s = t - t1`.
#[allow(clippy::too_many_arguments)]
pub fn fluct_kernel_frac<T: Real>(
    t: T,
    t1: T,
    x: T,
    x1: T,
    alpha: T,
    lambda: T,
    sigma: T,
    policy: &EvalPolicy<T>,
) -> Result<T> {
    if !(t > t1) || t1 < T::zero() {
        return Err(Error::Domain(format!("need t > t1 >= 0, got t = {t}, t1 = {t1}")));
    }
    check_positive("lambda", lambda)?;
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let d = c::<T>(4.0) * lambda * (t - t1).powf(alpha);
    let u = (x - x1) * (x - x1) / d;
    let e = ml_eval(MlOrder::new(alpha, alpha)?, -u, policy)?;
    Ok(sigma * e / (T::PI() * d).sqrt())
}

/// `Phi(U) = int_0^U E_{alpha,alpha}(-u^2)^2 du`.
struct SquaredKernelIntegral<T> {
    table: LogTable<T>,
    g0: T,
    g1: T,
    c2: T,
    below: T,
}

impl<T: Real> SquaredKernelIntegral<T> {
    const U_MIN: f64 = 1e-4;
    const U_MAX: f64 = 1e3;

    fn new(alpha: T) -> Result<Self> {
        let policy = EvalPolicy::default();
        let order = MlOrder::new(alpha, alpha)?;
        let table = LogTable::build(
            |u: T| {
                let e = ml_eval(order, -u * u, &policy)?;
                Ok(e * e)
            },
            c(Self::U_MIN),
            c(Self::U_MAX),
            c(1.02),
        )?;
        let g0 = rgamma(alpha);
        let g1 = rgamma(alpha + alpha);
        let c2 = -rgamma(-alpha);
        let mut s = Self {
            table,
            g0,
            g1,
            c2,
            below: T::zero(),
        };
        s.below = s.small(c(Self::U_MIN));
        Ok(s)
    }

    fn small(&self, u: T) -> T {
        self.g0 * self.g0 * u - c::<T>(2.0) * self.g0 * self.g1 * u * u * u / c(3.0)
    }

    fn eval(&self, u: T) -> T {
        if u <= c(Self::U_MIN) {
            return self.small(u);
        }
        let mut v = self.below + self.table.eval(u);
        if u > c(Self::U_MAX) {
            let tail = |w: T| self.c2 * self.c2 * w.powi(-7) / c(7.0);
            v += tail(c(Self::U_MAX)) - tail(u);
        }
        v
    }
}

/// `sigma^2 / (4 pi lambda) int_0^t int_0^x s^-alpha E_{alpha,alpha}(-(x-y)^2 / (4 lambda s^alpha))^2 dy ds`.
///
/// The spatial integral is tabulated once; the time integral is taken in
/// `v = (s/t)^(1 - alpha/2)`, which absorbs the `s^-alpha/2` singularity.
/// The integral depends on `x` only through `|x|`.
pub fn var_frac_quadrature<T: Real>(t: T, x: T, alpha: T, lambda: T, sigma: T, quad: &QuadSpec<T>) -> Result<T> {
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    quad.validate()?;
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let phi = SquaredKernelIntegral::new(alpha)?;
    let ax = x.abs();
    let q = T::one() - alpha / c(2.0);
    let two_sqrt_l = c::<T>(2.0) * lambda.sqrt();
    let f = |v: T| -> Result<T> {
        if v == T::zero() {
            return Ok(phi.eval(T::infinity()));
        }
        let s = t * v.powf(q.recip());
        Ok(phi.eval(ax / (two_sqrt_l * s.powf(alpha / c(2.0)))))
    };
    let mut breaks = vec![T::zero()];
    breaks.extend(geometric(c(1e-8), T::one(), 16));
    let tol = Tolerance::rel(quad.rel_tol).with_max_intervals(quad.max_refinements);
    let r = try_adaptive(f, &breaks, &tol)?;
    if !r.converged {
        return Err(Error::QuadratureFailure("fractional variance integral".into()));
    }
    Ok(sigma * sigma / (c::<T>(4.0) * T::PI() * lambda) * two_sqrt_l * t.powf(q) / q * r.value)
}

/// `beta_m = sum_{k=0}^m 1 / (Gamma(m - k + 1) Gamma(alpha (k + 1)))`.
pub fn beta_coeff<T: Real>(m: usize, alpha: T) -> T {
    (0..=m)
        .map(|k| rgamma(cu::<T>(m - k + 1)) * rgamma(alpha * cu(k + 1)))
        .fold(T::zero(), |a, b| a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct VarianceSeriesSpec<T> {
    pub max_terms: usize,
    /// Distance from `1/(m+1)` treated as resonant.
    pub resonance_guard: T,
}

impl<T: Real> Default for VarianceSeriesSpec<T> {
    fn default() -> Self {
        Self {
            max_terms: 30,
            resonance_guard: c(1e-9),
        }
    }
}

impl<T: Real> VarianceSeriesSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 5 {
            return Err(Error::InvalidSpec(format!(
                "max_terms must be >= 5, got {}",
                self.max_terms
            )));
        }
        if !(self.resonance_guard > T::zero()) {
            return Err(Error::InvalidSpec("resonance_guard must be positive".into()));
        }
        Ok(())
    }
}

/// Every `m <= max_m` with `|alpha - 1/(m+1)| <= guard`.
pub fn resonance_set<T: Real>(alpha: T, max_m: usize, guard: T) -> Vec<usize> {
    (0..=max_m)
        .filter(|&m| (alpha - cu::<T>(m + 1).recip()).abs() <= guard)
        .collect()
}

/// Truncated series with the magnitude of its last term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue<T> {
    pub value: T,
    pub last_term: T,
}

/// `sigma^2/(4 pi lambda) sum_{m<M} (-1)^m beta_m |x|^(2m+1) t^(1-(m+1)alpha) / (4^m (2m+1) (1-(m+1)alpha))`.
pub fn var_series<T: Real>(
    t: T,
    x: T,
    alpha: T,
    lambda: T,
    sigma: T,
    spec: &VarianceSeriesSpec<T>,
) -> Result<SeriesValue<T>> {
    check_positive("t", t)?;
    check_positive("lambda", lambda)?;
    spec.validate()?;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some(&m) = resonance_set(alpha, spec.max_terms - 1, spec.resonance_guard).first() {
        return Err(Error::Resonance { m });
    }
    let ax = x.abs();
    let pref = sigma * sigma / (c::<T>(4.0) * T::PI() * lambda);
    let mut sum = T::zero();
    let mut last = T::zero();
    for m in 0..spec.max_terms {
        let mm = cu::<T>(m);
        let e = T::one() - (mm + T::one()) * alpha;
        let sign = if m % 2 == 0 { T::one() } else { -T::one() };
        let term = sign * beta_coeff(m, alpha) * ax.powi(2 * m as i32 + 1) * t.powf(e)
            / (c::<T>(4.0).powi(m as i32) * (c::<T>(2.0) * mm + T::one()) * e);
        sum += term;
        last = term.abs();
    }
    Ok(SeriesValue {
        value: pref * sum,
        last_term: pref * last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;
    use crate::special::gamma;

    fn q() -> QuadSpec<f64> {
        QuadSpec::default()
    }

    #[test]
    fn classical_quadrature_value_and_laws() {
        let v0 = var_classical_quadrature(1.0, 0.0, 1.0, 1.0, &q()).unwrap();
        let exact = (1.0 / (2.0 * std::f64::consts::PI)).sqrt();
        assert!((v0 - exact).abs() < 1e-9, "{v0}");
        let v3 = var_classical_quadrature(1.0, 3.0, 1.0, 1.0, &q()).unwrap();
        assert!((v0 - v3).abs() < 1e-8);
        let v4 = var_classical_quadrature(4.0, 0.0, 1.0, 1.0, &q()).unwrap();
        assert!((v4 / v0 - 2.0).abs() < 1e-6);
        let s2 = var_classical_quadrature(1.0, 0.0, 1.0, 2.0, &q()).unwrap();
        assert!((s2 / v0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn classical_closed_form() {
        let v = var_classical_closed(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((v - 0.141_047_395_886_939_07_f64).abs() < 1e-15);
        let mut prev = v;
        for x in [0.5, 1.0, 2.0, 5.0] {
            let w = var_classical_closed(1.0, x, 1.0, 1.0).unwrap();
            assert!(w < prev);
            prev = w;
        }
        assert!(var_classical_closed(1.0, 1e3, 1.0, 1.0).unwrap() < 1e-300);
        assert!(var_classical_closed(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fluctuation_kernel() {
        let pol = EvalPolicy::<f64>::default();
        let v = fluct_kernel_frac(1.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, &pol).unwrap();
        assert!((v - 0.159_154_943_091_895_35_f64).abs() < 1e-14);
        let a = fluct_kernel_frac(2.0, 0.5, 1.2, 0.2, 0.7, 1.0, 1.0, &pol).unwrap();
        let b = fluct_kernel_frac(2.0, 0.5, -0.8, 0.2, 0.7, 1.0, 1.0, &pol).unwrap();
        assert!((a - b).abs() < 1e-15);
        for (s, d) in [(0.5, 0.3), (2.0, 1.7)] {
            let k = fluct_kernel_frac(1.0 + s, 1.0, d, 0.0, 1.0, 1.3, 2.0, &pol).unwrap();
            let h = 2.0 * (-d * d / (4.0 * 1.3 * s)).exp() / (4.0 * std::f64::consts::PI * 1.3 * s).sqrt();
            assert!(((k - h) / h).abs() < 1e-13);
        }
        assert!(fluct_kernel_frac(1.0, 1.0, 0.0, 0.0, 0.5, 1.0, 1.0, &pol).is_err());
    }

    #[test]
    fn squared_kernel_table() {
        let pol = EvalPolicy::<f64>::default();
        let o = MlOrder::new(0.6, 0.6).unwrap();
        let phi = SquaredKernelIntegral::new(0.6).unwrap();
        for u in [1e-5, 0.3, 2.0, 40.0, 5e3] {
            let f = |s: f64| ml_eval(o, -s * s, &pol).unwrap().powi(2);
            let mut br = vec![0.0];
            br.extend(geometric(1e-3, u, 40));
            let want = adaptive(f, &br, &Tolerance::rel(1e-12)).value;
            assert!(
                ((phi.eval(u) - want) / want).abs() < 1e-7,
                "u={u}: {} vs {want}",
                phi.eval(u)
            );
        }
    }

    #[test]
    fn fractional_variance_against_direct_double_integral() {
        // oracle: integrate in (s, y) directly with s = w^2 to tame s^-alpha
        let (t, x, alpha) = (1.0, 1.0, 0.6);
        let got = var_frac_quadrature(t, x, alpha, 1.0, 1.0, &q()).unwrap();
        let pol = EvalPolicy::<f64>::default();
        let o = MlOrder::new(alpha, alpha).unwrap();
        let outer = |w: f64| {
            if w == 0.0 {
                return 0.0;
            }
            let s = w * w;
            let inner = adaptive(
                |y: f64| {
                    let u = (x - y).powi(2) / (4.0 * s.powf(alpha));
                    ml_eval(o, -u, &pol).unwrap().powi(2)
                },
                &[0.0, x - 1e-3, x],
                &Tolerance::rel(1e-10),
            )
            .value;
            2.0 * w * s.powf(-alpha) * inner
        };
        let mut br = vec![0.0];
        br.extend(geometric(1e-6, t.sqrt(), 20));
        let want = adaptive(outer, &br, &Tolerance::rel(1e-9)).value / (4.0 * std::f64::consts::PI);
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn fractional_variance_laws() {
        let v = |t: f64, s: f64| var_frac_quadrature(t, 1.0, 0.6, 1.0, s, &q()).unwrap();
        let (a, b, d) = (v(0.5, 1.0), v(1.0, 1.0), v(2.0, 1.0));
        assert!(0.0 < a && a < b && b < d);
        assert!((v(1.0, 2.0) / b - 4.0).abs() < 1e-12);
        let tight = QuadSpec { rel_tol: 1e-10, ..q() };
        let r = var_frac_quadrature(1.0, 1.0, 0.6, 1.0, 1.0, &tight).unwrap();
        assert!(((r - b) / b).abs() < 1e-6);
        assert_eq!(var_frac_quadrature(1.0, 0.0, 0.6, 1.0, 1.0, &q()).unwrap(), 0.0);
        assert_eq!(
            v(1.0, 1.0),
            var_frac_quadrature(1.0, -1.0, 0.6, 1.0, 1.0, &q()).unwrap()
        );
    }

    #[test]
    fn beta_coefficients() {
        let g = |x: f64| 1.0 / gamma(x).unwrap();
        assert!((beta_coeff(0, 0.6) - g(0.6)).abs() < 1e-15);
        assert!((beta_coeff(0, 0.6) - 0.671_504_972_442_073_3_f64).abs() < 1e-15);
        let b1 = g(2.0) * g(0.6) + g(1.0) * g(1.2);
        assert!((beta_coeff(1, 0.6) - b1).abs() < 1e-15);
        assert!((b1 - 1.760_629_393_500_409_6).abs() < 1e-14);
        for m in 0..40 {
            assert!(beta_coeff(m, 0.6) > 0.0);
        }
    }

    #[test]
    fn resonances() {
        assert_eq!(resonance_set(0.5, 30, 1e-9), vec![1]);
        assert_eq!(resonance_set(0.25, 30, 1e-9), vec![3]);
        assert!(resonance_set(0.6, 30, 1e-9).is_empty());
        let spec = VarianceSeriesSpec::<f64>::default();
        assert_eq!(
            var_series(1.0, 1.0, 0.5, 1.0, 1.0, &spec),
            Err(Error::Resonance { m: 1 })
        );
    }

    #[test]
    fn series_values() {
        let spec = VarianceSeriesSpec::<f64>::default();
        let s = var_series(1.0, 1.0, 0.6, 1.0, 1.0, &spec).unwrap();
        assert!(s.value.is_finite() && s.last_term < 1e-10 * s.value.abs());
        assert_eq!(var_series(1.0, 0.0, 0.6, 1.0, 1.0, &spec).unwrap().value, 0.0);
        // first two terms by hand
        let two = VarianceSeriesSpec { max_terms: 5, ..spec };
        let s5 = var_series(2.0, 0.1, 0.3, 1.0, 1.0, &two).unwrap();
        let mut want = 0.0;
        for m in 0..5 {
            let e = 1.0 - (m as f64 + 1.0) * 0.3;
            want += (-1f64).powi(m) * beta_coeff(m as usize, 0.3) * 0.1f64.powi(2 * m + 1) * 2f64.powf(e)
                / (4f64.powi(m) * (2.0 * m as f64 + 1.0) * e);
        }
        want /= 4.0 * std::f64::consts::PI;
        assert!(((s5.value - want) / want).abs() < 1e-14);
        assert!(var_series(1.0, 1.0, 0.6, 1.0, 1.0, &VarianceSeriesSpec { max_terms: 3, ..spec }).is_err());
    }
}
