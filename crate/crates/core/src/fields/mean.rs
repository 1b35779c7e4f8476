use crate::error::{Error, Result};
use crate::quad::{try_adaptive, Tolerance};
use crate::scalar::{c, cu, Real};
use crate::special::{gamma, mainardi_series, ml_eval, EvalPolicy, MlOrder};
use crate::symbol::{DiffusionParams, KernelSpec};

use super::{Estimate, QuadSpec};

/// Gaussian heat kernel `(4 pi lambda t)^-1/2 exp(-x^2 / (4 lambda t))`.
pub fn heat_kernel<T: Real>(t: T, x: T, lambda: T) -> Result<T> {
    if !(t > T::zero()) || !(lambda > T::zero()) {
        return Err(Error::Domain(format!(
            "heat kernel needs t > 0 and lambda > 0, got t = {t}, lambda = {lambda}"
        )));
    }
    let d = c::<T>(4.0) * lambda * t;
    Ok((-x * x / d).exp() / (T::PI() * d).sqrt())
}

/// `(4 pi lambda t^alpha)^-1/2 M_alpha(|x| / sqrt(lambda t^alpha))`, with the
/// Mainardi function summed from its power series.
pub fn mean_mainardi<T: Real>(t: T, x: T, alpha: T, lambda: T, policy: &EvalPolicy<T>) -> Result<T> {
    if !(t > T::zero()) || !(lambda > T::zero()) {
        return Err(Error::Domain(format!(
            "mean needs t > 0 and lambda > 0, got t = {t}, lambda = {lambda}"
        )));
    }
    let s = lambda * t.powf(alpha);
    let m = mainardi_series(alpha, x.abs() / s.sqrt(), policy)?;
    Ok(m / (c::<T>(4.0) * T::PI() * s).sqrt())
}

/// Closed form for `alpha = 1/2`:
/// `(4 pi lambda sqrt t)^-1/2 (1 + |x| / sqrt(4 lambda sqrt t)) exp(-x^2 / (4 lambda sqrt t))`.
pub fn mean_half_closed<T: Real>(t: T, x: T, lambda: T) -> Result<T> {
    if !(t > T::zero()) || !(lambda > T::zero()) {
        return Err(Error::Domain(format!(
            "mean needs t > 0 and lambda > 0, got t = {t}, lambda = {lambda}"
        )));
    }
    let d = c::<T>(4.0) * lambda * t.sqrt();
    let ax = x.abs();
    Ok((T::one() + ax / d.sqrt()) * (-ax * ax / d).exp() / (T::PI() * d).sqrt())
}

/// Algebraic expansion of `E_alpha(-y)`: `sum_j (-1)^(j+1) y^-j / Gamma(1 - alpha j)`.
struct AlgebraicTail<T> {
    coef: Vec<T>,
}

impl<T: Real> AlgebraicTail<T> {
    fn new(alpha: T, terms: usize) -> Self {
        let coef = (1..=terms)
            .map(|j| {
                let sign = if j % 2 == 1 { T::one() } else { -T::one() };
                sign * crate::special::rgamma(T::one() - alpha * cu(j))
            })
            .collect();
        Self { coef }
    }

    fn eval(&self, y: T) -> T {
        let inv = y.recip();
        let mut p = inv;
        let mut s = T::zero();
        for &cj in &self.coef {
            s += cj * p;
            p *= inv;
        }
        s
    }

    /// Coefficients `b_p` of `sum_p b_p k^-2p` for `y = t^alpha (lambda k^2 + mu)`.
    fn in_k(&self, ta: T, lambda: T, mu: T, terms: usize) -> Vec<T> {
        let ratio = mu / lambda;
        (1..=terms)
            .map(|p| {
                let mut b = T::zero();
                for j in 1..=p.min(self.coef.len()) {
                    let i = p - j;
                    // binom(-j, i) = (-1)^i C(j + i - 1, i)
                    let mut binom = T::one();
                    for r in 0..i {
                        binom = binom * cu::<T>(j + r) / cu::<T>(r + 1);
                    }
                    if i % 2 == 1 {
                        binom = -binom;
                    }
                    b += self.coef[j - 1] * (ta * lambda).powi(-(j as i32)) * binom * ratio.powi(i as i32);
                }
                b
            })
            .collect()
    }
}

const TAIL_TERMS: usize = 8;
const K_TERMS: usize = 24;

/// `Re int_K^inf e^(i k x) k^-q dk` for `|x| K >= 50`, by repeated integration
/// by parts: `-e^(iKx) K^-q / (ix) sum_m (q)_m / (i x K)^m`.
fn oscillatory_power_tail<T: Real>(x: T, k: T, q: T) -> T {
    let z = x * k;
    // accumulate sum_m (q)_m / (i z)^m as a complex number (re, im)
    let (mut re, mut im) = (T::one(), T::zero());
    let (mut tr, mut ti) = (T::one(), T::zero());
    for m in 0..60usize {
        let f = (q + cu(m)) / z;
        // multiply term by f / i = -i f
        let (nr, ni) = (ti * f, -tr * f);
        tr = nr;
        ti = ni;
        if tr.abs() + ti.abs() < T::epsilon() * c(1e-3) * (re.abs() + im.abs()) {
            break;
        }
        if f > T::one() {
            break;
        }
        re += tr;
        im += ti;
    }
    // -e^{i z} k^-q / (i x) * (re + i im) = i e^{iz} k^-q / x * (re + i im)
    let (s, co) = z.sin_cos();
    let pi = co * im + s * re;
    -pi * k.powf(-q) / x
}

/// Fourier inversion of the mean field in one dimension:
/// `(1/pi) int_0^inf cos(k x) E_alpha(-a(k) t^alpha) dk`.
///
/// The integral is split at a frequency beyond which `E_alpha` is replaced by
/// its algebraic expansion; the expansion is integrated numerically up to
/// `max(K, 50/|x|)` and in closed form beyond.
pub fn mean_fourier<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    x: T,
    quad: &QuadSpec<T>,
) -> Result<Estimate<T>> {
    params.validate()?;
    kernel.validate(params.dim)?;
    quad.validate()?;
    if params.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: params.dim,
        });
    }
    if params.lambda == T::zero() {
        return Err(Error::NonIntegrableSymbol(
            "lambda = 0: E_alpha(-a(k) t^alpha) tends to a nonzero constant".into(),
        ));
    }
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("mean needs t > 0, got {t}")));
    }
    let DiffusionParams { alpha, lambda, mu, .. } = *params;
    let policy = EvalPolicy::default();
    let order = MlOrder::classic(alpha)?;
    let ta = t.powf(alpha);
    let y_of = |k: T| params.symbol_radial(kernel, k) * ta;
    let f = |k: T| -> Result<T> { Ok((k * x).cos() * ml_eval(order, -y_of(k), &policy)?) };
    let scale = (lambda * ta).sqrt().recip();
    let tol = Tolerance::rel(quad.rel_tol)
        .with_abs(quad.rel_tol * c(1e-3) * scale)
        .with_max_intervals(quad.max_refinements);
    let width = T::PI() / x.abs().max(T::one());

    let panels = |lo: T, hi: T, w: T| -> Vec<T> {
        let n = ((hi - lo) / w)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .clamp(quad.panels, 200_000);
        (0..=n).map(|i| lo + (hi - lo) * cu(i) / cu(n)).collect()
    };

    if alpha == T::one() {
        let k_end = (c::<T>(745.0) / (lambda * t)).sqrt().max(quad.freq_cutoff.min(c(1e3)));
        let r = try_adaptive(f, &panels(T::zero(), k_end, width), &tol)?;
        return finish(r.value, r.abs_err, r.converged);
    }

    let tail = AlgebraicTail::new(alpha, TAIL_TERMS);
    let y_tail = tail_start(alpha, &tail, order, &policy, quad.rel_tol)?;
    let mut k_split = (y_tail / (lambda * ta)).sqrt().max(quad.freq_cutoff);
    if mu > T::zero() {
        k_split = k_split.max(c::<T>(2.0) * (mu / lambda).sqrt());
        if let KernelSpec::Gaussian { scale } = kernel {
            k_split = k_split.max(c::<T>(9.0) / *scale);
        }
    }
    let main = try_adaptive(f, &panels(T::zero(), k_split, width), &tol)?;
    let mut value = main.value;
    let mut err = main.abs_err;
    let mut ok = main.converged;

    let b = tail.in_k(ta, lambda, mu, K_TERMS);
    let far = x.abs() * k_split * c(1e-6) <= c(50.0);
    let k_far = if x != T::zero() && far {
        (c::<T>(50.0) / x.abs()).max(k_split)
    } else {
        k_split
    };
    if k_far > k_split {
        let g = |k: T| -> Result<T> { Ok((k * x).cos() * tail.eval(y_of(k))) };
        let r = try_adaptive(g, &panels(k_split, k_far, T::PI() / x.abs()), &tol)?;
        value += r.value;
        err += r.abs_err;
        ok &= r.converged;
    }
    let mut last = T::zero();
    for (p, &bp) in b.iter().enumerate() {
        let q = cu::<T>(2 * (p + 1));
        let piece = if x == T::zero() || !far {
            bp * k_far.powf(T::one() - q) / (q - T::one())
        } else {
            bp * oscillatory_power_tail(x, k_far, q)
        };
        value += piece;
        last = piece.abs();
    }
    err += last;
    if mu > T::zero() {
        if let KernelSpec::Uniform { half_width } = kernel {
            // neglected J_hat term: |d/dy E| ~ y^-2, |J_hat| <= 1/(r k)
            err += mu * ta / (*half_width * (lambda * ta).powi(2) * k_far.powi(4));
        }
    }
    if !far && x != T::zero() {
        err += b[0].abs() * x.abs();
    }
    finish(value, err, ok)
}

fn finish<T: Real>(integral: T, err: T, converged: bool) -> Result<Estimate<T>> {
    if !integral.is_finite() {
        return Err(Error::QuadratureFailure(
            "Fourier inversion produced a non-finite value".into(),
        ));
    }
    if !converged && err > c::<T>(1e-3) * integral.abs().max(c(1e-300)) {
        return Err(Error::QuadratureFailure(format!(
            "Fourier inversion did not converge (error estimate {err})"
        )));
    }
    Ok(Estimate {
        value: integral / T::PI(),
        error: err / T::PI(),
    })
}

/// Smallest `y` (from a doubling search) where the algebraic expansion
/// reproduces `E_alpha(-y)` to well below the requested tolerance.
fn tail_start<T: Real>(
    alpha: T,
    tail: &AlgebraicTail<T>,
    order: MlOrder<T>,
    policy: &EvalPolicy<T>,
    rel_tol: T,
) -> Result<T> {
    let mut y: T = c(50.0);
    if alpha > T::one() {
        // the exponential part exp(y^(1/alpha) cos(pi/alpha)) must be negligible
        let cinv = (T::PI() / alpha).cos().abs();
        y = y.max((c::<T>(37.0) / cinv).powf(alpha));
    }
    let want = rel_tol * c(1e-2);
    for _ in 0..40 {
        let e = ml_eval(order, -y, policy)?;
        let e2 = ml_eval(order, -y * c(2.0), policy)?;
        let ok = |v: T, yy: T| ((tail.eval(yy) - v) / v).abs() <= want;
        if ok(e, y) && ok(e2, y * c(2.0)) {
            return Ok(y);
        }
        y *= c(2.0);
    }
    Err(Error::QuadratureFailure(format!(
        "no usable algebraic tail for E_{alpha}"
    )))
}

/// Reference value for the leading tail coefficient: `t^-alpha / (lambda Gamma(1 - alpha))`.
#[allow(dead_code)]
pub(crate) fn leading_tail_coefficient<T: Real>(alpha: T, lambda: T, t: T) -> Result<T> {
    Ok(t.powf(-alpha) / (lambda * gamma(T::one() - alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, geometric};

    const G1: KernelSpec<f64> = KernelSpec::Gaussian { scale: 1.0 };

    fn p(alpha: f64, lambda: f64, mu: f64) -> DiffusionParams<f64> {
        DiffusionParams::new(alpha, lambda, mu, 1.0, 1).unwrap()
    }

    #[test]
    fn heat_kernel_examples() {
        let v = heat_kernel(1.0, 0.0, 1.0).unwrap();
        assert!((v - 0.282_094_791_773_878_14_f64).abs() < 1e-15);
        assert_eq!(
            heat_kernel(1.0, 2.0, 1.0).unwrap(),
            heat_kernel(1.0, -2.0, 1.0).unwrap()
        );
        let mass = adaptive(
            |x| heat_kernel(0.3, x, 2.0).unwrap(),
            &[-30.0, 0.0, 30.0],
            &Tolerance::rel(1e-13),
        );
        assert!((mass.value - 1.0_f64).abs() < 1e-12);
        assert!(heat_kernel(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_matches_heat_kernel() {
        let q = QuadSpec::default();
        for t in [0.5, 1.0, 2.0] {
            for x in [0.0, 0.5, -1.0, 2.0, 3.0] {
                let m = mean_fourier(&p(1.0, 1.0, 0.0), &G1, t, x, &q).unwrap();
                let h = heat_kernel(t, x, 1.0).unwrap();
                assert!(((m.value - h) / h).abs() < 1e-8, "t={t} x={x}: {} vs {h}", m.value);
            }
        }
    }

    #[test]
    fn fourier_against_direct_truncated_integral() {
        // independent route: plain adaptive integration far into the k^-2 tail
        let q = QuadSpec::default();
        let par = p(0.6, 1.0, 0.0);
        let pol = EvalPolicy::<f64>::default();
        let o = MlOrder::classic(0.6).unwrap();
        for x in [0.0, 0.7] {
            let f = |k: f64| (k * x).cos() * ml_eval(o, -k * k, &pol).unwrap();
            let kmax = 2e4;
            let mut br = vec![0.0];
            br.extend(geometric(1.0, kmax, 400));
            let direct = adaptive(f, &br, &Tolerance::rel(1e-11).with_max_intervals(100_000)).value;
            // remaining tail int_K^inf cos(kx) k^-2 / Gamma(0.4) dk ~ 1/(K Gamma(0.4)) at x = 0
            let rest = if x == 0.0 {
                1.0 / (kmax * gamma(0.4).unwrap())
            } else {
                0.0
            };
            let want = (direct + rest) / std::f64::consts::PI;
            let got = mean_fourier(&par, &G1, 1.0, x, &q).unwrap().value;
            assert!(((got - want) / want).abs() < 2e-6, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn fourier_self_converges_in_cutoff() {
        let par = p(0.5, 1.0, 0.0);
        let q = QuadSpec::default();
        let a = mean_fourier(&par, &G1, 1.0, 0.0, &q).unwrap().value;
        let q2 = QuadSpec {
            freq_cutoff: 2.0 * q.freq_cutoff,
            ..q
        };
        let b = mean_fourier(&par, &G1, 1.0, 0.0, &q2).unwrap().value;
        assert!(a > 0.0 && ((a - b) / a).abs() < 1e-6);
    }

    #[test]
    fn fourier_with_nonlocal_part() {
        // compare with plain adaptive integration of the full symbol
        let q = QuadSpec::default();
        let par = p(0.8, 1.0, 2.0);
        let got = mean_fourier(&par, &G1, 1.0, 0.4, &q).unwrap();
        let pol = EvalPolicy::<f64>::default();
        let o = MlOrder::classic(0.8).unwrap();
        let f = |k: f64| {
            let a = par.symbol_radial(&G1, k);
            (0.4 * k).cos() * ml_eval(o, -a, &pol).unwrap()
        };
        let mut br = vec![0.0];
        br.extend(geometric(0.5, 3e4, 600));
        let direct = adaptive(f, &br, &Tolerance::rel(1e-11).with_max_intervals(200_000)).value;
        let want = direct / std::f64::consts::PI;
        assert!(((got.value - want) / want).abs() < 1e-5, "{} vs {want}", got.value);
        let u = KernelSpec::Uniform { half_width: 0.5 };
        assert!(mean_fourier(&par, &u, 1.0, 0.4, &q).unwrap().value.is_finite());
    }

    #[test]
    fn fourier_errors() {
        let q = QuadSpec::default();
        assert!(matches!(
            mean_fourier(&p(0.8, 0.0, 1.0), &G1, 1.0, 0.0, &q),
            Err(Error::NonIntegrableSymbol(_))
        ));
        let two = DiffusionParams::new(1.0, 1.0, 0.0, 1.0, 2).unwrap();
        assert!(mean_fourier(&two, &G1, 1.0, 0.0, &q).is_err());
    }

    #[test]
    fn concentrates_as_t_shrinks() {
        let q = QuadSpec::default();
        let mut prev = 0.0;
        for t in [1.0, 0.1, 0.01, 0.001] {
            let v = mean_fourier(&p(0.6, 1.0, 0.0), &G1, t, 0.0, &q).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn superdiffusive_mean() {
        let q = QuadSpec::default();
        let v = mean_fourier(&p(1.5, 1.0, 0.0), &G1, 1.0, 0.3, &q).unwrap().value;
        let w = mean_fourier(&p(1.5, 1.0, 0.0), &G1, 1.0, -0.3, &q).unwrap().value;
        assert!(v.is_finite() && (v - w).abs() < 1e-14);
    }

    #[test]
    fn power_tail_closed_form() {
        // int_K^inf cos(kx) k^-2 dk against adaptive quadrature on many periods
        let (x, k) = (1.3, 60.0);
        let exact = oscillatory_power_tail(x, k, 2.0);
        let period = 2.0 * std::f64::consts::PI / x;
        let br: Vec<f64> = (0..=4000).map(|i| k + i as f64 * period).collect();
        let num = adaptive(|s: f64| (s * x).cos() / (s * s), &br, &Tolerance::rel(1e-13)).value;
        let end = *br.last().unwrap();
        let rest = oscillatory_power_tail(x, end, 2.0);
        assert!((exact - (num + rest)).abs() < 1e-12, "{exact} vs {}", num + rest);
    }

    #[test]
    fn closed_forms() {
        let v = mean_half_closed(1.0, 0.0, 1.0).unwrap();
        assert!((v - 0.282_094_791_773_878_14_f64).abs() < 1e-15);
        assert_eq!(
            mean_half_closed(2.0, 1.3, 1.0).unwrap(),
            mean_half_closed(2.0, -1.3, 1.0).unwrap()
        );
        let pol = EvalPolicy::<f64>::default();
        let m = mean_mainardi(1.0, 0.0, 0.5, 1.0, &pol).unwrap();
        assert!((m - 0.159_154_943_091_895_35_f64).abs() < 1e-14);
        assert_eq!(
            mean_mainardi(1.0, 0.8, 0.6, 1.0, &pol).unwrap(),
            mean_mainardi(1.0, -0.8, 0.6, 1.0, &pol).unwrap()
        );
    }
}
