//! Fourier-space description of the spatial generator.
//!
//! Transforms follow `f_hat(xi) = int exp(-i x.xi) f(x) dx`, so the inverse
//! carries a factor `(2 pi)^-N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use crate::special::{ml_eval, rgamma, EvalPolicy, MlOrder};

/// Radial probability density `J` of the nonlocal operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec<T> {
    /// Centered Gaussian with standard deviation `scale` per coordinate.
    Gaussian { scale: T },
    /// Uniform density on `[-half_width, half_width]`; one dimension only.
    Uniform { half_width: T },
}

impl<T: Real> KernelSpec<T> {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { scale } => {
                if !(scale > T::zero() && scale.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "gaussian scale must be positive, got {scale}"
                    )));
                }
            }
            KernelSpec::Uniform { half_width } => {
                if !(half_width > T::zero() && half_width.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "uniform half_width must be positive, got {half_width}"
                    )));
                }
                if dim != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: dim });
                }
            }
        }
        Ok(())
    }

    /// `J_hat` as a function of `|xi|`.
    pub fn j_hat_radial(&self, k: T) -> T {
        match *self {
            KernelSpec::Gaussian { scale } => {
                let u = scale * k;
                (-c::<T>(0.5) * u * u).exp()
            }
            KernelSpec::Uniform { half_width } => {
                let u = half_width * k;
                if u.abs() < c(1e-4) {
                    let u2 = u * u;
                    T::one() - u2 / c(6.0) + u2 * u2 / c(120.0)
                } else {
                    u.sin() / u
                }
            }
        }
    }
}

/// Coefficients of the equation and the spatial dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionParams<T> {
    pub alpha: T,
    pub lambda: T,
    pub mu: T,
    pub sigma: T,
    pub dim: usize,
}

impl<T: Real> DiffusionParams<T> {
    pub fn new(alpha: T, lambda: T, mu: T, sigma: T, dim: usize) -> Result<Self> {
        let p = Self {
            alpha,
            lambda,
            mu,
            sigma,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha < c(2.0)) {
            return Err(Error::Domain(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.mu >= T::zero() && self.mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !self.sigma.is_finite() {
            return Err(Error::Domain("sigma must be finite".into()));
        }
        if self.dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// Symbol `a` at radial frequency `k = |xi|`.
    pub fn symbol_radial(&self, kernel: &KernelSpec<T>, k: T) -> T {
        self.lambda * k * k + self.mu * (T::one() - kernel.j_hat_radial(k))
    }
}

fn norm<T: Real>(xi: &[T]) -> T {
    xi.iter().fold(T::zero(), |acc, &v| acc.hypot(v))
}

/// `J_hat(xi)` for a frequency vector; the kernel fixes nothing about `N`
/// except that the uniform density is one-dimensional.
pub fn j_hat<T: Real>(kernel: &KernelSpec<T>, xi: &[T]) -> Result<T> {
    if xi.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if let KernelSpec::Uniform { .. } = kernel {
        if xi.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: xi.len(),
            });
        }
    }
    Ok(kernel.j_hat_radial(norm(xi)))
}

/// `a(xi) = lambda |xi|^2 + mu (1 - J_hat(xi))`.
pub fn symbol_a<T: Real>(params: &DiffusionParams<T>, kernel: &KernelSpec<T>, xi: &[T]) -> Result<T> {
    if xi.len() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            got: xi.len(),
        });
    }
    kernel.validate(params.dim)?;
    Ok(params.symbol_radial(kernel, norm(xi)))
}

/// Symbol on a list of radial frequencies.
pub fn symbol_batch<T: Real>(params: &DiffusionParams<T>, kernel: &KernelSpec<T>, ks: &[T]) -> Vec<T> {
    ks.iter().map(|&k| params.symbol_radial(kernel, k)).collect()
}

/// `t^(alpha-1) E_{alpha,alpha}(-t^alpha a)` for a given symbol value.
pub fn lambda_from_symbol<T: Real>(alpha: T, t: T, a: T, policy: &EvalPolicy<T>) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("time kernel needs t > 0, got {t}")));
    }
    if a == T::zero() {
        return Ok(t.powf(alpha - T::one()) * rgamma(alpha));
    }
    if alpha == T::one() {
        return Ok((-a * t).exp());
    }
    let e = ml_eval(MlOrder::twin(alpha)?, -t.powf(alpha) * a, policy)?;
    Ok(t.powf(alpha - T::one()) * e)
}

/// `E_alpha(-t^alpha a)` for a given symbol value; equal to 1 at `t = 0`.
pub fn mean_from_symbol<T: Real>(alpha: T, t: T, a: T, policy: &EvalPolicy<T>) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("mean needs t >= 0, got {t}")));
    }
    if t == T::zero() || a == T::zero() {
        return Ok(T::one());
    }
    ml_eval(MlOrder::classic(alpha)?, -t.powf(alpha) * a, policy)
}

/// Time kernel `Lambda(t, xi)` of the stochastic convolution.
pub fn lambda_kernel<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    xi: &[T],
    policy: &EvalPolicy<T>,
) -> Result<T> {
    let a = symbol_a(params, kernel, xi)?;
    lambda_from_symbol(params.alpha, t, a, policy)
}

/// Fourier transform of the mean field, `E_alpha(-a(xi) t^alpha)`.
pub fn mean_hat<T: Real>(
    params: &DiffusionParams<T>,
    kernel: &KernelSpec<T>,
    t: T,
    xi: &[T],
    policy: &EvalPolicy<T>,
) -> Result<T> {
    let a = symbol_a(params, kernel, xi)?;
    mean_from_symbol(params.alpha, t, a, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, Tolerance};
    use proptest::prelude::*;

    const G1: KernelSpec<f64> = KernelSpec::Gaussian { scale: 1.0 };

    fn params(alpha: f64, lambda: f64, mu: f64) -> DiffusionParams<f64> {
        DiffusionParams::new(alpha, lambda, mu, 1.0, 1).unwrap()
    }

    #[test]
    fn j_hat_examples() {
        assert_eq!(j_hat(&G1, &[0.0]).unwrap(), 1.0);
        let v = j_hat(&G1, &[2.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        let u = KernelSpec::Uniform {
            half_width: std::f64::consts::PI,
        };
        assert!(j_hat(&u, &[1.0]).unwrap().abs() < 1e-15);
        assert_eq!(j_hat(&u, &[0.0]).unwrap(), 1.0);
        assert!(matches!(j_hat(&u, &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gaussian_transform_by_quadrature() {
        // int cos(x xi) J(x) dx with J the unit normal density
        let xi = 2.0f64;
        let f = |x: f64| (x * xi).cos() * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let r = adaptive(f, &[-40.0, -10.0, 0.0, 10.0, 40.0], &Tolerance::rel(1e-13));
        assert!((r.value - j_hat(&G1, &[xi]).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(symbol_a(&params(1.0, 1.0, 0.0), &G1, &[2.0]).unwrap(), 4.0);
        assert_eq!(symbol_a(&params(1.0, 0.0, 3.0), &G1, &[0.0]).unwrap(), 0.0);
        let v = symbol_a(&params(1.0, 0.0, 3.0), &G1, &[10.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
        let two = DiffusionParams::new(1.0, 1.0, 0.0, 1.0, 2).unwrap();
        assert_eq!(symbol_a(&two, &G1, &[0.0, 2.0]).unwrap(), 4.0);
        assert!(symbol_a(&two, &G1, &[1.0]).is_err());
    }

    #[test]
    fn high_frequency_regimes() {
        let u = KernelSpec::Uniform { half_width: 0.5 };
        for kernel in [G1, u] {
            for mu in [0.0, 3.0, 10.0] {
                let a = symbol_a(&params(1.0, 1.0, mu), &kernel, &[1e3]).unwrap();
                let r = a / 1e6;
                assert!((0.99..=1.01).contains(&r));
            }
        }
        let a = symbol_a(&params(1.0, 0.0, 4.0), &G1, &[1e3]).unwrap();
        assert!((0.99 * 4.0..=4.0).contains(&a));
    }

    #[test]
    fn kernel_examples() {
        let pol = EvalPolicy::<f64>::default();
        let l = lambda_from_symbol(0.5, 1.0, 0.0, &pol).unwrap();
        assert!((l - 0.564_189_583_547_756_3).abs() < 1e-15);
        let big = lambda_from_symbol(0.5, 1.0, 1e4, &pol).unwrap();
        // E_{1/2,1/2}(-x) ~ x^-2 / (2 sqrt(pi))
        assert!(((big - 2.820_947_917_738_781e-9) / big).abs() < 1e-3);
        let p1 = params(1.0, 1.0, 0.5);
        for t in [0.1, 0.7, 2.0] {
            for k in [0.0, 0.3, 1.0, 4.0] {
                let a = symbol_a(&p1, &G1, &[k]).unwrap();
                let v = lambda_kernel(&p1, &G1, t, &[k], &pol).unwrap();
                assert!(((v - (-a * t).exp()) / (-a * t).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_hat_examples() {
        let pol = EvalPolicy::<f64>::default();
        let p = params(0.7, 1.0, 2.0);
        assert_eq!(mean_hat(&p, &G1, 0.0, &[5.0], &pol).unwrap(), 1.0);
        let m = mean_hat(&params(1.0, 1.0, 0.0), &G1, 2.0, &[1.0], &pol).unwrap();
        assert!((m - (-2.0f64).exp()).abs() < 1e-15);
        let h = mean_hat(&params(0.5, 1.0, 0.0), &G1, 1.0, &[100.0], &pol).unwrap();
        assert!(((h - 5.642e-5) / 5.642e-5).abs() < 1e-3);
    }

    #[test]
    fn serde_shape() {
        let k: KernelSpec<f64> = serde_json::from_str(r#"{"type":"gaussian","scale":2.0}"#).unwrap();
        assert_eq!(k, KernelSpec::Gaussian { scale: 2.0 });
        let u: KernelSpec<f64> = serde_json::from_str(r#"{"type":"uniform","half_width":0.5}"#).unwrap();
        assert_eq!(u, KernelSpec::Uniform { half_width: 0.5 });
        assert!(serde_json::from_str::<KernelSpec<f64>>(r#"{"type":"gaussian","width":2.0}"#).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(DiffusionParams::new(2.0, 1.0, 0.0, 1.0, 1).is_err());
        assert!(DiffusionParams::new(0.5, -1.0, 0.0, 1.0, 1).is_err());
        assert!(DiffusionParams::new(0.5, 1.0, 0.0, 1.0, 0).is_err());
        assert!(KernelSpec::Uniform { half_width: 1.0 }.validate(2).is_err());
    }

    proptest! {
        #[test]
        fn symbol_nonnegative(lambda in 0.0f64..10.0, mu in 0.0f64..10.0, k in -1e3f64..1e3, s in 0.01f64..5.0) {
            let p = params(0.8, lambda, mu);
            for kernel in [KernelSpec::Gaussian { scale: s }, KernelSpec::Uniform { half_width: s }] {
                prop_assert!(symbol_a(&p, &kernel, &[k]).unwrap() >= 0.0);
                prop_assert!(kernel.j_hat_radial(k).abs() <= 1.0);
            }
        }

        #[test]
        fn j_hat_is_radial(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let r = (x * x + y * y).sqrt();
            let a = j_hat(&G1, &[x, y]).unwrap();
            let b = j_hat(&G1, &[r]).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
        }
    }
}
