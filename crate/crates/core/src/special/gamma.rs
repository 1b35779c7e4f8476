use crate::error::{Error, Result};
use crate::scalar::{c, to_f64, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(pi x) with exact zeros at the integers.
pub fn sinpi<T: Real>(x: T) -> T {
    let two = c::<T>(2.0);
    let half = c::<T>(0.5);
    let r = x - two * (x / two).round();
    let pi = T::PI();
    if r > half {
        (pi * (T::one() - r)).sin()
    } else if r < -half {
        -(pi * (T::one() + r)).sin()
    } else {
        (pi * r).sin()
    }
}

/// cos(pi x) with exact zeros at the half-integers.
pub fn cospi<T: Real>(x: T) -> T {
    let two = c::<T>(2.0);
    let r = (x - two * (x / two).round()).abs();
    sinpi(c::<T>(0.5) - r)
}

fn lanczos_sum<T: Real>(z: T) -> T {
    let mut a: T = c(LANCZOS[0]);
    for (i, &k) in LANCZOS.iter().enumerate().skip(1) {
        a += c::<T>(k) / (z + T::from_usize(i).unwrap());
    }
    a
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

fn small_factorial<T: Real>(x: T) -> Option<T> {
    if x >= T::one() && x <= c(30.0) && x == x.floor() {
        let n = x.to_usize()?;
        let mut f = 1.0f64;
        for k in 2..n {
            f *= k as f64;
        }
        Some(c(f))
    } else {
        None
    }
}

/// Gamma function for real arguments.
///
/// Lanczos approximation for `x >= 1/2`, reflection below. Integer
/// arguments up to 30 are exact.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(to_f64(x)));
    }
    if let Some(f) = small_factorial(x) {
        return Ok(f);
    }
    if x < c(0.5) {
        let g = gamma(T::one() - x)?;
        return Ok(T::PI() / (sinpi(x) * g));
    }
    let z = x - T::one();
    let t = z + c(LANCZOS_G + 0.5);
    let p = t.powf((z + c(0.5)) * c(0.5));
    let s = c::<T>((2.0 * std::f64::consts::PI).sqrt()) * lanczos_sum(z);
    Ok(p * (p * (-t).exp()) * s)
}

/// Reciprocal gamma function, entire: zero at the poles of gamma.
pub fn rgamma<T: Real>(x: T) -> T {
    if is_nonpositive_integer(x) {
        return T::zero();
    }
    if x > c(170.0) {
        return (-ln_gamma(x)).exp();
    }
    if x < c(-170.0) {
        // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
        let lg = ln_gamma(T::one() - x);
        return sinpi(x) / T::PI() * lg.exp();
    }
    match gamma(x) {
        Ok(g) => g.recip(),
        Err(_) => T::zero(),
    }
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero());
    if x < c(0.5) {
        return ln_gamma(x + T::one()) - x.ln();
    }
    let z = x - T::one();
    let t = z + c(LANCZOS_G + 0.5);
    c::<T>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (z + c(0.5)) * t.ln() - t + lanczos_sum(z).ln()
}
