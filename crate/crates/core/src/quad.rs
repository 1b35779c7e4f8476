//! Adaptive Gauss-Kronrod quadrature and fixed Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::convert::Infallible;

use crate::scalar::{c, Real};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of a quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_err: T,
    pub evals: usize,
    pub converged: bool,
}

/// Stopping rule for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn rel(rel: T) -> Self {
        Self {
            abs: T::zero(),
            rel,
            max_intervals: 4000,
        }
    }

    pub fn with_abs(mut self, abs: T) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<T: Real> Eq for Segment<T> {}

impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// One 15-point Kronrod panel: `(value, error estimate, integral of |f|)`.
pub fn gk15<T, E, F>(f: &mut F, a: T, b: T) -> Result<(T, T, T), E>
where
    T: Real,
    F: FnMut(T) -> Result<T, E>,
{
    let half = c::<T>(0.5);
    let center = half * (a + b);
    let hl = half * (b - a);
    let fc = f(center)?;
    let mut resk = fc * c(WGK[7]);
    let mut resg = fc * c(WG[3]);
    let mut resabs = resk.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = hl * c(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w: T = c(WGK[j]);
        resk += w * (f1 + f2);
        resabs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += c::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let reskh = resk * half;
    let mut resasc = c::<T>(WGK[7]) * (fc - reskh).abs();
    for j in 0..7 {
        resasc += c::<T>(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * hl;
    let resabs = resabs * hl.abs();
    let resasc = resasc * hl.abs();
    let mut err = ((resk - resg) * hl).abs();
    if resasc != T::zero() && err != T::zero() {
        let r: T = (c::<T>(200.0) * err / resasc).powf(c(1.5));
        err = resasc * r.min(T::one());
    }
    let floor = c::<T>(50.0) * T::epsilon() * resabs;
    if floor > err {
        err = floor;
    }
    Ok((value, err, resabs))
}

/// Globally adaptive Gauss-Kronrod quadrature over the panels defined by `breaks`.
///
/// `breaks` must be sorted; each consecutive pair forms an initial panel.
/// The worst panel is bisected until the summed error estimate meets
/// `max(abs, rel * |I|)`, the interval budget runs out, or the error stops
/// being reducible (roundoff floor).
pub fn try_adaptive<T, E, F>(mut f: F, breaks: &[T], tol: &Tolerance<T>) -> Result<Integral<T>, E>
where
    T: Real,
    F: FnMut(T) -> Result<T, E>,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = T::zero();
    let mut total_err = T::zero();
    let mut total_abs = T::zero();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e, ra) = gk15(&mut f, w[0], w[1])?;
        evals += 15;
        total += v;
        total_err += e;
        total_abs += ra;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    let target = |total: T| tol.abs.max(tol.rel * total.abs());
    let mut converged = total_err <= target(total);
    while !converged && heap.len() < tol.max_intervals {
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = c::<T>(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1, _) = gk15(&mut f, seg.a, mid)?;
        let (v2, e2, _) = gk15(&mut f, mid, seg.b)?;
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            err: e2,
        });
        if heap.len() % 64 == 0 {
            // Re-sum to shed the drift of the running totals.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
        converged = total_err <= target(total) || total_err <= c::<T>(100.0) * T::epsilon() * total_abs;
    }
    let mut segs: Vec<_> = heap.into_vec();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let mut value = T::zero();
    let mut abs_err = T::zero();
    for s in &segs {
        value += s.value;
        abs_err += s.err;
    }
    let converged = converged || abs_err <= target(value);
    Ok(Integral {
        value,
        abs_err,
        evals,
        converged,
    })
}

/// Infallible wrapper around [`try_adaptive`].
pub fn adaptive<T, F>(mut f: F, breaks: &[T], tol: &Tolerance<T>) -> Integral<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    match try_adaptive::<T, Infallible, _>(|x| Ok(f(x)), breaks, tol) {
        Ok(r) => r,
        Err(e) => match e {},
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = if n == 1 { 2.0 } else { wi };
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss-Legendre rule mapped to an interval.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            nodes: x.into_iter().map(c).collect(),
            weights: w.into_iter().map(c).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights scaled to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = c::<T>(0.5) * (b - a);
        let mid = c::<T>(0.5) * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn try_integrate<E, F>(&self, mut f: F, a: T, b: T) -> Result<T, E>
    where
        F: FnMut(T) -> Result<T, E>,
    {
        let mut s = T::zero();
        for (x, w) in self.mapped(a, b) {
            s += w * f(x)?;
        }
        Ok(s)
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `n + 1` geometrically spaced points from `a` to `b` (both positive).
pub fn geometric<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let r = (b / a).ln() / T::from_usize(n).unwrap();
    let mut v: Vec<T> = (0..=n).map(|i| a * (r * T::from_usize(i).unwrap()).exp()).collect();
    v[0] = a;
    v[n] = b;
    v
}
