use fracfield::fields::{
    mean_fourier, mean_half_closed, mean_mainardi, var_classical_closed, var_classical_quadrature, var_frac_quadrature,
    var_series, CrossCheck, Method, Profile, ProfileMeta, QuadSpec, VarianceSeriesSpec,
};
use fracfield::quad::{adaptive, Tolerance};
use fracfield::special::EvalPolicy;
use fracfield::symbol::{mean_hat, DiffusionParams, KernelSpec};
use proptest::prelude::*;

const G1: KernelSpec<f64> = KernelSpec::Gaussian { scale: 1.0 };

fn params(alpha: f64, mu: f64) -> DiffusionParams<f64> {
    DiffusionParams::new(alpha, 1.0, mu, 1.0, 1).unwrap()
}

#[test]
fn mean_mass_is_conserved() {
    let q = QuadSpec::<f64>::default();
    for (alpha, mu) in [(1.0, 0.0), (0.7, 0.0), (1.4, 0.5)] {
        let p = params(alpha, mu);
        let f = |x: f64| mean_fourier(&p, &G1, 1.0, x, &q).unwrap().value;
        let breaks: Vec<f64> = (0..=15).map(|i| i as f64).collect();
        // even integrand: twice the half line; the tail beyond 15 is below 1e-8
        let mass = 2.0 * adaptive(f, &breaks, &Tolerance::rel(1e-7)).value;
        let expect = mean_hat(&p, &G1, 1.0, &[0.0], &EvalPolicy::default()).unwrap();
        assert!((mass - expect).abs() < 1e-4, "alpha {alpha}: {mass}");
    }
}

#[test]
fn subdiffusive_self_similarity() {
    let q = QuadSpec::<f64>::default();
    let p = params(0.6, 0.0);
    let z1 = mean_fourier(&p, &G1, 1.0, 0.0, &q).unwrap().value;
    let z4 = mean_fourier(&p, &G1, 4.0, 0.0, &q).unwrap().value;
    assert!((z4 / z1 - 4f64.powf(-0.3)).abs() < 1e-4);
    // the whole profile rescales, not only the peak
    let x = 0.8;
    let a = mean_fourier(&p, &G1, 4.0, x * 4f64.powf(0.3), &q).unwrap().value;
    let b = mean_fourier(&p, &G1, 1.0, x, &q).unwrap().value;
    assert!((a / b - 4f64.powf(-0.3)).abs() < 1e-6);
}

#[test]
fn profiles_are_even() {
    let q = QuadSpec::<f64>::default();
    let xs: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.3).collect();
    let ts = [0.5, 1.0, 2.0];
    let p = params(0.8, 1.0);
    let mean = Profile::evaluate(&ts, &xs, ProfileMeta::new(Method::Fourier), |t, x| {
        Ok(mean_fourier(&p, &G1, t, x, &q)?.value)
    })
    .unwrap();
    assert!(mean.asymmetry() < 1e-14);
    let var = Profile::evaluate(&ts, &xs, ProfileMeta::new(Method::VarQuadrature), |t, x| {
        var_frac_quadrature(t, x, 0.6, 1.0, 1.0, &q)
    })
    .unwrap();
    assert!(var.asymmetry() == 0.0);
    let closed = Profile::evaluate(&ts, &xs, ProfileMeta::new(Method::VarClosed), |t, x| {
        var_classical_closed(t, x, 1.0, 1.0)
    })
    .unwrap();
    assert!(closed.asymmetry() == 0.0);
}

#[test]
fn closed_forms_cross_reported_against_fourier() {
    let q = QuadSpec::<f64>::default();
    let pol = EvalPolicy::default();
    let xs = [0.0, 0.5, 1.0];
    let fourier = |alpha: f64| {
        let p = params(alpha, 0.0);
        Profile::evaluate(&[1.0], &xs, ProfileMeta::new(Method::Fourier), move |t, x| {
            Ok(mean_fourier(&p, &G1, t, x, &q)?.value)
        })
        .unwrap()
    };
    let mainardi = Profile::evaluate(&[1.0], &xs, ProfileMeta::new(Method::Mainardi), |t, x| {
        mean_mainardi(t, x, 0.6, 1.0, &pol)
    })
    .unwrap();
    let half = Profile::evaluate(&[1.0], &xs, ProfileMeta::new(Method::Mainardi), |t, x| {
        mean_half_closed(t, x, 1.0)
    })
    .unwrap();
    for (a, b) in [(&mainardi, fourier(0.6)), (&half, fourier(0.5))] {
        let report = CrossCheck::from_profiles(a, &b).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.ratio().is_finite()));
    }
}

#[test]
fn classical_variance_routes_reported() {
    let q = QuadSpec::<f64>::default();
    let quad = var_classical_quadrature(1.0, 0.0, 1.0, 1.0, &q).unwrap();
    let closed = var_classical_closed(1.0, 0.0, 1.0, 1.0).unwrap();
    assert!((quad - 0.398_942_3).abs() < 1e-3 * 0.398_942_3);
    // the two routes differ by the factor 2 sqrt(2)
    assert!((quad / closed - 2.0 * 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn series_and_quadrature_both_finite() {
    let q = QuadSpec::<f64>::default();
    let s = var_series(1.0, 1.0, 0.6, 1.0, 1.0, &VarianceSeriesSpec::<f64>::default()).unwrap();
    let v = var_frac_quadrature(1.0, 1.0, 0.6, 1.0, 1.0, &q).unwrap();
    assert!(s.value.is_finite() && s.value > 0.0);
    assert!(v.is_finite() && v > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_mean_is_even_and_bounded(alpha in 0.55f64..1.9, x in 0.0f64..4.0) {
        let q = QuadSpec::<f64>::default();
        let p = params(alpha, 0.0);
        let a = mean_fourier(&p, &G1, 1.0, x, &q).unwrap().value;
        let b = mean_fourier(&p, &G1, 1.0, -x, &q).unwrap().value;
        prop_assert_eq!(a, b);
        // |Z0(t, x)| <= Z-independent bound (1/pi) int |E_alpha(-k^2)| dk
        let peak = mean_fourier(&p, &G1, 1.0, 0.0, &q).unwrap().value;
        if alpha <= 1.0 {
            prop_assert!(a <= peak * (1.0 + 1e-9));
        }
    }

    #[test]
    fn classical_variance_scales_with_sqrt_t(t in 0.1f64..5.0, x in -3.0f64..3.0) {
        let q = QuadSpec::<f64>::default();
        let v = var_classical_quadrature(t, x, 1.0, 1.0, &q).unwrap();
        let expect = (t / (2.0 * std::f64::consts::PI)).sqrt();
        prop_assert!((v / expect - 1.0).abs() < 1e-8);
    }
}
