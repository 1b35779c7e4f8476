use fracfield::fields::{mean_fourier, Method, Profile, ProfileMeta, QuadSpec};
use fracfield::simulate::{compare_to_analytic, ensemble_stats, GridSpec, InitialCondition, Moment, Simulator};
use fracfield::symbol::{DiffusionParams, KernelSpec};

const G1: KernelSpec<f64> = KernelSpec::Gaussian { scale: 1.0 };

fn interior(stats_positions: &[f64], half: f64) -> Vec<f64> {
    stats_positions
        .iter()
        .copied()
        .filter(|x| x.abs() <= half)
        .step_by(8)
        .collect()
}

#[test]
fn variance_grows_and_wrong_reference_is_detected() {
    let grid = GridSpec::new(20.0, 256, 64, 1.0, InitialCondition::Zero).unwrap();
    let p = DiffusionParams::new(1.0, 1.0, 0.0, 1.0, 1).unwrap();
    let stats = ensemble_stats(&p, &G1, &grid, 400, 2024, false).unwrap();
    let xs = interior(&stats.positions, 10.0);
    let t_end = *stats.times.last().unwrap();
    let oracle = |lambda: f64| {
        Profile::evaluate(&[t_end], &xs, ProfileMeta::new(Method::VarQuadrature), move |t, _| {
            Ok((t / (2.0 * std::f64::consts::PI * lambda)).sqrt())
        })
        .unwrap()
    };
    let good = compare_to_analytic(&stats, &oracle(1.0), Moment::Variance).unwrap();
    assert!(good.max_abs_z < 4.5, "{}", good.max_abs_z);
    // doubling lambda shrinks the reference by sqrt 2
    let bad = compare_to_analytic(&stats, &oracle(2.0), Moment::Variance).unwrap();
    assert!(bad.max_abs_z > 4.0);
    let j = stats.positions.len() / 2;
    for w in stats.variance.windows(2) {
        assert!(w[1][j] > w[0][j] - 4.0 * w[0][j] * (2.0 / 399f64).sqrt());
    }
}

#[test]
fn fractional_mean_matches_fourier() {
    let grid = GridSpec::new(20.0, 256, 64, 1.0, InitialCondition::DiracSpectral).unwrap();
    let p = DiffusionParams::new(0.8, 1.0, 0.0, 1.0, 1).unwrap();
    let stats = ensemble_stats(&p, &G1, &grid, 200, 77, false).unwrap();
    let q = QuadSpec::<f64>::default();
    let xs = interior(&stats.positions, 5.0);
    let t_end = *stats.times.last().unwrap();
    let reference = Profile::evaluate(&[t_end], &xs, ProfileMeta::new(Method::Fourier), |t, x| {
        Ok(mean_fourier(&p, &G1, t, x, &q)?.value)
    })
    .unwrap();
    let cmp = compare_to_analytic(&stats, &reference, Moment::Mean).unwrap();
    assert!(cmp.max_abs_z < 4.0, "{}", cmp.max_abs_z);
}

#[test]
fn thread_count_does_not_change_results() {
    let grid = GridSpec::new(20.0, 128, 32, 1.0, InitialCondition::DiracSpectral).unwrap();
    let p = DiffusionParams::new(1.5, 1.0, 0.0, 1.0, 1).unwrap();
    let sim = Simulator::new(&p, &G1, &grid, false).unwrap();
    let runs: Vec<_> = [1, 3]
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| sim.ensemble(50, 42).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
