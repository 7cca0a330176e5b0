use proptest::prelude::*;
use smc_score::general::{
    fd_oim, fd_score, oim_general, posterior_moments_is, posterior_moments_quadrature, score_general, FdConfig,
    GaussianLikelihood, GridSpec, PoissonLikelihood,
};
use smc_score::rng::stream;
use smc_score::{PerturbationKernel, Tau};

#[test]
fn conjugate_importance_sampling_moments() {
    let model = GaussianLikelihood::unit(vec![0.0f64]);
    let k = PerturbationKernel::gaussian(vec![1.0]).unwrap();
    let tau = Tau::new(0.1).unwrap();
    let m = posterior_moments_is(&model, &[1.0], tau, &k, 100_000, &mut stream(31)).unwrap();
    let v = 0.01 / 1.01;
    let mean_se = (v / m.ess).sqrt();
    assert!((m.mean[0] - 1.0 / 1.01).abs() < 3.0 * mean_se, "{} vs {}", m.mean[0], 1.0 / 1.01);
    assert!((m.covariance[(0, 0)] - v).abs() < 4.0 * v * (2.0 / m.ess).sqrt(), "{}", m.covariance[(0, 0)]);
    assert!(m.ess > 1.0 && m.ess <= 100_000.0);
}

#[test]
fn product_model_gives_diagonal_information() {
    let model = GaussianLikelihood::new(vec![0.5f64, -1.0], vec![1.0, 2.0]).unwrap();
    let k = PerturbationKernel::gaussian(vec![1.0, 1.0]).unwrap();
    let tau = Tau::new(0.3).unwrap();
    let m = posterior_moments_is(&model, &[0.0, 0.0], tau, &k, 200_000, &mut stream(2)).unwrap();
    let i = oim_general(&m, tau, &k).unwrap();
    // off-diagonal covariance has se ~ tau^2 / sqrt(ess); scaled by tau^-4
    let se = 1.0 / (0.09 * m.ess.sqrt());
    assert!(i.get(0, 1).abs() < 4.0 * se, "{}", i.get(0, 1));
    assert_eq!(i.get(0, 1), i.get(1, 0));
}

#[test]
fn importance_sampling_converges_to_quadrature() {
    let model = PoissonLikelihood { count: 3.0f64 };
    let k = PerturbationKernel::gaussian(vec![1.0]).unwrap();
    let tau = Tau::new(0.3).unwrap();
    let q = posterior_moments_quadrature(&model, &[1.0], tau, &k, GridSpec::default()).unwrap();
    let m = posterior_moments_is(&model, &[1.0], tau, &k, 1_000_000, &mut stream(5)).unwrap();
    let se = (q.covariance[(0, 0)] / m.ess).sqrt();
    assert!((m.mean[0] - q.mean[0]).abs() < 4.0 * se, "{} vs {}", m.mean[0], q.mean[0]);
}

#[test]
fn finite_differences_on_exact_quadratic() {
    let model = GaussianLikelihood::unit(vec![0.0f64]);
    let cfg = FdConfig::new(0.1, 0).unwrap();
    assert!((fd_score(&model, &[1.0], &cfg).unwrap().values[0] + 1.0).abs() < 1e-14);
    let i = fd_oim(&model, &[1.0], &cfg).unwrap();
    assert!((i.get(0, 0) - 1.0).abs() < 1e-12, "{}", i.get(0, 0));
}

#[test]
fn quadrature_bias_shrinks_like_tau_squared() {
    let model = GaussianLikelihood::unit(vec![0.0f64]);
    let k = PerturbationKernel::gaussian(vec![1.0]).unwrap();
    for tau in [0.1, 0.05] {
        let t = Tau::new(tau).unwrap();
        let q = posterior_moments_quadrature(&model, &[1.0], t, &k, GridSpec::default()).unwrap();
        let s = score_general(&q, &[1.0], t, &k).unwrap();
        assert!((s.values[0] + 1.0 / (1.0 + tau * tau)).abs() < 1e-6, "{tau}: {}", s.values[0]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn score_is_equivariant_in_scale(c in 0.2f64..5.0, seed in any::<u64>(), theta in -2.0f64..2.0) {
        let model = GaussianLikelihood::unit(vec![0.3f64]);
        let tau = 0.2;
        let k1 = PerturbationKernel::gaussian(vec![0.8]).unwrap();
        let k2 = PerturbationKernel::gaussian(vec![0.8 * c]).unwrap();
        let t1 = Tau::new(tau).unwrap();
        let t2 = Tau::new(tau / c).unwrap();
        let m1 = posterior_moments_is(&model, &[theta], t1, &k1, 200, &mut stream(seed)).unwrap();
        let m2 = posterior_moments_is(&model, &[theta], t2, &k2, 200, &mut stream(seed)).unwrap();
        let s1 = score_general(&m1, &[theta], t1, &k1).unwrap().values[0];
        let s2 = score_general(&m2, &[theta], t2, &k2).unwrap().values[0];
        prop_assert!((s1 - s2).abs() <= 1e-9 * (1.0 + s1.abs()), "{} vs {}", s1, s2);
    }

    #[test]
    fn is_moments_are_well_formed(seed in any::<u64>(), tau in 0.05f64..2.0, y0 in -3.0f64..3.0, y1 in -3.0f64..3.0) {
        let model = GaussianLikelihood::new(vec![y0, y1], vec![1.0, 0.5]).unwrap();
        let k = PerturbationKernel::gaussian(vec![1.0, 2.0]).unwrap();
        let t = Tau::new(tau).unwrap();
        let m = posterior_moments_is(&model, &[0.0, 0.0], t, &k, 300, &mut stream(seed)).unwrap();
        prop_assert!(m.covariance.is_symmetric());
        prop_assert!(m.covariance[(0, 0)] >= 0.0 && m.covariance[(1, 1)] >= 0.0);
        let det = m.covariance[(0, 0)] * m.covariance[(1, 1)] - m.covariance[(0, 1)].powi(2);
        prop_assert!(det >= -1e-12 * (1.0 + m.covariance[(0, 0)] * m.covariance[(1, 1)]));
        prop_assert!(m.ess >= 1.0 - 1e-9 && m.ess <= 300.0 + 1e-9);
        let i = oim_general(&m, t, &k).unwrap();
        prop_assert!(i.values().is_symmetric());
    }
}
