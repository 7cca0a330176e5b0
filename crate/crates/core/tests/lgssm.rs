use nalgebra::{DMatrix, DVector};
use smc_score::rng::stream;
use smc_score::ssm::{
    kalman_score_oim_oracle, richardson_derivatives, simulate, InitialLaw, Lgssm, LgssmCoord, LgssmParams,
    ObservationSequence, ScaleMixtureAr, ORACLE_STEP,
};

/// log N(y; 0, K) with K built from the AR(1) autocovariance.
fn joint_gaussian_loglik(p: &LgssmParams<f64>, init_var: f64, y: &[f64]) -> f64 {
    let t = y.len();
    let mut var = vec![init_var; t];
    for s in 1..t {
        var[s] = p.phi * p.phi * var[s - 1] + p.sigma_v * p.sigma_v;
    }
    let k = DMatrix::from_fn(t, t, |i, j| {
        let (lo, hi) = (i.min(j), i.max(j));
        let cov = p.phi.powi((hi - lo) as i32) * var[lo];
        cov + if i == j { p.sigma_w * p.sigma_w } else { 0.0 }
    });
    let chol = k.cholesky().unwrap();
    let yv = DVector::from_column_slice(y);
    let alpha = chol.solve(&yv);
    let logdet: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    -0.5 * (yv.dot(&alpha) + logdet + t as f64 * (2.0 * std::f64::consts::PI).ln())
}

#[test]
fn kalman_matches_joint_gaussian_for_short_series() {
    let y_all = [0.4, -1.3, 2.2, 0.05, -0.7];
    for (phi, sv, sw) in [(0.8, 1.0, 0.5), (-0.4, 0.3, 1.7), (0.0, 2.0, 0.1)] {
        let p = LgssmParams { phi, sigma_v: sv, sigma_w: sw };
        let stationary = Lgssm::standard(p);
        let fixed = Lgssm::new(p, LgssmCoord::ALL.to_vec(), InitialLaw::Fixed { mean: 0.0, variance: 2.5 }).unwrap();
        let theta = stationary.theta_of(&p);
        for t in 1..=5 {
            let obs = ObservationSequence::new(y_all[..t].to_vec()).unwrap();
            let a = stationary.kalman_loglik(&theta, &obs).unwrap();
            let b = joint_gaussian_loglik(&p, sv * sv / (1.0 - phi * phi), &y_all[..t]);
            assert!((a - b).abs() < 1e-8, "stationary T={t}: {a} vs {b}");
            let a = fixed.kalman_loglik(&theta, &obs).unwrap();
            let b = joint_gaussian_loglik(&p, 2.5, &y_all[..t]);
            assert!((a - b).abs() < 1e-8, "fixed T={t}: {a} vs {b}");
        }
    }
}

#[test]
fn huge_observation_noise_limit() {
    let p = LgssmParams { phi: 0.6, sigma_v: 1.0, sigma_w: 1e3 };
    let m = Lgssm::standard(p);
    let theta = m.theta_of(&p);
    let y = [1.0, -20.0, 300.0, 4.0, -1500.0, 7.0];
    let obs = ObservationSequence::new(y.to_vec()).unwrap();
    let ll = m.kalman_loglik(&theta, &obs).unwrap();
    let noise: f64 = y
        .iter()
        .enumerate()
        .map(|(t, &yt)| {
            let v = p.sigma_w * p.sigma_w + m.state_variance(&theta, t + 1).unwrap();
            -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + yt * yt / v)
        })
        .sum();
    assert!((ll - noise).abs() < 1e-3, "{ll} vs {noise}");
}

#[test]
fn white_noise_states_have_no_autocorrelation() {
    let m = Lgssm::standard(LgssmParams { phi: 0.0, sigma_v: 1.0, sigma_w: 1.0 });
    let theta = m.theta_of(&m.base());
    let n = 100_000;
    let (x, _) = simulate(&m, &theta, n, &mut stream(4)).unwrap();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let lag1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1) as f64 / var;
    assert!(lag1.abs() < 4.0 / (n as f64).sqrt(), "{lag1}");
    assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
}

#[test]
fn simulation_is_seeded() {
    let m = Lgssm::standard(LgssmParams { phi: 0.9, sigma_v: 0.5, sigma_w: 0.2 });
    let theta = m.theta_of(&m.base());
    let a = simulate(&m, &theta, 30, &mut stream(1)).unwrap();
    let b = simulate(&m, &theta, 30, &mut stream(1)).unwrap();
    let c = simulate(&m, &theta, 30, &mut stream(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
    let (x, y) = simulate(&m, &theta, 1, &mut stream(1)).unwrap();
    assert_eq!((x.len(), y.len()), (1, 1));
}

#[test]
fn oracle_score_is_centered_and_information_positive_at_truth() {
    let m = Lgssm::standard(LgssmParams { phi: 0.7, sigma_v: 1.0, sigma_w: 0.5 });
    let theta = m.theta_of(&m.base());
    let reps = 200;
    let mut phi_scores = Vec::with_capacity(reps);
    let mut info_sum = [[0.0f64; 3]; 3];
    for r in 0..reps {
        let (_, obs) = simulate(&m, &theta, 50, &mut stream(1000 + r as u64)).unwrap();
        let o = kalman_score_oim_oracle(&m, &theta, &obs).unwrap();
        assert!(o.oim.values().is_symmetric());
        phi_scores.push(o.score.values[0]);
        for (i, row) in info_sum.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += o.oim.get(i, j) / reps as f64;
            }
        }
    }
    let mean = phi_scores.iter().sum::<f64>() / reps as f64;
    let sd = (phi_scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    assert!(mean.abs() < 4.0 * sd / (reps as f64).sqrt(), "mean {mean}, sd {sd}");
    let avg = DMatrix::from_fn(3, 3, |i, j| info_sum[i][j]);
    let eig = avg.symmetric_eigenvalues();
    assert!(eig.iter().all(|&e| e > 0.0), "{eig}");
}

#[test]
fn richardson_is_exact_on_quadratics() {
    let f = |t: &[f64]| Ok(1.5 * t[0] * t[0] - 0.5 * t[0] * t[1] + 2.0 * t[1] * t[1] + 3.0 * t[0] - t[1] + 7.0);
    let est = richardson_derivatives(f, &[0.4, -1.1], ORACLE_STEP).unwrap();
    let g = [3.0 * 0.4 - 0.5 * -1.1 + 3.0, -0.5 * 0.4 + 4.0 * -1.1 - 1.0];
    let h = [[3.0, -0.5], [-0.5, 4.0]];
    for i in 0..2 {
        assert!((est.gradient[i] - g[i]).abs() < 1e-9, "{:?}", est.gradient);
        for j in 0..2 {
            assert!((est.hessian[(i, j)] - h[i][j]).abs() < 1e-6, "{:?}", est.hessian);
        }
    }
    assert!(est.max_error() < 1e-5);
}

#[test]
fn oracle_warns_when_extrapolation_disagrees() {
    // near the phi clamp the likelihood has a kink, so the two step sizes disagree
    let m = Lgssm::new(
        LgssmParams { phi: 0.5, sigma_v: 1.0, sigma_w: 1.0 },
        vec![LgssmCoord::Phi],
        InitialLaw::Fixed { mean: 0.0, variance: 1.0 },
    )
    .unwrap();
    let obs = ObservationSequence::new(vec![0.5, 3.0, -2.0, 4.0, 1.0, -3.0]).unwrap();
    let smooth = kalman_score_oim_oracle(&m, &[0.3], &obs).unwrap();
    assert!(smooth.warning.is_none());
    let kinked = kalman_score_oim_oracle(&m, &[0.9985], &obs).unwrap();
    assert!(kinked.warning.is_some());
}

#[test]
fn observations_round_trip_through_csv() {
    let obs = ObservationSequence::new(vec![0.1, -2.5e-17, 3.0, std::f64::consts::PI]).unwrap();
    let mut buf = Vec::new();
    obs.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("t,y\n1,0.1\n"));
    let back = ObservationSequence::<f64>::read_csv(&buf[..]).unwrap();
    assert_eq!(back, obs);
    assert!(ObservationSequence::<f64>::read_csv(&b"t,y\n1,abc\n"[..]).is_err());
    assert!(ObservationSequence::<f64>::read_csv(&b"t,y\n"[..]).is_err());
}

#[test]
fn scale_mixture_runs_through_the_filter() {
    use smc_score::smc::{oim_ssm, run_extended_bootstrap, score_ssm, ExtendedFilterConfig};
    use smc_score::{PerturbationKernel, Tau};
    let m = ScaleMixtureAr::new(10);
    let theta: Vec<f64> = vec![0.6, -0.5, -0.7];
    let (_, obs) = simulate(&m, &theta, 25, &mut stream(8)).unwrap();
    let kernel = PerturbationKernel::gaussian(vec![1.0; 3]).unwrap();
    let cfg = ExtendedFilterConfig::new(theta.clone(), 0.2, kernel.clone(), 4, 500, 1);
    let acc = run_extended_bootstrap(&m, &obs, &cfg).unwrap();
    let tau = Tau::new(0.2).unwrap();
    let s = score_ssm(&acc, &theta, tau, &kernel).unwrap();
    let i = oim_ssm(&acc, tau, &kernel).unwrap();
    assert!(s.values.iter().all(|v| v.is_finite()));
    assert!(i.values().is_symmetric());
    assert!(acc.loglik().is_finite());
}
