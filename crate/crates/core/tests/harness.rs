use smc_score::harness::{
    compare_fd, fit_rate_slope, grid_points, oracle_records, prepare, run_experiment, write_comparison_csv,
    write_records_csv, EstimatorKind, Experiment, ExperimentConfig, Sweep, XField, YAggregate, RUN_RECORD_HEADER,
    RUN_RECORD_SCHEMA_VERSION,
};

fn experiment(text: &str) -> Experiment {
    ExperimentConfig::from_toml_str(text).unwrap().validate().unwrap()
}

fn csv(exp: &Experiment, sweep: Sweep) -> String {
    let prep = prepare(exp).unwrap();
    let records = run_experiment(exp, &prep, exp.method, &grid_points(exp, sweep));
    let mut buf = Vec::new();
    write_records_csv(&mut buf, &records).unwrap();
    String::from_utf8(buf).unwrap()
}

const CONJUGATE: &str = r#"
[model]
kind = "gaussian"
observations = [0.0]
[estimator]
method = "quad-score"
theta = [1.0]
[grid]
tau = [0.4, 0.2, 0.1, 0.05]
[run]
replications = 1
seed = 3
"#;

const LGSSM: &str = r#"
[model]
kind = "lgssm"
phi = 0.8
sigma_v = 1.0
sigma_w = 0.5
horizon = 30
data_seed = 1
[estimator]
method = "smc-oim"
[grid]
tau = [0.1]
n = [300]
lag = [3, 6]
[run]
replications = 3
seed = 8
"#;

#[test]
fn header_matches_golden_file() {
    let golden = include_str!("golden/run_records_header.csv");
    assert_eq!(golden.trim_end(), RUN_RECORD_HEADER);
    assert_eq!(RUN_RECORD_SCHEMA_VERSION, 1);
    let out = csv(&experiment(CONJUGATE), Sweep::Single);
    assert_eq!(out.lines().next().unwrap(), RUN_RECORD_HEADER);
}

#[test]
fn one_row_per_component() {
    let out = csv(&experiment(CONJUGATE), Sweep::Single);
    assert_eq!(out.lines().count(), 2);
    let mut exp = experiment(LGSSM);
    exp.replications = 1;
    assert_eq!(csv(&exp, Sweep::Single).lines().count(), 1 + 9);
    exp.method = EstimatorKind::SmcScore;
    assert_eq!(csv(&exp, Sweep::Single).lines().count(), 1 + 3);
    let exp = experiment(LGSSM);
    assert_eq!(csv(&exp, Sweep::Lag).lines().count(), 1 + 2 * 3 * 9);
}

#[test]
fn quadrature_error_column_is_the_closed_form_bias() {
    let exp = experiment(CONJUGATE);
    let prep = prepare(&exp).unwrap();
    let records = run_experiment(&exp, &prep, exp.method, &grid_points(&exp, Sweep::Tau));
    assert_eq!(records.len(), 4);
    for r in &records {
        let tau = r.tau.unwrap();
        let bias = tau * tau / (1.0 + tau * tau);
        assert!((r.abs_error.unwrap() - bias).abs() < 1e-6, "tau {tau}: {:?}", r.abs_error);
        assert_eq!(r.oracle, Some(-1.0));
    }
    let fit = fit_rate_slope(&records, XField::Tau, YAggregate::MeanAbsBias).unwrap();
    assert!((1.9..=2.1).contains(&fit.slope), "{}", fit.slope);
}

#[test]
fn output_is_reproducible_and_independent_of_pool_size() {
    let exp = experiment(LGSSM);
    let a = csv(&exp, Sweep::Lag);
    let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| csv(&exp, Sweep::Lag));
    let c = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| csv(&exp, Sweep::Lag));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let mut other = exp.clone();
    other.seed += 1;
    assert_ne!(a, csv(&other, Sweep::Lag));
}

#[test]
fn run_ids_and_seeds_follow_the_splitting_rule() {
    let exp = experiment(LGSSM);
    let prep = prepare(&exp).unwrap();
    let records = run_experiment(&exp, &prep, exp.method, &grid_points(&exp, Sweep::Lag));
    for r in &records {
        let (g, rep) = (r.run_id / 3, r.run_id % 3);
        assert_eq!(r.seed, smc_score::rng::derive_seed(8, &[g, rep]));
        assert_eq!(r.delta, Some([3, 6][g as usize]));
    }
    assert!(records.windows(2).all(|w| w[0].order_key() <= w[1].order_key()));
}

#[test]
fn failures_are_recorded_and_the_run_continues() {
    let text = CONJUGATE.replace("quad-score", "is-score").replace("theta = [1.0]", "theta = [1e200]");
    let exp = experiment(&text);
    let prep = prepare(&exp).unwrap();
    let records = run_experiment(&exp, &prep, exp.method, &grid_points(&exp, Sweep::Tau));
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.estimate.is_none() && r.error.is_some()));
    let row = records[0].csv_row();
    assert_eq!(row.split(',').count(), RUN_RECORD_HEADER.split(',').count());
}

#[test]
fn oracle_records_cover_score_and_information() {
    let exp = experiment(LGSSM);
    let prep = prepare(&exp).unwrap();
    let records = oracle_records(&exp, &prep).unwrap();
    assert_eq!(records.len(), 3 + 9);
    assert!(records.iter().all(|r| r.error.is_none()));
}

#[test]
fn compare_fd_on_exact_quadratic_has_zero_fd_variance() {
    let text = CONJUGATE.replace("quad-score", "fd-score").replace("[run]\nreplications = 1", "[run]\nreplications = 5");
    let exp = experiment(&text);
    let prep = prepare(&exp).unwrap();
    let rows = compare_fd(&exp, &prep).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].method, "is-score");
    assert_eq!(rows[1].method, "fd-score");
    assert_eq!(rows[1].variance, 0.0);
    assert_eq!(rows[1].replications, 5);
    assert!(rows[1].bias.unwrap().abs() < 1e-12);
    let mut buf = Vec::new();
    write_comparison_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), include_str!("golden/comparison_header.csv").trim_end());
}

#[test]
fn compare_fd_matches_particle_budget() {
    let text = LGSSM.replace("smc-oim", "fd-score").replace("n = [300]", "n = [1200]");
    let exp = experiment(&text);
    let prep = prepare(&exp).unwrap();
    let rows = compare_fd(&exp, &prep).unwrap();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].method, "smc-score");
        assert_eq!(pair[1].method, "fd-score");
        assert_eq!(pair[0].budget, 1200);
        assert_eq!(pair[1].budget, 1200);
        assert!(pair[1].variance_ratio.is_finite() && pair[1].variance_ratio > 0.0);
    }
}

#[test]
fn compare_fd_without_oracle_drops_error_columns() {
    let text = r#"
[model]
kind = "scale-mixture"
phi = 0.5
sigma_v = 0.5
sigma_w = 0.5
horizon = 10
[estimator]
method = "fd-score"
[grid]
n = [600]
[run]
replications = 2
"#;
    let exp = experiment(text);
    let prep = prepare(&exp).unwrap();
    assert!(prep.oracle.is_none());
    let rows = compare_fd(&exp, &prep).unwrap();
    let mut buf = Vec::new();
    write_comparison_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "method,i,j,budget,replications,mean,variance,variance_ratio");
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn power_rules_set_tau_and_h_from_n() {
    let text = CONJUGATE
        .replace("tau = [0.4, 0.2, 0.1, 0.05]", "n = [1000, 1000000]\ntau_exponent = -0.5\nh_exponent = -0.25\nh_scale = 2.0");
    let exp = experiment(&text);
    let pts = grid_points(&exp, Sweep::N);
    assert_eq!(pts.len(), 2);
    assert!((pts[1].tau - 1e-3).abs() < 1e-15);
    assert!((pts[1].h - 2.0 * 10f64.powf(-1.5)).abs() < 1e-15);
}
