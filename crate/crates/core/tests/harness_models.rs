//! End-to-end Monte Carlo runs over the model families that exercise the
//! non-default synthesis routes: mixtures (dense increment covariance),
//! second-kind processes (direct zero-start sampling), and the
//! truth-standardization switch.

use langevin::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use langevin::noise::NoiseModel;

fn config(model: NoiseModel, t_max: f64, dt: f64, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        model,
        theta_true: 1.0,
        t_max,
        dt,
        replications: reps,
        master_seed: 515,
        experiment: ExperimentKind::Consistency,
        discrete_delta: None,
        xi: None,
        standardize_at_truth: false,
    }
}

#[test]
fn mixed_model_estimation_end_to_end() {
    let model = NoiseModel::mixed(vec![NoiseModel::brownian(), NoiseModel::fbm(0.7)]);
    let rep = run_experiment(&config(model, 200.0, 0.1, 150)).unwrap();
    assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    assert!(
        (rep.mean - 1.0).abs() < 0.12,
        "mean {} sd {}",
        rep.mean,
        rep.sd
    );
}

#[test]
fn second_kind_estimation_end_to_end() {
    let rep = run_experiment(&config(
        NoiseModel::lamperti_bifbm(0.6, 0.8),
        250.0,
        0.125,
        150,
    ))
    .unwrap();
    assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    assert!(
        (rep.mean - 1.0).abs() < 0.12,
        "mean {} sd {}",
        rep.mean,
        rep.sd
    );
}

#[test]
fn truth_standardization_switch() {
    let mut cfg = config(NoiseModel::brownian(), 200.0, 0.05, 400);
    cfg.experiment = ExperimentKind::Normality;
    let plug_in = run_experiment(&cfg).unwrap();
    cfg.standardize_at_truth = true;
    let at_truth = run_experiment(&cfg).unwrap();
    // Same estimates, different standardization.
    assert_eq!(plug_in.estimates, at_truth.estimates);
    assert_ne!(
        plug_in.standardized.as_ref().unwrap(),
        at_truth.standardized.as_ref().unwrap()
    );
    // Both standardizations are near-normal at this horizon.
    assert!(plug_in.ks_distance.unwrap() <= 0.1);
    assert!(at_truth.ks_distance.unwrap() <= 0.1);
}
