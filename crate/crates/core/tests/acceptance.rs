//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantity. Tolerances are pinned in code; every
//! criterion is asserted as stated, including the two that measure known
//! discrepancies (7 and the first half of 12) — those record the observed
//! values in their failure messages.

#![allow(clippy::needless_range_loop)]

use langevin::asymptotics::{asymptotic_variance, q_moments};
use langevin::estimator::mesh_check;
use langevin::harness::{
    run_experiment, run_experiment_with_threads, ExperimentConfig, ExperimentKind,
};
use langevin::kernel::{fou_autocov_tail, psi_quadrature, r_reduced_quadrature, KernelContext};
use langevin::noise::NoiseModel;
use langevin::sampler::{Grid, NoiseIncrementSampler};
use langevin::solver::solve_zero_start;
use rayon::prelude::*;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion}: {detail}");
}

fn base_config(model: NoiseModel, experiment: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        model,
        theta_true: 1.0,
        t_max: 500.0,
        dt: 0.05,
        replications: 500,
        master_seed: 20_260_808,
        experiment,
        discrete_delta: None,
        xi: None,
        standardize_at_truth: false,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

#[test]
fn criterion_01_psi_quadrature_oracle() {
    let mut worst = 0.0f64;
    for &h in &[0.3, 0.5, 0.75] {
        for &theta in &[0.5, 1.0, 2.0] {
            let model = NoiseModel::fbm(h);
            let closed = KernelContext::new(model.clone(), theta).unwrap().psi();
            let quad = psi_quadrature(&model, theta, 96).unwrap();
            worst = worst.max((quad / closed - 1.0).abs());
        }
    }
    report(
        "01 (psi oracle)",
        worst <= 1e-6,
        &format!("max |quad/closed - 1| = {worst:.3e} (tol 1e-6)"),
    );
}

#[test]
fn criterion_02_autocovariance_oracle() {
    let mut worst_abs = 0.0f64;
    for &theta in &[0.5, 1.0, 2.0] {
        for i in 0..21 {
            let t = 0.25 * i as f64;
            let want = (-theta * t).exp() / (2.0 * theta);
            let got = r_reduced_quadrature(&NoiseModel::brownian(), theta, t, 96).unwrap();
            worst_abs = worst_abs.max((got - want).abs());
        }
    }
    let ctx = KernelContext::new(NoiseModel::fbm(0.7), 1.0).unwrap();
    let r0 = ctx.autocov(0.0);
    let rzero_quad = psi_quadrature(&NoiseModel::fbm(0.7), 1.0, 96).unwrap();
    let rel0 = (r0 / rzero_quad - 1.0).abs();
    report(
        "02 (r oracle)",
        worst_abs <= 1e-4 && rel0 <= 1e-6,
        &format!(
            "Brownian max abs err {worst_abs:.3e} (tol 1e-4); fbm r(0) rel err {rel0:.3e} (tol 1e-6)"
        ),
    );
}

#[test]
fn criterion_03_fou_tail_ratio() {
    let ctx = KernelContext::new(NoiseModel::fbm(0.7), 1.0).unwrap();
    let ratio = ctx.autocov(50.0) / fou_autocov_tail(0.7, 1.0, 50.0).unwrap();
    report(
        "03 (fOU tail)",
        (0.9..=1.1).contains(&ratio),
        &format!("r(50)/tail = {ratio:.4} (band [0.9, 1.1])"),
    );
}

#[test]
fn criterion_04_consistency() {
    let config = base_config(NoiseModel::brownian(), ExperimentKind::Consistency);
    let rep = run_experiment(&config).unwrap();
    let ok = (rep.mean - 1.0).abs() <= 0.03 && (0.044..=0.082).contains(&rep.sd);
    report(
        "04 (consistency)",
        ok,
        &format!(
            "mean = {:.4} (band 1 +/- 0.03), sd = {:.4} (band [0.044, 0.082])",
            rep.mean, rep.sd
        ),
    );
}

#[test]
fn criterion_05_normality_berry_esseen() {
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::Normality);
    config.replications = 2000;
    let rep = run_experiment(&config).unwrap();
    let ks_b = rep.ks_distance.unwrap();

    let mut config = base_config(NoiseModel::fbm(0.7), ExperimentKind::Normality);
    config.replications = 2000;
    let rep = run_experiment(&config).unwrap();
    let ks_f = rep.ks_distance.unwrap();

    report(
        "05 (normality)",
        ks_b <= 0.08 && ks_f <= 0.10,
        &format!("KS brownian = {ks_b:.4} (tol 0.08), KS fbm(0.7) = {ks_f:.4} (tol 0.10)"),
    );
}

#[test]
fn criterion_06_q_moment_oracle() {
    let theta = 1.0;
    let t_max = 5.0;
    let ctx = KernelContext::new(NoiseModel::brownian(), theta).unwrap();
    let (q2, q4) = q_moments(&ctx, t_max, 16).unwrap();
    let excess = q4 / (q2 * q2) - 3.0;

    // Monte Carlo variance of the centered quadratic time average.
    let grid = Grid::from_horizon(t_max, 0.01).unwrap();
    let sampler = NoiseIncrementSampler::new(NoiseModel::brownian(), grid).unwrap();
    let reps = 5000usize;
    let expected: Vec<f64> = grid.times().map(|t| ctx.zero_start_cov(t, t)).collect();
    let qs: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = solve_zero_start(&sampler.sample(60_000 + r as u64), theta).unwrap();
            let n = grid.n();
            let mut acc = 0.5
                * ((x.values[0] * x.values[0] - expected[0])
                    + (x.values[n] * x.values[n] - expected[n]));
            for k in 1..n {
                acc += x.values[k] * x.values[k] - expected[k];
            }
            acc * grid.dt() / t_max
        })
        .collect();
    let sample_var = {
        let m = mean(&qs);
        qs.iter().map(|q| (q - m) * (q - m)).sum::<f64>() / (reps as f64 - 1.0)
    };
    // Sampling error of a variance estimate: ((mu4 - sigma^4)/n)^(1/2).
    let se = ((q4 - q2 * q2) / reps as f64).sqrt();
    let gap = (sample_var - q2).abs();
    report(
        "06 (Q moments)",
        gap <= 4.0 * se && excess >= 0.0,
        &format!(
            "|MC var - q2| = {gap:.3e} (4 se = {:.3e}); excess kurtosis = {excess:.4} (>= 0)",
            4.0 * se
        ),
    );
}

#[test]
fn criterion_07_log_rate_constant() {
    let ctx = KernelContext::new(NoiseModel::fbm(0.75), 1.0).unwrap();
    let t = 1e4;
    let ratio = t * asymptotic_variance(&ctx, t) / t.ln();
    let target = 2.0 * (3.0f64 / 8.0) * (3.0 / 8.0);
    let rel = (ratio / target - 1.0).abs();
    report(
        "07 (H=3/4 log rate)",
        rel <= 0.15,
        &format!(
            "T w(T)/log T = {ratio:.4} at T = 1e4 vs stated constant {target:.5} (rel gap {rel:.2}); \
             the definitional normalization (anchored by the Brownian check T w -> 4 int r^2) gives \
             4 (3/8)^2 = 0.5625 in the limit, and the finite-T transient at 1e4 still adds ~20%"
        ),
    );
}

#[test]
fn criterion_08_bias() {
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::Bias);
    config.t_max = 10.0;
    config.dt = 0.01;
    config.replications = 5000;
    let rep = run_experiment(&config).unwrap();

    let ms = &rep.mean_squares;
    let n = ms.len() as f64;
    let bias_hat = mean(ms) - 0.5;
    let want = -0.025 * (1.0 - (-20.0f64).exp());
    let se_zero = sd(ms) / n.sqrt();

    let sae_ms = rep.sae_mean_squares.as_ref().unwrap();
    let sae_mean = mean(sae_ms);
    let se_sae = sd(sae_ms) / (sae_ms.len() as f64).sqrt();

    let ok_zero = (bias_hat - want).abs() <= 4.0 * se_zero;
    let ok_sae = (sae_mean - 0.5).abs() <= 4.0 * se_sae;
    report(
        "08 (bias)",
        ok_zero && ok_sae,
        &format!(
            "zero-start: mean psi-hat - psi = {bias_hat:.5} vs {want:.5} (4 se = {:.5}); \
             stationary: mean psi-hat = {sae_mean:.5} vs 0.5 (4 se = {:.5})",
            4.0 * se_zero,
            4.0 * se_sae
        ),
    );
}

#[test]
fn criterion_09_lse_decay() {
    let mut abs_means = Vec::new();
    for &t_max in &[100.0, 400.0, 1600.0] {
        let mut config = base_config(NoiseModel::brownian(), ExperimentKind::LseDecay);
        config.t_max = t_max;
        let rep = run_experiment(&config).unwrap();
        abs_means.push(mean(
            &rep.estimates.iter().map(|x| x.abs()).collect::<Vec<f64>>(),
        ));
    }
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::LseDecay);
    config.t_max = 1000.0;
    let rep = run_experiment(&config).unwrap();
    let at_1000 = mean(&rep.estimates.iter().map(|x| x.abs()).collect::<Vec<f64>>());

    let ok = at_1000 <= 0.05 && abs_means[0] > abs_means[1] && abs_means[1] > abs_means[2];
    report(
        "09 (LSE decay)",
        ok,
        &format!(
            "mean |lse| at T=1000: {at_1000:.5} (tol 0.05); ladder T=100/400/1600: {:.5} > {:.5} > {:.5}",
            abs_means[0], abs_means[1], abs_means[2]
        ),
    );
}

#[test]
fn criterion_10_mle_parity() {
    use langevin::baselines::mle_brownian;
    let model = NoiseModel::brownian();
    let grid = Grid::from_horizon(500.0, 0.01).unwrap();
    let sampler = NoiseIncrementSampler::new(model.clone(), grid).unwrap();
    let reps = 500usize;
    let ests: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = solve_zero_start(&sampler.sample(70_000 + r as u64), 1.0).unwrap();
            mle_brownian(&x, &model).unwrap()
        })
        .collect();
    let m = mean(&ests);
    let v = sd(&ests).powi(2);
    let want_var = 2.0 / 500.0;
    let ok = (0.9..=1.1).contains(&m) && (v / want_var - 1.0).abs() <= 0.3;
    report(
        "10 (MLE parity)",
        ok,
        &format!(
            "mean = {m:.4} (band [0.9, 1.1]); var = {v:.5} vs 2 theta / T = {want_var:.5} (30%)"
        ),
    );
}

#[test]
fn criterion_11_discrete_observations() {
    let rule = mesh_check(0.5, 0.1, 10_000, 1e4f64.powf(-0.8)).unwrap();
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::DiscreteVsContinuous);
    config.discrete_delta = Some(0.05);
    let rep = run_experiment(&config).unwrap();
    let diffs = rep.paired_diffs.as_ref().unwrap();
    let mean_abs = mean(&diffs.iter().map(|d| d.abs()).collect::<Vec<f64>>());
    report(
        "11 (discrete observations)",
        rule.ok && mean_abs <= 0.02,
        &format!(
            "mesh rule N=1e4, delta=N^-0.8: ok = {} (margin {:.3}); paired |diff| mean = {mean_abs:.3e} (tol 0.02)",
            rule.ok, rule.margin
        ),
    );
}

#[test]
fn criterion_12_second_kind_decay() {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, model) in [
        ("lamperti_fbm(0.7)", NoiseModel::lamperti_fbm(0.7)),
        (
            "lamperti_bifbm(0.6,0.8)",
            NoiseModel::lamperti_bifbm(0.6, 0.8),
        ),
    ] {
        let ctx = KernelContext::new(model, 1.0).unwrap();
        let pts: Vec<(f64, f64)> = (0..=45)
            .map(|i| {
                let t = 1.0 + 0.2 * i as f64;
                (t, ctx.autocov(t).abs().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum::<f64>();
        details.push(format!("{name}: slope {slope:.4}"));
        ok &= slope <= -0.5;
    }
    report(
        "12 (second-kind decay)",
        ok,
        &format!(
            "{} (bound -0.5 theta; the exact fractional second-kind rate is theta (1/H - 1) = 0.4286 theta \
             for H = 0.7, so that half of the bound is not attainable by the construction itself)",
            details.join("; ")
        ),
    );
}

#[test]
fn criterion_13_initial_condition() {
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::InitialCondition);
    config.xi = Some(5.0);
    let rep = run_experiment(&config).unwrap();
    report(
        "13 (initial condition)",
        (rep.mean - 1.0).abs() <= 0.05,
        &format!("mean = {:.4} (band 1 +/- 0.05) with xi = 5", rep.mean),
    );
}

#[test]
fn criterion_14_determinism() {
    let mut config = base_config(NoiseModel::brownian(), ExperimentKind::Normality);
    config.t_max = 200.0;
    config.replications = 200;
    let a = run_experiment_with_threads(&config, 1).unwrap();
    let b = run_experiment_with_threads(&config, 1).unwrap();
    let c = run_experiment_with_threads(&config, 8).unwrap();
    let (ba, bb, bc) = (
        serde_json::to_vec(&a).unwrap(),
        serde_json::to_vec(&b).unwrap(),
        serde_json::to_vec(&c).unwrap(),
    );
    report(
        "14 (determinism)",
        ba == bb && ba == bc,
        &format!(
            "report bytes: run1 == run2: {}, 1 thread == 8 threads: {} ({} bytes)",
            ba == bb,
            ba == bc,
            ba.len()
        ),
    );
}
