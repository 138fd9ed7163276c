//! Deterministic Monte Carlo experiment runner.
//!
//! Each replication is a pure function of (master seed, replication index):
//! per-replication seeds come from dedicated RNG streams, so reports are
//! byte-identical across runs and across worker-thread counts. Replications
//! execute in parallel; aggregation walks the results in replication order.

use crate::baselines::{least_squares_estimate, MomentTheta};
use crate::error::{Error, Result};
use crate::estimator::{
    estimate_continuous, estimate_discrete, estimate_stationary, mesh_check, MeshCheck,
};
use crate::kernel::KernelContext;
use crate::noise::{Flavor, NoiseModel};
use crate::rng::CounterRng;
use crate::sampler::{
    Grid, NoiseIncrementSampler, PathKind, PathSample, StationarySampler, ZeroStartSampler,
};
use crate::solver::{shift_initial, solve_zero_start};
use crate::special::normal_cdf;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// What a Monte Carlo run demonstrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Distribution of the estimate around the truth.
    Consistency,
    /// Standardized estimates against the normal law (KS distance).
    Normality,
    /// Finite-horizon bias of the mean square, plus the stationary variant.
    Bias,
    /// Decay of the least-squares estimate towards zero.
    LseDecay,
    /// Discrete-observation estimate against the continuous one on the same
    /// paths.
    DiscreteVsContinuous,
    /// Estimation from a path started away from zero.
    InitialCondition,
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: NoiseModel,
    pub theta_true: f64,
    pub t_max: f64,
    pub dt: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub experiment: ExperimentKind,
    /// Observation spacing for the discrete-observation experiment
    /// (must be an integer multiple of `dt`).
    #[serde(default)]
    pub discrete_delta: Option<f64>,
    /// Initial value for the shifted-start experiment.
    #[serde(default)]
    pub xi: Option<f64>,
    /// Standardize with the true parameter instead of the per-replication
    /// estimate (isolates the central-limit error from the plug-in error).
    #[serde(default)]
    pub standardize_at_truth: bool,
}

/// Wrapper for the on-disk TOML layout (`[experiment]` table).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub experiment: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ExperimentFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("experiment config: {e}")))?;
        file.experiment.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.model.check_params()?;
        if !(self.theta_true > 0.0) {
            return Err(Error::Domain("theta_true must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Domain("need at least one replication".into()));
        }
        if !(self.dt > 0.0 && self.dt < self.t_max) {
            return Err(Error::Domain("need 0 < dt < t_max".into()));
        }
        match self.experiment {
            ExperimentKind::DiscreteVsContinuous => {
                let delta = self.discrete_delta.ok_or_else(|| {
                    Error::Domain("discrete experiment needs discrete_delta".into())
                })?;
                let ratio = delta / self.dt;
                if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
                    return Err(Error::Domain(
                        "discrete_delta must be an integer multiple of dt".into(),
                    ));
                }
            }
            ExperimentKind::InitialCondition if self.xi.is_none() => {
                return Err(Error::Domain(
                    "initial-condition experiment needs xi".into(),
                ));
            }
            _ => {}
        }
        Ok(self)
    }
}

/// A replication that could not produce an estimate, kept for replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepFailure {
    pub replication: usize,
    pub seed: u64,
    pub message: String,
}

/// Monte Carlo report. Serialization is fully deterministic for a fixed
/// config; wall time is kept in memory only so report bytes stay
/// reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Primary estimate per replication (mean-square estimator, or the
    /// least-squares value for the decay experiment).
    pub estimates: Vec<f64>,
    /// Empirical mean square per replication (`psi` of the estimate).
    pub mean_squares: Vec<f64>,
    /// Master statistic per replication, when the experiment has one.
    pub standardized: Option<Vec<f64>>,
    /// Stationary-variant estimates (bias experiment only).
    pub sae_estimates: Option<Vec<f64>>,
    pub sae_mean_squares: Option<Vec<f64>>,
    /// Discrete-minus-continuous estimate per replication (discrete
    /// experiment only).
    pub paired_diffs: Option<Vec<f64>>,
    /// KS distance of the standardized sample against the normal law.
    pub ks_distance: Option<f64>,
    pub mean: f64,
    pub sd: f64,
    pub bias: f64,
    /// Mesh rule evaluated at the experiment's (N, delta) (discrete
    /// experiment only).
    pub mesh: Option<MeshCheck>,
    pub failures: Vec<RepFailure>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Kolmogorov–Smirnov distance between the empirical law of `sample` and
/// the standard normal distribution.
pub fn ks_distance(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Domain("KS distance needs a nonempty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf(x);
        let hi = (i as f64 + 1.0) / n - phi;
        let lo = phi - i as f64 / n;
        sup = sup.max(hi.abs()).max(lo.abs());
    }
    Ok(sup)
}

enum SimPlan {
    /// Noise synthesis plus the pathwise solve.
    NoiseAndSolve(NoiseIncrementSampler),
    /// Direct zero-start sampling (second-kind models).
    DirectX(ZeroStartSampler),
    /// Stationary sampling; zero-start paths derive from the exact identity
    /// `X_t = U_t - e^{-theta t} U_0`.
    StationaryU(StationarySampler),
}

impl SimPlan {
    fn sample_x(&self, theta: f64, seed: u64) -> Result<PathSample> {
        match self {
            SimPlan::NoiseAndSolve(s) => solve_zero_start(&s.sample(seed), theta),
            SimPlan::DirectX(s) => Ok(s.sample(seed)),
            SimPlan::StationaryU(s) => {
                let u = s.sample(seed);
                Ok(x_from_stationary(&u, theta))
            }
        }
    }
}

fn x_from_stationary(u: &PathSample, theta: f64) -> PathSample {
    let u0 = u.values[0];
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| v - (-theta * u.grid.time(k)).exp() * u0)
        .collect();
    PathSample {
        grid: u.grid,
        values,
        model: u.model.clone(),
        theta: Some(theta),
        seed: u.seed,
        kind: PathKind::ZeroStart,
    }
}

struct RepOutcome {
    estimate: f64,
    mean_square: f64,
    standardized: Option<f64>,
    sae: Option<(f64, f64)>,
    paired_diff: Option<f64>,
}

/// Run the experiment on the global thread pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<McReport> {
    let start = Instant::now();
    let config = config.clone().validated()?;
    let grid = Grid::from_horizon(config.t_max, config.dt)?;
    let theta = config.theta_true;
    let ctx_true = KernelContext::new(config.model.clone(), theta)?;

    let plan = match (config.experiment, config.model.flavor()) {
        (ExperimentKind::Bias, _) => {
            SimPlan::StationaryU(StationarySampler::new(ctx_true.clone(), grid)?)
        }
        (_, Flavor::Increment) => {
            SimPlan::NoiseAndSolve(NoiseIncrementSampler::new(config.model.clone(), grid)?)
        }
        (_, Flavor::Stationary) => SimPlan::DirectX(ZeroStartSampler::new(ctx_true.clone(), grid)?),
    };

    // Scale of the master statistic at the truth, for the
    // standardize-at-truth switch.
    let truth_rate = {
        let w = crate::asymptotics::asymptotic_variance(&ctx_true, grid.horizon());
        ctx_true.psi_prime().abs() / w.sqrt()
    };

    let run_rep = |rep: usize| -> (usize, u64, Result<RepOutcome>) {
        let seed = CounterRng::from_seed_stream(config.master_seed, rep as u64).next_u64();
        let out = run_one(&config, &plan, grid, theta, truth_rate, seed);
        (rep, seed, out)
    };

    let results: Vec<(usize, u64, Result<RepOutcome>)> = (0..config.replications)
        .into_par_iter()
        .map(run_rep)
        .collect();

    let mut estimates = Vec::with_capacity(config.replications);
    let mut mean_squares = Vec::with_capacity(config.replications);
    let mut standardized = Vec::new();
    let mut sae_estimates = Vec::new();
    let mut sae_mean_squares = Vec::new();
    let mut paired_diffs = Vec::new();
    let mut failures = Vec::new();
    for (rep, seed, out) in results {
        match out {
            Ok(o) => {
                estimates.push(o.estimate);
                mean_squares.push(o.mean_square);
                if let Some(s) = o.standardized {
                    standardized.push(s);
                }
                if let Some((e, m)) = o.sae {
                    sae_estimates.push(e);
                    sae_mean_squares.push(m);
                }
                if let Some(d) = o.paired_diff {
                    paired_diffs.push(d);
                }
            }
            Err(e) => failures.push(RepFailure {
                replication: rep,
                seed,
                message: e.to_string(),
            }),
        }
    }

    if failures.len() * 100 > config.replications {
        return Err(Error::Experiment(format!(
            "{} of {} replications failed (first: {})",
            failures.len(),
            config.replications,
            failures[0].message
        )));
    }

    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let sd = if estimates.len() > 1 {
        (estimates
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };
    let ks = if standardized.is_empty() {
        None
    } else {
        Some(ks_distance(&standardized)?)
    };
    let mesh = match config.experiment {
        ExperimentKind::DiscreteVsContinuous => {
            let delta = config.discrete_delta.expect("validated");
            let n_obs = (grid.horizon() / delta).round() as usize;
            Some(mesh_check(config.model.holder_index(), 0.1, n_obs, delta)?)
        }
        _ => None,
    };

    Ok(McReport {
        schema_version: 1,
        config: config.clone(),
        estimates,
        mean_squares,
        standardized: (!standardized.is_empty()).then_some(standardized),
        sae_estimates: (!sae_estimates.is_empty()).then_some(sae_estimates),
        sae_mean_squares: (!sae_mean_squares.is_empty()).then_some(sae_mean_squares),
        paired_diffs: (!paired_diffs.is_empty()).then_some(paired_diffs),
        ks_distance: ks,
        mean,
        sd,
        bias: mean - theta,
        mesh,
        failures,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Run the experiment on a dedicated pool with the given worker count
/// (results are identical for any count).
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: usize) -> Result<McReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Experiment(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

fn run_one(
    config: &ExperimentConfig,
    plan: &SimPlan,
    grid: Grid,
    theta: f64,
    truth_rate: f64,
    seed: u64,
) -> Result<RepOutcome> {
    let alpha = 0.05;
    match config.experiment {
        ExperimentKind::Consistency | ExperimentKind::Normality => {
            let x = plan.sample_x(theta, seed)?;
            let est = estimate_continuous(&x, &config.model, alpha)?;
            Ok(outcome_with_statistic(config, theta, truth_rate, est, None))
        }
        ExperimentKind::InitialCondition => {
            let x = plan.sample_x(theta, seed)?;
            let shifted = shift_initial(&x, theta, config.xi.expect("validated"));
            let est = estimate_continuous(&shifted, &config.model, alpha)?;
            Ok(outcome_with_statistic(config, theta, truth_rate, est, None))
        }
        ExperimentKind::Bias => {
            let u = match plan {
                SimPlan::StationaryU(s) => s.sample(seed),
                _ => unreachable!("bias experiment always plans stationary sampling"),
            };
            let x = x_from_stationary(&u, theta);
            let est = estimate_continuous(&x, &config.model, alpha)?;
            let sae = estimate_stationary(&u, &config.model, alpha)?;
            Ok(outcome_with_statistic(
                config,
                theta,
                truth_rate,
                est,
                Some((sae.theta_hat, sae.mean_square)),
            ))
        }
        ExperimentKind::LseDecay => {
            let x = plan.sample_x(theta, seed)?;
            let lse = least_squares_estimate(&x, &config.model, MomentTheta::Known(theta))?;
            Ok(RepOutcome {
                estimate: lse,
                mean_square: crate::estimator::mean_square_continuous(&x),
                standardized: None,
                sae: None,
                paired_diff: None,
            })
        }
        ExperimentKind::DiscreteVsContinuous => {
            let x = plan.sample_x(theta, seed)?;
            let continuous = estimate_continuous(&x, &config.model, alpha)?;
            let delta = config.discrete_delta.expect("validated");
            let stride = (delta / grid.dt()).round() as usize;
            let obs: Vec<f64> = x
                .values
                .iter()
                .copied()
                .skip(stride)
                .step_by(stride)
                .collect();
            let discrete = estimate_discrete(&obs, delta, &config.model, alpha)?;
            let diff = discrete.theta_hat - continuous.theta_hat;
            let mut out = outcome_with_statistic(config, theta, truth_rate, discrete, None);
            out.paired_diff = Some(diff);
            Ok(out)
        }
    }
}

fn outcome_with_statistic(
    config: &ExperimentConfig,
    theta: f64,
    truth_rate: f64,
    est: crate::estimator::EstimateResult,
    sae: Option<(f64, f64)>,
) -> RepOutcome {
    let standardized = if config.standardize_at_truth {
        (est.theta_hat - theta) * truth_rate
    } else {
        (est.theta_hat - theta) / est.std_error
    };
    RepOutcome {
        estimate: est.theta_hat,
        mean_square: est.mean_square,
        standardized: Some(standardized),
        sae,
        paired_diff: None,
    }
}
