//! Command-line interface: simulate paths, estimate the mean-reversion
//! parameter, evaluate the asymptotic quantities, and run Monte Carlo
//! experiments.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 numerical or simulation
//! failure, 4 estimate outside the attainable range.

use clap::{Args, Parser, Subcommand, ValueEnum};
use langevin::asymptotics::AsymptoticsReport;
use langevin::baselines::{least_squares_estimate, mle_brownian, MomentTheta};
use langevin::estimator::{estimate_continuous, estimate_discrete};
use langevin::harness::{run_experiment, run_experiment_with_threads, ExperimentConfig};
use langevin::io::{format_f64, read_path_csv, write_path_csv};
use langevin::kernel::KernelContext;
use langevin::noise::NoiseModel;
use langevin::sampler::{sample_u_stationary, sample_x_direct, Grid, PathKind};
use langevin::solver::solve_zero_start;
use langevin::{Error, Result};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "langevin",
    version,
    about = "Langevin-equation simulation and estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory and write it as CSV (`t,x`).
    Simulate(SimulateArgs),
    /// Estimate the mean-reversion parameter from a CSV trajectory.
    Estimate(EstimateArgs),
    /// Asymptotic quantities for a model at a given parameter and horizon.
    Asymptotics(AsymptoticsArgs),
    /// Run a Monte Carlo experiment described by a TOML config.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Brownian,
    Fbm,
    LampertiFbm,
    LampertiBifbm,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Noise model kind (use --model-json for mixtures).
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Hurst index for the fractional kinds.
    #[arg(long)]
    hurst: Option<f64>,
    /// Second bifractional parameter.
    #[arg(long)]
    kappa: Option<f64>,
    /// Full JSON model descriptor, e.g.
    /// '{"kind":"mixed","components":[{"kind":"brownian"},{"kind":"fbm","hurst":0.7}]}'.
    #[arg(long, conflicts_with_all = ["model", "hurst", "kappa"])]
    model_json: Option<String>,
}

impl ModelArgs {
    fn build(&self) -> Result<NoiseModel> {
        if let Some(json) = &self.model_json {
            let model: NoiseModel = serde_json::from_str(json)
                .map_err(|e| Error::Parse(format!("model descriptor: {e}")))?;
            model.check_params()?;
            return Ok(model);
        }
        let kind = self
            .model
            .ok_or_else(|| Error::Parse("missing --model (or --model-json)".into()))?;
        let hurst = |missing: &str| {
            self.hurst
                .ok_or_else(|| Error::Parse(format!("{missing} needs --hurst")))
        };
        let model = match kind {
            ModelKind::Brownian => NoiseModel::brownian(),
            ModelKind::Fbm => NoiseModel::fbm(hurst("fbm")?),
            ModelKind::LampertiFbm => NoiseModel::lamperti_fbm(hurst("lamperti-fbm")?),
            ModelKind::LampertiBifbm => NoiseModel::lamperti_bifbm(
                hurst("lamperti-bifbm")?,
                self.kappa
                    .ok_or_else(|| Error::Parse("lamperti-bifbm needs --kappa".into()))?,
            ),
        };
        model.check_params()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimKind {
    /// Driving noise path.
    Noise,
    /// Zero-start solution.
    ZeroStart,
    /// Stationary solution.
    Stationary,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Mean-reversion parameter (needed for solution paths).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "zero-start")]
    kind: SimKind,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Mean-square (ergodic) estimator.
    Ae,
    /// Least-squares comparison estimator.
    Lse,
    /// Brownian maximum likelihood.
    Mle,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV with header `t,x`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "ae")]
    method: MethodArg,
    /// Use the discrete-observation (left-Riemann) form.
    #[arg(long)]
    discrete: bool,
    /// Confidence level complement for the interval.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Reference parameter for the least-squares centering moment
    /// (defaults to plugging in the mean-square estimate).
    #[arg(long)]
    theta_ref: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    theta: f64,
    /// Horizon the rate functionals are evaluated at.
    #[arg(long)]
    t_max: f64,
    /// Nodes per axis for the exact quadratic-functional moments.
    #[arg(long, default_value_t = 16)]
    q_order: usize,
    /// Lags (comma separated) at which to report the autocovariance.
    #[arg(long, value_delimiter = ',')]
    r_at: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// TOML experiment description (table `[experiment]`).
    #[arg(long)]
    config: PathBuf,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: rayon's choice). Results do not depend on
    /// this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct AsymptoticsOutput {
    psi: f64,
    psi_prime: f64,
    r_samples: Vec<RSample>,
    #[serde(flatten)]
    report: AsymptoticsReport,
}

#[derive(Serialize)]
struct RSample {
    t: f64,
    r: f64,
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Parse(format!("serialize: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let model = args.model.build()?;
            let grid = Grid::from_horizon(args.t_max, args.dt)?;
            let need_theta = || {
                args.theta
                    .ok_or_else(|| Error::Parse("solution paths need --theta".into()))
            };
            let path = match args.kind {
                SimKind::Noise => {
                    langevin::sampler::sample_noise_increments(&model, grid, args.seed)?
                }
                SimKind::ZeroStart => {
                    let theta = need_theta()?;
                    match model.flavor() {
                        langevin::noise::Flavor::Increment => {
                            let noise = langevin::sampler::sample_noise_increments(
                                &model, grid, args.seed,
                            )?;
                            solve_zero_start(&noise, theta)?
                        }
                        langevin::noise::Flavor::Stationary => {
                            let ctx = KernelContext::new(model.clone(), theta)?;
                            sample_x_direct(&ctx, grid, args.seed)?
                        }
                    }
                }
                SimKind::Stationary => {
                    let ctx = KernelContext::new(model.clone(), need_theta()?)?;
                    sample_u_stationary(&ctx, grid, args.seed)?
                }
            };
            write_path_csv(&path, &args.out)?;
            eprintln!(
                "wrote {} points to {}",
                path.values.len(),
                args.out.display()
            );
            Ok(())
        }
        Command::Estimate(args) => {
            let model = args.model.build()?;
            let path = read_path_csv(&args.input, &model, PathKind::ZeroStart)?;
            match args.method {
                MethodArg::Ae => {
                    let result = if args.discrete {
                        estimate_discrete(&path.values[1..], path.grid.dt(), &model, args.alpha)?
                    } else {
                        estimate_continuous(&path, &model, args.alpha)?
                    };
                    emit_json(&result, args.out.as_ref())
                }
                MethodArg::Lse => {
                    let moment = match args.theta_ref {
                        Some(theta) => MomentTheta::Known(theta),
                        None => MomentTheta::PlugIn,
                    };
                    let value = least_squares_estimate(&path, &model, moment)?;
                    emit_json(
                        &serde_json::json!({
                            "schema_version": 1,
                            "method": "lse",
                            "theta_hat": value,
                        }),
                        args.out.as_ref(),
                    )
                }
                MethodArg::Mle => {
                    let value = mle_brownian(&path, &model)?;
                    emit_json(
                        &serde_json::json!({
                            "schema_version": 1,
                            "method": "mle",
                            "theta_hat": value,
                        }),
                        args.out.as_ref(),
                    )
                }
            }
        }
        Command::Asymptotics(args) => {
            let model = args.model.build()?;
            let ctx = KernelContext::new(model, args.theta)?;
            let report = AsymptoticsReport::compute(&ctx, args.t_max, args.q_order)?;
            let r_samples = args
                .r_at
                .iter()
                .map(|&t| RSample {
                    t,
                    r: ctx.autocov(t),
                })
                .collect();
            let output = AsymptoticsOutput {
                psi: ctx.psi(),
                psi_prime: ctx.psi_prime(),
                r_samples,
                report,
            };
            emit_json(&output, args.out.as_ref())
        }
        Command::Mc(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let config = ExperimentConfig::from_toml(&text)?;
            let report = match args.threads {
                Some(threads) => run_experiment_with_threads(&config, threads)?,
                None => run_experiment(&config)?,
            };
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Parse(format!("serialize: {e}")))?;
            std::fs::write(&args.out, json + "\n")?;
            eprintln!(
                "{} replications in {}s -> {} (mean {} sd {})",
                report.estimates.len(),
                format_f64(report.wall_time_secs),
                args.out.display(),
                format_f64(report.mean),
                format_f64(report.sd),
            );
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
