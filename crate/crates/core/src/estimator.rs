//! The ergodic mean-square estimator of the mean-reversion parameter.
//!
//! The estimator inverts the stationary variance map on the empirical mean
//! square of the observed path: `theta_hat = psi^{-1}((1/T) int_0^T X_t^2 dt)`.
//! Strong consistency needs only ergodicity; asymptotic normality holds with
//! the master statistic `|psi'(theta)| / sqrt(w_theta(T)) (theta_hat - theta)`,
//! which is what the standard error and confidence interval here are built
//! from.

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::noise::NoiseModel;
use crate::quad::{geometric_edges, integrate_adaptive};
use crate::sampler::{PathKind, PathSample};
use crate::special::normal_quantile;
use serde::Serialize;

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Mean-square estimator on a zero-start (or arbitrary-start) path.
    MeanSquare,
    /// Same computation on a stationary path; unbiased through `psi`.
    MeanSquareStationary,
}

/// Point estimate with its sampling-theory companions.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub schema_version: u32,
    pub method: Method,
    pub theta_hat: f64,
    /// Empirical mean square the estimate inverts; `psi(theta_hat)` equals
    /// this by construction.
    pub mean_square: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub alpha: f64,
    /// Normal-approximation rate functional evaluated at the estimate.
    pub be_rate: f64,
    pub mesh_ok: Option<bool>,
    pub notes: Vec<String>,
}

/// Time average of the squared path by the trapezoid rule.
pub fn mean_square_continuous(path: &PathSample) -> f64 {
    let n = path.grid.n();
    let mut acc = 0.5 * (path.values[0] * path.values[0] + path.values[n] * path.values[n]);
    for &x in &path.values[1..n] {
        acc += x * x;
    }
    acc * path.grid.dt() / path.grid.horizon()
}

/// Left-Riemann time average of squared discrete observations at
/// `t_k = k delta`, `k = 1..=N`.
pub fn mean_square_discrete(observations: &[f64]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::DegenerateInput("no observations".into()));
    }
    // (1/(N delta)) sum x_k^2 delta = mean of squares.
    Ok(observations.iter().map(|x| x * x).sum::<f64>() / observations.len() as f64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    // alpha = 1 is the degenerate zero-width interval; alpha = 0 would ask
    // for an infinite one.
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "confidence level complement must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn finish(
    method: Method,
    model: &NoiseModel,
    mean_square: f64,
    t_horizon: f64,
    alpha: f64,
    reference: &KernelContext,
) -> Result<EstimateResult> {
    check_alpha(alpha)?;
    if mean_square == 0.0 {
        return Err(Error::DegenerateInput(
            "mean square is zero (constant-zero path)".into(),
        ));
    }
    let theta_hat = reference.psi_inverse(mean_square)?;
    let ctx_hat =
        KernelContext::with_order(model.clone(), theta_hat, reference.quadrature_order())?;
    let w = asymptotics::asymptotic_variance(&ctx_hat, t_horizon);
    let std_error = w.sqrt() / ctx_hat.psi_prime().abs();
    let be_rate = asymptotics::berry_esseen_rate(&ctx_hat, t_horizon);
    let (ci_lo, ci_hi) = interval_around(theta_hat, std_error, alpha);
    Ok(EstimateResult {
        schema_version: 1,
        method,
        theta_hat,
        mean_square,
        std_error,
        ci_lo,
        ci_hi,
        alpha,
        be_rate,
        mesh_ok: None,
        notes: Vec::new(),
    })
}

fn interval_around(theta_hat: f64, std_error: f64, alpha: f64) -> (f64, f64) {
    let z = normal_quantile(1.0 - alpha / 2.0);
    (theta_hat - z * std_error, theta_hat + z * std_error)
}

/// Plug-in confidence interval
/// `theta_hat +/- z_{1-alpha/2} sqrt(w_{theta_hat}(T)) / |psi'(theta_hat)|`.
pub fn confidence_interval(
    theta_hat: f64,
    model: &NoiseModel,
    t_horizon: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(theta_hat > 0.0) {
        return Err(Error::Domain(
            "confidence interval needs theta_hat > 0".into(),
        ));
    }
    let ctx = KernelContext::new(model.clone(), theta_hat)?;
    let w = asymptotics::asymptotic_variance(&ctx, t_horizon);
    let se = w.sqrt() / ctx.psi_prime().abs();
    Ok(interval_around(theta_hat, se, alpha))
}

/// Mean-square estimate from a continuously observed path (trapezoid time
/// average). Accepts zero-start or stationary paths: the time average of any
/// solution converges to the same limit regardless of the initial value.
pub fn estimate_continuous(
    path: &PathSample,
    model: &NoiseModel,
    alpha: f64,
) -> Result<EstimateResult> {
    if path.kind == PathKind::Noise {
        return Err(Error::Domain(
            "estimator expects a solution path, not the driving noise".into(),
        ));
    }
    if path.values.len() < 2 {
        return Err(Error::DegenerateInput(
            "path needs at least two points".into(),
        ));
    }
    let reference = KernelContext::new(model.clone(), 1.0)?;
    let ms = mean_square_continuous(path);
    finish(
        Method::MeanSquare,
        model,
        ms,
        path.grid.horizon(),
        alpha,
        &reference,
    )
}

/// Mean-square estimate from equidistant discrete observations
/// `x_k = X_{k delta}`, `k = 1..=N` (exact left-Riemann form).
pub fn estimate_discrete(
    observations: &[f64],
    delta: f64,
    model: &NoiseModel,
    alpha: f64,
) -> Result<EstimateResult> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let reference = KernelContext::new(model.clone(), 1.0)?;
    let ms = mean_square_discrete(observations)?;
    let t_horizon = delta * observations.len() as f64;
    let mut out = finish(Method::MeanSquare, model, ms, t_horizon, alpha, &reference)?;
    // Mesh admissibility at the conventional slack.
    out.mesh_ok = mesh_check(model.holder_index(), 0.1, observations.len(), delta)
        .ok()
        .map(|c| c.ok);
    out.notes.push(format!(
        "discrete observations: N = {}, delta = {delta}",
        observations.len()
    ));
    Ok(out)
}

/// The stationary variant: identical computation, but the input must be a
/// stationary path, which makes `psi(theta_hat)` exactly unbiased (the
/// estimate itself stays biased through the nonlinear inversion).
pub fn estimate_stationary(
    path: &PathSample,
    model: &NoiseModel,
    alpha: f64,
) -> Result<EstimateResult> {
    if path.kind != PathKind::Stationary {
        return Err(Error::Domain(
            "stationary estimator needs a stationary path".into(),
        ));
    }
    let reference = KernelContext::new(model.clone(), 1.0)?;
    let ms = mean_square_continuous(path);
    let mut out = finish(
        Method::MeanSquareStationary,
        model,
        ms,
        path.grid.horizon(),
        alpha,
        &reference,
    )?;
    out.method = Method::MeanSquareStationary;
    Ok(out)
}

/// Finite-horizon bias of the mean square of the zero-start solution:
/// `E[(1/T) int X^2] - psi = (1/T) [ psi (1 - e^{-2 theta T}) / (2 theta)
/// - 2 int_0^T e^{-theta t} r(t) dt ]`.
///
/// This is the direct time average of the zero-start variance
/// `gamma(t, t) = r(0) + e^{-2 theta t} r(0) - 2 e^{-theta t} r(t)`; the
/// positive-coefficient variant sometimes quoted for the cross term fails
/// the sign anchor `gamma(t, t) <= r(0)` and is contradicted by simulation
/// (see the Monte Carlo test).
pub fn bias_expansion(ctx: &KernelContext, t_horizon: f64) -> Result<f64> {
    if !(t_horizon > 0.0) {
        return Err(Error::Domain("bias expansion needs T > 0".into()));
    }
    let theta = ctx.theta();
    let cut = t_horizon.min(60.0 / theta);
    let edges = geometric_edges(cut, 0.25 / theta);
    let cross = integrate_adaptive(12, &edges, 1e-10, &|t: f64| {
        (-theta * t).exp() * ctx.autocov(t)
    });
    let front = ctx.psi() * (-(-2.0 * theta * t_horizon).exp_m1()) / (2.0 * theta);
    Ok((front - 2.0 * cross) / t_horizon)
}

/// Outcome of the observation-mesh admissibility rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshCheck {
    pub ok: bool,
    /// `log(N delta^beta)`; negative means the rule is satisfied.
    pub margin: f64,
    pub beta: f64,
}

/// Check the mesh rule `N delta^beta <= 1` with
/// `beta = (2H + 1/2)/(H + 1/2) - delta_slack`. Sequences should be checked
/// at their final `N`.
pub fn mesh_check(holder_index: f64, delta_slack: f64, n: usize, step: f64) -> Result<MeshCheck> {
    if !(holder_index > 0.0 && holder_index < 1.0) {
        return Err(Error::Domain(format!(
            "holder index must lie in (0, 1), got {holder_index}"
        )));
    }
    let beta0 = (2.0 * holder_index + 0.5) / (holder_index + 0.5);
    if !(delta_slack > 0.0 && delta_slack < beta0) {
        return Err(Error::Domain(format!(
            "slack must lie in (0, {beta0}), got {delta_slack}"
        )));
    }
    if !(step > 0.0) || n == 0 {
        return Err(Error::Domain("mesh check needs N >= 1 and step > 0".into()));
    }
    let beta = beta0 - delta_slack;
    let margin = (n as f64).ln() + beta * step.ln();
    Ok(MeshCheck {
        ok: margin <= 0.0,
        margin,
        beta,
    })
}
