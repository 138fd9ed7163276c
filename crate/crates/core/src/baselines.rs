//! Comparison estimators: the naive least-squares form and the Brownian-case
//! maximum likelihood estimator.
//!
//! The least-squares numerator `int_0^T X dX` (divergence-type integral)
//! reduces in closed form to `(X_T^2 - E[X_T^2]) / 2`, so the estimator
//! collapses to a boundary term over a growing denominator and converges to
//! zero rather than to the true parameter — it is kept as a negative
//! control. The MLE is implemented for Brownian driving noise only, where
//! the martingale representation is the identity and the likelihood ratio
//! involves ordinary forward (Ito) sums.

use crate::error::{Error, Result};
use crate::estimator::{estimate_continuous, mean_square_continuous};
use crate::kernel::KernelContext;
use crate::noise::NoiseModel;
use crate::sampler::{PathKind, PathSample};

/// Where the centering moment `E[X_T^2]` of the least-squares numerator
/// comes from.
#[derive(Debug, Clone, Copy)]
pub enum MomentTheta {
    /// Evaluate the zero-start variance at a known parameter value.
    Known(f64),
    /// Estimate the parameter first (mean-square route), then plug in.
    PlugIn,
}

/// Least-squares estimate
/// `-(X_T^2 / 2 - E[X_T^2] / 2) / int_0^T X^2 dt`.
///
/// Under ergodicity this converges to zero almost surely: the denominator
/// grows like `psi(theta) T` while the numerator stays of bounded mean.
pub fn least_squares_estimate(
    path: &PathSample,
    model: &NoiseModel,
    moment: MomentTheta,
) -> Result<f64> {
    if path.kind != PathKind::ZeroStart {
        return Err(Error::Domain(
            "least-squares form is defined for zero-start paths".into(),
        ));
    }
    let t_horizon = path.grid.horizon();
    let denom = mean_square_continuous(path) * t_horizon;
    if denom == 0.0 {
        return Err(Error::DegenerateInput("zero path".into()));
    }
    let theta_ref = match moment {
        MomentTheta::Known(theta) => theta,
        MomentTheta::PlugIn => estimate_continuous(path, model, 0.05)?.theta_hat,
    };
    let ctx = KernelContext::new(model.clone(), theta_ref)?;
    let x_t = *path.values.last().expect("nonempty path");
    let centered = 0.5 * x_t * x_t - 0.5 * ctx.zero_start_cov(t_horizon, t_horizon);
    Ok(-centered / denom)
}

/// Maximum likelihood estimate for Brownian driving noise:
/// `-sum_k X_k (X_{k+1} - X_k) / int_0^T X^2 dt` (forward sums for the
/// stochastic integral, trapezoid for the denominator).
pub fn mle_brownian(path: &PathSample, model: &NoiseModel) -> Result<f64> {
    if !matches!(model, NoiseModel::Brownian) {
        return Err(Error::UnsupportedModel(
            "maximum likelihood is implemented for the Brownian kernel only".into(),
        ));
    }
    if path.kind == PathKind::Noise {
        return Err(Error::Domain("estimator expects a solution path".into()));
    }
    let t_horizon = path.grid.horizon();
    let denom = mean_square_continuous(path) * t_horizon;
    if denom == 0.0 {
        return Err(Error::DegenerateInput("zero path".into()));
    }
    let ito_sum: f64 = path.values.windows(2).map(|w| w[0] * (w[1] - w[0])).sum();
    Ok(-ito_sum / denom)
}
