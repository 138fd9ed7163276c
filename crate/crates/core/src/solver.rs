//! Pathwise solution of the Langevin equation from a noise path.
//!
//! With noise `G` and mean-reversion `theta`, the zero-start solution is
//! `X_t = G_t - theta int_0^t e^{-theta (t - s)} G_s ds`. The running
//! integral obeys the exact one-step relation
//! `I_{k+1} = e^{-theta dt} I_k + int_{t_k}^{t_{k+1}} e^{-theta(t_{k+1}-s)} G_s ds`,
//! so only the local integral of the continuous path is approximated
//! (trapezoidal closure); the exponential damping is exact in `theta`.

use crate::error::{Error, Result};
use crate::sampler::{PathKind, PathSample};

/// Carries the running damped integral so a solve can be resumed.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialIntegrator {
    theta: f64,
    integral: f64,
}

impl ExponentialIntegrator {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "theta must be positive, got {theta}"
            )));
        }
        Ok(Self {
            theta,
            integral: 0.0,
        })
    }

    /// Advance over one step carrying the noise from `g0` to `g1`, returning
    /// the solution value at the end of the step.
    pub fn step(&mut self, g0: f64, g1: f64, dt: f64) -> f64 {
        let decay = (-self.theta * dt).exp();
        // Trapezoidal closure of int e^{-theta (t1 - s)} G_s ds on the step.
        let local = 0.5 * dt * (decay * g0 + g1);
        self.integral = decay * self.integral + local;
        g1 - self.theta * self.integral
    }
}

/// Solve the equation pathwise from a noise path, starting at zero.
pub fn solve_zero_start(noise: &PathSample, theta: f64) -> Result<PathSample> {
    if noise.kind != PathKind::Noise {
        return Err(Error::Domain(
            "pathwise solve expects a noise path as input".into(),
        ));
    }
    let mut integ = ExponentialIntegrator::new(theta)?;
    let dt = noise.grid.dt();
    let mut values = Vec::with_capacity(noise.values.len());
    values.push(0.0);
    for w in noise.values.windows(2) {
        values.push(integ.step(w[0], w[1], dt));
    }
    Ok(PathSample {
        grid: noise.grid,
        values,
        model: noise.model.clone(),
        theta: Some(theta),
        seed: noise.seed,
        kind: PathKind::ZeroStart,
    })
}

/// Shift the initial condition: the solution started from `xi` is the
/// zero-start solution plus `e^{-theta t} xi`.
pub fn shift_initial(path: &PathSample, theta: f64, xi: f64) -> PathSample {
    let values = path
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| x + (-theta * path.grid.time(k)).exp() * xi)
        .collect();
    PathSample {
        grid: path.grid,
        values,
        model: path.model.clone(),
        theta: path.theta,
        seed: path.seed,
        kind: path.kind,
    }
}
