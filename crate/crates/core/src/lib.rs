//! Simulation and parameter estimation for the Langevin equation
//! `dU_t = -theta U_t dt + dG_t` driven by a centered stationary-increment
//! Gaussian noise `G`.
//!
//! The crate is organised around the variance function `v(t) = Var(G_t)` of
//! the noise, from which everything else is computed:
//!
//! * [`noise`] — noise model descriptors, their variance functions and the
//!   increment covariance kernel, plus model validation.
//! * [`kernel`] — the stationary variance map `psi`, its derivatives and
//!   inverse, the stationary autocovariance `r` and the zero-start
//!   covariance.
//! * [`sampler`] — exact Gaussian path synthesis (circulant embedding and
//!   Cholesky routes) with a deterministic counter-based RNG.
//! * [`solver`] — pathwise solution of the equation from a noise path via an
//!   exponential integrator.
//! * [`estimator`] — the ergodic mean-square estimator of `theta` in
//!   continuous and discrete-observation form, confidence intervals, bias
//!   expansion and the observation-mesh check.
//! * [`asymptotics`] — asymptotic variance and normal-approximation rate
//!   functionals, exact moments of the quadratic functional, rate regimes.
//! * [`baselines`] — least-squares and Brownian maximum-likelihood
//!   comparison estimators.
//! * [`harness`] — deterministic Monte Carlo experiment runner.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values;
// indexed loops mirror the matrix algebra they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod baselines;
mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod noise;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use estimator::EstimateResult;
pub use harness::{ExperimentConfig, McReport};
pub use kernel::KernelContext;
pub use noise::NoiseModel;
pub use sampler::{Grid, PathKind, PathSample};
