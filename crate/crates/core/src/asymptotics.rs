//! Asymptotic variance and normal-approximation machinery.
//!
//! Central objects, all built from the stationary autocovariance `r`:
//!
//! * `w(T) = (2/T^2) double-int r(t-s)^2 = (4/T^2) int_0^T r(t)^2 (T-t) dt`
//!   — the variance functional of the centered quadratic time average.
//!   (A `4/T` variant circulates; it is dimensionally inconsistent with the
//!   double-integral definition, which the Brownian anchor
//!   `T w(T) -> 4 int r^2` pins down.)
//! * `R(T) = int_0^T |r| / (T sqrt(w(T)))` — the rate that controls the
//!   uniform distance to the normal law.
//! * `sigma2 = 4 int_0^inf r^2 / psi'(theta)^2` — the classical squared
//!   rate when the tail is square-integrable, consistent with
//!   `T w(T) / psi'(theta)^2`.
//! * exact second/fourth moments of the quadratic functional
//!   `Q_T = (1/T) int (X_t^2 - E X_t^2) dt`, whose excess kurtosis feeds the
//!   fourth-moment normal bound `2 sqrt(1/6) sqrt(E[F^4] - 3)`.

use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::noise::NoiseModel;
use crate::quad::{geometric_edges, integrate_adaptive, legendre};
use serde::Serialize;

/// Rate regime of the normal approximation for a given noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateRegime {
    /// Square-integrable autocovariance: rate `T^{-1/2}`.
    Classical,
    /// Long-range dependence below the breakdown point: rate
    /// `T^{-exponent}` with `exponent = (3 - 4H)/2 < 1/2`.
    SlowPolynomial { exponent: f64 },
    /// Boundary case `H = 3/4`: rate `1/sqrt(log T)`.
    LogRate,
    /// `H > 3/4`: the quadratic functional has a non-Gaussian limit; no
    /// normal rate is provided.
    None,
}

/// Classify the regime by the effective (largest) long-memory index of the
/// noise.
pub fn fou_rate_regime(h: f64) -> RateRegime {
    if (h - 0.75).abs() < 1e-12 {
        RateRegime::LogRate
    } else if h > 0.75 {
        RateRegime::None
    } else if h > 0.5 {
        RateRegime::SlowPolynomial {
            exponent: (3.0 - 4.0 * h) / 2.0,
        }
    } else {
        RateRegime::Classical
    }
}

/// Largest long-memory index among increment components (the slowest
/// component dictates the rate); second-kind models decay exponentially.
fn effective_rate_index(model: &NoiseModel) -> Option<f64> {
    match model {
        NoiseModel::Brownian => Some(0.5),
        NoiseModel::Fbm { hurst } => Some(*hurst),
        NoiseModel::Mixed { components } => components
            .iter()
            .filter_map(effective_rate_index)
            .fold(None, |acc, h| Some(acc.map_or(h, |a: f64| a.max(h)))),
        NoiseModel::LampertiFbm { .. } | NoiseModel::LampertiBifbm { .. } => None,
    }
}

/// Rate regime of a noise model.
pub fn rate_regime(model: &NoiseModel) -> RateRegime {
    match effective_rate_index(model) {
        Some(h) => fou_rate_regime(h),
        // Exponential decay: classical rate.
        None => RateRegime::Classical,
    }
}

fn r_squared_weighted(ctx: &KernelContext, t_horizon: f64) -> f64 {
    let edges = geometric_edges(t_horizon, (0.25 / ctx.theta()).min(t_horizon / 4.0));
    integrate_adaptive(12, &edges, 1e-8, &|t: f64| {
        let r = ctx.autocov(t);
        r * r * (t_horizon - t)
    })
}

/// Asymptotic variance functional `w(T)`.
pub fn asymptotic_variance(ctx: &KernelContext, t_horizon: f64) -> f64 {
    assert!(t_horizon > 0.0, "horizon must be positive");
    4.0 / (t_horizon * t_horizon) * r_squared_weighted(ctx, t_horizon)
}

/// Normal-approximation rate functional `R(T)`.
pub fn berry_esseen_rate(ctx: &KernelContext, t_horizon: f64) -> f64 {
    assert!(t_horizon > 0.0, "horizon must be positive");
    let edges = geometric_edges(t_horizon, (0.25 / ctx.theta()).min(t_horizon / 4.0));
    let abs_int = integrate_adaptive(12, &edges, 1e-8, &|t: f64| ctx.autocov(t).abs());
    let w = asymptotic_variance(ctx, t_horizon);
    abs_int / (t_horizon * w.sqrt())
}

/// Power-law tail terms of `r` (coefficient, exponent), for the analytic
/// tail of `int r^2`. Empty for exponentially decaying models.
fn power_tail_terms(model: &NoiseModel, theta: f64) -> Vec<(f64, f64)> {
    match model {
        NoiseModel::Fbm { hurst } if (*hurst - 0.5).abs() > 1e-12 => {
            vec![(
                hurst * (2.0 * hurst - 1.0) / (theta * theta),
                2.0 * hurst - 2.0,
            )]
        }
        NoiseModel::Mixed { components } => components
            .iter()
            .flat_map(|c| power_tail_terms(c, theta))
            .collect(),
        _ => Vec::new(),
    }
}

/// Classical squared rate `sigma2 = 4 int_0^inf r^2 / psi'(theta)^2`.
///
/// The tail of the integral is added analytically from the power-law tail
/// of `r` (models whose autocovariance decays exponentially have negligible
/// tails beyond the integration window). A probe of `r(t)^2 t` on a doubling
/// grid guards integrability: if it fails to decay, the integral diverges
/// and no classical rate exists.
pub fn classical_variance(ctx: &KernelContext) -> Result<f64> {
    let theta = ctx.theta();
    // Square-integrability needs every tail pair to integrate: dominant
    // exponent strictly below -1/2 for r, i.e. 4H - 3 < 0.
    let tails = power_tail_terms(ctx.model(), theta);
    for &(_, e) in &tails {
        if 2.0 * e + 1.0 >= -1e-9 {
            return Err(Error::NonIntegrable(format!(
                "autocovariance tail exponent {e} gives non-integrable square"
            )));
        }
    }
    // Probe r(t)^2 t -> 0 on a doubling grid.
    let probes: Vec<f64> = (0..5).map(|i| 512.0 * 2f64.powi(i) / theta).collect();
    let vals: Vec<f64> = probes
        .iter()
        .map(|&t| {
            let r = ctx.autocov(t);
            r * r * t
        })
        .collect();
    if vals[4] > vals[0] * 0.9 && vals[4] > 1e-12 * ctx.psi() * ctx.psi() {
        return Err(Error::NonIntegrable(
            "probe grid shows r(t)^2 t not vanishing".into(),
        ));
    }
    let t_star = 4096.0 / theta;
    let edges = geometric_edges(t_star, 0.25 / theta);
    let head = integrate_adaptive(12, &edges, 1e-9, &|t: f64| {
        let r = ctx.autocov(t);
        r * r
    });
    // Analytic tail: int_{T*}^inf (sum c_i t^{e_i})^2 expanded pairwise.
    let mut tail = 0.0;
    for &(ci, ei) in &tails {
        for &(cj, ej) in &tails {
            let e = ei + ej;
            tail += ci * cj * t_star.powf(e + 1.0) / (-(e + 1.0));
        }
    }
    let prime = ctx.psi_prime();
    Ok(4.0 * (head + tail) / (prime * prime))
}

/// Exact second and fourth moments of the quadratic functional by tensor
/// Gauss-Legendre quadrature of the zero-start covariance over `[0, T]^2`
/// and (through the trace identity) `[0, T]^4`.
///
/// The covariance has a ridge along the diagonal on the correlation scale
/// `1/theta`, so a single global rule stalls; the axis is split into cells
/// of that width with `grid_order` nodes each. Both moments use the same
/// node set, which keeps the discretized excess kurtosis
/// `q4/q2^2 - 3 = 6 tr(M^4)/tr(M^2)^2 >= 0` nonnegative exactly.
pub fn q_moments(ctx: &KernelContext, t_horizon: f64, grid_order: usize) -> Result<(f64, f64)> {
    if !(t_horizon > 0.0) {
        return Err(Error::Domain("q moments need T > 0".into()));
    }
    if !(4..=24).contains(&grid_order) {
        return Err(Error::Domain(
            "q-moment grid order must lie in [4, 24] (cost grows as order^3)".into(),
        ));
    }
    let cells = ((t_horizon * ctx.theta() / 0.5).ceil() as usize).clamp(1, 64);
    let rule = legendre(grid_order);
    let width = t_horizon / cells as f64;
    let half = 0.5 * width;
    let mut nodes = Vec::with_capacity(cells * grid_order);
    let mut weights = Vec::with_capacity(cells * grid_order);
    for c in 0..cells {
        let mid = (c as f64 + 0.5) * width;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    let m = nodes.len();
    // A[i][j] = w_i gamma(t_i, t_j); moments are traces of powers of A.
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let g = ctx.zero_start_cov(nodes[i], nodes[j]);
            a[(i, j)] = weights[i] * g;
            a[(j, i)] = weights[j] * g;
        }
    }
    let t2 = t_horizon * t_horizon;
    // I2 = double-int gamma^2 = tr(A A^T-free form): sum_ij w_i w_j g_ij^2.
    let mut i2 = 0.0;
    for i in 0..m {
        for j in 0..m {
            i2 += a[(i, j)] * a[(j, i)];
        }
    }
    let b = &a * &a;
    let mut i4 = 0.0;
    for i in 0..m {
        for j in 0..m {
            i4 += b[(i, j)] * b[(j, i)];
        }
    }
    let q2 = 2.0 / t2 * i2;
    let q4 = 12.0 * (i2 / t2) * (i2 / t2) + 24.0 / (t2 * t2) * i4;
    Ok((q2, q4))
}

/// Fourth-moment normal bound for a unit-variance element of the second
/// chaos: `2 sqrt(1/6) sqrt(max(0, q4/q2^2 - 3))`.
pub fn fourth_moment_bound(q2: f64, q4: f64) -> f64 {
    assert!(q2 > 0.0, "q2 must be positive");
    let excess = (q4 / (q2 * q2) - 3.0).max(0.0);
    2.0 * (1.0f64 / 6.0).sqrt() * excess.sqrt()
}

/// Consistency report for the self-similar scaling of `int_0^inf r^2`:
/// direct quadrature at `theta` against `theta^{-p} sigma_H^2` for the two
/// candidate powers `p = 2H` and `p = 4H + 1`. Returns
/// `(direct, scaled_2h, scaled_4h1)`; the self-similarity argument fixes
/// `p = 4H + 1`, which the quadrature confirms.
pub fn fou_sigma_scaling_check(hurst: f64, theta: f64) -> Result<(f64, f64, f64)> {
    let unit = KernelContext::new(NoiseModel::fbm(hurst), 1.0)?;
    let at = KernelContext::new(NoiseModel::fbm(hurst), theta)?;
    let prime_sq = |c: &KernelContext| c.psi_prime() * c.psi_prime();
    let sigma_h2 = classical_variance(&unit)? * prime_sq(&unit) / 4.0;
    let direct = classical_variance(&at)? * prime_sq(&at) / 4.0;
    Ok((
        direct,
        theta.powf(-2.0 * hurst) * sigma_h2,
        theta.powf(-(4.0 * hurst + 1.0)) * sigma_h2,
    ))
}

/// Bundle of the asymptotic quantities for one (model, theta, T).
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub schema_version: u32,
    pub w: f64,
    pub r_rate: f64,
    pub sigma2_classical: Option<f64>,
    pub rate_regime: RateRegime,
    /// Fourth-moment normal bound from the exact Q-moments.
    pub be_bound: f64,
    pub q2_exact: f64,
    pub q4_exact: f64,
}

impl AsymptoticsReport {
    pub fn compute(ctx: &KernelContext, t_horizon: f64, q_order: usize) -> Result<Self> {
        let w = asymptotic_variance(ctx, t_horizon);
        let r_rate = berry_esseen_rate(ctx, t_horizon);
        let sigma2_classical = match classical_variance(ctx) {
            Ok(s) => Some(s),
            Err(Error::NonIntegrable(_)) => None,
            Err(e) => return Err(e),
        };
        let (q2, q4) = q_moments(ctx, t_horizon, q_order)?;
        Ok(AsymptoticsReport {
            schema_version: 1,
            w,
            r_rate,
            sigma2_classical,
            rate_regime: rate_regime(ctx.model()),
            be_bound: fourth_moment_bound(q2, q4),
            q2_exact: q2,
            q4_exact: q4,
        })
    }
}
