//! Exact Gaussian path synthesis.
//!
//! Three samplers cover the objects the estimators consume:
//!
//! * noise paths `G` from the increment covariance (circulant embedding of
//!   the stationary increment sequence for Brownian/fractional noise,
//!   Cholesky of the increment covariance for mixtures),
//! * zero-start solution paths `X` from the zero-start covariance,
//! * stationary solution paths `U` from the stationary autocovariance.
//!
//! Samplers precompute their factorization once and can then produce any
//! number of paths; a path is a pure function of (model, grid, seed), so
//! identical inputs give bit-identical output on every platform and thread
//! schedule.
use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::noise::{Flavor, NoiseModel};
use crate::rng::CounterRng;
use nalgebra::{Cholesky, DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Maximum path length (in steps) for the FFT route.
pub const MAX_CIRCULANT_STEPS: usize = 1 << 22;
/// Maximum dimension for dense Cholesky factorizations.
pub const MAX_CHOLESKY_DIM: usize = 4096;

/// Uniform time grid `t_k = k dt`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dt: f64,
    n: usize,
}

impl Grid {
    pub fn new(dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!(
                "grid step must be positive, got {dt}"
            )));
        }
        if n == 0 {
            return Err(Error::Domain("grid needs at least one step".into()));
        }
        Ok(Self { dt, n })
    }

    /// Grid covering `[0, t_max]` with step `dt` (`n` rounded to nearest).
    pub fn from_horizon(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(Error::Domain(format!(
                "horizon must be positive, got {t_max}"
            )));
        }
        let n = (t_max / dt).round() as usize;
        Self::new(dt, n.max(1))
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid has `n + 1` points.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|k| self.time(k))
    }
}

/// What a sampled trajectory represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Driving noise `G` (starts at zero).
    Noise,
    /// Zero-start solution `X` (starts at zero).
    ZeroStart,
    /// Stationary solution `U`.
    Stationary,
}

/// A simulated trajectory on a uniform grid together with its provenance.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub model: NoiseModel,
    pub theta: Option<f64>,
    pub seed: u64,
    pub kind: PathKind,
}

/// Route selection for noise synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRoute {
    /// Circulant embedding for Brownian/fractional noise, Cholesky for the
    /// rest.
    Auto,
    Circulant,
    Cholesky,
}

/// Stationary covariance of the increment sequence on a uniform grid:
/// `Cov(dG_j, dG_{j+k}) = (v((k+1)dt) + v((k-1)dt) - 2 v(k dt)) / 2`.
fn increment_autocov(model: &NoiseModel, dt: f64, k: usize) -> Result<f64> {
    let k = k as f64;
    Ok(0.5
        * (model.variance((k + 1.0) * dt)? + model.variance((k - 1.0) * dt)?
            - 2.0 * model.variance(k * dt)?))
}

enum NoiseBackend {
    Circulant {
        fft: Arc<dyn Fft<f64>>,
        /// Scaled eigenvalue roots: index 0 and n use sqrt(lambda/m), the
        /// rest sqrt(lambda/(2m)).
        coeffs: Vec<f64>,
    },
    Cholesky(CholFactor),
}

/// Sampler for noise paths of an increment-flavor model.
pub struct NoiseIncrementSampler {
    model: NoiseModel,
    grid: Grid,
    backend: NoiseBackend,
}

impl NoiseIncrementSampler {
    pub fn new(model: NoiseModel, grid: Grid) -> Result<Self> {
        Self::with_route(model, grid, NoiseRoute::Auto)
    }

    pub fn with_route(model: NoiseModel, grid: Grid, route: NoiseRoute) -> Result<Self> {
        if model.flavor() != Flavor::Increment {
            return Err(Error::Flavor(
                "noise synthesis needs an increment-flavor model".into(),
            ));
        }
        model.check_params()?;
        let circulant_ok = matches!(model, NoiseModel::Brownian | NoiseModel::Fbm { .. });
        let use_circulant = match route {
            NoiseRoute::Auto => circulant_ok,
            NoiseRoute::Circulant => true,
            NoiseRoute::Cholesky => false,
        };
        let backend = if use_circulant {
            if grid.n() > MAX_CIRCULANT_STEPS {
                return Err(Error::Domain(format!(
                    "grid has {} steps, circulant route supports at most {MAX_CIRCULANT_STEPS}",
                    grid.n()
                )));
            }
            match Self::build_circulant(&model, grid)? {
                Some(backend) => backend,
                // Embedding not nonnegative: fall back to the dense route.
                None => NoiseBackend::Cholesky(Self::build_cholesky(&model, grid)?),
            }
        } else {
            NoiseBackend::Cholesky(Self::build_cholesky(&model, grid)?)
        };
        Ok(Self {
            model,
            grid,
            backend,
        })
    }

    /// Which backend ended up being used (the circulant builder may fall
    /// back).
    pub fn route(&self) -> NoiseRoute {
        match self.backend {
            NoiseBackend::Circulant { .. } => NoiseRoute::Circulant,
            NoiseBackend::Cholesky(_) => NoiseRoute::Cholesky,
        }
    }

    fn build_circulant(model: &NoiseModel, grid: Grid) -> Result<Option<NoiseBackend>> {
        let n = grid.n();
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
        for k in 0..=n {
            row.push(Complex::new(increment_autocov(model, grid.dt(), k)?, 0.0));
        }
        for k in (1..n).rev() {
            row.push(row[k]);
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let eigs: Vec<f64> = row.iter().map(|c| c.re).collect();
        let max = eigs.iter().cloned().fold(0.0f64, f64::max);
        let floor = -1e-10 * max.max(1e-300);
        if eigs.iter().any(|&l| l < floor) {
            return Ok(None);
        }
        let mf = m as f64;
        let coeffs: Vec<f64> = eigs
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let l = l.max(0.0);
                if k == 0 || k == n {
                    (l / mf).sqrt()
                } else {
                    (l / (2.0 * mf)).sqrt()
                }
            })
            .collect();
        Ok(Some(NoiseBackend::Circulant { fft, coeffs }))
    }

    fn build_cholesky(model: &NoiseModel, grid: Grid) -> Result<CholFactor> {
        let n = grid.n();
        if n > MAX_CHOLESKY_DIM {
            return Err(Error::Domain(format!(
                "grid has {n} steps, dense route supports at most {MAX_CHOLESKY_DIM}"
            )));
        }
        let mut acov = Vec::with_capacity(n);
        for k in 0..n {
            acov.push(increment_autocov(model, grid.dt(), k)?);
        }
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        CholFactor::new(cov)
    }

    /// Increments with the exact target covariance, then a cumulative sum.
    pub fn sample(&self, seed: u64) -> PathSample {
        let mut rng = CounterRng::from_seed_stream(seed, 0);
        let n = self.grid.n();
        let increments = match &self.backend {
            NoiseBackend::Circulant { fft, coeffs } => {
                let m = 2 * n;
                let mut spec = vec![Complex::new(0.0, 0.0); m];
                spec[0] = Complex::new(coeffs[0] * rng.next_gaussian(), 0.0);
                spec[n] = Complex::new(coeffs[n] * rng.next_gaussian(), 0.0);
                for k in 1..n {
                    let re = rng.next_gaussian();
                    let im = rng.next_gaussian();
                    spec[k] = Complex::new(coeffs[k] * re, coeffs[k] * im);
                    spec[m - k] = spec[k].conj();
                }
                let mut buf = spec;
                fft.process(&mut buf);
                buf.into_iter().take(n).map(|c| c.re).collect::<Vec<f64>>()
            }
            NoiseBackend::Cholesky(chol) => chol.sample(&mut rng),
        };
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for inc in increments {
            acc += inc;
            values.push(acc);
        }
        PathSample {
            grid: self.grid,
            values,
            model: self.model.clone(),
            theta: None,
            seed,
            kind: PathKind::Noise,
        }
    }
}

/// Dense lower-triangular factor with the jitter ladder
/// `0, 1e-12, 1e-10` (times `trace/n`) applied on failure.
struct CholFactor {
    l: DMatrix<f64>,
}

impl CholFactor {
    fn new(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        let scale = cov.trace() / n as f64;
        for &jitter in &[0.0, 1e-12, 1e-10] {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += jitter * scale;
            }
            if let Some(chol) = Cholesky::new(m) {
                return Ok(Self { l: chol.unpack() });
            }
        }
        Err(Error::Simulation(format!(
            "covariance of dimension {n} not positive definite after jitter ladder"
        )))
    }

    fn sample(&self, rng: &mut CounterRng) -> Vec<f64> {
        let n = self.l.nrows();
        let mut z = DVector::zeros(n);
        for i in 0..n {
            z[i] = rng.next_gaussian();
        }
        (&self.l * z).iter().cloned().collect()
    }
}

/// Sampler for stationary solution paths (Cholesky of the stationary
/// covariance on the full grid).
pub struct StationarySampler {
    ctx: KernelContext,
    grid: Grid,
    factor: CholFactor,
}

impl StationarySampler {
    pub fn new(ctx: KernelContext, grid: Grid) -> Result<Self> {
        let n = grid.n() + 1;
        if n > MAX_CHOLESKY_DIM {
            return Err(Error::Domain(format!(
                "stationary sampling supports at most {MAX_CHOLESKY_DIM} points, got {n}"
            )));
        }
        let acov: Vec<f64> = (0..n).map(|k| ctx.autocov(grid.time(k))).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        let factor = CholFactor::new(cov)?;
        Ok(Self { ctx, grid, factor })
    }

    pub fn sample(&self, seed: u64) -> PathSample {
        let mut rng = CounterRng::from_seed_stream(seed, 0);
        let values = self.factor.sample(&mut rng);
        PathSample {
            grid: self.grid,
            values,
            model: self.ctx.model().clone(),
            theta: Some(self.ctx.theta()),
            seed,
            kind: PathKind::Stationary,
        }
    }
}

/// Sampler for zero-start solution paths (Cholesky of the zero-start
/// covariance on the interior grid; the origin is pinned at zero).
pub struct ZeroStartSampler {
    ctx: KernelContext,
    grid: Grid,
    factor: CholFactor,
}

impl ZeroStartSampler {
    pub fn new(ctx: KernelContext, grid: Grid) -> Result<Self> {
        let n = grid.n();
        if n > MAX_CHOLESKY_DIM {
            return Err(Error::Domain(format!(
                "zero-start sampling supports at most {MAX_CHOLESKY_DIM} points, got {n}"
            )));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| {
            ctx.zero_start_cov(grid.time(i + 1), grid.time(j + 1))
        });
        let factor = CholFactor::new(cov)?;
        Ok(Self { ctx, grid, factor })
    }

    pub fn sample(&self, seed: u64) -> PathSample {
        let mut rng = CounterRng::from_seed_stream(seed, 0);
        let inner = self.factor.sample(&mut rng);
        let mut values = Vec::with_capacity(self.grid.n() + 1);
        values.push(0.0);
        values.extend(inner);
        PathSample {
            grid: self.grid,
            values,
            model: self.ctx.model().clone(),
            theta: Some(self.ctx.theta()),
            seed,
            kind: PathKind::ZeroStart,
        }
    }
}

/// One-shot noise path (builds the sampler, draws once).
pub fn sample_noise_increments(model: &NoiseModel, grid: Grid, seed: u64) -> Result<PathSample> {
    Ok(NoiseIncrementSampler::new(model.clone(), grid)?.sample(seed))
}

/// One-shot zero-start solution path sampled directly from its covariance.
pub fn sample_x_direct(ctx: &KernelContext, grid: Grid, seed: u64) -> Result<PathSample> {
    Ok(ZeroStartSampler::new(ctx.clone(), grid)?.sample(seed))
}

/// One-shot stationary solution path.
pub fn sample_u_stationary(ctx: &KernelContext, grid: Grid, seed: u64) -> Result<PathSample> {
    Ok(StationarySampler::new(ctx.clone(), grid)?.sample(seed))
}
