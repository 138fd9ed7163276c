//! Noise model descriptors: variance functions, increment covariance, and
//! validation of the structural assumptions the estimator relies on.
//!
//! Two flavors exist. "Increment" models (Brownian motion, fractional
//! Brownian motion, independent mixtures of those) are described by the
//! variance function `v(t) = Var(G_t)` of the noise, extended to negative
//! arguments by `v(|t|)` since stationary increments force an even variance
//! function. "Stationary" models (the second-kind processes obtained by the
//! inverse Lamperti time change of a self-similar process) carry no `v`;
//! their stationary covariance is available in closed form in the kernel
//! module instead.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Declarative description of the driving noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Standard Brownian motion, `v(t) = t`.
    Brownian,
    /// Fractional Brownian motion, `v(t) = t^{2H}` with `H` in (0, 1).
    Fbm { hurst: f64 },
    /// Sum of independent increment-flavor components; `v` is the sum of the
    /// component variance functions.
    Mixed { components: Vec<NoiseModel> },
    /// Second-kind process driven by fractional Brownian motion through the
    /// inverse Lamperti time change.
    LampertiFbm { hurst: f64 },
    /// Second-kind process driven by bifractional Brownian motion
    /// (`H` in (0, 1), `K` in (0, 1], self-similarity index `HK`).
    LampertiBifbm { hurst: f64, kappa: f64 },
}

/// Whether a model is described by its variance function or by a closed-form
/// stationary covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Increment,
    Stationary,
}

impl NoiseModel {
    /// Convenience constructors.
    pub fn brownian() -> Self {
        NoiseModel::Brownian
    }

    pub fn fbm(hurst: f64) -> Self {
        NoiseModel::Fbm { hurst }
    }

    pub fn mixed(components: Vec<NoiseModel>) -> Self {
        NoiseModel::Mixed { components }
    }

    pub fn lamperti_fbm(hurst: f64) -> Self {
        NoiseModel::LampertiFbm { hurst }
    }

    pub fn lamperti_bifbm(hurst: f64, kappa: f64) -> Self {
        NoiseModel::LampertiBifbm { hurst, kappa }
    }

    /// Check parameter ranges and structural constraints.
    pub fn check_params(&self) -> Result<()> {
        match self {
            NoiseModel::Brownian => Ok(()),
            NoiseModel::Fbm { hurst } | NoiseModel::LampertiFbm { hurst } => {
                if *hurst > 0.0 && *hurst < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "hurst must lie in (0, 1), got {hurst}"
                    )))
                }
            }
            NoiseModel::LampertiBifbm { hurst, kappa } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(Error::Domain(format!(
                        "hurst must lie in (0, 1), got {hurst}"
                    )));
                }
                if !(*kappa > 0.0 && *kappa <= 1.0) {
                    return Err(Error::Domain(format!(
                        "kappa must lie in (0, 1], got {kappa}"
                    )));
                }
                Ok(())
            }
            NoiseModel::Mixed { components } => {
                if components.is_empty() {
                    return Err(Error::Domain("mixed model needs components".into()));
                }
                for c in components {
                    c.check_params()?;
                    if c.flavor() != Flavor::Increment {
                        return Err(Error::Domain(
                            "mixed components must be increment-flavor models".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            NoiseModel::Brownian | NoiseModel::Fbm { .. } | NoiseModel::Mixed { .. } => {
                Flavor::Increment
            }
            NoiseModel::LampertiFbm { .. } | NoiseModel::LampertiBifbm { .. } => Flavor::Stationary,
        }
    }

    /// Hölder index of the paths: `H` for (Lamperti-)fBm, 1/2 for Brownian,
    /// `HK` for the bifractional case, and the minimum over mixture
    /// components.
    pub fn holder_index(&self) -> f64 {
        match self {
            NoiseModel::Brownian => 0.5,
            NoiseModel::Fbm { hurst } | NoiseModel::LampertiFbm { hurst } => *hurst,
            NoiseModel::LampertiBifbm { hurst, kappa } => hurst * kappa,
            NoiseModel::Mixed { components } => components
                .iter()
                .map(|c| c.holder_index())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Variance function `v(t) = Var(G_t)`, extended evenly to `t < 0`.
    /// Only increment-flavor models carry one.
    pub fn variance(&self, t: f64) -> Result<f64> {
        match self {
            NoiseModel::Brownian => Ok(t.abs()),
            NoiseModel::Fbm { hurst } => Ok(t.abs().powf(2.0 * hurst)),
            NoiseModel::Mixed { components } => {
                let mut sum = 0.0;
                for c in components {
                    sum += c.variance(t)?;
                }
                Ok(sum)
            }
            _ => Err(Error::Flavor(
                "stationary-flavor model has no variance function".into(),
            )),
        }
    }

    /// Increment covariance kernel `g(t, s) = Cov(G_t, G_s)` of the two-sided
    /// noise, `g(t, s) = (v(t) + v(s) - v(t - s)) / 2`. Symmetric in its
    /// arguments; both may be negative.
    pub fn increment_cov(&self, t: f64, s: f64) -> Result<f64> {
        Ok(0.5 * (self.variance(t)? + self.variance(s)? - self.variance(t - s)?))
    }

    /// Run the structural checks against the model's own variance function.
    pub fn validate(&self) -> ValidationReport {
        match self.flavor() {
            Flavor::Increment => {
                let v = |t: f64| self.variance(t).expect("increment flavor");
                validate_variance_fn(&v, self.holder_index())
            }
            Flavor::Stationary => {
                // No v to test; report the flavor so callers know why the
                // v-based checks are absent.
                ValidationReport {
                    holder_index: self.holder_index(),
                    checks: vec![Check {
                        name: "stationary-flavor model: variance-function checks not applicable"
                            .into(),
                        passed: true,
                        witness: None,
                    }],
                }
            }
        }
    }
}

/// One structural check with its outcome and, on failure, the grid point
/// that witnessed the violation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<(f64, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub holder_index: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// 200-point log-spaced grid on [1e-4, 1e2]. The variance function is only
/// available pointwise, so all checks are grid-based.
fn test_grid() -> Vec<f64> {
    let n = 200;
    let (lo, hi) = (1e-4f64.ln(), 1e2f64.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Validate an arbitrary variance function against the assumptions:
/// `v(0) = 0`, strict monotonicity, at-most-quadratic growth with the
/// executable constant `C = 2 (v(1) + 1)`, and the Hölder-modulus bound
/// `v(t) <= C t^{2H - eps}` with `eps = 0.01` checked on the sub-grid
/// `t <= 1` (the modulus is a small-time property; mixtures with unequal
/// exponents would trip a global check spuriously).
pub fn validate_variance_fn(v: &dyn Fn(f64) -> f64, holder_index: f64) -> ValidationReport {
    let grid = test_grid();
    let mut checks = Vec::new();

    let v0 = v(0.0);
    checks.push(Check {
        name: "v(0) = 0".into(),
        passed: v0.abs() < 1e-12,
        witness: (v0.abs() >= 1e-12).then(|| (0.0, format!("v(0) = {v0:.6e}"))),
    });

    let mut monotone = Check {
        name: "v strictly increasing".into(),
        passed: true,
        witness: None,
    };
    let mut prev = 0.0;
    for &t in &grid {
        let vt = v(t);
        if vt <= prev {
            monotone.passed = false;
            monotone.witness = Some((t, format!("v({t:.6}) = {vt:.6e} <= previous {prev:.6e}")));
            break;
        }
        prev = vt;
    }
    checks.push(monotone);

    // Growth bound. The structural lemma controls growth at infinity (its
    // proof chains unit increments), so the executable form is
    // v(t) <= C (1 + t^2): a bare C t^2 is violated near zero by every
    // sub-quadratic variance function.
    let c_growth = 2.0 * (v(1.0) + 1.0);
    let mut growth = Check {
        name: format!("v(t) <= C (1 + t^2) with C = {c_growth:.3}"),
        passed: true,
        witness: None,
    };
    for &t in &grid {
        let vt = v(t);
        if vt > c_growth * (1.0 + t * t) {
            growth.passed = false;
            growth.witness = Some((t, format!("v({t:.6}) = {vt:.6e} > C (1 + t^2)")));
            break;
        }
    }
    checks.push(growth);

    let eps = 0.01;
    let c_holder = 2.0 * (v(1.0) + 1.0);
    let expo = 2.0 * holder_index - eps;
    let mut holder = Check {
        name: format!("v(t) <= C t^{{{expo:.3}}} on t <= 1 with C = {c_holder:.3}"),
        passed: true,
        witness: None,
    };
    for &t in grid.iter().filter(|&&t| t <= 1.0) {
        let vt = v(t);
        if vt > c_holder * t.powf(expo) {
            holder.passed = false;
            holder.witness = Some((t, format!("v({t:.6}) = {vt:.6e} > C t^{expo:.3}")));
            break;
        }
    }
    checks.push(holder);

    ValidationReport {
        holder_index,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_closed_forms() {
        assert_eq!(NoiseModel::fbm(0.75).variance(4.0).unwrap(), 8.0);
        assert_eq!(NoiseModel::brownian().variance(0.0).unwrap(), 0.0);
        let mixed = NoiseModel::mixed(vec![NoiseModel::brownian(), NoiseModel::brownian()]);
        assert_eq!(mixed.variance(3.0).unwrap(), 6.0);
    }

    #[test]
    fn variance_rejected_for_stationary_flavor() {
        let err = NoiseModel::lamperti_fbm(0.7).variance(1.0).unwrap_err();
        assert!(matches!(err, Error::Flavor(_)));
    }

    #[test]
    fn increment_cov_cases() {
        let m = NoiseModel::fbm(0.5);
        assert!((m.increment_cov(2.0, 3.0).unwrap() - 2.0).abs() < 1e-15);
        // g(t, t) = v(t) exactly
        let m = NoiseModel::fbm(0.7);
        for &t in &[0.3, 1.0, 5.0] {
            assert_eq!(m.increment_cov(t, t).unwrap(), m.variance(t).unwrap());
        }
        // independent two-sided halves
        assert_eq!(
            NoiseModel::brownian().increment_cov(2.0, -1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn increment_cov_symmetric() {
        let m = NoiseModel::fbm(0.3);
        for &(t, s) in &[(0.2, 1.7), (-0.4, 2.0), (3.0, -3.0)] {
            assert_eq!(
                m.increment_cov(t, s).unwrap(),
                m.increment_cov(s, t).unwrap()
            );
        }
    }

    #[test]
    fn holder_index_of_mixture_is_minimum() {
        let m = NoiseModel::mixed(vec![NoiseModel::fbm(0.3), NoiseModel::fbm(0.6)]);
        assert_eq!(m.holder_index(), 0.3);
        assert_eq!(NoiseModel::lamperti_bifbm(0.6, 0.8).holder_index(), 0.48);
    }

    #[test]
    fn builtin_models_validate() {
        for m in [
            NoiseModel::brownian(),
            NoiseModel::fbm(0.7),
            NoiseModel::fbm(0.3),
            NoiseModel::mixed(vec![NoiseModel::fbm(0.3), NoiseModel::fbm(0.6)]),
            NoiseModel::lamperti_fbm(0.7),
            NoiseModel::lamperti_bifbm(0.6, 0.8),
        ] {
            let report = m.validate();
            assert!(report.passed(), "{m:?}: {:?}", report.checks);
        }
    }

    #[test]
    fn mixture_holder_check_rejects_wrong_exponent() {
        // v = t^0.6 + t^1.2 claims to be 0.3-Hölder (correct, passes) but not
        // 0.6-Hölder (the small-t behaviour of the rough component wins).
        let v = |t: f64| t.abs().powf(0.6) + t.abs().powf(1.2);
        assert!(validate_variance_fn(&v, 0.3).passed());
        let wrong = validate_variance_fn(&v, 0.6);
        assert!(!wrong.passed());
    }

    #[test]
    fn table_fixture_fails_with_witness() {
        // Non-monotone fixture: drops after t = 2.
        let v = |t: f64| {
            let t = t.abs();
            if t < 2.0 {
                t
            } else {
                0.5
            }
        };
        let report = validate_variance_fn(&v, 0.5);
        assert!(!report.passed());
        let failed = report.checks.iter().find(|c| !c.passed).unwrap();
        let (wit, _) = failed.witness.clone().unwrap();
        assert!((2.0..2.2).contains(&wit), "witness {wit}");
    }

    #[test]
    fn model_json_round_trip() {
        let m = NoiseModel::mixed(vec![NoiseModel::fbm(0.7), NoiseModel::brownian()]);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"kind\":\"mixed\""));
        let back: NoiseModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);

        let bif: NoiseModel =
            serde_json::from_str(r#"{"kind":"lamperti_bifbm","hurst":0.6,"kappa":0.8}"#).unwrap();
        assert_eq!(bif, NoiseModel::lamperti_bifbm(0.6, 0.8));
        let fbm: NoiseModel = serde_json::from_str(r#"{"kind":"fbm","hurst":0.7}"#).unwrap();
        assert_eq!(fbm, NoiseModel::fbm(0.7));
    }

    #[test]
    fn param_checks() {
        assert!(NoiseModel::fbm(1.0).check_params().is_err());
        assert!(NoiseModel::lamperti_bifbm(0.5, 0.0).check_params().is_err());
        assert!(NoiseModel::mixed(vec![]).check_params().is_err());
        assert!(NoiseModel::mixed(vec![NoiseModel::lamperti_fbm(0.5)])
            .check_params()
            .is_err());
        assert!(NoiseModel::lamperti_bifbm(0.6, 1.0).check_params().is_ok());
    }
}
