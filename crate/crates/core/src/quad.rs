//! Gaussian quadrature rules and composite integration helpers.
//!
//! Nodes and weights come from the Golub–Welsch algorithm (symmetric
//! tridiagonal Jacobi matrix, eigen-decomposition). Rules are cached by
//! order since contexts are built frequently.

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Node/weight pairs for a fixed quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Rule {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = d;
    }
    for (i, &b) in offdiag.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let q0 = eig.eigenvectors[(0, k)];
            (x, mu0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

fn laguerre_uncached(order: usize) -> Rule {
    assert!(order >= 2, "quadrature order must be at least 2");
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + 1.0).collect();
    let offdiag: Vec<f64> = (1..order).map(|i| i as f64).collect();
    golub_welsch(&diag, &offdiag, 1.0)
}

fn legendre_uncached(order: usize) -> Rule {
    assert!(order >= 2, "quadrature order must be at least 2");
    let diag = vec![0.0; order];
    let offdiag: Vec<f64> = (1..order)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&diag, &offdiag, 2.0)
}

type RuleCache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cache(slot: &'static OnceLock<RuleCache>) -> &'static RuleCache {
    slot.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Laguerre rule for integrals of the form `int_0^inf e^{-x} f(x) dx`.
pub fn laguerre(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let mut map = cache(&CACHE).lock().unwrap();
    map.entry(order)
        .or_insert_with(|| Arc::new(laguerre_uncached(order)))
        .clone()
}

/// Gauss–Legendre rule on the reference interval `[-1, 1]`.
pub fn legendre(order: usize) -> Arc<Rule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let mut map = cache(&CACHE).lock().unwrap();
    map.entry(order)
        .or_insert_with(|| Arc::new(legendre_uncached(order)))
        .clone()
}

/// `int_0^inf e^{-x} f(x) dx` by Gauss–Laguerre of the given order.
pub fn integrate_laguerre(order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = laguerre(order);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(x))
        .sum()
}

/// `int_a^b f` by a single Gauss–Legendre panel.
pub fn integrate_legendre(order: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Composite Gauss–Legendre over explicit panel edges.
pub fn integrate_panels(order: usize, edges: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    edges
        .windows(2)
        .map(|e| integrate_legendre(order, e[0], e[1], f))
        .sum()
}

/// Panel edges for `[0, b]` that start uniformly at scale `h0` and grow
/// geometrically, suited to integrands that vary on scale `h0` near zero and
/// flatten out further away.
pub fn geometric_edges(b: f64, h0: f64) -> Vec<f64> {
    assert!(b > 0.0 && h0 > 0.0);
    let mut edges = vec![0.0];
    let mut x = h0.min(b);
    let mut step = h0;
    while x < b {
        edges.push(x);
        step *= 2.0;
        x += step;
    }
    edges.push(b);
    edges
}

/// Adaptive composite integration over `[a, b]`: panels from the given edges
/// are bisected until the order-`n` and order-`2n` estimates agree to
/// `rel_tol` (panel-wise, against the running total scale).
pub fn integrate_adaptive(
    order: usize,
    edges: &[f64],
    rel_tol: f64,
    f: &dyn Fn(f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    let mut scale = 0.0f64;
    let mut stack: Vec<(f64, f64, u32)> =
        edges.windows(2).rev().map(|e| (e[0], e[1], 0u32)).collect();
    while let Some((a, b, depth)) = stack.pop() {
        let coarse = integrate_legendre(order, a, b, f);
        let fine = integrate_legendre(2 * order, a, b, f);
        scale = scale.max(fine.abs());
        if (fine - coarse).abs() <= rel_tol * scale.max(1e-300) || depth >= 24 {
            total += fine;
        } else {
            let mid = 0.5 * (a + b);
            stack.push((mid, b, depth + 1));
            stack.push((a, mid, depth + 1));
        }
    }
    total
}

/// `int_0^inf e^{-x} f(x) dx` for integrands with a possible algebraic
/// singularity at the origin (fractional-power variance functions).
///
/// Plain Gauss–Laguerre stalls near 1e-5 relative error on `x^s` with
/// non-integer `s` because of the derivative singularity at zero. Splitting
/// at 1 — geometrically graded panels on `[0, 1]` with the weight kept in
/// the integrand, then a shifted Gauss–Laguerre rule for the analytic tail —
/// restores near machine accuracy. `order` is the tail rule order; the head
/// uses 16-node panels graded down to 1e-14.
pub fn integrate_exp_weighted(order: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut edges = Vec::with_capacity(52);
    edges.push(0.0);
    let mut x = 1e-14;
    while x < 1.0 {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(1.0);
    let head = integrate_panels(16, &edges, &|x: f64| (-x).exp() * f(x));
    let tail = (-1.0f64).exp() * integrate_laguerre(order, |x| f(1.0 + x));
    head + tail
}

/// Moments `J_m(z) = int_0^1 e^{-z(1-s)} s^m ds` for `m = 0..=3`.
///
/// Used to integrate a cubic segment against an exponential kernel exactly.
/// The downward recurrence cancels badly for small `z`, so a series is used
/// there instead.
pub fn exp_moments(z: f64) -> [f64; 4] {
    debug_assert!(z >= 0.0);
    if z < 0.5 {
        // J_m(z) = m! * sum_k (-z)^k / (k + m + 1)!
        let mut out = [0.0; 4];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0 / (m as f64 + 1.0);
            let mut sum = term;
            for k in 1..18 {
                term *= -z / (k + m + 1) as f64;
                sum += term;
            }
            *slot = sum;
        }
        return out;
    }
    let j0 = (-(-z).exp_m1()) / z;
    let j1 = (1.0 - j0) / z;
    let j2 = (1.0 - 2.0 * j1) / z;
    let j3 = (1.0 - 3.0 * j2) / z;
    [j0, j1, j2, j3]
}
