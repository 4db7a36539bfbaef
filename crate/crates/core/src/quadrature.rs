//! Gauss–Legendre integration over a (possibly clipped) unit interval.
//!
//! Every integral in the crate is written in the quantile coordinate
//! `u ∈ (0, 1)`. A [`QuadratureRule`] integrates over the window
//! `[clip_delta, 1 - clip_delta]`; the rule also carries a companion rule with
//! twice as many nodes so that each integral can report the refinement gap
//! `|I(2n) - I(n)|` as its error estimate.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default node count used when the caller does not choose one.
pub const DEFAULT_NODES: usize = 256;

/// Default clipping applied when an empirical or grid density is involved.
pub const DEFAULT_DATA_CLIP: f64 = 0.01;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights for integration over `[clip_delta, 1 - clip_delta]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    clip_delta: f64,
    refined: Option<Arc<QuadratureRule>>,
}

/// An integral together with its refinement-gap error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clip_delta(&self) -> f64 {
        self.clip_delta
    }

    /// Integration window `(lo, hi)`.
    pub fn window(&self) -> (f64, f64) {
        (self.clip_delta, 1.0 - self.clip_delta)
    }

    /// The `2n`-node companion used for error estimates.
    pub fn refined(&self) -> Option<&QuadratureRule> {
        self.refined.as_deref()
    }

    /// Same node count on a different window.
    pub fn with_clip(&self, clip_delta: f64) -> Result<QuadratureRule> {
        gauss_legendre_unit(self.len(), clip_delta)
    }
}

/// Roots and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// in increasing order.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= NEWTON_TOL {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn build_rule(n: usize, clip_delta: f64) -> QuadratureRule {
    let (x, w) = legendre_nodes(n);
    let half = 0.5 * (1.0 - 2.0 * clip_delta);
    let nodes = x.iter().map(|&xi| clip_delta + half * (xi + 1.0)).collect();
    let weights = w.iter().map(|&wi| half * wi).collect();
    QuadratureRule {
        nodes,
        weights,
        clip_delta,
        refined: None,
    }
}

/// `n`-point Gauss–Legendre rule mapped onto `[clip_delta, 1 - clip_delta]`.
pub fn gauss_legendre_unit(n: usize, clip_delta: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::domain("quadrature needs at least one node"));
    }
    if !(0.0..0.5).contains(&clip_delta) {
        return Err(Error::domain(format!(
            "clip_delta must lie in [0, 0.5), got {clip_delta}"
        )));
    }
    let mut rule = build_rule(n, clip_delta);
    rule.refined = Some(Arc::new(build_rule(2 * n, clip_delta)));
    Ok(rule)
}

/// `Σ wᵢ f(uᵢ)`, failing on the first non-finite evaluation.
pub fn integrate_unit<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_integrate_unit(|u| Ok(f(u)), rule)
}

/// Like [`integrate_unit`] for integrands that can fail.
pub fn try_integrate_unit<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(u)?;
        if !v.is_finite() {
            return Err(Error::numerical(u, format!("integrand evaluated to {v}")));
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Integral on `rule` plus `|I(2n) - I(n)|` from its refined companion.
pub fn integrate_with_estimate<F>(f: F, rule: &QuadratureRule) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    let value = try_integrate_unit(&f, rule)?;
    let error_estimate = match rule.refined() {
        Some(fine) => (try_integrate_unit(&f, fine)? - value).abs(),
        None => 0.0,
    };
    Ok(Integral {
        value,
        error_estimate,
    })
}
