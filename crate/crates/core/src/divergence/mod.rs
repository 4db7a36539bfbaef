//! Divergence functionals.
//!
//! The transport α-divergence is evaluated in two independent ways:
//!
//! * [`transport_alpha_div`] integrates `f_α(Q'_p / Q'_q)` over the quantile
//!   coordinate;
//! * [`transport_alpha_div_entropy_form`] combines the differential entropies
//!   of `p` and `q` with the pushforward term `∫((q / p∘T)^α − 1) q dx`, using
//!   densities and quantiles rather than quantile densities.
//!
//! [`wasserstein2`], [`classical`] α-divergences on the positive octant, the
//! generative-model form [`generative_div`] and the Pythagorean
//! [`orthogonality_defect`] live alongside.

pub mod classical;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{DistributionSpec, MonotoneMap};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_estimate, Integral, QuadratureRule};

pub use classical::{amari_chentsov_diag, classical_alpha_div, classical_f_alpha, classical_taylor_terms, fisher_metric_diag};

/// Default `|α|` below which the α = 0 branch (plus corrections) is used.
pub const DEFAULT_SMALL_ALPHA: f64 = 1e-4;

/// Tiny negative results above this are rounding and are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Number of quantile levels in the Monge–Ampère pushforward check.
pub const MONGE_AMPERE_LEVELS: usize = 16;

/// The divergence parameter α with its small-α switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam {
    pub alpha: f64,
    pub small_alpha_threshold: f64,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Self {
        AlphaParam {
            alpha,
            small_alpha_threshold: DEFAULT_SMALL_ALPHA,
        }
    }

    pub fn with_threshold(alpha: f64, small_alpha_threshold: f64) -> Result<Self> {
        let a = AlphaParam {
            alpha,
            small_alpha_threshold,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.small_alpha_threshold > 0.0) {
            return Err(Error::domain("small-alpha threshold must be > 0"));
        }
        Ok(())
    }

    /// True when the α = 0 branch applies.
    pub fn is_small(&self) -> bool {
        self.alpha.abs() < self.small_alpha_threshold
    }

    pub fn negated(&self) -> Self {
        AlphaParam {
            alpha: -self.alpha,
            ..*self
        }
    }
}

impl From<f64> for AlphaParam {
    fn from(alpha: f64) -> Self {
        AlphaParam::new(alpha)
    }
}

/// How a [`DivergenceResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    QdfQuadrature,
    EntropyForm,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::QdfQuadrature => "qdf_quadrature",
            Method::EntropyForm => "entropy_form",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A divergence value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    /// Set when a rounding-level negative value was clamped to zero.
    pub clamped: bool,
}

impl DivergenceResult {
    fn new(value: f64, error_estimate: f64, method: Method) -> Result<Self> {
        if value < -NEGATIVE_CLAMP {
            return Err(Error::numerical(
                f64::NAN,
                format!("divergence evaluated to {value} < 0 ({method})"),
            ));
        }
        let clamped = value < 0.0;
        Ok(DivergenceResult {
            value: value.max(0.0),
            error_estimate,
            method,
            clamped,
        })
    }
}

/// `f_α(z) = (z^α − α log z − 1) / α²`, or `½ (log z)²` near α = 0.
///
/// For `|α|` below the threshold the α = 0 value is corrected by the next
/// two terms of its series in α.
pub fn f_transport_alpha(z: f64, alpha: AlphaParam) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("f_alpha needs z > 0, got {z}")));
    }
    Ok(f_log_ratio(z.ln(), alpha))
}

/// `f_α` written in terms of `l = log z`.
fn f_log_ratio(l: f64, alpha: AlphaParam) -> f64 {
    let a = alpha.alpha;
    if alpha.is_small() {
        let l2 = l * l;
        0.5 * l2 + a * l2 * l / 6.0 + a * a * l2 * l2 / 24.0
    } else {
        let al = a * l;
        (al.exp_m1() - al) / (a * a)
    }
}

/// `D_IS(z₁‖z₂) = z₁/z₂ − log(z₁/z₂) − 1`.
pub fn itakura_saito(z1: f64, z2: f64) -> f64 {
    let r = z1 / z2;
    r - r.ln() - 1.0
}

/// The integrand of the transport α-divergence written as a Bregman
/// divergence of `Ψ(z) = −log z` between `Q'_p^α` and `Q'_q^α`, divided by α².
pub fn bregman_integrand(qdf_p: f64, qdf_q: f64, alpha: f64) -> f64 {
    let psi = |z: f64| -z.ln();
    let dpsi = |z: f64| -1.0 / z;
    let kp = qdf_p.powf(alpha);
    let kq = qdf_q.powf(alpha);
    (psi(kp) - psi(kq) - dpsi(kq) * (kp - kq)) / (alpha * alpha)
}

/// Pointwise integrand `f_α(Q'_p(u) / Q'_q(u))`.
pub fn transport_alpha_integrand(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: AlphaParam,
    u: f64,
) -> Result<f64> {
    let ratio = p.qdf(u)? / q.qdf(u)?;
    f_transport_alpha(ratio, alpha).map_err(|_| Error::numerical(u, format!("QDF ratio {ratio}")))
}

/// Transport α-divergence `∫₀¹ f_α(Q'_p / Q'_q) du` by quadrature.
pub fn transport_alpha_div(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: AlphaParam,
    rule: &QuadratureRule,
) -> Result<DivergenceResult> {
    alpha.validate()?;
    let i = integrate_with_estimate(|u| transport_alpha_integrand(p, q, alpha, u), rule)?;
    DivergenceResult::new(i.value, i.error_estimate, Method::QdfQuadrature)
}

/// Transport α-divergence from entropies and the pushforward term:
///
/// `(1/α)(H(q) − H(p)) + (1/α²) ∫ ((q / p∘T)^α − 1) q dx`,
///
/// each integral taken in the quantile coordinate. Undefined at α = 0.
pub fn transport_alpha_div_entropy_form(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: AlphaParam,
    rule: &QuadratureRule,
) -> Result<DivergenceResult> {
    alpha.validate()?;
    if alpha.is_small() {
        return Err(Error::domain(format!(
            "entropy form is undefined for |alpha| < {}, got {}",
            alpha.small_alpha_threshold, alpha.alpha
        )));
    }
    let a = alpha.alpha;
    let h_p = p.entropy(rule)?;
    let h_q = q.entropy(rule)?;
    // x = Q_q(u) and T(x) = Q_p(u).
    let push = integrate_with_estimate(
        |u| {
            let ln_q = q.ln_pdf(q.quantile(u)?)?;
            let ln_p = p.ln_pdf(p.quantile(u)?)?;
            Ok((a * (ln_q - ln_p)).exp_m1())
        },
        rule,
    )?;
    let value = (h_q.value - h_p.value) / a + push.value / (a * a);
    let error = (h_q.error_estimate + h_p.error_estimate) / a.abs() + push.error_estimate / (a * a);
    DivergenceResult::new(value, error, Method::EntropyForm)
}

/// Monotone optimal map `T(x) = Q_p(F_q(x))` pushing `q` to `p`.
pub fn transport_map(p: &DistributionSpec, q: &DistributionSpec, x: f64) -> Result<f64> {
    let u = q.cdf(x)?;
    let (lo, hi) = q.eval_window();
    if !(u > 0.0 && u < 1.0) || u < lo || u > hi {
        return Err(Error::domain(format!(
            "x = {x} is outside the interior of q's support (F_q(x) = {u})"
        )));
    }
    p.quantile(u)
}

/// Largest relative Monge–Ampère residual `|p(T(x)) T'(x) / q(x) − 1|` over
/// equispaced quantile levels of `q`, with `T'` by central differences.
pub fn monge_ampere_residual(p: &DistributionSpec, q: &DistributionSpec) -> Result<f64> {
    let (lo, hi) = q.eval_window();
    let (lo, hi) = (lo.max(1e-3), hi.min(1.0 - 1e-3));
    let mut worst: f64 = 0.0;
    for k in 1..=MONGE_AMPERE_LEVELS {
        let u = lo + (hi - lo) * k as f64 / (MONGE_AMPERE_LEVELS + 1) as f64;
        let x = q.quantile(u)?;
        let h = 1e-5 * q.qdf(u)?.min(1.0) * x.abs().max(1.0);
        let dt = (transport_map(p, q, x + h)? - transport_map(p, q, x - h)?) / (2.0 * h);
        let lhs = p.pdf(transport_map(p, q, x)?)? * dt;
        worst = worst.max((lhs / q.pdf(x)? - 1.0).abs());
    }
    Ok(worst)
}

/// Outcome of a Wasserstein-2 computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum W2Result {
    Finite { value: f64, error_estimate: f64 },
    /// At least one density has an infinite second moment.
    Infinite,
}

impl W2Result {
    pub fn value(&self) -> Option<f64> {
        match self {
            W2Result::Finite { value, .. } => Some(*value),
            W2Result::Infinite => None,
        }
    }
}

/// `W₂(p, q) = (∫₀¹ (Q_p − Q_q)² du)^½`.
pub fn wasserstein2(p: &DistributionSpec, q: &DistributionSpec, rule: &QuadratureRule) -> Result<W2Result> {
    if p.second_moment().is_infinite() || q.second_moment().is_infinite() {
        return Ok(W2Result::Infinite);
    }
    let sq = |u: f64| -> Result<f64> {
        let d = p.quantile(u)? - q.quantile(u)?;
        Ok(d * d)
    };
    let coarse = integrate_with_estimate(sq, rule)?;
    let value = coarse.value.max(0.0).sqrt();
    let fine = (coarse.value + coarse.error_estimate).max(0.0).sqrt();
    Ok(W2Result::Finite {
        value,
        error_estimate: (fine - value).abs(),
    })
}

/// Monte Carlo settings for [`generative_div`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

/// Transport α-divergence between `G_x(Z)` and `G_y(Z)` for `Z ~ reference`:
/// the expectation of `f_α(∂_z G_x(Z) / ∂_z G_y(Z))`.
///
/// Without `mc` the expectation is a quadrature over `Z = Q_ref(u)`; with it,
/// a seeded Monte Carlo average whose error estimate is the standard error.
pub fn generative_div(
    map_x: &MonotoneMap,
    map_y: &MonotoneMap,
    reference: &DistributionSpec,
    alpha: AlphaParam,
    rule: &QuadratureRule,
    mc: Option<MonteCarlo>,
) -> Result<DivergenceResult> {
    alpha.validate()?;
    map_x.validate()?;
    map_y.validate()?;
    let integrand = |z: f64| -> Result<f64> {
        let ratio = map_x.derivative(z) / map_y.derivative(z);
        f_transport_alpha(ratio, alpha)
    };
    match mc {
        None => {
            let i = integrate_with_estimate(|u| integrand(reference.quantile(u)?), rule)?;
            DivergenceResult::new(i.value, i.error_estimate, Method::QdfQuadrature)
        }
        Some(MonteCarlo { samples, seed }) => {
            if samples < 2 {
                return Err(Error::domain("Monte Carlo needs at least two samples"));
            }
            let (lo, hi) = reference.eval_window();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let mut u: f64 = rng.random();
                while !(u > 0.0) {
                    u = rng.random();
                }
                let v = integrand(reference.quantile(lo + (hi - lo) * u)?)?;
                sum += v;
                sum_sq += v * v;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            DivergenceResult::new(mean, (var / n).sqrt(), Method::MonteCarlo)
        }
    }
}

/// Cross term of the generalised Pythagorean relation:
///
/// `D(p‖q) + D(q‖r) − D(p‖r) = (1/α²) ∫ (K_p − K_q)(1/K_q − 1/K_r) du`
/// with `K = (Q')^α`, and `∫ log(Q'_p/Q'_q) log(Q'_r/Q'_q) du` at α = 0.
/// The triple is orthogonal when this vanishes.
pub fn orthogonality_defect(
    p: &DistributionSpec,
    q: &DistributionSpec,
    r: &DistributionSpec,
    alpha: AlphaParam,
    rule: &QuadratureRule,
) -> Result<Integral> {
    alpha.validate()?;
    let a = alpha.alpha;
    integrate_with_estimate(
        |u| {
            let qq = q.qdf(u)?;
            let l_pq = (p.qdf(u)? / qq).ln();
            let l_rq = (r.qdf(u)? / qq).ln();
            Ok(if alpha.is_small() {
                l_pq * l_rq
            } else {
                -(a * l_pq).exp_m1() * (-a * l_rq).exp_m1() / (a * a)
            })
        },
        rule,
    )
}
