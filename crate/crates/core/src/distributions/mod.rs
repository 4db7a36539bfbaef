//! One-dimensional densities evaluated through their quantile function.
//!
//! Every variant of [`DistributionSpec`] exposes the same interface: the
//! quantile `Q = F⁻¹`, the quantile density `Q'`, the CDF `F` and the
//! (log-)density `p`. Analytic families are evaluable on all of `(0, 1)`;
//! grid and empirical variants only on their window (order statistics carry
//! no tail information).

mod empirical;
mod grid;
mod map;
pub(crate) mod special;

pub use empirical::{fit_empirical_qdf, EmpiricalQuantile, EstimatorConfig, MIN_SAMPLES};
pub use grid::{QdfDensity, QdfGrid};
pub use map::{MonotoneGrid, MonotoneMap};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_unit, integrate_with_estimate, Integral, QuadratureRule};
use special::{std_normal_cdf, std_normal_ln_pdf, std_normal_quantile};

/// Declarative description of a one-dimensional density.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Cauchy { x0: f64, gamma: f64 },
    Logistic { mu: f64, s: f64 },
    /// Law of `loc + scale · X` for `X ~ base`.
    LocationScale {
        base: Box<DistributionSpec>,
        loc: f64,
        scale: f64,
    },
    QdfGrid(QdfDensity),
    Empirical(EmpiricalQuantile),
    /// Law of `G(Z)` for `Z ~ reference`.
    Generative {
        reference: Box<DistributionSpec>,
        map: MonotoneMap,
    },
}

/// A moment that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Moment::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Infinite => None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::spec(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::spec(format!("{name} must be finite, got {v}")))
    }
}

impl DistributionSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::checked(DistributionSpec::Gaussian { mu, sigma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::checked(DistributionSpec::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::checked(DistributionSpec::Exponential { rate })
    }

    pub fn cauchy(x0: f64, gamma: f64) -> Result<Self> {
        Self::checked(DistributionSpec::Cauchy { x0, gamma })
    }

    pub fn logistic(mu: f64, s: f64) -> Result<Self> {
        Self::checked(DistributionSpec::Logistic { mu, s })
    }

    pub fn location_scale(base: DistributionSpec, loc: f64, scale: f64) -> Result<Self> {
        Self::checked(DistributionSpec::LocationScale {
            base: Box::new(base),
            loc,
            scale,
        })
    }

    pub fn qdf_grid(grid: QdfGrid) -> Result<Self> {
        density_from_qdf(grid)
    }

    pub fn empirical(samples: &[f64], cfg: EstimatorConfig) -> Result<Self> {
        Ok(DistributionSpec::Empirical(EmpiricalQuantile::new(samples, cfg)?))
    }

    pub fn generative(reference: DistributionSpec, map: MonotoneMap) -> Result<Self> {
        Self::checked(DistributionSpec::Generative {
            reference: Box::new(reference),
            map,
        })
    }

    fn checked(spec: DistributionSpec) -> Result<Self> {
        spec.validate()?;
        Ok(spec)
    }

    /// Check every parameter constraint, recursively.
    pub fn validate(&self) -> Result<()> {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, sigma } => {
                finite("mu", *mu)?;
                positive("sigma", *sigma)
            }
            Uniform { a, b } => {
                finite("a", *a)?;
                finite("b", *b)?;
                if a < b {
                    Ok(())
                } else {
                    Err(Error::spec(format!("uniform needs a < b, got a = {a}, b = {b}")))
                }
            }
            Exponential { rate } => positive("rate", *rate),
            Cauchy { x0, gamma } => {
                finite("x0", *x0)?;
                positive("gamma", *gamma)
            }
            Logistic { mu, s } => {
                finite("mu", *mu)?;
                positive("s", *s)
            }
            LocationScale { base, loc, scale } => {
                finite("loc", *loc)?;
                positive("scale", *scale)?;
                base.validate()
            }
            QdfGrid(d) => d.grid().validate(),
            Empirical(e) => e.config().validate(),
            Generative { reference, map } => {
                map.validate()?;
                reference.validate()
            }
        }
    }

    /// Law of `X + c`.
    pub fn shifted(&self, c: f64) -> DistributionSpec {
        DistributionSpec::LocationScale {
            base: Box::new(self.clone()),
            loc: c,
            scale: 1.0,
        }
    }

    /// True for grid and sample based variants (directly or through a base).
    pub fn is_data_driven(&self) -> bool {
        use DistributionSpec::*;
        match self {
            QdfGrid(_) | Empirical(_) => true,
            LocationScale { base, .. } => base.is_data_driven(),
            Generative { reference, .. } => reference.is_data_driven(),
            _ => false,
        }
    }

    /// `u`-interval on which `quantile` and `qdf` may be evaluated. Analytic
    /// families return `(0, 1)`, which is open.
    pub fn eval_window(&self) -> (f64, f64) {
        use DistributionSpec::*;
        match self {
            QdfGrid(d) => d.range(),
            Empirical(e) => e.window(),
            LocationScale { base, .. } => base.eval_window(),
            Generative { reference, .. } => reference.eval_window(),
            _ => (0.0, 1.0),
        }
    }

    fn check_open_unit(u: f64) -> Result<()> {
        if u > 0.0 && u < 1.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("u = {u} must lie strictly inside (0, 1)")))
        }
    }

    /// `Q(u) = F⁻¹(u)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, sigma } => {
                Self::check_open_unit(u)?;
                Ok(mu + sigma * std_normal_quantile(u))
            }
            Uniform { a, b } => {
                Self::check_open_unit(u)?;
                Ok(a + (b - a) * u)
            }
            Exponential { rate } => {
                Self::check_open_unit(u)?;
                Ok(-(-u).ln_1p() / rate)
            }
            Cauchy { x0, gamma } => {
                Self::check_open_unit(u)?;
                Ok(x0 + gamma * (PI * (u - 0.5)).tan())
            }
            Logistic { mu, s } => {
                Self::check_open_unit(u)?;
                Ok(mu + s * (u / (1.0 - u)).ln())
            }
            LocationScale { base, loc, scale } => Ok(loc + scale * base.quantile(u)?),
            QdfGrid(d) => d.quantile(u),
            Empirical(e) => e.quantile(u),
            Generative { reference, map } => Ok(map.eval(reference.quantile(u)?)),
        }
    }

    /// Quantile density `Q'(u)`, strictly positive.
    pub fn qdf(&self, u: f64) -> Result<f64> {
        use DistributionSpec::*;
        match self {
            Gaussian { sigma, .. } => {
                Self::check_open_unit(u)?;
                let z = std_normal_quantile(u);
                Ok(sigma / std_normal_ln_pdf(z).exp())
            }
            Uniform { a, b } => {
                Self::check_open_unit(u)?;
                Ok(b - a)
            }
            Exponential { rate } => {
                Self::check_open_unit(u)?;
                Ok(1.0 / (rate * (1.0 - u)))
            }
            Cauchy { gamma, .. } => {
                Self::check_open_unit(u)?;
                let s = (PI * u).sin();
                Ok(gamma * PI / (s * s))
            }
            Logistic { s, .. } => {
                Self::check_open_unit(u)?;
                Ok(s / (u * (1.0 - u)))
            }
            LocationScale { base, scale, .. } => Ok(scale * base.qdf(u)?),
            QdfGrid(d) => d.qdf(u),
            Empirical(e) => e.qdf(u),
            Generative { reference, map } => {
                let z = reference.quantile(u)?;
                Ok(map.derivative(z) * reference.qdf(u)?)
            }
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, sigma } => Ok(std_normal_cdf((x - mu) / sigma)),
            Uniform { a, b } => Ok(((x - a) / (b - a)).clamp(0.0, 1.0)),
            Exponential { rate } => Ok(if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }),
            Cauchy { x0, gamma } => Ok(0.5 + ((x - x0) / gamma).atan() / PI),
            Logistic { mu, s } => Ok(1.0 / (1.0 + (-(x - mu) / s).exp())),
            LocationScale { base, loc, scale } => base.cdf((x - loc) / scale),
            QdfGrid(d) => d.cdf(x),
            Empirical(e) => e.cdf(x),
            Generative { reference, map } => reference.cdf(map.inverse(x)),
        }
    }

    /// Natural log of the density; `-∞` outside the support.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, sigma } => Ok(std_normal_ln_pdf((x - mu) / sigma) - sigma.ln()),
            Uniform { a, b } => Ok(if x >= *a && x <= *b {
                -(b - a).ln()
            } else {
                f64::NEG_INFINITY
            }),
            Exponential { rate } => Ok(if x >= 0.0 {
                rate.ln() - rate * x
            } else {
                f64::NEG_INFINITY
            }),
            Cauchy { x0, gamma } => {
                let z = (x - x0) / gamma;
                Ok(-(PI * gamma).ln() - z.mul_add(z, 1.0).ln())
            }
            Logistic { mu, s } => {
                let z = ((x - mu) / s).abs();
                Ok(-s.ln() - z - 2.0 * (-z).exp().ln_1p())
            }
            LocationScale { base, loc, scale } => Ok(base.ln_pdf((x - loc) / scale)? - scale.ln()),
            QdfGrid(d) => d.ln_pdf(x),
            Empirical(e) => e.ln_pdf(x),
            Generative { reference, map } => {
                let z = map.inverse(x);
                Ok(reference.ln_pdf(z)? - map.derivative(z).ln())
            }
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    /// Closure of the set where the density is positive (represented part
    /// only for grid and empirical variants).
    pub fn support(&self) -> (f64, f64) {
        use DistributionSpec::*;
        match self {
            Uniform { a, b } => (*a, *b),
            Exponential { .. } => (0.0, f64::INFINITY),
            LocationScale { base, loc, scale } => {
                let (lo, hi) = base.support();
                (loc + scale * lo, loc + scale * hi)
            }
            QdfGrid(d) => d.support(),
            Empirical(e) => e.support(),
            Generative { reference, map } => {
                let (lo, hi) = reference.support();
                (map.eval(lo), map.eval(hi))
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Mean; [`Moment::Infinite`] when it does not exist.
    pub fn mean(&self) -> Moment {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, .. } | Logistic { mu, .. } => Moment::Finite(*mu),
            Uniform { a, b } => Moment::Finite(0.5 * (a + b)),
            Exponential { rate } => Moment::Finite(1.0 / rate),
            Cauchy { .. } => Moment::Infinite,
            LocationScale { base, loc, scale } => match base.mean() {
                Moment::Finite(m) => Moment::Finite(loc + scale * m),
                Moment::Infinite => Moment::Infinite,
            },
            Empirical(e) => Moment::Finite(e.mean()),
            QdfGrid(_) | Generative { .. } => self.numeric_moment(1),
        }
    }

    /// `∫ x² p(x) dx`, or [`Moment::Infinite`] for heavy tails.
    ///
    /// Grid variants report the moment of the represented window, normalised
    /// by its mass.
    pub fn second_moment(&self) -> Moment {
        use DistributionSpec::*;
        match self {
            Gaussian { mu, sigma } => Moment::Finite(mu * mu + sigma * sigma),
            Uniform { a, b } => Moment::Finite((a * a + a * b + b * b) / 3.0),
            Exponential { rate } => Moment::Finite(2.0 / (rate * rate)),
            Cauchy { .. } => Moment::Infinite,
            Logistic { mu, s } => Moment::Finite(mu * mu + s * s * PI * PI / 3.0),
            LocationScale { base, loc, scale } => match (base.mean(), base.second_moment()) {
                (Moment::Finite(m1), Moment::Finite(m2)) => {
                    Moment::Finite(scale * scale * m2 + 2.0 * loc * scale * m1 + loc * loc)
                }
                _ => Moment::Infinite,
            },
            Empirical(e) => Moment::Finite(e.second_moment()),
            Generative { reference, map } => match map {
                MonotoneMap::Affine { a, b } => match (reference.mean(), reference.second_moment()) {
                    (Moment::Finite(m1), Moment::Finite(m2)) => {
                        Moment::Finite(a * a * m2 + 2.0 * a * b * m1 + b * b)
                    }
                    _ => Moment::Infinite,
                },
                MonotoneMap::Grid(_) => self.numeric_moment(2),
            },
            QdfGrid(_) => self.numeric_moment(2),
        }
    }

    fn numeric_moment(&self, k: i32) -> Moment {
        if let DistributionSpec::Generative { reference, .. } = self {
            // Grid maps extend linearly, so tails follow the reference.
            if reference.second_moment().is_infinite() {
                return Moment::Infinite;
            }
        }
        let (lo, hi) = self.eval_window();
        let clip = if self.is_data_driven() { lo.max(1.0 - hi) } else { 0.0 };
        let rule = match gauss_legendre_unit(crate::quadrature::DEFAULT_NODES, clip) {
            Ok(r) => r,
            Err(_) => return Moment::Infinite,
        };
        match crate::quadrature::try_integrate_unit(|u| Ok(self.quantile(u)?.powi(k)), &rule) {
            Ok(v) => Moment::Finite(v / (1.0 - 2.0 * clip)),
            Err(_) => Moment::Infinite,
        }
    }

    /// Differential entropy `-∫ p log p`, computed as `-∫₀¹ log p(Q(u)) du`.
    pub fn entropy(&self, rule: &QuadratureRule) -> Result<Integral> {
        integrate_with_estimate(|u| Ok(-self.ln_pdf(self.quantile(u)?)?), rule)
    }
}

/// Free-function form of [`DistributionSpec::quantile`].
pub fn quantile(spec: &DistributionSpec, u: f64) -> Result<f64> {
    spec.quantile(u)
}

/// Free-function form of [`DistributionSpec::qdf`].
pub fn qdf(spec: &DistributionSpec, u: f64) -> Result<f64> {
    spec.qdf(u)
}

/// Free-function form of [`DistributionSpec::second_moment`].
pub fn second_moment(spec: &DistributionSpec) -> Moment {
    spec.second_moment()
}

/// Build the density whose quantile density is `grid`.
pub fn density_from_qdf(grid: QdfGrid) -> Result<DistributionSpec> {
    Ok(DistributionSpec::QdfGrid(QdfDensity::new(grid)?))
}

/// Sample `spec`'s QDF at `u_nodes`, anchored at the middle node.
pub fn sample_qdf_grid(spec: &DistributionSpec, u_nodes: &[f64]) -> Result<QdfGrid> {
    if u_nodes.is_empty() {
        return Err(Error::spec("empty u grid"));
    }
    let values = u_nodes
        .iter()
        .map(|&u| spec.qdf(u))
        .collect::<Result<Vec<_>>>()?;
    let mid = u_nodes[u_nodes.len() / 2];
    QdfGrid::new(u_nodes.to_vec(), values, mid, spec.quantile(mid)?)
}

/// `n` equispaced nodes covering `[lo, hi]`, both ends included.
pub fn uniform_u_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
