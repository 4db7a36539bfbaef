//! Quantile and QDF estimates from samples.

use crate::error::{Error, Result};

use super::grid::QdfGrid;

/// Minimum number of samples accepted by the estimator.
pub const MIN_SAMPLES: usize = 8;

/// Settings of the order-statistics QDF estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Evaluation is restricted to `[clip_delta, 1 - clip_delta]`.
    pub clip_delta: f64,
    /// Half-width of the difference quotient is `bandwidth_const · n^(-1/3)`.
    pub bandwidth_const: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            clip_delta: 0.01,
            bandwidth_const: 1.0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_delta > 0.0 && self.clip_delta < 0.5) {
            return Err(Error::spec(format!(
                "clip_delta must lie in (0, 0.5), got {}",
                self.clip_delta
            )));
        }
        if !(self.bandwidth_const > 0.0 && self.bandwidth_const.is_finite()) {
            return Err(Error::spec(format!(
                "bandwidth_const must be positive, got {}",
                self.bandwidth_const
            )));
        }
        Ok(())
    }

    pub fn bandwidth(&self, n: usize) -> f64 {
        self.bandwidth_const * (n as f64).powf(-1.0 / 3.0)
    }
}

/// Empirical quantile function: linear interpolation of order statistics at
/// plotting positions `k / (n + 1)`, with a symmetric difference-quotient QDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalQuantile {
    sorted: Vec<f64>,
    cfg: EstimatorConfig,
    bandwidth: f64,
}

impl EmpiricalQuantile {
    pub fn new(samples: &[f64], cfg: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(Error::spec(format!(
                "need at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::spec(format!("non-finite sample {x}")));
        }
        let bandwidth = cfg.bandwidth(n);
        let spacing = 1.0 / (n as f64 + 1.0);
        if !(bandwidth > spacing && bandwidth < 0.5) {
            return Err(Error::spec(format!(
                "bandwidth {bandwidth} must exceed the plotting-position spacing {spacing} and stay below 0.5"
            )));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalQuantile {
            sorted,
            cfg,
            bandwidth,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn config(&self) -> EstimatorConfig {
        self.cfg
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn window(&self) -> (f64, f64) {
        (self.cfg.clip_delta, 1.0 - self.cfg.clip_delta)
    }

    fn positions(&self) -> (f64, f64) {
        let n = self.sorted.len() as f64;
        (1.0 / (n + 1.0), n / (n + 1.0))
    }

    fn check(&self, u: f64) -> Result<()> {
        let (lo, hi) = self.window();
        if u >= lo && u <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "u = {u} outside the evaluable window [{lo}, {hi}] of an empirical density"
            )))
        }
    }

    /// Interpolated order statistic, flat beyond the extreme plotting positions.
    fn raw_quantile(&self, u: f64) -> f64 {
        let n = self.sorted.len();
        let pos = (u * (n as f64 + 1.0) - 1.0).clamp(0.0, (n - 1) as f64);
        let k = (pos.floor() as usize).min(n - 2);
        let frac = pos - k as f64;
        self.sorted[k] + frac * (self.sorted[k + 1] - self.sorted[k])
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(self.raw_quantile(u))
    }

    pub fn qdf(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        let (pmin, pmax) = self.positions();
        let lo = (u - self.bandwidth).max(pmin);
        let hi = (u + self.bandwidth).min(pmax);
        let quotient = (self.raw_quantile(hi) - self.raw_quantile(lo)) / (hi - lo);
        if quotient > 0.0 && quotient.is_finite() {
            Ok(quotient)
        } else {
            Err(Error::Estimation(format!(
                "difference quotient {quotient} at u = {u} is not positive (tied samples?)"
            )))
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.sorted[0], self.sorted[self.sorted.len() - 1])
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!(
                "x = {x} outside the sample range [{lo}, {hi}]"
            )));
        }
        let n = self.sorted.len();
        let np1 = n as f64 + 1.0;
        let j = self.sorted.partition_point(|&v| v <= x);
        if j >= n {
            return Ok(n as f64 / np1);
        }
        let (a, b) = (self.sorted[j - 1], self.sorted[j]);
        let frac = if b > a { (x - a) / (b - a) } else { 0.0 };
        Ok((j as f64 + frac) / np1)
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        let u = self.cdf(x)?;
        Ok(-self.qdf(u)?.ln())
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    pub fn second_moment(&self) -> f64 {
        self.sorted.iter().map(|x| x * x).sum::<f64>() / self.sorted.len() as f64
    }
}

/// Estimate `Q'` from samples at the given `u` nodes.
///
/// The result is anchored at the middle node to the empirical quantile there.
pub fn fit_empirical_qdf(samples: &[f64], cfg: EstimatorConfig, grid: &[f64]) -> Result<QdfGrid> {
    let est = EmpiricalQuantile::new(samples, cfg)?;
    if grid.len() < 2 {
        return Err(Error::spec("estimation grid needs at least two nodes"));
    }
    let values = grid
        .iter()
        .map(|&u| est.qdf(u))
        .collect::<Result<Vec<_>>>()?;
    let mid = grid[grid.len() / 2];
    QdfGrid::new(grid.to_vec(), values, mid, est.quantile(mid)?)
}
