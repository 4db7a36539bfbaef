//! Densities described by their quantile density function on a grid.

use crate::error::{Error, Result};
use crate::interp::{local_cubic, segment, segment_integral};

/// Positive QDF samples `Q'(u)` on increasing nodes in `(0, 1)`, plus an
/// anchor `Q(anchor_u) = anchor_x` that fixes the translation.
#[derive(Debug, Clone, PartialEq)]
pub struct QdfGrid {
    pub u_nodes: Vec<f64>,
    pub qdf_values: Vec<f64>,
    pub anchor_u: f64,
    pub anchor_x: f64,
}

impl QdfGrid {
    pub fn new(u_nodes: Vec<f64>, qdf_values: Vec<f64>, anchor_u: f64, anchor_x: f64) -> Result<Self> {
        let grid = QdfGrid {
            u_nodes,
            qdf_values,
            anchor_u,
            anchor_x,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.u_nodes.len();
        if n < 2 {
            return Err(Error::spec("qdf grid needs at least two nodes"));
        }
        if self.qdf_values.len() != n {
            return Err(Error::spec(format!(
                "qdf grid has {n} nodes but {} values",
                self.qdf_values.len()
            )));
        }
        if !self.u_nodes.iter().all(|&u| u > 0.0 && u < 1.0) {
            return Err(Error::spec("qdf grid nodes must lie in (0, 1)"));
        }
        if !self.u_nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::spec("qdf grid nodes must be strictly increasing"));
        }
        if let Some((i, v)) = self
            .qdf_values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::spec(format!("qdf value {v} at node {i} is not positive")));
        }
        if !self.anchor_x.is_finite() {
            return Err(Error::spec("anchor_x must be finite"));
        }
        if !(self.anchor_u >= self.u_nodes[0] && self.anchor_u <= self.u_nodes[n - 1]) {
            return Err(Error::spec(format!(
                "anchor_u = {} lies outside the grid [{}, {}]",
                self.anchor_u,
                self.u_nodes[0],
                self.u_nodes[n - 1]
            )));
        }
        Ok(())
    }

    /// `(first node, last node)`.
    pub fn range(&self) -> (f64, f64) {
        (self.u_nodes[0], self.u_nodes[self.u_nodes.len() - 1])
    }
}

/// A [`QdfGrid`] prepared for evaluation.
///
/// `log Q'` is interpolated with local cubics so the QDF stays positive;
/// `Q` integrates that interpolant from the anchor, and `F` inverts `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QdfDensity {
    grid: QdfGrid,
    log_qdf: Vec<f64>,
    node_quantiles: Vec<f64>,
}

impl QdfDensity {
    pub fn new(grid: QdfGrid) -> Result<Self> {
        grid.validate()?;
        let log_qdf: Vec<f64> = grid.qdf_values.iter().map(|v| v.ln()).collect();
        let mut density = QdfDensity {
            grid,
            log_qdf,
            node_quantiles: Vec::new(),
        };
        density.node_quantiles = density.integrate_nodes();
        if let Some(w) = density.node_quantiles.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::spec(format!(
                "quantile function is not invertible: {} !< {}",
                w[0], w[1]
            )));
        }
        Ok(density)
    }

    pub fn grid(&self) -> &QdfGrid {
        &self.grid
    }

    pub fn range(&self) -> (f64, f64) {
        self.grid.range()
    }

    fn interp_qdf(&self, u: f64) -> f64 {
        local_cubic(&self.grid.u_nodes, &self.log_qdf, u).exp()
    }

    fn integrate_nodes(&self) -> Vec<f64> {
        let u = &self.grid.u_nodes;
        let n = u.len();
        let k = segment(u, self.grid.anchor_u);
        let mut q = vec![0.0; n];
        q[k] = self.grid.anchor_x - segment_integral(|s| self.interp_qdf(s), u[k], self.grid.anchor_u);
        for i in k + 1..n {
            q[i] = q[i - 1] + segment_integral(|s| self.interp_qdf(s), u[i - 1], u[i]);
        }
        for i in (0..k).rev() {
            q[i] = q[i + 1] - segment_integral(|s| self.interp_qdf(s), u[i], u[i + 1]);
        }
        q
    }

    fn check(&self, u: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if u >= lo && u <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "u = {u} outside the evaluable window [{lo}, {hi}] of a qdf grid"
            )))
        }
    }

    pub fn qdf(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        let nodes = &self.grid.u_nodes;
        let i = segment(nodes, u);
        if u == nodes[i] {
            return Ok(self.grid.qdf_values[i]);
        }
        if u == nodes[i + 1] {
            return Ok(self.grid.qdf_values[i + 1]);
        }
        Ok(self.interp_qdf(u))
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        let nodes = &self.grid.u_nodes;
        let i = segment(nodes, u);
        if u == nodes[i] {
            return Ok(self.node_quantiles[i]);
        }
        Ok(self.node_quantiles[i] + segment_integral(|s| self.interp_qdf(s), nodes[i], u))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.node_quantiles[0], self.node_quantiles[self.node_quantiles.len() - 1])
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!(
                "x = {x} outside the represented support [{lo}, {hi}] of a qdf grid"
            )));
        }
        let nodes = &self.grid.u_nodes;
        let i = segment(&self.node_quantiles, x);
        let (mut a, mut b) = (nodes[i], nodes[i + 1]);
        if x == self.node_quantiles[i] {
            return Ok(a);
        }
        if x == self.node_quantiles[i + 1] {
            return Ok(b);
        }
        // Safeguarded Newton on Q(u) = x inside the bracketing segment.
        let frac = (x - self.node_quantiles[i]) / (self.node_quantiles[i + 1] - self.node_quantiles[i]);
        let mut u = a + frac * (b - a);
        for _ in 0..60 {
            let r = self.node_quantiles[i] + segment_integral(|s| self.interp_qdf(s), nodes[i], u) - x;
            if r > 0.0 {
                b = u;
            } else {
                a = u;
            }
            let step = r / self.interp_qdf(u);
            let mut next = u - step;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - u).abs() <= 1e-16 * u.max(1e-300) || b - a <= 4.0 * f64::EPSILON * b {
                return Ok(next);
            }
            u = next;
        }
        Ok(u)
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        let u = self.cdf(x)?;
        Ok(-self.qdf(u)?.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(QdfGrid::new(vec![0.5], vec![1.0], 0.5, 0.0).is_err());
        assert!(QdfGrid::new(vec![0.2, 0.1], vec![1.0, 1.0], 0.15, 0.0).is_err());
        assert!(QdfGrid::new(vec![0.0, 0.5], vec![1.0, 1.0], 0.25, 0.0).is_err());
        assert!(QdfGrid::new(vec![0.1, 0.5], vec![1.0, 0.0], 0.25, 0.0).is_err());
        assert!(QdfGrid::new(vec![0.1, 0.5], vec![1.0, 1.0], 0.7, 0.0).is_err());
    }

    #[test]
    fn constant_qdf_integrates_linearly() {
        let u = uniform_grid(33, 0.01, 0.99);
        let d = QdfDensity::new(QdfGrid::new(u.clone(), vec![2.0; 33], 0.5, 0.0).unwrap()).unwrap();
        for &x in &[0.01, 0.123, 0.5, 0.77, 0.99] {
            assert!((d.quantile(x).unwrap() - (2.0 * x - 1.0)).abs() < 1e-13);
            assert!((d.cdf(2.0 * x - 1.0).unwrap() - x).abs() < 1e-13);
            assert_eq!(d.qdf(x).unwrap(), 2.0);
        }
        assert!(d.quantile(0.005).is_err());
        assert!(d.cdf(5.0).is_err());
    }

    #[test]
    fn density_is_reciprocal_qdf() {
        let u = uniform_grid(65, 0.05, 0.95);
        let vals: Vec<f64> = u.iter().map(|&s| 1.0 + s * s).collect();
        let d = QdfDensity::new(QdfGrid::new(u, vals, 0.3, 1.0).unwrap()).unwrap();
        for &s in &[0.1, 0.3, 0.61, 0.9] {
            let x = d.quantile(s).unwrap();
            let back = d.cdf(x).unwrap();
            assert!((back - s).abs() < 1e-12);
            let p = d.ln_pdf(x).unwrap().exp();
            assert!((p * d.qdf(s).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!((d.quantile(0.3).unwrap() - 1.0).abs() < 1e-15);
    }
}
