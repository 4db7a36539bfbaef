//! Strictly increasing maps `G` used by generative (pushforward) densities.

use crate::error::{Error, Result};
use crate::interp::segment;

/// A strictly increasing map of the latent variable.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneMap {
    /// `G(z) = a z + b` with `a > 0`.
    Affine { a: f64, b: f64 },
    /// Monotone cubic interpolation of `(z, g)` pairs.
    Grid(MonotoneGrid),
}

impl MonotoneMap {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        let m = MonotoneMap::Affine { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn grid(z: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        Ok(MonotoneMap::Grid(MonotoneGrid::new(z, g)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneMap::Affine { a, b } => {
                if !(*a > 0.0 && a.is_finite()) || !b.is_finite() {
                    return Err(Error::spec(format!(
                        "affine map needs a finite slope > 0 and finite offset, got a = {a}, b = {b}"
                    )));
                }
                Ok(())
            }
            MonotoneMap::Grid(g) => g.validate(),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            MonotoneMap::Affine { a, b } => a * z + b,
            MonotoneMap::Grid(g) => g.eval(z),
        }
    }

    /// `∂_z G(z)`, always strictly positive.
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            MonotoneMap::Affine { a, .. } => *a,
            MonotoneMap::Grid(g) => g.derivative(z),
        }
    }

    pub fn inverse(&self, x: f64) -> f64 {
        match self {
            MonotoneMap::Affine { a, b } => (x - b) / a,
            MonotoneMap::Grid(g) => g.inverse(x),
        }
    }
}

/// Fritsch–Carlson monotone cubic through strictly increasing data, extended
/// linearly beyond the end nodes with the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneGrid {
    z: Vec<f64>,
    g: Vec<f64>,
    slopes: Vec<f64>,
}

/// Floor applied to interpolant derivatives so `∂_z G > 0` holds everywhere.
const MIN_SLOPE_FRACTION: f64 = 1e-9;

impl MonotoneGrid {
    pub fn new(z: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let mut grid = MonotoneGrid {
            z,
            g,
            slopes: Vec::new(),
        };
        grid.validate_data()?;
        grid.slopes = grid.node_slopes();
        Ok(grid)
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    fn validate_data(&self) -> Result<()> {
        if self.z.len() < 2 || self.z.len() != self.g.len() {
            return Err(Error::spec(format!(
                "monotone grid needs >= 2 matching nodes, got {} z and {} g",
                self.z.len(),
                self.g.len()
            )));
        }
        if !self.z.iter().chain(&self.g).all(|v| v.is_finite()) {
            return Err(Error::spec("monotone grid values must be finite"));
        }
        if !self.z.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::spec("monotone grid z nodes must be strictly increasing"));
        }
        if !self.g.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::spec("map is not strictly increasing"));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.validate_data()?;
        if self.slopes.len() != self.z.len() || !self.slopes.iter().all(|&d| d > 0.0) {
            return Err(Error::spec("monotone grid slopes must be positive"));
        }
        Ok(())
    }

    fn node_slopes(&self) -> Vec<f64> {
        let n = self.z.len();
        let h: Vec<f64> = self.z.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (self.g[k + 1] - self.g[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            // Weighted harmonic mean of neighbouring secants.
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
        for k in 0..n - 1 {
            let a = d[k] / delta[k];
            let b = d[k + 1] / delta[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                d[k] = tau * a * delta[k];
                d[k + 1] = tau * b * delta[k];
            }
        }
        d
    }

    fn hermite(&self, k: usize, z: f64) -> (f64, f64) {
        let h = self.z[k + 1] - self.z[k];
        let t = (z - self.z[k]) / h;
        let (g0, g1) = (self.g[k], self.g[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * g0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * g1
            + (t3 - t2) * d1;
        let dvalue = ((6.0 * t2 - 6.0 * t) * g0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * g1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (value, dvalue)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z <= self.z[0] {
            return self.g[0] + self.slopes[0] * (z - self.z[0]);
        }
        if z >= self.z[n - 1] {
            return self.g[n - 1] + self.slopes[n - 1] * (z - self.z[n - 1]);
        }
        self.hermite(segment(&self.z, z), z).0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z <= self.z[0] {
            return self.slopes[0];
        }
        if z >= self.z[n - 1] {
            return self.slopes[n - 1];
        }
        let k = segment(&self.z, z);
        let secant = (self.g[k + 1] - self.g[k]) / (self.z[k + 1] - self.z[k]);
        self.hermite(k, z).1.max(MIN_SLOPE_FRACTION * secant)
    }

    pub fn inverse(&self, x: f64) -> f64 {
        let n = self.z.len();
        if x <= self.g[0] {
            return self.z[0] + (x - self.g[0]) / self.slopes[0];
        }
        if x >= self.g[n - 1] {
            return self.z[n - 1] + (x - self.g[n - 1]) / self.slopes[n - 1];
        }
        let k = segment(&self.g, x);
        let (mut a, mut b) = (self.z[k], self.z[k + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.hermite(k, mid).0 < x {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_monotone() {
        assert!(MonotoneMap::affine(0.0, 1.0).is_err());
        assert!(MonotoneMap::affine(-1.0, 1.0).is_err());
        assert!(MonotoneMap::grid(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).is_err());
        assert!(MonotoneMap::grid(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn grid_interpolates_and_inverts() {
        let z: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
        let g: Vec<f64> = z.iter().map(|&v| v + 0.3 * v.powi(3)).collect();
        let m = MonotoneMap::grid(z.clone(), g.clone()).unwrap();
        for (zi, gi) in z.iter().zip(&g) {
            assert!((m.eval(*zi) - gi).abs() < 1e-14);
        }
        for i in 0..400 {
            let v = -3.0 + 6.0 * i as f64 / 399.0;
            let x = m.eval(v);
            assert!(m.derivative(v) > 0.0);
            assert!((m.inverse(x) - v).abs() < 1e-10);
        }
        // Close to the underlying smooth map in the interior.
        assert!((m.derivative(0.5) - (1.0 + 0.9 * 0.25)).abs() < 2e-2);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let z = vec![0.0, 0.5, 1.5, 2.0, 4.0];
        let g = vec![0.0, 0.1, 1.0, 3.0, 3.5];
        let m = MonotoneMap::grid(z, g).unwrap();
        let h = 1e-6;
        for i in 1..100 {
            let v = 4.0 * i as f64 / 100.0;
            let fd = (m.eval(v + h) - m.eval(v - h)) / (2.0 * h);
            assert!((fd - m.derivative(v)).abs() < 1e-5, "z={v}");
        }
    }
}
