//! Transport α-geodesics in quantile-density coordinates.
//!
//! Along the geodesic from `q` (t = 0) to `p` (t = 1) the QDF moves affinely in
//! the coordinate `(Q')^(−α)`, or in `log Q'` when α = 0:
//!
//! ```text
//! Q'(t, u) = ((1 − t) Q'_q(u)^(−α) + t Q'_p(u)^(−α))^(−1/α)
//! ```
//!
//! α = −1 is the Wasserstein-2 displacement interpolation. The classical
//! α-geodesics on the positive octant are provided for comparison.

use crate::distributions::{DistributionSpec, QdfGrid};
use crate::divergence::DEFAULT_SMALL_ALPHA;
use crate::error::{Error, Result};

/// Beyond this `|α · log ratio|` powers are combined in log space.
const LOG_SPACE_SWITCH: f64 = 30.0;

/// Fixes the translation left free by the geodesic equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorPolicy {
    /// `Q(t, ½) = (1 − t) Q_q(½) + t Q_p(½)`.
    #[default]
    LinearMedian,
}

impl AnchorPolicy {
    pub fn anchor(&self, p: &DistributionSpec, q: &DistributionSpec, t: f64) -> Result<(f64, f64)> {
        match self {
            AnchorPolicy::LinearMedian => {
                let x = (1.0 - t) * q.quantile(0.5)? + t * p.quantile(0.5)?;
                Ok((0.5, x))
            }
        }
    }
}

/// Geodesic QDF value at time `t` between `Q'_q(u) = qdf_q` and `Q'_p(u) = qdf_p`.
pub fn geodesic_qdf(qdf_p: f64, qdf_q: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(qdf_p > 0.0 && qdf_q > 0.0 && qdf_p.is_finite() && qdf_q.is_finite()) {
        return Err(Error::domain(format!(
            "geodesic endpoints need positive QDFs, got {qdf_p} and {qdf_q}"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(qdf_q);
    }
    if t == 1.0 {
        return Ok(qdf_p);
    }
    let (lp, lq) = (qdf_p.ln(), qdf_q.ln());
    let log_value = if alpha.abs() < DEFAULT_SMALL_ALPHA {
        t * lp + (1.0 - t) * lq
    } else if alpha.abs() * (lp - lq).abs().max(lp.abs()).max(lq.abs()) > LOG_SPACE_SWITCH {
        let x1 = (1.0 - t).ln() - alpha * lq;
        let x2 = t.ln() - alpha * lp;
        let m = x1.max(x2);
        let lse = m + ((x1 - m).exp() + (x2 - m).exp()).ln();
        -lse / alpha
    } else {
        let s = (1.0 - t) * (-alpha * lq).exp_m1() + t * (-alpha * lp).exp_m1();
        -s.ln_1p() / alpha
    };
    let value = log_value.exp();
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::numerical(f64::NAN, format!("geodesic QDF overflowed: log value {log_value}")))
    }
}

/// The geodesic frame at time `t`, sampled on `u_grid` and anchored by `policy`.
pub fn transport_alpha_geodesic_with(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: f64,
    t: f64,
    u_grid: &[f64],
    policy: AnchorPolicy,
) -> Result<QdfGrid> {
    if !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
    }
    let values = u_grid
        .iter()
        .map(|&u| {
            geodesic_qdf(p.qdf(u)?, q.qdf(u)?, alpha, t).map_err(|e| match e {
                Error::Numerical { reason, .. } => Error::Numerical { node: u, reason },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (anchor_u, anchor_x) = policy.anchor(p, q, t)?;
    let grid = QdfGrid {
        u_nodes: u_grid.to_vec(),
        qdf_values: values,
        anchor_u,
        anchor_x,
    };
    grid.validate().map_err(|e| match e {
        Error::Spec(msg) => Error::domain(format!("geodesic u-grid: {msg}")),
        other => other,
    })?;
    Ok(grid)
}

/// [`transport_alpha_geodesic_with`] under the default anchor policy.
pub fn transport_alpha_geodesic(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: f64,
    t: f64,
    u_grid: &[f64],
) -> Result<QdfGrid> {
    transport_alpha_geodesic_with(p, q, alpha, t, u_grid, AnchorPolicy::default())
}

/// The density `r_α(t, ·)` described by a geodesic frame.
pub fn geodesic_density(frame: &QdfGrid) -> Result<DistributionSpec> {
    DistributionSpec::qdf_grid(frame.clone())
}

/// Geodesic frames on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub alpha: f64,
    pub t_grid: Vec<f64>,
    pub frames: Vec<QdfGrid>,
    pub anchor_policy: AnchorPolicy,
    /// `Q'_q` on the frame nodes.
    pub base_qdf: Vec<f64>,
}

impl GeodesicPath {
    pub fn new(
        p: &DistributionSpec,
        q: &DistributionSpec,
        alpha: f64,
        t_grid: Vec<f64>,
        u_grid: &[f64],
    ) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::domain("geodesic path needs at least one time"));
        }
        if !t_grid.windows(2).all(|w| w[0] < w[1]) || t_grid[0] < 0.0 || t_grid[t_grid.len() - 1] > 1.0 {
            return Err(Error::domain("t grid must be strictly increasing within [0, 1]"));
        }
        let policy = AnchorPolicy::default();
        let frames = t_grid
            .iter()
            .map(|&t| transport_alpha_geodesic_with(p, q, alpha, t, u_grid, policy))
            .collect::<Result<Vec<_>>>()?;
        let base_qdf = u_grid.iter().map(|&u| q.qdf(u)).collect::<Result<Vec<_>>>()?;
        Ok(GeodesicPath {
            alpha,
            t_grid,
            frames,
            anchor_policy: policy,
            base_qdf,
        })
    }

    /// `steps + 1` equally spaced times `0, 1/steps, …, 1`.
    pub fn uniform(
        p: &DistributionSpec,
        q: &DistributionSpec,
        alpha: f64,
        steps: usize,
        u_grid: &[f64],
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::domain("need at least one time step"));
        }
        let t_grid = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        GeodesicPath::new(p, q, alpha, t_grid, u_grid)
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.frames[0].u_nodes
    }

    fn uniform_step(&self) -> Result<f64> {
        if self.t_grid.len() < 5 {
            return Err(Error::domain(format!(
                "finite-difference residual needs >= 5 frames, got {}",
                self.t_grid.len()
            )));
        }
        let h = self.t_grid[1] - self.t_grid[0];
        let uniform = self
            .t_grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0));
        if !uniform {
            return Err(Error::domain("finite-difference residual needs uniformly spaced frames"));
        }
        Ok(h)
    }

    /// `J(t_k, u_i) = Q'(t_k, u_i) / Q'_q(u_i)`.
    fn jacobian(&self, k: usize, i: usize) -> f64 {
        self.frames[k].qdf_values[i] / self.base_qdf[i]
    }
}

/// Residual values on the interior frames of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrid {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    /// `values[k][i]` at `(t[k], u[i])`.
    pub values: Vec<Vec<f64>>,
}

impl ResidualGrid {
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(*v))
    }
}

fn fd_residual(path: &GeodesicPath, f: impl Fn(f64, f64, f64, f64) -> f64) -> Result<ResidualGrid> {
    let h = path.uniform_step()?;
    let n_t = path.t_grid.len();
    let n_u = path.base_qdf.len();
    let values = (1..n_t - 1)
        .map(|k| {
            (0..n_u)
                .map(|i| {
                    let (jm, j0, jp) = (path.jacobian(k - 1, i), path.jacobian(k, i), path.jacobian(k + 1, i));
                    f(jm, j0, jp, h)
                })
                .collect()
        })
        .collect();
    Ok(ResidualGrid {
        t: path.t_grid[1..n_t - 1].to_vec(),
        u: path.u_nodes().to_vec(),
        values,
    })
}

/// `|∂_tt J − (α + 1)(∂_t J)² / J|` by central differences in `t`.
pub fn geodesic_pde_residual(path: &GeodesicPath) -> Result<ResidualGrid> {
    let a1 = path.alpha + 1.0;
    fd_residual(path, |jm, j0, jp, h| {
        let jt = (jp - jm) / (2.0 * h);
        let jtt = (jp - 2.0 * j0 + jm) / (h * h);
        (jtt - a1 * jt * jt / j0).abs()
    })
}

/// `|∂_tt log J|` by central differences in `t`; vanishes on α = 0 paths.
pub fn geodesic_log_residual(path: &GeodesicPath) -> Result<ResidualGrid> {
    fd_residual(path, |jm, j0, jp, h| ((jp.ln() - 2.0 * j0.ln() + jm.ln()) / (h * h)).abs())
}

/// Largest deviation from affinity in `t` of `Q'^(−α)` (or `log Q'` at α = 0)
/// over consecutive frame triples, relative to the coordinate's magnitude.
pub fn linearity_defect(path: &GeodesicPath) -> f64 {
    let small = path.alpha.abs() < DEFAULT_SMALL_ALPHA;
    let coord = |v: f64| if small { v.ln() } else { v.powf(-path.alpha) };
    let mut worst: f64 = 0.0;
    for k in 1..path.t_grid.len().saturating_sub(1) {
        let (t0, t1, t2) = (path.t_grid[k - 1], path.t_grid[k], path.t_grid[k + 1]);
        let w = (t1 - t0) / (t2 - t0);
        for i in 0..path.base_qdf.len() {
            let c0 = coord(path.frames[k - 1].qdf_values[i]);
            let c1 = coord(path.frames[k].qdf_values[i]);
            let c2 = coord(path.frames[k + 1].qdf_values[i]);
            let scale = c0.abs().max(c2.abs()).max(1.0);
            worst = worst.max((c1 - ((1.0 - w) * c0 + w * c2)).abs() / scale);
        }
    }
    worst
}

/// Classical α-geodesic `((1−t) m^r + t n^r)^(1/r)`, `r = (1 − α)/2`,
/// with `m^(1−t) n^t` at α = 1.
pub fn classical_alpha_geodesic(m: &[f64], n: &[f64], alpha: f64, t: f64) -> Result<Vec<f64>> {
    if m.len() != n.len() || m.is_empty() {
        return Err(Error::domain("endpoints must have equal non-zero length"));
    }
    if !m.iter().chain(n).all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::domain("endpoint entries must be positive and finite"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(m.to_vec());
    }
    if t == 1.0 {
        return Ok(n.to_vec());
    }
    let r = (1.0 - alpha) / 2.0;
    Ok(m.iter()
        .zip(n)
        .map(|(&a, &b)| {
            if alpha == 1.0 {
                a.powf(1.0 - t) * b.powf(t)
            } else {
                ((1.0 - t) * a.powf(r) + t * b.powf(r)).powf(1.0 / r)
            }
        })
        .collect())
}

/// Diagonal Christoffel coefficients `Γ^{k,α}_{kk}(m) = −(1 + α) / (2 m_k)`.
pub fn classical_alpha_connection(m: &[f64], alpha: f64) -> Vec<f64> {
    m.iter().map(|v| -(1.0 + alpha) / (2.0 * v)).collect()
}

/// `|γ'' + Γ(γ) γ'²|` per coordinate at time `t`, by central differences of
/// step `h` on the closed-form geodesic.
pub fn classical_geodesic_ode_residual(m: &[f64], n: &[f64], alpha: f64, t: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && t - h >= 0.0 && t + h <= 1.0) {
        return Err(Error::domain(format!("need 0 <= t - h and t + h <= 1, got t = {t}, h = {h}")));
    }
    let gm = classical_alpha_geodesic(m, n, alpha, t - h)?;
    let g0 = classical_alpha_geodesic(m, n, alpha, t)?;
    let gp = classical_alpha_geodesic(m, n, alpha, t + h)?;
    let gamma = classical_alpha_connection(&g0, alpha);
    Ok((0..g0.len())
        .map(|i| {
            let d1 = (gp[i] - gm[i]) / (2.0 * h);
            let d2 = (gp[i] - 2.0 * g0[i] + gm[i]) / (h * h);
            (d2 + gamma[i] * d1 * d1).abs()
        })
        .collect())
}
