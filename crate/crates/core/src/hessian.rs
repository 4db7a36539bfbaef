//! Hessian metric, 3-symmetric tensor and Gamma operators of the negative
//! entropy on the Wasserstein-2 space of 1D densities.
//!
//! Tangent directions are potentials `Φ` sampled on a spatial grid; only the
//! derivative samples are ever consumed.

use crate::distributions::DistributionSpec;
use crate::divergence::{transport_alpha_div, AlphaParam};
use crate::error::{Error, Result};
use crate::interp::local_cubic;
use crate::quadrature::{try_integrate_unit, QuadratureRule};

/// Highest derivative order accepted by [`entropy_derivative_series`].
pub const MAX_ENTROPY_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub x_nodes: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
    pub d3phi: Option<Vec<f64>>,
}

impl PotentialGrid {
    pub fn new(
        x_nodes: Vec<f64>,
        phi: Vec<f64>,
        dphi: Vec<f64>,
        d2phi: Vec<f64>,
        d3phi: Option<Vec<f64>>,
    ) -> Result<Self> {
        let g = PotentialGrid {
            x_nodes,
            phi,
            dphi,
            d2phi,
            d3phi,
        };
        g.validate()?;
        Ok(g)
    }

    /// Sample closed-form derivatives on `x_nodes`.
    pub fn from_fn(
        x_nodes: &[f64],
        phi: impl Fn(f64) -> f64,
        dphi: impl Fn(f64) -> f64,
        d2phi: impl Fn(f64) -> f64,
        d3phi: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<Self> {
        let s = |f: &dyn Fn(f64) -> f64| x_nodes.iter().map(|&x| f(x)).collect::<Vec<_>>();
        PotentialGrid::new(x_nodes.to_vec(), s(&phi), s(&dphi), s(&d2phi), d3phi.map(s))
    }

    pub fn from_polynomial(poly: &Polynomial, x_nodes: &[f64]) -> Result<Self> {
        let d1 = poly.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        PotentialGrid::from_fn(x_nodes, |x| poly.eval(x), |x| d1.eval(x), |x| d2.eval(x), Some(&|x| d3.eval(x)))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x_nodes.len();
        if n < 2 {
            return Err(Error::domain("potential grid needs at least two nodes"));
        }
        let lens_ok = self.phi.len() == n
            && self.dphi.len() == n
            && self.d2phi.len() == n
            && self.d3phi.as_ref().is_none_or(|v| v.len() == n);
        if !lens_ok {
            return Err(Error::domain("potential grid arrays must match x_nodes in length"));
        }
        if !self.x_nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("potential grid x_nodes must be strictly increasing"));
        }
        let all = self
            .x_nodes
            .iter()
            .chain(&self.phi)
            .chain(&self.dphi)
            .chain(&self.d2phi)
            .chain(self.d3phi.iter().flatten());
        if !all.into_iter().all(|v| v.is_finite()) {
            return Err(Error::domain("potential grid values must be finite"));
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_nodes[0], self.x_nodes[self.x_nodes.len() - 1])
    }

    fn interp(&self, values: &[f64], x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!(
                "x = {x} outside the potential grid [{lo}, {hi}]"
            )));
        }
        Ok(local_cubic(&self.x_nodes, values, x))
    }

    pub fn dphi_at(&self, x: f64) -> Result<f64> {
        self.interp(&self.dphi, x)
    }

    pub fn d2phi_at(&self, x: f64) -> Result<f64> {
        self.interp(&self.d2phi, x)
    }

    pub fn d3phi_at(&self, x: f64) -> Result<f64> {
        match &self.d3phi {
            Some(v) => self.interp(v, x),
            None => Err(Error::domain("third derivative of the potential is not available")),
        }
    }

    /// `max |ΔΦ/Δx − mean(Φ'ᵢ, Φ'ᵢ₊₁)|`; second order in the spacing for smooth Φ.
    pub fn fd_consistency(&self) -> f64 {
        (0..self.x_nodes.len() - 1)
            .map(|i| {
                let slope = (self.phi[i + 1] - self.phi[i]) / (self.x_nodes[i + 1] - self.x_nodes[i]);
                (slope - 0.5 * (self.dphi[i] + self.dphi[i + 1])).abs()
            })
            .fold(0.0, f64::max)
    }

    fn same_nodes(&self, other: &PotentialGrid) -> Result<()> {
        if self.x_nodes == other.x_nodes {
            Ok(())
        } else {
            Err(Error::domain("potential grids must share x_nodes"))
        }
    }
}

/// Components of the expansion `D ≈ ½ g_H + ((α − 3)/6) T_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorValue {
    pub quadratic: f64,
    pub cubic: f64,
    pub remainder: f64,
}

/// `g_H(p)(a, b) = ∫ Φ″_a Φ″_b p dx`, integrated over `u` with `x = Q_p(u)`.
pub fn hessian_form(p: &DistributionSpec, a: &PotentialGrid, b: &PotentialGrid, rule: &QuadratureRule) -> Result<f64> {
    a.same_nodes(b)?;
    try_integrate_unit(
        |u| {
            let x = p.quantile(u)?;
            Ok(a.d2phi_at(x)? * b.d2phi_at(x)?)
        },
        rule,
    )
}

/// `T_H(p)(a, b, c) = 2 ∫ Φ″_a Φ″_b Φ″_c p dx`.
pub fn tensor_form(
    p: &DistributionSpec,
    a: &PotentialGrid,
    b: &PotentialGrid,
    c: &PotentialGrid,
    rule: &QuadratureRule,
) -> Result<f64> {
    a.same_nodes(b)?;
    a.same_nodes(c)?;
    let i = try_integrate_unit(
        |u| {
            let x = p.quantile(u)?;
            Ok(a.d2phi_at(x)? * b.d2phi_at(x)? * c.d2phi_at(x)?)
        },
        rule,
    )?;
    Ok(2.0 * i)
}

/// Pointwise Gamma operators of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValues {
    /// `Γ₁(Φ, Φ) = (Φ′)²`
    pub gamma1: f64,
    /// `Γ₂(Φ, Φ) = (Φ″)²`
    pub gamma2: f64,
    /// `Γ₂(Γ₁(Φ, Φ), Φ) − Γ₁(Γ₂(Φ, Φ), Φ)` expanded by the chain rule.
    pub gamma3: f64,
    /// `2 (Φ″)³`
    pub gamma3_direct: f64,
}

pub fn gamma_operators(a: &PotentialGrid, x: f64) -> Result<GammaValues> {
    let d3 = a.d3phi_at(x)?;
    let d1 = a.dphi_at(x)?;
    let d2 = a.d2phi_at(x)?;
    // (Φ′²)″ = 2Φ″² + 2Φ′Φ‴ and (Φ″²)′ = 2Φ″Φ‴.
    let gamma2_of_gamma1 = (2.0 * d2 * d2 + 2.0 * d1 * d3) * d2;
    let gamma1_of_gamma2 = 2.0 * d2 * d3 * d1;
    Ok(GammaValues {
        gamma1: d1 * d1,
        gamma2: d2 * d2,
        gamma3: gamma2_of_gamma1 - gamma1_of_gamma2,
        gamma3_direct: 2.0 * d2 * d2 * d2,
    })
}

/// Dense real polynomial `Σ cₖ xᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |c: &[f64], k: usize| c.get(k).copied().unwrap_or(0.0);
        Polynomial::new((0..n).map(|k| get(&self.coeffs, k) + get(&other.coeffs, k)).collect())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }
}

/// `Γ₁(f, g) = f′ g′`
pub fn gamma1_poly(f: &Polynomial, g: &Polynomial) -> Polynomial {
    f.derivative().mul(&g.derivative())
}

/// `Γ₂(f, g) = f″ g″`
pub fn gamma2_poly(f: &Polynomial, g: &Polynomial) -> Polynomial {
    f.derivative().derivative().mul(&g.derivative().derivative())
}

/// `Γ₃(Φ) = Γ₂(Γ₁(Φ, Φ), Φ) − Γ₁(Γ₂(Φ, Φ), Φ)` by exact composition.
pub fn gamma3_poly(phi: &Polynomial) -> Polynomial {
    gamma2_poly(&gamma1_poly(phi, phi), phi).sub(&gamma1_poly(&gamma2_poly(phi, phi), phi))
}

/// `2 (Φ″)³`
pub fn gamma3_direct_poly(phi: &Polynomial) -> Polynomial {
    let d2 = phi.derivative().derivative();
    d2.mul(&d2).mul(&d2).scale(2.0)
}

/// Potential of the optimal map from `q` to `p`: `Φ′(x) = T(x) − x` and
/// `Φ″(x) = Q′_p(u)/Q′_q(u) − 1` at `u = F_q(x)`, with `Φ` by trapezoids from 0.
pub fn potential_from_pair(p: &DistributionSpec, q: &DistributionSpec, x_grid: &[f64]) -> Result<PotentialGrid> {
    let mut dphi = Vec::with_capacity(x_grid.len());
    let mut d2phi = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let u = q.cdf(x)?;
        dphi.push(p.quantile(u)? - x);
        d2phi.push(p.qdf(u)? / q.qdf(u)? - 1.0);
    }
    let mut phi = vec![0.0; x_grid.len()];
    for i in 1..x_grid.len() {
        phi[i] = phi[i - 1] + 0.5 * (dphi[i] + dphi[i - 1]) * (x_grid[i] - x_grid[i - 1]);
    }
    PotentialGrid::new(x_grid.to_vec(), phi, dphi, d2phi, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorComparison {
    pub value: TensorValue,
    pub divergence: f64,
    /// Largest disagreement between the `h`-integral and tensor-form routes.
    pub route_gap: f64,
}

/// Split `D_{T,α}(p‖q)` into `½ g_H(q)(σ,σ)`, `((α−3)/6) T_H(q)(σ,σ,σ)` and a
/// remainder, where σ is the tangent of the map from `q` to `p`.
///
/// The quadratic and cubic terms come from `h = Q′_p/Q′_q − 1`; the same terms
/// are recomputed from the potential on `x = Q_q(nodes)` and compared.
pub fn taylor_compare(
    p: &DistributionSpec,
    q: &DistributionSpec,
    alpha: f64,
    rule: &QuadratureRule,
) -> Result<TaylorComparison> {
    let h = |u: f64| -> Result<f64> { Ok(p.qdf(u)? / q.qdf(u)? - 1.0) };
    let h2 = try_integrate_unit(|u| h(u).map(|v| v * v), rule)?;
    let h3 = try_integrate_unit(|u| h(u).map(|v| v * v * v), rule)?;
    let c3 = (alpha - 3.0) / 6.0;
    let quadratic = 0.5 * h2;
    let cubic = c3 * h3;

    let x_grid = rule.nodes().iter().map(|&u| q.quantile(u)).collect::<Result<Vec<_>>>()?;
    let phi = potential_from_pair(p, q, &x_grid)?;
    let g = hessian_form(q, &phi, &phi, rule)?;
    let t = tensor_form(q, &phi, &phi, &phi, rule)?;
    let route_gap = (quadratic - 0.5 * g).abs().max((cubic - c3 * 0.5 * t).abs());

    let divergence = transport_alpha_div(p, q, AlphaParam::new(alpha), rule)?.value;
    Ok(TaylorComparison {
        value: TensorValue {
            quadratic,
            cubic,
            remainder: divergence - quadratic - cubic,
        },
        divergence,
        route_gap,
    })
}

/// `dⁿ/dtⁿ H(p_t)` at `t = 0` for `n = 1..=n_max` along the flow generated by
/// `Φ`: `−(−1)ⁿ (n − 1)! ∫ (Φ″)ⁿ p dx`.
pub fn entropy_derivative_series(
    p: &DistributionSpec,
    a: &PotentialGrid,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > MAX_ENTROPY_ORDER {
        return Err(Error::domain(format!(
            "derivative order must be in 1..={MAX_ENTROPY_ORDER}, got {n_max}"
        )));
    }
    let d2 = rule
        .nodes()
        .iter()
        .map(|&u| a.d2phi_at(p.quantile(u)?))
        .collect::<Result<Vec<_>>>()?;
    let mut factorial = 1.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            factorial *= (n - 1) as f64;
        }
        let moment: f64 = d2.iter().zip(rule.weights()).map(|(v, w)| w * v.powi(n as i32)).sum();
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        out.push(sign * factorial * moment);
    }
    Ok(out)
}

/// `H(p_t)` for `p_t = (x + tΦ′(x))_# p`, from `Q′_t(u) = Q′_p(u)(1 + tΦ″(Q_p(u)))`.
pub fn pushforward_entropy(p: &DistributionSpec, a: &PotentialGrid, t: f64, rule: &QuadratureRule) -> Result<f64> {
    try_integrate_unit(
        |u| {
            let jac = 1.0 + t * a.d2phi_at(p.quantile(u)?)?;
            if !(jac > 0.0) {
                return Err(Error::domain(format!("flow is not monotone at t = {t}")));
            }
            Ok(p.qdf(u)?.ln() + jac.ln())
        },
        rule,
    )
}

/// First three derivatives of `f` at 0 by central differences of step `h`:
/// five-point stencils for orders 1 and 2, seven-point for order 3.
pub fn fd_derivatives(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<[f64; 3]> {
    let v = |k: i32| f(k as f64 * h);
    let (m3, m2, m1, z, p1, p2, p3) = (v(-3)?, v(-2)?, v(-1)?, v(0)?, v(1)?, v(2)?, v(3)?);
    let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h);
    let d3 = (-p3 + 8.0 * p2 - 13.0 * p1 + 13.0 * m1 - 8.0 * m2 + m3) / (8.0 * h * h * h);
    Ok([d1, d2, d3])
}
