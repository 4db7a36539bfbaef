//! Identity suites run by `tad check`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use transport_alpha::distributions::{uniform_u_grid, DistributionSpec, QdfGrid};
use transport_alpha::divergence::{orthogonality_defect, transport_alpha_div, AlphaParam};
use transport_alpha::geodesics::{geodesic_pde_residual, linearity_defect, GeodesicPath};
use transport_alpha::hessian::{
    entropy_derivative_series, fd_derivatives, gamma3_direct_poly, gamma3_poly, gamma_operators, pushforward_entropy,
    taylor_compare, Polynomial, PotentialGrid, MAX_ENTROPY_ORDER,
};
use transport_alpha::quadrature::{QuadratureRule, DEFAULT_DATA_CLIP};

use crate::args::Suite;
use crate::commands::{frame_u_grid, Context};
use crate::error::{CliError, CliResult};
use crate::report::Outcome;

const DUALITY_ALPHAS: [f64; 7] = [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0];
const DUALITY_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-8;
const PYTHAGOREAN_TOL: f64 = 1e-8;
const GAMMA3_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-10;
const ENTROPY_FD_STEP: f64 = 1e-2;
const ENTROPY_FD_TOL: f64 = 1e-4;
const LINEARITY_TOL: f64 = 1e-10;
const MIN_REFINEMENT_RATIO: f64 = 3.6;
const RESOLVED_RESIDUAL: f64 = 1e-9;
const TAYLOR_EPS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Default)]
struct Assertions(Vec<Value>);

impl Assertions {
    fn push(&mut self, name: impl Into<String>, measured: f64, tolerance: f64, passed: bool) {
        self.0.push(json!({
            "name": name.into(),
            "measured": measured,
            "tolerance": tolerance,
            "passed": passed,
        }));
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, measured <= tolerance);
    }

    fn finish(self, mut results: Value, error_estimate: Option<f64>) -> Outcome {
        let passed = self.0.iter().all(|a| a["passed"] == json!(true));
        results["assertions"] = Value::Array(self.0);
        Outcome::Json {
            results,
            error_estimate,
            passed: Some(passed),
        }
    }
}

pub fn run(ctx: &mut Context, suite: &Suite) -> CliResult<Outcome> {
    match suite {
        Suite::Duality { cases } => duality(ctx, *cases),
        Suite::Taylor { p, q, alpha } => taylor(ctx, p, q, *alpha),
        Suite::Pythagorean { p, q, r, alpha } => pythagorean(ctx, p, q, r, *alpha),
        Suite::Gamma3 { poly } => gamma3(poly),
        Suite::EntropyDerivs { p } => entropy_derivs(ctx, p),
        Suite::GeodesicPde {
            p,
            q,
            alpha,
            t_steps,
            u_n,
            grid_csv,
        } => geodesic_pde(ctx, p, q, *alpha, *t_steps, *u_n, grid_csv.as_deref()),
    }
}

/// Smooth positive QDF `exp(c + Σ aₖ sin(kπu))·(4u(1 − u))^(−τ)` on 49 nodes.
fn random_grid(rng: &mut impl Rng, lo: f64, hi: f64) -> CliResult<DistributionSpec> {
    let level = rng.random_range(-1.0..1.0);
    let waves: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.6..0.6));
    let tail = rng.random_range(0.0..0.8);
    let anchor_x = rng.random_range(-2.0..2.0);
    let u = uniform_u_grid(49, lo, hi);
    let values = u
        .iter()
        .map(|&s| {
            let wave: f64 = waves
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * s).sin())
                .sum();
            (level + wave - tail * (4.0 * s * (1.0 - s)).ln()).exp()
        })
        .collect();
    Ok(DistributionSpec::qdf_grid(QdfGrid::new(u, values, 0.5, anchor_x)?)?)
}

fn duality(ctx: &mut Context, cases: usize) -> CliResult<Outcome> {
    let clip = ctx.common.clip.unwrap_or(DEFAULT_DATA_CLIP);
    if clip <= 0.0 {
        return Err(CliError::Usage("check duality needs --clip > 0 for its grid densities".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.common.seed);
    let mut checks = Assertions::default();
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let p = random_grid(&mut rng, clip, 1.0 - clip)?;
        let q = random_grid(&mut rng, clip, 1.0 - clip)?;
        let rule = ctx.rule_for(&[&p, &q])?;
        for a in DUALITY_ALPHAS {
            let fwd = transport_alpha_div(&p, &q, AlphaParam::new(a), &rule)?.value;
            let back = transport_alpha_div(&q, &p, AlphaParam::new(-a), &rule)?.value;
            let residual = (fwd - back).abs();
            worst = worst.max(residual);
            checks.at_most(format!("case {case} alpha {a}"), residual, DUALITY_TOL);
        }
    }
    Ok(checks.finish(json!({ "suite": "duality", "seed": ctx.common.seed, "cases": cases, "max_residual": worst }), Some(worst)))
}

/// `Q'_q (1 + ε (Q'_p / Q'_q − 1))` on every node the rule and its refinement touch.
fn scaled_perturbation(p: &DistributionSpec, q: &DistributionSpec, eps: f64, rule: &QuadratureRule) -> CliResult<DistributionSpec> {
    let mut nodes: Vec<f64> = rule.nodes().to_vec();
    if let Some(fine) = rule.refined() {
        nodes.extend_from_slice(fine.nodes());
    }
    if rule.clip_delta() > 0.0 {
        let (lo, hi) = rule.window();
        nodes.extend([lo, hi]);
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let values = nodes
        .iter()
        .map(|&u| {
            let qq = q.qdf(u)?;
            Ok(qq * (1.0 + eps * (p.qdf(u)? / qq - 1.0)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DistributionSpec::qdf_grid(QdfGrid::new(nodes, values, 0.5, q.quantile(0.5)?)?)?)
}

fn taylor(ctx: &mut Context, p: &Path, q: &Path, alpha: f64) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let rule = ctx.rule_for(&[&p, &q])?;
    let mut checks = Assertions::default();

    let actual = taylor_compare(&p, &q, alpha, &rule)?;
    checks.at_most("route gap at the given pair", actual.route_gap, ROUTE_TOL);

    let mut rows = Vec::new();
    let mut remainders = Vec::new();
    for eps in TAYLOR_EPS {
        let pe = scaled_perturbation(&p, &q, eps, &rule)?;
        let t = taylor_compare(&pe, &q, alpha, &rule)?;
        checks.at_most(format!("route gap at eps {eps}"), t.route_gap, ROUTE_TOL);
        let ratio = remainders.last().map(|prev: &f64| prev / t.value.remainder.abs());
        remainders.push(t.value.remainder.abs());
        rows.push(json!({
            "eps": eps,
            "divergence": t.divergence,
            "quadratic": t.value.quadratic,
            "cubic": t.value.cubic,
            "remainder": t.value.remainder,
            "ratio": ratio,
        }));
    }
    let n = remainders.len();
    let last_ratio = remainders[n - 2] / remainders[n - 1];
    let quartic = (12.0..=20.0).contains(&last_ratio) || remainders[n - 1] <= 1e-13;
    checks.push("remainder halving ratio near 16", last_ratio, 16.0, quartic);

    let results = json!({
        "suite": "taylor",
        "alpha": alpha,
        "quadratic": actual.value.quadratic,
        "cubic": actual.value.cubic,
        "remainder": actual.value.remainder,
        "divergence": actual.divergence,
        "route_gap": actual.route_gap,
        "convergence": rows,
    });
    Ok(checks.finish(results, Some(actual.route_gap)))
}

fn pythagorean(ctx: &mut Context, p: &Path, q: &Path, r: &Path, alpha: f64) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let r = ctx.load(r)?.spec;
    let rule = ctx.rule_for(&[&p, &q, &r])?;
    let a = AlphaParam::new(alpha);
    let d_pq = transport_alpha_div(&p, &q, a, &rule)?;
    let d_qr = transport_alpha_div(&q, &r, a, &rule)?;
    let d_pr = transport_alpha_div(&p, &r, a, &rule)?;
    let lhs = d_pq.value + d_qr.value - d_pr.value;
    let defect = orthogonality_defect(&p, &q, &r, a, &rule)?;
    let err = d_pq.error_estimate + d_qr.error_estimate + d_pr.error_estimate + defect.error_estimate;
    let mut checks = Assertions::default();
    let residual = (lhs - defect.value).abs();
    checks.at_most("cosine law against the defect", residual, PYTHAGOREAN_TOL * lhs.abs().max(1.0));
    let results = json!({
        "suite": "pythagorean",
        "alpha": alpha,
        "d_pq": d_pq.value,
        "d_qr": d_qr.value,
        "d_pr": d_pr.value,
        "cosine_law": lhs,
        "defect": { "value": defect.value, "error_estimate": defect.error_estimate },
        "orthogonal": defect.value.abs() <= PYTHAGOREAN_TOL,
    });
    Ok(checks.finish(results, Some(err)))
}

fn gamma3(coeffs: &[f64]) -> CliResult<Outcome> {
    let phi = Polynomial::new(coeffs.to_vec());
    let composed = gamma3_poly(&phi);
    let direct = gamma3_direct_poly(&phi);
    let scale = direct.coeffs().iter().chain(composed.coeffs()).fold(1.0f64, |m, c| m.max(c.abs()));
    let coeff_gap = composed.sub(&direct).coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));

    let nodes = uniform_u_grid(101, -1.0, 1.0);
    let grid = PotentialGrid::from_polynomial(&phi, &nodes)?;
    let mut point_gap: f64 = 0.0;
    let mut point_scale: f64 = 1.0;
    for &x in &nodes {
        let g = gamma_operators(&grid, x)?;
        point_gap = point_gap.max((g.gamma3 - g.gamma3_direct).abs());
        point_scale = point_scale.max(g.gamma3_direct.abs());
    }

    let mut checks = Assertions::default();
    checks.at_most("coefficients, composition vs 2(phi'')^3", coeff_gap / scale, GAMMA3_TOL);
    checks.at_most("grid values on [-1, 1]", point_gap / point_scale, GAMMA3_TOL);
    let results = json!({
        "suite": "gamma3",
        "phi": phi.coeffs(),
        "composition": composed.coeffs(),
        "direct": direct.coeffs(),
    });
    Ok(checks.finish(results, Some(coeff_gap)))
}

fn entropy_derivs(ctx: &mut Context, p: &Path) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let rule = ctx.rule_for(&[&p])?;
    // Φ = x²/2 scales p by 1 + t, so H(p_t) = H(p) + log(1 + t) on the window.
    let mut u_used: Vec<f64> = rule.nodes().to_vec();
    if let Some(fine) = rule.refined() {
        u_used.extend_from_slice(fine.nodes());
    }
    let (u_min, u_max) = u_used.iter().fold((1.0f64, 0.0f64), |(a, b), &u| (a.min(u), b.max(u)));
    let (x_lo, x_hi) = (p.quantile(u_min)?, p.quantile(u_max)?);
    let pad = 1.0 + 0.1 * (x_hi - x_lo);
    let nodes = uniform_u_grid(129, x_lo - pad, x_hi + pad);
    let flow = PotentialGrid::from_fn(&nodes, |x| 0.5 * x * x, |x| x, |_| 1.0, Some(&|_| 0.0))?;

    let mass: f64 = rule.weights().iter().sum();
    let mut factorial = 1.0;
    let expected: Vec<f64> = (1..=MAX_ENTROPY_ORDER)
        .map(|n| {
            if n > 1 {
                factorial *= (n - 1) as f64;
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sign * factorial * mass
        })
        .collect();
    let series = entropy_derivative_series(&p, &flow, MAX_ENTROPY_ORDER, &rule)?;
    let fd = fd_derivatives(|t| pushforward_entropy(&p, &flow, t, &rule), ENTROPY_FD_STEP)?;

    let mut checks = Assertions::default();
    for (n, (s, e)) in series.iter().zip(&expected).enumerate() {
        checks.at_most(format!("series order {}", n + 1), (s - e).abs(), SERIES_TOL * e.abs());
    }
    for (n, (d, s)) in fd.iter().zip(&series).enumerate() {
        checks.at_most(format!("finite difference order {}", n + 1), (d - s).abs(), ENTROPY_FD_TOL);
    }
    let results = json!({
        "suite": "entropy-derivs",
        "flow": "scaling, phi = x^2/2",
        "series": series,
        "expected": expected,
        "finite_difference": fd,
        "fd_step": ENTROPY_FD_STEP,
    });
    Ok(checks.finish(results, None))
}

fn geodesic_pde(
    ctx: &mut Context,
    p: &Path,
    q: &Path,
    alpha: f64,
    t_steps: usize,
    u_n: usize,
    grid_csv: Option<&Path>,
) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let u = frame_u_grid(u_n, ctx.clip_for(&[&p, &q]));
    let coarse = GeodesicPath::uniform(&p, &q, alpha, t_steps - 1, &u)?;
    let fine = GeodesicPath::uniform(&p, &q, alpha, 2 * (t_steps - 1), &u)?;
    let r_coarse = geodesic_pde_residual(&coarse)?;
    let r_fine = geodesic_pde_residual(&fine)?;
    let (m_coarse, m_fine) = (r_coarse.max(), r_fine.max());
    let ratio = m_coarse / m_fine;

    let mut checks = Assertions::default();
    checks.at_most("linearity defect", linearity_defect(&fine), LINEARITY_TOL);
    let converging = ratio >= MIN_REFINEMENT_RATIO || m_fine <= RESOLVED_RESIDUAL;
    checks.push("residual ratio under t-halving", ratio, MIN_REFINEMENT_RATIO, converging);

    if let Some(path) = grid_csv {
        let mut table = String::from("t,u,residual\n");
        for (t, row) in r_fine.t.iter().zip(&r_fine.values) {
            for (s, v) in r_fine.u.iter().zip(row) {
                writeln!(table, "{t:.16e},{s:.16e},{v:.16e}").expect("string write");
            }
        }
        std::fs::write(path, table).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let results = json!({
        "suite": "geodesic-pde",
        "alpha": alpha,
        "frames": [coarse.t_grid.len(), fine.t_grid.len()],
        "max_residual": [m_coarse, m_fine],
        "ratio": ratio,
    });
    Ok(checks.finish(results, Some(m_fine)))
}
