use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use transport_alpha::distributions::{uniform_u_grid, DistributionSpec, Moment};
use transport_alpha::divergence::{
    generative_div, monge_ampere_residual, transport_alpha_div, transport_alpha_div_entropy_form, transport_map,
    wasserstein2, AlphaParam, DivergenceResult, MonteCarlo, W2Result,
};
use transport_alpha::geodesics::{geodesic_density, linearity_defect, GeodesicPath};
use transport_alpha::quadrature::{gauss_legendre_unit, QuadratureRule, DEFAULT_DATA_CLIP};

use crate::args::{Cli, Common, Form, Verb};
use crate::checks;
use crate::error::{CliError, CliResult};
use crate::report::{real, InputDigest, Outcome};
use crate::spec_file::{load_spec, LoadedSpec};

/// Shared state of one invocation.
pub struct Context<'a> {
    pub common: &'a Common,
    pub digest: InputDigest,
}

impl Context<'_> {
    pub fn load(&mut self, path: &Path) -> CliResult<LoadedSpec> {
        load_spec(path, &mut self.digest)
    }

    /// `--clip`, else 0 for analytic inputs, else the default data clip
    /// widened to the narrowest evaluable window.
    pub fn clip_for(&self, specs: &[&DistributionSpec]) -> f64 {
        if let Some(c) = self.common.clip {
            return c;
        }
        specs
            .iter()
            .filter(|s| s.is_data_driven())
            .map(|s| {
                let (lo, hi) = s.eval_window();
                if 1.0 - hi > lo + 1e-12 {
                    1.0 - hi
                } else {
                    lo
                }
            })
            .fold(None, |acc: Option<f64>, m| Some(acc.unwrap_or(DEFAULT_DATA_CLIP).max(m)))
            .unwrap_or(0.0)
    }

    pub fn rule_for(&self, specs: &[&DistributionSpec]) -> CliResult<QuadratureRule> {
        Ok(gauss_legendre_unit(self.common.quad_n, self.clip_for(specs))?)
    }
}

pub fn run(cli: &Cli, ctx: &mut Context) -> CliResult<Outcome> {
    match &cli.verb {
        Verb::Div {
            p,
            q,
            alpha,
            form,
            mc_samples,
        } => div(ctx, p, q, *alpha, *form, *mc_samples),
        Verb::W2 { p, q } => w2(ctx, p, q),
        Verb::Map { p, q, x } => map(ctx, p, q, x),
        Verb::Geodesic {
            p,
            q,
            alpha,
            t_steps,
            u_n,
        } => geodesic(ctx, p, q, *alpha, *t_steps, *u_n),
        Verb::Info { spec } => info(ctx, spec),
        Verb::Check { suite } => checks::run(ctx, suite),
    }
}

pub fn divergence_json(d: &DivergenceResult) -> Value {
    json!({
        "value": d.value,
        "error_estimate": d.error_estimate,
        "method": d.method.as_str(),
        "clamped": d.clamped,
    })
}

fn div(ctx: &mut Context, p: &Path, q: &Path, alpha: f64, form: Form, mc: Option<usize>) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let rule = ctx.rule_for(&[&p, &q])?;
    let a = AlphaParam::new(alpha);
    let d = match mc {
        Some(samples) => match (&p, &q) {
            (
                DistributionSpec::Generative { reference, map: mx },
                DistributionSpec::Generative {
                    reference: ry,
                    map: my,
                },
            ) if reference == ry => {
                let mc = MonteCarlo {
                    samples,
                    seed: ctx.common.seed,
                };
                generative_div(mx, my, reference, a, &rule, Some(mc))?
            }
            _ => {
                return Err(CliError::Usage(
                    "--mc-samples needs two generative specs with the same reference".into(),
                ))
            }
        },
        None => match form {
            Form::Qdf => transport_alpha_div(&p, &q, a, &rule)?,
            Form::Entropy => transport_alpha_div_entropy_form(&p, &q, a, &rule)?,
        },
    };
    let mut results = divergence_json(&d);
    results["alpha"] = json!(alpha);
    results["clip"] = json!(rule.clip_delta());
    Ok(Outcome::Json {
        results,
        error_estimate: Some(d.error_estimate),
        passed: None,
    })
}

fn w2(ctx: &mut Context, p: &Path, q: &Path) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let rule = ctx.rule_for(&[&p, &q])?;
    Ok(match wasserstein2(&p, &q, &rule)? {
        W2Result::Finite { value, error_estimate } => Outcome::Json {
            results: json!({ "value": value, "error_estimate": error_estimate }),
            error_estimate: Some(error_estimate),
            passed: None,
        },
        W2Result::Infinite => Outcome::Json {
            results: json!({ "infinite": true }),
            error_estimate: None,
            passed: None,
        },
    })
}

fn map(ctx: &mut Context, p: &Path, q: &Path, xs: &[f64]) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let points = xs
        .iter()
        .map(|&x| Ok(json!({ "x": x, "t": transport_map(&p, &q, x)? })))
        .collect::<CliResult<Vec<_>>>()?;
    // The pushforward residual bounds how far the map is from transporting q onto p.
    let residual = monge_ampere_residual(&p, &q)?;
    Ok(Outcome::Json {
        results: json!({ "points": points, "monge_ampere_residual": residual }),
        error_estimate: Some(residual),
        passed: None,
    })
}

/// `n` equispaced nodes inside the clip window, with ½ added when missing.
pub fn frame_u_grid(n: usize, clip: f64) -> Vec<f64> {
    let lo = clip.max(1.0 / (n as f64 + 1.0));
    let mut u = uniform_u_grid(n, lo, 1.0 - lo);
    match u.iter().position(|&v| v >= 0.5) {
        Some(i) if (u[i] - 0.5).abs() < 1e-12 => u[i] = 0.5,
        Some(i) => u.insert(i, 0.5),
        None => u.push(0.5),
    }
    u
}

fn geodesic(ctx: &mut Context, p: &Path, q: &Path, alpha: f64, t_steps: usize, u_n: usize) -> CliResult<Outcome> {
    let p = ctx.load(p)?.spec;
    let q = ctx.load(q)?.spec;
    let u = frame_u_grid(u_n, ctx.clip_for(&[&p, &q]));
    let path = GeodesicPath::uniform(&p, &q, alpha, t_steps - 1, &u)?;
    let mut table = String::from("t,u,qdf,quantile\n");
    for (t, frame) in path.t_grid.iter().zip(&path.frames) {
        let density = geodesic_density(frame)?;
        for (&s, &v) in frame.u_nodes.iter().zip(&frame.qdf_values) {
            writeln!(table, "{t:.16e},{s:.16e},{v:.16e},{:.16e}", density.quantile(s)?).expect("string write");
        }
    }
    let defect = linearity_defect(&path);
    Ok(Outcome::Csv {
        table,
        summary: json!({
            "alpha": alpha,
            "frames": path.t_grid.len(),
            "u_nodes": u.len(),
            "rows": path.t_grid.len() * u.len(),
            "linearity_defect": defect,
        }),
        error_estimate: Some(defect),
    })
}

fn moment(m: Moment) -> Value {
    match m {
        Moment::Finite(v) => json!(v),
        Moment::Infinite => json!("infinite"),
    }
}

fn info(ctx: &mut Context, path: &Path) -> CliResult<Outcome> {
    let loaded = ctx.load(path)?;
    let spec = &loaded.spec;
    let rule = ctx.rule_for(&[spec])?;
    let (lo, hi) = spec.support();
    let (wlo, whi) = spec.eval_window();
    let h = spec.entropy(&rule)?;
    Ok(Outcome::Json {
        results: json!({
            "spec": loaded.json,
            "data_driven": spec.is_data_driven(),
            "support": [real(lo), real(hi)],
            "u_window": [wlo, whi],
            "mean": moment(spec.mean()),
            "second_moment": moment(spec.second_moment()),
            "entropy": { "value": h.value, "error_estimate": h.error_estimate },
            "clip": rule.clip_delta(),
        }),
        error_estimate: Some(h.error_estimate),
        passed: None,
    })
}
