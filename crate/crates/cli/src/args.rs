use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tad",
    version,
    about = "Transport alpha-divergences, geodesics and Hessian checks for 1-D densities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Gauss-Legendre nodes per integral.
    #[arg(long, global = true, default_value_t = 256)]
    pub quad_n: usize,

    /// Tail clip of the u-interval (default 0, or 0.01 when a grid or
    /// empirical spec is involved).
    #[arg(long, global = true)]
    pub clip: Option<f64>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report (or CSV) here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Qdf,
    Entropy,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Transport alpha-divergence D(p||q).
    Div {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Form::Qdf)]
        form: Form,
        /// Monte Carlo sample count for two generative specs sharing a reference.
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Wasserstein-2 distance.
    W2 {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Optimal transport map from q to p at the given points.
    Map {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Geodesic from q (t = 0) to p (t = 1) as CSV rows t,u,qdf,quantile.
    Geodesic {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Number of frames, including both ends.
        #[arg(long)]
        t_steps: usize,
        #[arg(long, default_value_t = 64)]
        u_n: usize,
    },
    /// Identity suites.
    Check {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Validated spec with support, moments and entropy.
    Info {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// D_a(p||q) = D_-a(q||p) on seeded random QDF-grid pairs.
    Duality {
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
    /// Quadratic, cubic and remainder terms with the remainder's convergence rate.
    Taylor {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// D(p||q) + D(q||r) - D(p||r) against the orthogonality defect.
    Pythagorean {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        r: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Gamma-3 of a polynomial potential by composition and by 2(phi'')^3.
    Gamma3 {
        /// Coefficients c0,c1,... of phi.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        poly: Vec<f64>,
    },
    /// Entropy derivatives along the scaling flow against finite differences.
    EntropyDerivs {
        #[arg(long)]
        p: PathBuf,
    },
    /// Finite-difference residual of the geodesic equation under t-refinement.
    GeodesicPde {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 65)]
        t_steps: usize,
        #[arg(long, default_value_t = 64)]
        u_n: usize,
        /// Also write the refined residual grid as CSV t,u,residual.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
}

fn finite(flag: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag} must be finite, got {v}")))
    }
}

fn at_least(flag: &str, v: usize, min: usize) -> CliResult<()> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag} must be at least {min}, got {v}")))
    }
}

impl Cli {
    /// Range checks that clap's types do not express.
    pub fn validate(&self) -> CliResult<()> {
        at_least("quad-n", self.common.quad_n, 1)?;
        if let Some(c) = self.common.clip {
            if !(0.0..0.5).contains(&c) {
                return Err(CliError::Usage(format!("--clip must lie in [0, 0.5), got {c}")));
            }
        }
        match &self.verb {
            Verb::Div { alpha, mc_samples, .. } => {
                finite("alpha", *alpha)?;
                if let Some(n) = mc_samples {
                    at_least("mc-samples", *n, 2)?;
                }
            }
            Verb::Map { x, .. } => x.iter().try_for_each(|v| finite("x", *v))?,
            Verb::Geodesic { alpha, t_steps, u_n, .. } => {
                finite("alpha", *alpha)?;
                at_least("t-steps", *t_steps, 2)?;
                at_least("u-n", *u_n, 2)?;
            }
            Verb::Check { suite } => match suite {
                Suite::Duality { cases } => at_least("cases", *cases, 1)?,
                Suite::Taylor { alpha, .. } | Suite::Pythagorean { alpha, .. } => finite("alpha", *alpha)?,
                Suite::Gamma3 { poly } => poly.iter().try_for_each(|v| finite("poly", *v))?,
                Suite::GeodesicPde { alpha, t_steps, u_n, .. } => {
                    finite("alpha", *alpha)?;
                    at_least("t-steps", *t_steps, 5)?;
                    at_least("u-n", *u_n, 2)?;
                }
                Suite::EntropyDerivs { .. } => {}
            },
            Verb::W2 { .. } | Verb::Info { .. } => {}
        }
        Ok(())
    }

    pub fn verb_name(&self) -> String {
        match &self.verb {
            Verb::Div { .. } => "div".into(),
            Verb::W2 { .. } => "w2".into(),
            Verb::Map { .. } => "map".into(),
            Verb::Geodesic { .. } => "geodesic".into(),
            Verb::Info { .. } => "info".into(),
            Verb::Check { suite } => format!(
                "check {}",
                match suite {
                    Suite::Duality { .. } => "duality",
                    Suite::Taylor { .. } => "taylor",
                    Suite::Pythagorean { .. } => "pythagorean",
                    Suite::Gamma3 { .. } => "gamma3",
                    Suite::EntropyDerivs { .. } => "entropy-derivs",
                    Suite::GeodesicPde { .. } => "geodesic-pde",
                }
            ),
        }
    }

    /// Everything that determines the result, excluding the output path.
    pub fn canonical(&self) -> String {
        format!(
            "{:?}|quad_n={}|clip={:?}|seed={}",
            self.verb, self.common.quad_n, self.common.clip, self.common.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("tad").chain(args.iter().copied()))
    }

    #[test]
    fn div_defaults() {
        let cli = parse(&["div", "--p", "p.json", "--q", "q.json", "--alpha", "1"]).unwrap();
        assert_eq!(cli.common.quad_n, 256);
        assert_eq!(cli.common.clip, None);
        assert_eq!(cli.common.seed, 0);
        match cli.verb {
            Verb::Div { alpha, form, .. } => {
                assert_eq!(alpha, 1.0);
                assert_eq!(form, Form::Qdf);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn missing_p_names_the_flag() {
        let err = parse(&["div", "--alpha", "1"]).unwrap_err();
        assert!(err.to_string().contains("--p"), "{err}");
    }

    #[test]
    fn negative_values_and_lists() {
        let cli = parse(&["map", "--x", "-1,2", "--p", "a", "--q", "b", "--x", "-0.5"]).unwrap();
        assert!(matches!(cli.verb, Verb::Map { ref x, .. } if x == &[-1.0, 2.0, -0.5]));
        let cli = parse(&["check", "gamma3", "--poly", "0,-1,0.5"]).unwrap();
        match cli.verb {
            Verb::Check {
                suite: Suite::Gamma3 { poly },
            } => assert_eq!(poly, vec![0.0, -1.0, 0.5]),
            other => panic!("parsed {other:?}"),
        }
        let cli = parse(&["geodesic", "--p", "a", "--q", "b", "--alpha", "-1", "--t-steps", "5"]).unwrap();
        assert!(matches!(cli.verb, Verb::Geodesic { alpha, t_steps: 5, u_n: 64, .. } if alpha == -1.0));
    }

    #[test]
    fn range_checks() {
        let cli = parse(&["div", "--p", "a", "--q", "b", "--alpha", "inf"]).unwrap();
        assert!(matches!(cli.validate(), Err(CliError::Usage(m)) if m.contains("--alpha")));
        let cli = parse(&["w2", "--p", "a", "--q", "b", "--clip", "0.7"]).unwrap();
        assert!(matches!(cli.validate(), Err(CliError::Usage(m)) if m.contains("--clip")));
        let cli = parse(&["geodesic", "--p", "a", "--q", "b", "--alpha", "1", "--t-steps", "1"]).unwrap();
        assert!(cli.validate().is_err());
        assert!(parse(&["frobnicate"]).is_err());
        assert!(parse(&["w2", "--p", "a", "--q", "b", "--bogus"]).is_err());
    }
}
