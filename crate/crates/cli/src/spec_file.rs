//! JSON distribution descriptions.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use transport_alpha::distributions::{DistributionSpec, EstimatorConfig, MonotoneMap, QdfGrid};

use crate::error::{CliError, CliResult};
use crate::report::InputDigest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecJson {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Exponential {
        rate: f64,
    },
    Cauchy {
        x0: f64,
        gamma: f64,
    },
    Logistic {
        mu: f64,
        s: f64,
    },
    LocationScale {
        base: Box<SpecJson>,
        loc: f64,
        scale: f64,
    },
    QdfGrid {
        u: Vec<f64>,
        qdf: Vec<f64>,
        anchor_u: f64,
        anchor_x: f64,
    },
    Empirical {
        samples_file: String,
        #[serde(default = "default_clip")]
        clip_delta: f64,
        #[serde(default = "default_bandwidth")]
        bandwidth_const: f64,
    },
    Generative {
        #[serde(rename = "ref")]
        reference: Box<SpecJson>,
        map: MapJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapJson {
    Affine { a: f64, b: f64 },
    MonotoneGrid { z: Vec<f64>, g: Vec<f64> },
}

fn default_clip() -> f64 {
    EstimatorConfig::default().clip_delta
}

fn default_bandwidth() -> f64 {
    EstimatorConfig::default().bandwidth_const
}

/// A parsed spec file together with the library object it describes.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub json: SpecJson,
    pub spec: DistributionSpec,
}

pub fn read_input(path: &Path, digest: &mut InputDigest) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    digest.add(&path.display().to_string(), &bytes);
    Ok(bytes)
}

pub fn load_spec(path: &Path, digest: &mut InputDigest) -> CliResult<LoadedSpec> {
    let bytes = read_input(path, digest)?;
    let json: SpecJson = serde_json::from_slice(&bytes).map_err(|e| CliError::SpecFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let spec = build(&json, &base, digest)?;
    Ok(LoadedSpec { json, spec })
}

fn build(json: &SpecJson, base: &Path, digest: &mut InputDigest) -> CliResult<DistributionSpec> {
    Ok(match json {
        SpecJson::Gaussian { mu, sigma } => DistributionSpec::gaussian(*mu, *sigma)?,
        SpecJson::Uniform { a, b } => DistributionSpec::uniform(*a, *b)?,
        SpecJson::Exponential { rate } => DistributionSpec::exponential(*rate)?,
        SpecJson::Cauchy { x0, gamma } => DistributionSpec::cauchy(*x0, *gamma)?,
        SpecJson::Logistic { mu, s } => DistributionSpec::logistic(*mu, *s)?,
        SpecJson::LocationScale { base: inner, loc, scale } => {
            DistributionSpec::location_scale(build(inner, base, digest)?, *loc, *scale)?
        }
        SpecJson::QdfGrid { u, qdf, anchor_u, anchor_x } => {
            DistributionSpec::qdf_grid(QdfGrid::new(u.clone(), qdf.clone(), *anchor_u, *anchor_x)?)?
        }
        SpecJson::Empirical {
            samples_file,
            clip_delta,
            bandwidth_const,
        } => {
            let path: PathBuf = base.join(samples_file);
            let samples = parse_samples(&path, &read_input(&path, digest)?)?;
            let cfg = EstimatorConfig {
                clip_delta: *clip_delta,
                bandwidth_const: *bandwidth_const,
            };
            DistributionSpec::empirical(&samples, cfg)?
        }
        SpecJson::Generative { reference, map } => {
            let map = match map {
                MapJson::Affine { a, b } => MonotoneMap::affine(*a, *b)?,
                MapJson::MonotoneGrid { z, g } => MonotoneMap::grid(z.clone(), g.clone())?,
            };
            DistributionSpec::generative(build(reference, base, digest)?, map)?
        }
    })
}

/// One real per line; blank lines are ignored.
fn parse_samples(path: &Path, bytes: &[u8]) -> CliResult<Vec<f64>> {
    let bad = |message: String| CliError::SpecFile {
        path: path.to_path_buf(),
        message,
    };
    let text = std::str::from_utf8(bytes).map_err(|e| bad(format!("not UTF-8: {e}")))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: f64 = l
                .trim()
                .parse()
                .map_err(|_| bad(format!("line {}: {:?} is not a number", i + 1, l.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("line {}: sample must be finite", i + 1)))
            }
        })
        .collect()
}
