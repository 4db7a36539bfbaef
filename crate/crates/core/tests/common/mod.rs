#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transport_alpha::distributions::{uniform_u_grid, DistributionSpec, QdfGrid};

pub const ALPHAS: [f64; 7] = [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0];

pub const GRID_LO: f64 = 0.01;
pub const GRID_HI: f64 = 0.99;

/// Shape parameters of a smooth random QDF grid.
#[derive(Debug, Clone, Copy)]
pub struct GridShape {
    pub level: f64,
    pub waves: [f64; 3],
    pub tail: f64,
    pub anchor_x: f64,
}

/// `exp(level + Σ aₖ sin(kπu))·(4u(1 − u))^(−tail)` on 49 nodes over `[0.01, 0.99]`.
pub fn qdf_grid_from(shape: GridShape) -> DistributionSpec {
    let u = uniform_u_grid(49, GRID_LO, GRID_HI);
    let values = u
        .iter()
        .map(|&s| {
            let wave: f64 = shape
                .waves
                .iter()
                .enumerate()
                .map(|(k, ak)| ak * ((k + 1) as f64 * std::f64::consts::PI * s).sin())
                .sum();
            (shape.level + wave - shape.tail * (4.0 * s * (1.0 - s)).ln()).exp()
        })
        .collect();
    DistributionSpec::qdf_grid(QdfGrid::new(u, values, 0.5, shape.anchor_x).unwrap()).unwrap()
}

pub fn random_qdf_grid(rng: &mut impl Rng) -> DistributionSpec {
    qdf_grid_from(GridShape {
        level: rng.random_range(-1.0..1.0),
        waves: [
            rng.random_range(-0.6..0.6),
            rng.random_range(-0.6..0.6),
            rng.random_range(-0.6..0.6),
        ],
        tail: rng.random_range(0.0..0.8),
        anchor_x: rng.random_range(-2.0..2.0),
    })
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(mu: f64, sigma: f64) -> DistributionSpec {
    DistributionSpec::gaussian(mu, sigma).unwrap()
}

pub fn logistic(mu: f64, s: f64) -> DistributionSpec {
    DistributionSpec::logistic(mu, s).unwrap()
}
