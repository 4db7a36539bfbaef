//! Property tests for the divergence, geodesic and Hessian invariants.

mod common;

use common::*;
use proptest::prelude::*;
use transport_alpha::distributions::{uniform_u_grid, DistributionSpec};
use transport_alpha::divergence::{
    bregman_integrand, f_transport_alpha, transport_alpha_div, transport_alpha_integrand, wasserstein2, AlphaParam,
};
use transport_alpha::geodesics::{geodesic_density, linearity_defect, transport_alpha_geodesic, GeodesicPath};
use transport_alpha::hessian::{gamma_operators, hessian_form, tensor_form, PotentialGrid};
use transport_alpha::quadrature::{gauss_legendre_unit, QuadratureRule};

fn shape() -> impl Strategy<Value = GridShape> {
    (-1.0..1.0f64, prop::array::uniform3(-0.6..0.6f64), 0.0..0.8f64, -2.0..2.0f64).prop_map(
        |(level, waves, tail, anchor_x)| GridShape {
            level,
            waves,
            tail,
            anchor_x,
        },
    )
}

fn alpha() -> impl Strategy<Value = f64> {
    prop::sample::select(ALPHAS.to_vec())
}

fn grid_rule() -> QuadratureRule {
    gauss_legendre_unit(128, GRID_LO).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn divergence_is_nonnegative(a in shape(), b in shape(), al in alpha()) {
        let d = transport_alpha_div(&qdf_grid_from(a), &qdf_grid_from(b), AlphaParam::new(al), &grid_rule()).unwrap();
        prop_assert!(d.value >= 0.0);
    }

    #[test]
    fn duality(a in shape(), b in shape(), al in alpha()) {
        let (p, q) = (qdf_grid_from(a), qdf_grid_from(b));
        let r = grid_rule();
        let d1 = transport_alpha_div(&p, &q, AlphaParam::new(al), &r).unwrap();
        let d2 = transport_alpha_div(&q, &p, AlphaParam::new(-al), &r).unwrap();
        prop_assert!((d1.value - d2.value).abs() <= 1e-10 + d1.error_estimate + d2.error_estimate);
    }

    #[test]
    fn translation_leaves_integrand_bitwise_equal(a in shape(), b in shape(), al in alpha(), c in -5.0..5.0f64) {
        let (p, q) = (qdf_grid_from(a), qdf_grid_from(b));
        let shifted = p.shifted(c);
        for &u in grid_rule().nodes() {
            let x = transport_alpha_integrand(&p, &q, AlphaParam::new(al), u).unwrap();
            let y = transport_alpha_integrand(&shifted, &q, AlphaParam::new(al), u).unwrap();
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn special_alpha_reductions(a in shape(), b in shape()) {
        let (p, q) = (qdf_grid_from(a), qdf_grid_from(b));
        let r = grid_rule();
        let ratio = |u: f64| p.qdf(u).unwrap() / q.qdf(u).unwrap();
        let kl: f64 = r.nodes().iter().zip(r.weights()).map(|(&u, w)| {
            let z = ratio(u);
            w * (z - z.ln() - 1.0)
        }).sum();
        let half_log: f64 = r.nodes().iter().zip(r.weights()).map(|(&u, w)| w * 0.5 * ratio(u).ln().powi(2)).sum();
        let d1 = transport_alpha_div(&p, &q, AlphaParam::new(1.0), &r).unwrap().value;
        let d0 = transport_alpha_div(&p, &q, AlphaParam::new(0.0), &r).unwrap().value;
        prop_assert!((d1 - kl).abs() <= 1e-12 * kl.max(1.0));
        prop_assert!((d0 - half_log).abs() <= 1e-12 * half_log.max(1.0));
    }

    #[test]
    fn alpha_continuity(a in shape(), b in shape(), al in -1e-2..1e-2f64) {
        let (p, q) = (qdf_grid_from(a), qdf_grid_from(b));
        let r = grid_rule();
        // C from the cubic Taylor term ∫ L³ / 6 plus a margin for the quartic one.
        let (l3, l4): (f64, f64) = r.nodes().iter().zip(r.weights()).fold((0.0, 0.0), |(s3, s4), (&u, w)| {
            let l = (p.qdf(u).unwrap() / q.qdf(u).unwrap()).ln();
            (s3 + w * l.powi(3), s4 + w * l.powi(4))
        });
        let c = l3.abs() / 6.0 + 1e-2 * l4 / 24.0 * 2.0 + 1e-12;
        let da = transport_alpha_div(&p, &q, AlphaParam::new(al), &r).unwrap().value;
        let d0 = transport_alpha_div(&p, &q, AlphaParam::new(0.0), &r).unwrap().value;
        prop_assert!((da - d0).abs() <= c * al.abs() + 1e-12, "{} vs {}", (da - d0).abs(), c * al.abs());
    }

    #[test]
    fn bregman_identity_pointwise(x in 0.05..20.0f64, y in 0.05..20.0f64, al in prop::sample::select(vec![-3.0, -1.0, -0.5, 0.5, 1.0, 3.0])) {
        let f = f_transport_alpha(x / y, AlphaParam::new(al)).unwrap();
        let b = bregman_integrand(x, y, al);
        prop_assert!((f - b).abs() <= 1e-10 * f.max(1.0));
    }

    #[test]
    fn geodesic_coordinates_are_affine_and_positive(a in shape(), b in shape(), al in alpha()) {
        let (p, q) = (qdf_grid_from(a), qdf_grid_from(b));
        let u = uniform_u_grid(25, GRID_LO, GRID_HI);
        let path = GeodesicPath::uniform(&p, &q, al, 6, &u).unwrap();
        prop_assert!(linearity_defect(&path) <= 1e-10);
        for (i, &s) in u.iter().enumerate() {
            prop_assert!((path.frames[0].qdf_values[i] - q.qdf(s).unwrap()).abs() <= 1e-12);
            prop_assert!((path.frames[6].qdf_values[i] - p.qdf(s).unwrap()).abs() <= 1e-12);
        }
        prop_assert!(path.frames.iter().flat_map(|f| &f.qdf_values).all(|v| *v > 0.0));
        let r = grid_rule();
        for frame in &path.frames {
            let mid = geodesic_density(frame).unwrap();
            let d = transport_alpha_div(&mid, &q, AlphaParam::new(al), &r).unwrap();
            prop_assert!(d.value.is_finite());
        }
    }

    #[test]
    fn hessian_symmetry_and_positivity(c in prop::array::uniform3(prop::array::uniform3(-1.0..1.0f64))) {
        let nodes = uniform_u_grid(201, -10.0, 10.0);
        let grids: Vec<PotentialGrid> = c.iter().map(|k| {
            let (k0, k1, k2) = (k[0], k[1], k[2]);
            PotentialGrid::from_fn(&nodes, |_| 0.0, |_| 0.0, move |x| k0 + k1 * x.sin() + k2 * (x / 3.0).tanh(), None).unwrap()
        }).collect();
        let g = DistributionSpec::gaussian(0.3, 1.2).unwrap();
        let r = gauss_legendre_unit(96, 0.0).unwrap();
        let (a, b, d) = (&grids[0], &grids[1], &grids[2]);
        prop_assert!((hessian_form(&g, a, b, &r).unwrap() - hessian_form(&g, b, a, &r).unwrap()).abs() <= 1e-12);
        prop_assert!(hessian_form(&g, a, a, &r).unwrap() >= 0.0);
        let base = tensor_form(&g, a, b, d, &r).unwrap();
        for (x, y, z) in [(a, d, b), (b, a, d), (b, d, a), (d, a, b), (d, b, a)] {
            prop_assert!((tensor_form(&g, x, y, z, &r).unwrap() - base).abs() <= 1e-12 * base.abs().max(1.0));
        }
    }
}

#[test]
fn gamma3_with_finite_difference_derivatives_is_second_order() {
    // Φ = sin x + x³/10, derivatives beyond Φ′ taken by central differences.
    let err = |n: usize| {
        let x = uniform_u_grid(n, -2.0, 2.0);
        let h = x[1] - x[0];
        let d1: Vec<f64> = x.iter().map(|v| v.cos() + 0.3 * v * v).collect();
        let fd = |f: &[f64]| -> Vec<f64> {
            (0..f.len())
                .map(|i| {
                    if i == 0 {
                        (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                    } else if i == f.len() - 1 {
                        (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h)
                    } else {
                        (f[i + 1] - f[i - 1]) / (2.0 * h)
                    }
                })
                .collect()
        };
        let d2 = fd(&d1);
        let d3 = fd(&d2);
        let phi: Vec<f64> = x.iter().map(|v| v.sin() + v.powi(4) / 40.0).collect();
        let grid = PotentialGrid::new(x.clone(), phi, d1, d2, Some(d3)).unwrap();
        x[5..n - 5]
            .iter()
            .map(|&v| {
                let g = gamma_operators(&grid, v).unwrap();
                let exact = 2.0 * (-v.sin() + 0.6 * v).powi(3);
                (g.gamma3 - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let ratio = err(101) / err(201);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn potential_grid_finite_difference_consistency_is_second_order() {
    let make = |n: usize| {
        let x = uniform_u_grid(n, -3.0, 3.0);
        PotentialGrid::from_fn(&x, |v| v.sin() * v, |v| v.cos() * v + v.sin(), |v| 2.0 * v.cos() - v * v.sin(), None)
            .unwrap()
            .fd_consistency()
    };
    let ratio = make(61) / make(121);
    assert!((3.8..=4.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn alpha_minus_one_geodesic_is_w2_displacement() {
    let (p, q) = (DistributionSpec::gaussian(2.0, 3.0).unwrap(), DistributionSpec::gaussian(0.0, 1.0).unwrap());
    let u = uniform_u_grid(2049, 0.01, 0.99);
    let r = gauss_legendre_unit(256, 0.02).unwrap();
    let full = wasserstein2(&q, &p, &r).unwrap().value().unwrap();
    for &t in &[0.25, 0.5, 0.75] {
        let frame = transport_alpha_geodesic(&p, &q, -1.0, t, &u).unwrap();
        let mid = geodesic_density(&frame).unwrap();
        let w = wasserstein2(&q, &mid, &r).unwrap().value().unwrap();
        assert!((w - t * full).abs() < 1e-6, "t={t}: {w} vs {}", t * full);
    }
}

#[test]
fn qdf_grid_inverse_and_duality() {
    let mut rng = seeded(21);
    for _ in 0..20 {
        let d = random_qdf_grid(&mut rng);
        for k in 1..40 {
            let u = GRID_LO + (GRID_HI - GRID_LO) * k as f64 / 40.0;
            let x = d.quantile(u).unwrap();
            assert!((d.cdf(x).unwrap() - u).abs() < 1e-10);
            assert!((d.pdf(x).unwrap() * d.qdf(u).unwrap() - 1.0).abs() < 1e-8);
        }
    }
}
