//! Local piecewise interpolation on strictly increasing, possibly
//! non-uniform nodes.

use std::sync::LazyLock;

use crate::quadrature::{gauss_legendre_unit, QuadratureRule};

/// Eight-point rule on `[0, 1]` used for exact-enough sub-interval integrals
/// of smooth interpolants.
pub(crate) static SEGMENT_RULE: LazyLock<QuadratureRule> =
    LazyLock::new(|| gauss_legendre_unit(8, 0.0).expect("valid rule"));

/// Index `i` with `nodes[i] <= x <= nodes[i + 1]`, clamped to the first and
/// last segment. Requires `nodes.len() >= 2`.
pub(crate) fn segment(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    let j = nodes.partition_point(|&v| v <= x);
    j.clamp(1, n - 1) - 1
}

/// Four-point Lagrange interpolation using the stencil around `x`'s segment.
/// Reproduces cubics exactly and returns the stored value at a node.
pub(crate) fn local_cubic(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if n == 1 {
        return values[0];
    }
    let i = segment(nodes, x);
    if x == nodes[i] {
        return values[i];
    }
    if x == nodes[i + 1] {
        return values[i + 1];
    }
    let m = n.min(4);
    let start = i.saturating_sub(1).min(n - m);
    let xs = &nodes[start..start + m];
    let ys = &values[start..start + m];
    let mut acc = 0.0;
    for j in 0..m {
        let mut basis = 1.0;
        for k in 0..m {
            if k != j {
                basis *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += basis * ys[j];
    }
    acc
}

/// `∫_a^b f` with the eight-point segment rule.
pub(crate) fn segment_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let rule = &*SEGMENT_RULE;
    let len = b - a;
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&t, &w)| w * f(a + len * t))
        .sum::<f64>()
        * len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_reproduction_on_uneven_nodes() {
        let nodes = [0.0, 0.1, 0.35, 0.4, 0.8, 1.0];
        let f = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x * x * x;
        let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((local_cubic(&nodes, &values, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn node_hits_are_exact() {
        let nodes = [0.0, 0.3, 0.7, 1.0, 1.5];
        let values = [0.1, 0.2, 0.9, 0.3, 1.0 / 3.0];
        for (x, v) in nodes.iter().zip(values) {
            assert_eq!(local_cubic(&nodes, &values, *x), v);
        }
    }

    #[test]
    fn segment_rule_is_high_order() {
        let v = segment_integral(|x| x.powi(15), 0.0, 2.0);
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }
}
