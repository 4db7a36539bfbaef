//! Amari α-divergences between positive measures on `R^n_{>0}`.

use crate::error::{Error, Result};

/// `f_α(z)` generating the classical α-divergence `Σ n_i f_α(m_i / n_i)`.
pub fn classical_f_alpha(z: f64, alpha: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("classical f_alpha needs z > 0, got {z}")));
    }
    Ok(if alpha == 1.0 {
        z * z.ln() - z + 1.0
    } else if alpha == -1.0 {
        z - 1.0 - z.ln()
    } else {
        // 4/(1−α²)(1 − z^e) + 2/(1−α)(z − 1) with e = (1+α)/2, rearranged
        // around whichever of e, 1 − e is small.
        let e = (1.0 + alpha) / 2.0;
        let d = (1.0 - alpha) / 2.0;
        let l = z.ln();
        if e >= 0.5 {
            (1.0 - z - z * (-d * l).exp_m1() / d) / e
        } else {
            (z - 1.0 - (e * l).exp_m1() / e) / d
        }
    })
}

fn check_pair(m: &[f64], n: &[f64]) -> Result<()> {
    if m.len() != n.len() || m.is_empty() {
        return Err(Error::domain(format!(
            "measures must have equal non-zero length, got {} and {}",
            m.len(),
            n.len()
        )));
    }
    if !m.iter().chain(n).all(|v| *v > 0.0 && v.is_finite()) {
        return Err(Error::domain("measure entries must be positive and finite"));
    }
    Ok(())
}

/// `D_α(m‖n) = Σ_i n_i f_α(m_i / n_i)`.
pub fn classical_alpha_div(m: &[f64], n: &[f64], alpha: f64) -> Result<f64> {
    check_pair(m, n)?;
    m.iter()
        .zip(n)
        .map(|(&mi, &ni)| classical_f_alpha(mi / ni, alpha).map(|f| f * ni))
        .sum()
}

/// Diagonal of the Fisher metric `g_ii = 1 / m_i`.
pub fn fisher_metric_diag(m: &[f64]) -> Vec<f64> {
    m.iter().map(|v| 1.0 / v).collect()
}

/// Diagonal of the Amari–Chentsov tensor `T_iii = 1 / m_i²`.
pub fn amari_chentsov_diag(m: &[f64]) -> Vec<f64> {
    m.iter().map(|v| 1.0 / (v * v)).collect()
}

/// Quadratic and cubic terms of the expansion of `D_α(n + Δ‖n)`:
/// `½ Σ Δ²/n` and `((α − 3)/12) Σ Δ³/n²`.
pub fn classical_taylor_terms(m: &[f64], n: &[f64], alpha: f64) -> Result<(f64, f64)> {
    check_pair(m, n)?;
    let g = fisher_metric_diag(n);
    let t = amari_chentsov_diag(n);
    let mut quad = 0.0;
    let mut cubic = 0.0;
    for i in 0..m.len() {
        let d = m[i] - n[i];
        quad += 0.5 * g[i] * d * d;
        cubic += (alpha - 3.0) / 12.0 * t[i] * d * d * d;
    }
    Ok((quad, cubic))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let (m, n) = ([0.5, 0.5], [0.25, 0.75]);
        let kl = classical_alpha_div(&m, &n, 1.0).unwrap();
        assert!((kl - (0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln())).abs() < 1e-12);
        let chi = classical_alpha_div(&m, &n, 3.0).unwrap();
        assert!((chi - 1.0 / 6.0).abs() < 1e-12);
        let hel = classical_alpha_div(&[1.0, 4.0], &[4.0, 1.0], 0.0).unwrap();
        assert!((hel - 4.0).abs() < 1e-12);
        assert_eq!(classical_alpha_div(&[1.0, 2.0], &[1.0, 2.0], 0.3).unwrap(), 0.0);
        assert!(classical_alpha_div(&[1.0], &[0.0], 0.3).is_err());
        assert!(classical_alpha_div(&[1.0], &[1.0, 2.0], 0.3).is_err());
    }

    #[test]
    fn branches_are_continuous() {
        for &z in &[0.3, 1.7, 4.0] {
            for &a in &[1.0, -1.0] {
                let exact = classical_f_alpha(z, a).unwrap();
                let near = classical_f_alpha(z, a - 1e-8 * a.signum()).unwrap();
                assert!((exact - near).abs() < 1e-6, "z={z} a={a}");
            }
        }
    }

    #[test]
    fn duality() {
        let m = [0.5, 2.0, 1.3];
        let n = [1.1, 0.7, 2.2];
        for &a in &[-2.0, -1.0, 0.0, 0.5, 1.0, 3.0] {
            let lhs = classical_alpha_div(&m, &n, a).unwrap();
            let rhs = classical_alpha_div(&n, &m, -a).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "alpha={a}");
        }
    }

    #[test]
    fn taylor_remainder_is_fourth_order() {
        let n = [1.0, 2.0, 0.5];
        let dir = [0.3, -0.2, 0.1];
        for &a in &[-1.0, 0.0, 2.0] {
            let rem = |eps: f64| {
                let m: Vec<f64> = n.iter().zip(&dir).map(|(x, d)| x + eps * d).collect();
                let (q, c) = classical_taylor_terms(&m, &n, a).unwrap();
                (classical_alpha_div(&m, &n, a).unwrap() - q - c).abs()
            };
            let ratio = rem(1e-2) / rem(5e-3);
            assert!((ratio - 16.0).abs() < 0.5, "alpha={a}: ratio {ratio}");
        }
    }
}
