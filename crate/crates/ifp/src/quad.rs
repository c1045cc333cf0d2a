//! Gauss–Hermite quadrature for expectations of smooth functions of a
//! standard normal variable.

use crate::error::{Error, Result};

/// Nodes and weights for the weight function exp(-x^2) on the real line.
///
/// Roots of the Hermite polynomial found by Newton's method on the
/// three-term recurrence, seeded with the usual asymptotic guesses.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "quadrature order must be >= 1".into(),
        ));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => {
                let c = (2.0 * n as f64 + 1.0).sqrt();
                c - 1.85575 * c.powf(-1.0 / 3.0)
            }
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        let w = 2.0 / (pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // Descending from the construction; flip to ascending node order.
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

/// Points `(x_k, w_k)` such that `E f(N) = sum w_k f(x_k)` for a standard
/// normal N, derived from the Gauss–Hermite rule by the change of variable
/// x = sqrt(2) t. The weights sum to one.
pub fn normal_rule(n: usize) -> Result<Vec<(f64, f64)>> {
    let (nodes, weights) = gauss_hermite(n)?;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    Ok(nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| (std::f64::consts::SQRT_2 * x, w * inv_sqrt_pi))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_rule_is_exact() {
        let (nodes, weights) = gauss_hermite(2).unwrap();
        let half_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(nodes[0], -half_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(nodes[1], half_sqrt2, epsilon = 1e-12);
        let half_sqrt_pi = std::f64::consts::PI.sqrt() / 2.0;
        assert_relative_eq!(weights[0], half_sqrt_pi, epsilon = 1e-12);
        assert_relative_eq!(weights[1], half_sqrt_pi, epsilon = 1e-12);
    }

    #[test]
    fn weights_and_even_moments() {
        for n in [3, 5, 11, 21, 41, 64] {
            let (nodes, weights) = gauss_hermite(n).unwrap();
            let total: f64 = weights.iter().sum();
            assert_relative_eq!(total, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
            let m2: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
            assert_relative_eq!(m2, std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn normal_rule_reproduces_lognormal_mean() {
        for sigma in [0.04_f64, 0.3, 1.0] {
            let rule = normal_rule(11).unwrap();
            let approx_val: f64 = rule.iter().map(|&(x, w)| w * (sigma * x).exp()).sum();
            let exact = (sigma * sigma / 2.0).exp();
            assert_relative_eq!(approx_val, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn nodes_ascending() {
        let (nodes, _) = gauss_hermite(12).unwrap();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
