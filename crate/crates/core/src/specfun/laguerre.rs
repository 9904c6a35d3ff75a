use crate::error::{invalid, Error, Result};

/// Largest supported Gauss–Laguerre order.
pub const MAX_LAGUERRE_ORDER: usize = 256;

const NEWTON_MAX_ITER: usize = 100;

/// Laguerre polynomial L_n(x) by the three-term recurrence.
///
/// ```
/// use thz_secrecy::specfun::laguerre_eval;
/// assert_eq!(laguerre_eval(1, 2.0), -1.0);
/// assert_eq!(laguerre_eval(2, 1.0), -0.5);
/// ```
pub fn laguerre_eval(n: usize, x: f64) -> f64 {
    laguerre_pair(n, x).0
}

/// (L_n(x), L_{n−1}(x)); the second entry is 0 for n = 0.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut cur = 1.0;
    let mut prev = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// An n-point Gauss–Laguerre rule: ∫₀^∞ e^(−y) f(y) dy ≈ Σ w_s f(y_s).
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// ln w_s; finite even where w_s itself underflows.
    pub ln_weights: Vec<f64>,
}

impl LaguerreRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Approximates ∫₀^∞ g(y) dy as Σ w_s e^(y_s) g(y_s).
    ///
    /// The integrand carries no e^(−y) factor of its own, so each weight is
    /// rescaled by e^(y_s).
    pub fn integrate_unweighted(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&y, &lw)| {
                let w = (lw + y).exp();
                if w == 0.0 {
                    0.0
                } else {
                    w * g(y)
                }
            })
            .sum()
    }
}

/// Builds the n-point Gauss–Laguerre rule by Newton iteration on L_n.
///
/// ```
/// use thz_secrecy::specfun::gauss_laguerre_rule;
/// let rule = gauss_laguerre_rule(2).unwrap();
/// assert!((rule.nodes[0] - (2.0 - 2f64.sqrt())).abs() < 1e-14);
/// assert!((rule.weights[0] - 0.853553).abs() < 1e-6);
/// ```
pub fn gauss_laguerre_rule(n: usize) -> Result<LaguerreRule> {
    if n == 0 || n > MAX_LAGUERRE_ORDER {
        return Err(invalid(format!(
            "Gauss–Laguerre order must lie in 1..={MAX_LAGUERRE_ORDER}, got {n}"
        )));
    }
    let nf = n as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut converged = false;
        let mut prev_step = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, q) = laguerre_pair(n, z);
            let dp = nf * (p - q) / z;
            let step = p / dp;
            z -= step;
            let size = step.abs();
            // Either fully converged, or the steps have stopped shrinking at
            // the roundoff floor of the recurrence.
            if size <= 3e-14 * z || (size <= 1e-10 * z && size >= 0.5 * prev_step) {
                converged = true;
                break;
            }
            prev_step = size;
        }
        if !converged {
            return Err(Error::Convergence {
                routine: "Gauss–Laguerre Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        nodes.push(z);
    }
    let ln_weights: Vec<f64> = nodes
        .iter()
        .map(|&y| {
            let next = laguerre_eval(n + 1, y);
            y.ln() - 2.0 * ((nf + 1.0) * next).abs().ln()
        })
        .collect();
    let weights = ln_weights.iter().map(|lw| lw.exp()).collect();
    Ok(LaguerreRule {
        nodes,
        weights,
        ln_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        assert_eq!(laguerre_eval(0, 7.3), 1.0);
        assert_eq!(laguerre_eval(1, 2.0), -1.0);
        assert_eq!(laguerre_eval(2, 1.0), -0.5);
        let x: f64 = 3.7;
        let l3 = (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
        assert!((laguerre_eval(3, x) - l3).abs() < 1e-13);
    }

    #[test]
    fn order_one_and_two() {
        let r = gauss_laguerre_rule(1).unwrap();
        assert!((r.nodes[0] - 1.0).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_laguerre_rule(2).unwrap();
        let s2 = 2f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s2)).abs() < 1e-14);
        assert!((r.nodes[1] - (2.0 + s2)).abs() < 1e-14);
        assert!((r.weights[0] - (2.0 + s2) / 4.0).abs() < 1e-14);
        assert!((r.weights[1] - (2.0 - s2) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_increase_and_weights_sum_to_one() {
        for n in [3, 4, 8, 16, 32, 64, 100] {
            let r = gauss_laguerre_rule(n).unwrap();
            assert!(r.nodes[0] > 0.0);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]), "n={n}");
            assert!(r.weights.iter().all(|&w| w > 0.0), "n={n}");
            let total: f64 = r.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
    }

    #[test]
    fn roots_are_roots() {
        for n in [5, 32, 128, 256] {
            let r = gauss_laguerre_rule(n).unwrap();
            for &y in &r.nodes {
                let (p, q) = laguerre_pair(n, y);
                let dp = n as f64 * (p - q) / y;
                assert!(p.abs() < 1e-13 * dp.abs().max(1.0), "n={n} y={y}");
            }
        }
    }

    #[test]
    fn exact_on_polynomials_up_to_degree_2n_minus_1() {
        for n in [4usize, 8, 16, 32] {
            let r = gauss_laguerre_rule(n).unwrap();
            let mut factorial = 1.0;
            for k in 0..2 * n {
                if k > 0 {
                    factorial *= k as f64;
                }
                let got: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(&y, &w)| w * y.powi(k as i32))
                    .sum();
                assert!(((got - factorial) / factorial).abs() < 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn out_of_range_orders_are_rejected() {
        assert!(gauss_laguerre_rule(0).is_err());
        assert!(gauss_laguerre_rule(257).is_err());
    }

    #[test]
    fn unweighted_integration() {
        let r = gauss_laguerre_rule(32).unwrap();
        let got = r.integrate_unweighted(|y| 1.0 / (1.0 + y * y) / (1.0 + y));
        // ∫₀^∞ dy / ((1+y)(1+y²)) = π/4
        assert!((got - std::f64::consts::FRAC_PI_4).abs() < 2e-3);
        let got = r.integrate_unweighted(|y| (-2.0 * y).exp());
        assert!((got - 0.5).abs() < 1e-12);
    }
}
