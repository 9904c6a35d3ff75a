//! Special functions and quadrature rules.
//!
//! Everything here is a pure function of its arguments.

mod incgamma;
pub mod integrate;
mod laguerre;

pub use incgamma::{ln_upper_incomplete_gamma, lower_incomplete_gamma_regularized, upper_incomplete_gamma};
pub use laguerre::{gauss_laguerre_rule, laguerre_eval, LaguerreRule, MAX_LAGUERRE_ORDER};

use crate::error::{domain, invalid, Result};

/// The Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Natural log of |Γ(x)|.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Gaussian tail probability Q(x) = P(Z > x) for a standard normal Z.
///
/// ```
/// use thz_secrecy::specfun::q_function;
/// assert_eq!(q_function(0.0), 0.5);
/// assert!((q_function(1.0) - 0.158655).abs() < 1e-6);
/// ```
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(domain(format!("ψ(x) requires finite x > 0, got {x}")));
    }
    let mut acc = 0.0;
    let mut x = x;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(acc + x.ln() - 0.5 * inv - tail)
}

/// Orders of the two quadrature rules used by the secrecy evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Subinterval count S of the extended Simpson rule. `None` lets the
    /// evaluator pick S from the scale of the integrand.
    pub simpson_order: Option<usize>,
    /// Node count of the Gauss–Laguerre rule.
    pub laguerre_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            simpson_order: None,
            laguerre_order: 32,
        }
    }
}

/// Smallest Simpson subinterval count accepted.
pub const MIN_SIMPSON_ORDER: usize = 8;

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.simpson_order {
            if s < MIN_SIMPSON_ORDER {
                return Err(invalid(format!(
                    "simpson_order must be at least {MIN_SIMPSON_ORDER}, got {s}"
                )));
            }
        }
        if self.laguerre_order == 0 || self.laguerre_order > MAX_LAGUERRE_ORDER {
            return Err(invalid(format!(
                "laguerre_order must lie in 1..={MAX_LAGUERRE_ORDER}, got {}",
                self.laguerre_order
            )));
        }
        Ok(())
    }
}
