//! Incomplete gamma functions for real shape parameters.
//!
//! The upper function Γ(a, x) is needed at strongly negative shapes
//! (a ≈ −12.4 for typical pointing-error severities), where the usual
//! regularized routines do not apply. All evaluations are carried out on
//! the logarithm of Γ(a, x) or on the scaled quantity
//!
//! ```text
//! R(a, x) = Γ(a, x) · x^(−a) · e^x
//! ```
//!
//! so that neither x^a nor e^(−x) is ever formed on its own.

use std::sync::OnceLock;

use super::{ln_gamma, EULER_GAMMA};
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Shape threshold below which the small-argument seed is used for x ≤ 1.
const SEED_MAX_SHAPE: f64 = 0.5;

/// Natural logarithm of the non-regularized upper incomplete gamma Γ(a, x).
///
/// Valid for every real `a`. For `a ≤ 0` the argument must be strictly
/// positive because Γ(a, 0) diverges there.
pub fn ln_upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if a.is_nan() || x.is_nan() || a.is_infinite() {
        return Err(domain(format!("Γ({a}, {x}) is undefined")));
    }
    if x < 0.0 {
        return Err(domain(format!("Γ(a, x) requires x ≥ 0, got x = {x}")));
    }
    if x == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if a > 0.0 {
        if x == 0.0 {
            return Ok(ln_gamma(a));
        }
        if x <= 1.0 && a <= SEED_MAX_SHAPE {
            return Ok(ln_small_argument(a, x));
        }
        if x < a + 1.0 {
            let p = lower_regularized_series(a, x)?;
            return Ok(ln_gamma(a) + (-p).ln_1p());
        }
        return ln_continued_fraction(a, x);
    }
    if x == 0.0 {
        return Err(domain(format!("Γ(a, 0) diverges for a ≤ 0 (a = {a})")));
    }
    if x > 1.0 {
        return ln_continued_fraction(a, x);
    }
    Ok(ln_small_argument(a, x))
}

/// Non-regularized upper incomplete gamma Γ(a, x) for any real `a`.
///
/// Underflows to zero (rather than erroring) when Γ(a, x) is below the
/// smallest double; use [`ln_upper_incomplete_gamma`] when the magnitude
/// matters.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let ln = ln_upper_incomplete_gamma(a, x)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow(format!("Γ({a}, {x}) exceeds f64::MAX")));
    }
    Ok(ln.exp())
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn lower_incomplete_gamma_regularized(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || a.is_infinite() {
        return Err(domain(format!("P(a, x) requires a > 0, got a = {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("P(a, x) requires x ≥ 0, got x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        return lower_regularized_series(a, x);
    }
    let ln_upper = ln_continued_fraction(a, x)?;
    Ok(-(ln_upper - ln_gamma(a)).exp_m1())
}

/// P(a, x) by its power series; intended for x < a + 1.
fn lower_regularized_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            let ln_p = a * x.ln() - x - ln_gamma(a) + sum.ln();
            return Ok(ln_p.exp().min(1.0));
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma series",
        iterations: MAX_ITER,
    })
}

/// ln Γ(a, x) from Legendre's continued fraction (modified Lentz).
///
/// Converges for any real `a` once x exceeds max(1, a + 1).
fn ln_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(a * x.ln() - x + h.ln());
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma continued fraction",
        iterations: MAX_ITER,
    })
}

/// ln Γ(a, x) for 0 < x ≤ 1 and a ≤ 1/2.
///
/// Seeds at a₀ = a + n ∈ (−1/2, 1/2] and walks the recurrence
/// Γ(b − 1, x) = (x^(b−1) e^(−x) − Γ(b, x)) / (1 − b) down n times.
/// In scaled form the step is R(b − 1) = (1 − x·R(b)) / (1 − b); for x ≤ 1
/// both terms of the numerator keep their sign and no cancellation occurs.
fn ln_small_argument(a: f64, x: f64) -> f64 {
    let steps = (SEED_MAX_SHAPE - a).floor().max(0.0);
    let mut b = a + steps;
    let mut r = scaled_seed(b, x);
    for _ in 0..steps as usize {
        r = (1.0 - x * r) / (1.0 - b);
        b -= 1.0;
    }
    r.ln() + a * x.ln() - x
}

/// R(a, x) = Γ(a, x) x^(−a) e^x for |a| ≤ 1/2 and 0 < x ≤ 1.
///
/// Uses Γ(a, x) = [Γ(1 + a) − x^a] / a + x^a Σ_{n≥1} (−1)^(n+1) x^n / (n! (a + n)),
/// with the bracket formed from two `expm1` calls so that the a → 0 limit
/// (−γ − ln x, the exponential integral) is reached smoothly.
fn scaled_seed(a: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let mut sum = 0.0;
    let mut power = 1.0;
    for n in 1..200 {
        let fnn = n as f64;
        power *= -x / fnn;
        let term = -power / (a + fnn);
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    let head = if a == 0.0 {
        -EULER_GAMMA - ln_x
    } else {
        (ln_gamma_1p(a).exp_m1() - (a * ln_x).exp_m1()) / a
    };
    let x_pow_a = (a * ln_x).exp();
    let gamma_ax = head + x_pow_a * sum;
    gamma_ax / x_pow_a * x.exp()
}

/// ln Γ(1 + a) for |a| ≤ 1/2 from its Taylor series in ζ values.
pub(crate) fn ln_gamma_1p(a: f64) -> f64 {
    debug_assert!(a.abs() <= 0.5 + 1e-12);
    let zeta = zeta_table();
    let mut sum = -EULER_GAMMA * a;
    // power tracks (−a)^k
    let mut power = -a;
    for (k, z) in zeta.iter().enumerate().skip(2) {
        power *= -a;
        let term = z * power / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

const ZETA_TERMS: usize = 96;

/// ζ(k) for k = 0..ZETA_TERMS; entries 0 and 1 are unused.
fn zeta_table() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; ZETA_TERMS];
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        t[2] = pi2 / 6.0;
        t[3] = 1.202_056_903_159_594_3;
        t[4] = pi2 * pi2 / 90.0;
        t[5] = 1.036_927_755_143_37;
        t[6] = pi2 * pi2 * pi2 / 945.0;
        t[7] = 1.008_349_277_381_922_8;
        for (k, slot) in t.iter_mut().enumerate().skip(8) {
            // ζ(k) − 1 = Σ_{n≥2} n^(−k); summed from the small end.
            let kf = k as f64;
            let n_max = (1e-19f64.ln() / -kf).exp().ceil().max(2.0) as usize;
            let tail: f64 = (2..=n_max).rev().map(|n| (n as f64).powf(-kf)).sum();
            *slot = 1.0 + tail;
        }
        t
    })
}
