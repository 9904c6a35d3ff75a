//! Statistics of the eavesdropper end-to-end gain |h_e|².
//!
//! Without phase alignment the cascaded sum is approximately circular
//! Gaussian, so |h_{f,e}|² is exponential with mean Nℋ₂². Mixing over the
//! pointing-error law gives, with s = Nℋ₂²A₀² and x = z/s,
//!
//! ```text
//! f(z) = φ/(2s) · x^(φ/2 − 1) · Γ(1 − φ/2, x)
//! ```

use crate::channel::{alpha_mu_moment, AlphaMuParams, PointingErrorParams};
use crate::error::{domain, invalid, Result};
use crate::specfun::ln_upper_incomplete_gamma;

/// Below this x = z/s the density is replaced by its value at the origin.
pub const ORIGIN_BRANCH_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveStats {
    pub n_elements: usize,
    pub h2: f64,
    pub pe: PointingErrorParams,
    /// Nℋ₂²A₀².
    pub scale: f64,
}

pub fn compute_eve_stats(n: usize, fading: &AlphaMuParams, pe: &PointingErrorParams) -> Result<EveStats> {
    if n == 0 {
        return Err(invalid("n_elements must be at least 1"));
    }
    fading.validate()?;
    pe.validate()?;
    let h2 = alpha_mu_moment(2, fading);
    Ok(EveStats {
        n_elements: n,
        h2,
        pe: *pe,
        scale: n as f64 * h2 * h2 * pe.a0_sq(),
    })
}

fn check_phi(s: &EveStats) -> Result<()> {
    if s.pe.phi > 2.0 {
        Ok(())
    } else {
        Err(domain(format!("the eavesdropper law requires φ > 2, got {}", s.pe.phi)))
    }
}

/// f(0) = φ / (s(φ − 2)).
pub fn pdf_at_zero(s: &EveStats) -> f64 {
    s.pe.phi / (s.scale * (s.pe.phi - 2.0))
}

/// Density of |h_e|² at z ≥ 0.
///
/// ```
/// use thz_secrecy::channel::{AlphaMuParams, PointingErrorParams};
/// use thz_secrecy::eve::{compute_eve_stats, pdf_h_e_sq, pdf_at_zero};
/// let fading = AlphaMuParams::new(2.5, 1.5, 1.5).unwrap();
/// let pe = PointingErrorParams::new(25.7404, 0.054).unwrap();
/// let s = compute_eve_stats(30, &fading, &pe).unwrap();
/// assert_eq!(pdf_h_e_sq(0.0, &s).unwrap(), pdf_at_zero(&s));
/// ```
pub fn pdf_h_e_sq(z: f64, s: &EveStats) -> Result<f64> {
    check_phi(s)?;
    if !(z >= 0.0) {
        return Err(domain(format!("density requires z ≥ 0, got {z}")));
    }
    let x = z / s.scale;
    if x < ORIGIN_BRANCH_THRESHOLD {
        return Ok(pdf_at_zero(s));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let half = s.pe.phi / 2.0;
    let ln = (half / s.scale).ln() + (half - 1.0) * x.ln() + ln_upper_incomplete_gamma(1.0 - half, x)?;
    Ok(ln.exp())
}

/// Derivative of the density, f'(z).
///
/// Written as −φ/(2s²) · x^(φ/2 − 2) Γ(2 − φ/2, x), which follows from
/// differentiating the product form and applying the recurrence of Γ once;
/// both terms of the product-rule expression then combine without
/// cancellation near the origin.
pub fn pdf_derivative_h_e_sq(z: f64, s: &EveStats) -> Result<f64> {
    check_phi(s)?;
    if !(z > 0.0) {
        return Err(domain(format!("derivative requires z > 0, got {z}")));
    }
    let x = z / s.scale;
    if x.is_infinite() {
        return Ok(0.0);
    }
    let half = s.pe.phi / 2.0;
    let ln = (half / (s.scale * s.scale)).ln() + (half - 2.0) * x.ln() + ln_upper_incomplete_gamma(2.0 - half, x)?;
    Ok(-ln.exp())
}

/// Distribution function of |h_e|², clamped to [0, 1].
///
/// The closed form 1 − (φ/2) x^(φ/2) Γ(−φ/2, x) cancels badly for small
/// x, so the equivalent 1 − e^(−x) + x^(φ/2) Γ(1 − φ/2, x) is evaluated.
pub fn cdf_h_e_sq(z: f64, s: &EveStats) -> Result<f64> {
    check_phi(s)?;
    if !(z > 0.0) {
        return Ok(0.0);
    }
    let x = z / s.scale;
    if x.is_infinite() {
        return Ok(1.0);
    }
    let half = s.pe.phi / 2.0;
    let mixed = (half * x.ln() + ln_upper_incomplete_gamma(1.0 - half, x)?).exp();
    Ok((-(-x).exp_m1() + mixed).clamp(0.0, 1.0))
}

/// E[|h_e|²] = φs/(φ + 2).
pub fn mean_h_e_sq(s: &EveStats) -> f64 {
    s.pe.phi * s.scale / (s.pe.phi + 2.0)
}
