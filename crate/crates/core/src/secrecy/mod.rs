//! Secrecy outage and intercept probabilities.
//!
//! An outage occurs when γ_ℓ ≤ 2^R_s (1 + γ_e) − 1, which rearranges to
//! h_ℓ² ≤ ℳ|h_e|² + ℒ with
//!
//! ```text
//! ℳ = 2^R_s h_{l,e}² σ_ℓ² / (h_{l,ℓ}² σ_e²)
//! ℒ = σ_ℓ² (2^R_s − 1) / (𝒫 h_{l,ℓ}²)
//! ```
//!
//! so that SOP = (1/ℳ) ∫_ℒ^∞ F_{h_ℓ²}(u) f_{|h_e|²}((u − ℒ)/ℳ) du.
//! For ℒ > 0 the integral is mapped onto (0, 1/ℒ] by t = 1/u and summed
//! with the alternative extended Simpson rule; for ℒ = 0 (the intercept
//! probability) a Gauss–Laguerre rule is used directly.

mod reference;
mod simpson;

pub use reference::{ip_adaptive, sop_adaptive, sop_asymptotic_adaptive, sop_verbatim};
pub use simpson::{auto_simpson_order, simpson_coefficient, simpson_coefficients};

use crate::channel::{path_gain, AlphaMuParams, LinkGeometry, PointingErrorParams};
use crate::error::{invalid, Result};
use crate::eve::{compute_eve_stats, pdf_at_zero, pdf_derivative_h_e_sq, pdf_h_e_sq, EveStats};
use crate::legit::{
    cdf_value, compute_legit_stats, ln_series_term, select_k_max, truncation_bound, LegitStats, SeriesControl,
};
use crate::specfun::{gauss_laguerre_rule, q_function, QuadratureSpec};

/// Below this offset the Simpson map t = 1/u degenerates and the ℒ = 0
/// rule is used instead.
pub const MIN_SIMPSON_OFFSET: f64 = 1e-12;

/// A complete scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_elements: usize,
    /// Shared by every hop.
    pub fading: AlphaMuParams,
    pub pe: PointingErrorParams,
    pub geom_ell: LinkGeometry,
    pub geom_eve: LinkGeometry,
    /// 𝒫/σ_ℓ², linear.
    pub snr_tx_ell: f64,
    /// 𝒫/σ_e², linear.
    pub snr_tx_eve: f64,
    /// Secrecy rate R_s in bits/s/Hz.
    pub rs: f64,
    pub series: SeriesControl,
    /// Pick `series.k_max` from `series.tol` instead of using it as given.
    pub auto_k_max: bool,
    pub quad: QuadratureSpec,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(invalid("n_elements must be at least 1"));
        }
        self.fading.validate()?;
        self.pe.validate()?;
        self.geom_ell.validate()?;
        self.geom_eve.validate()?;
        for (name, v) in [("snr_tx_ell", self.snr_tx_ell), ("snr_tx_eve", self.snr_tx_eve)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.rs >= 0.0 && self.rs.is_finite()) {
            return Err(invalid(format!("rs must be nonnegative, got {}", self.rs)));
        }
        self.series.validate()?;
        self.quad.validate()
    }

    /// A copy with a different secrecy rate.
    pub fn with_rs(&self, rs: f64) -> Self {
        Self { rs, ..self.clone() }
    }
}

/// The slope ℳ and offset ℒ of the outage boundary h_ℓ² = ℳ|h_e|² + ℒ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyParams {
    pub m_slope: f64,
    pub l_offset: f64,
    pub h_l_ell: f64,
    pub h_l_eve: f64,
}

pub fn secrecy_params(cfg: &SystemConfig) -> Result<SecrecyParams> {
    cfg.validate()?;
    let h_l_ell = path_gain(&cfg.geom_ell);
    let h_l_eve = path_gain(&cfg.geom_eve);
    let two_rs = cfg.rs.exp2();
    // σ_ℓ²/σ_e² = (𝒫/σ_e²)/(𝒫/σ_ℓ²)
    let m_slope = two_rs * h_l_eve * h_l_eve / (h_l_ell * h_l_ell) * cfg.snr_tx_eve / cfg.snr_tx_ell;
    // 2^R_s − 1 via expm1 keeps small rates exact.
    let l_offset = (cfg.rs * std::f64::consts::LN_2).exp_m1() / (cfg.snr_tx_ell * h_l_ell * h_l_ell);
    Ok(SecrecyParams {
        m_slope,
        l_offset,
        h_l_ell,
        h_l_eve,
    })
}

/// Average SNRs (γ̄_ℓ, γ̄_e).
pub fn avg_snr(cfg: &SystemConfig) -> Result<(f64, f64)> {
    let p = secrecy_params(cfg)?;
    let ls = compute_legit_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let es = compute_eve_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let snr_ell = cfg.snr_tx_ell * p.h_l_ell * p.h_l_ell * ls.mean_h_ell_sq;
    let snr_eve = cfg.snr_tx_eve * p.h_l_eve * p.h_l_eve * crate::eve::mean_h_e_sq(&es);
    Ok((snr_ell, snr_eve))
}

/// 𝒥(N) = (1 + (N − 1)ℋ₁⁴/ℋ₂²) h_{l,ℓ}²/h_{l,e}², the average-SNR advantage
/// of the aligned receiver when both noise powers are equal.
pub fn advantage_ratio(cfg: &SystemConfig) -> Result<f64> {
    let p = secrecy_params(cfg)?;
    let ls = compute_legit_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let h1_4 = ls.h1.powi(4);
    Ok((1.0 + (cfg.n_elements as f64 - 1.0) * h1_4 / (ls.h2 * ls.h2)) * (p.h_l_ell / p.h_l_eve).powi(2))
}

/// Which quadrature produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Simpson,
    GaussLaguerre,
    Asymptotic,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Simpson => "simpson",
            Branch::GaussLaguerre => "gauss_laguerre",
            Branch::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyResult {
    /// Probability, clamped to [0, 1].
    pub value: f64,
    pub branch: Branch,
    pub k_max_used: usize,
    /// Worst-case series truncation error 2𝒲 (infinite when it overflows).
    pub truncation_bound: f64,
    /// S for the Simpson branch, node count for Gauss–Laguerre.
    pub quad_order: usize,
    pub diagnostics: Vec<String>,
}

/// Everything an evaluator needs, computed once per configuration.
pub(crate) struct Prepared {
    pub ls: LegitStats,
    pub es: EveStats,
    pub params: SecrecyParams,
    pub k_max: usize,
    pub bound: f64,
    pub diagnostics: Vec<String>,
}

impl Prepared {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let params = secrecy_params(cfg)?;
        let ls = compute_legit_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
        let es = compute_eve_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
        let mut diagnostics = ls.warnings.clone();
        let (k_max, bound) = if cfg.auto_k_max {
            let sel = select_k_max(cfg.series.tol, &ls);
            diagnostics.extend(sel.warning);
            (sel.k_max, sel.bound)
        } else {
            let k = cfg.series.k_max;
            let bound = truncation_bound(k, &ls).map(|b| b.eps_outside).unwrap_or(f64::INFINITY);
            (k, bound)
        };
        Ok(Self {
            ls,
            es,
            params,
            k_max,
            bound,
            diagnostics,
        })
    }

    /// Truncated F_{h_ℓ²}(u).
    pub fn cdf(&self, u: f64) -> f64 {
        cdf_value(u, &self.ls, self.k_max)
    }

    /// f_{|h_e|²}(v), zero for negative v.
    pub fn eve_pdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            0.0
        } else {
            pdf_h_e_sq(v, &self.es).expect("φ > 2 checked in validation")
        }
    }

    /// F(u) f_e((u − ℒ)/ℳ), the outage integrand in h_ℓ² units.
    pub fn outage_integrand(&self, u: f64) -> f64 {
        let fe = self.eve_pdf((u - self.params.l_offset) / self.params.m_slope);
        if fe == 0.0 {
            0.0
        } else {
            self.cdf(u) * fe
        }
    }

    fn finish(self, value: f64, branch: Branch, quad_order: usize, mut extra: Vec<String>) -> SecrecyResult {
        let mut diagnostics = self.diagnostics;
        diagnostics.append(&mut extra);
        let clamped = value.clamp(0.0, 1.0);
        if clamped != value {
            diagnostics.push(format!("value {value:e} clamped to [0, 1]"));
        }
        SecrecyResult {
            value: clamped,
            branch,
            k_max_used: self.k_max,
            truncation_bound: self.bound,
            quad_order,
            diagnostics,
        }
    }
}

/// 𝒴_k or its Simpson-mapped form; see [`sop_integrand_d2`].
///
/// Excludes the ℬ_N factor. For ℒ > 0 returns
/// z^(−2) 𝒯_k(1/z) f_e((1/z − ℒ)/ℳ); for ℒ = 0 returns 𝒯_k(z) f_e(z/ℳ).
pub fn sop_integrand_d1(k: usize, z: f64, p: &SecrecyParams, ls: &LegitStats, es: &EveStats) -> Result<f64> {
    if !(z > 0.0) {
        return Err(crate::error::domain(format!("integrand requires z > 0, got {z}")));
    }
    let (u, jacobian) = mapped_point(z, p);
    let fe = eve_density_at(u, p, es)?;
    if fe == 0.0 {
        return Ok(0.0);
    }
    Ok(jacobian * ln_series_term(k, u, ls)?.exp() * fe)
}

/// 𝒵 or its Simpson-mapped form.
///
/// For ℒ > 0 returns z^(−2) Q((√u/A₀ − √𝒢)/√Ψ) f_e((u − ℒ)/ℳ) with u = 1/z
/// (zero once u < ℒ); for ℒ = 0 returns the unmapped product at u = z.
pub fn sop_integrand_d2(z: f64, p: &SecrecyParams, ls: &LegitStats, es: &EveStats) -> Result<f64> {
    if !(z > 0.0) {
        return Err(crate::error::domain(format!("integrand requires z > 0, got {z}")));
    }
    let (u, jacobian) = mapped_point(z, p);
    let fe = eve_density_at(u, p, es)?;
    if fe == 0.0 {
        return Ok(0.0);
    }
    let q = q_function((u.sqrt() / ls.pe.a0 - ls.g_n.sqrt()) / ls.psi_n.sqrt());
    Ok(jacobian * q * fe)
}

/// 𝒵 at the origin for ℒ = 0: Q(−√(𝒢/Ψ)) f_e(0) = (1 − F(0)) f_e(0).
pub fn sop_integrand_d2_at_zero(ls: &LegitStats, es: &EveStats) -> f64 {
    q_function(-ls.ratio().sqrt()) * pdf_at_zero(es)
}

fn mapped_point(z: f64, p: &SecrecyParams) -> (f64, f64) {
    if p.l_offset > 0.0 {
        (1.0 / z, 1.0 / (z * z))
    } else {
        (z, 1.0)
    }
}

fn eve_density_at(u: f64, p: &SecrecyParams, es: &EveStats) -> Result<f64> {
    let v = boundary_argument(u, p);
    if v < 0.0 {
        Ok(0.0)
    } else {
        pdf_h_e_sq(v, es)
    }
}

/// (u − ℒ)/ℳ, snapped to 0 when u is ℒ up to rounding of the node map.
pub(crate) fn boundary_argument(u: f64, p: &SecrecyParams) -> f64 {
    let w = u - p.l_offset;
    if w.abs() <= 4.0 * f64::EPSILON * p.l_offset {
        0.0
    } else {
        w / p.m_slope
    }
}

/// Secrecy outage probability.
///
/// R_s = 0 is delegated to [`ip`]; so is an offset ℒ below
/// [`MIN_SIMPSON_OFFSET`], which is recorded in the diagnostics.
pub fn sop(cfg: &SystemConfig) -> Result<SecrecyResult> {
    cfg.validate()?;
    if cfg.rs == 0.0 {
        return ip(cfg);
    }
    let prep = Prepared::new(cfg)?;
    if prep.params.l_offset < MIN_SIMPSON_OFFSET {
        let mut r = ip_with_slope(cfg, prep.params.m_slope)?;
        r.diagnostics.push(format!(
            "ℒ = {:e} is below {MIN_SIMPSON_OFFSET:e}; evaluated with the ℒ = 0 rule",
            prep.params.l_offset
        ));
        return Ok(r);
    }
    let eval = simpson::evaluate(&prep, cfg.quad.simpson_order)?;
    Ok(prep.finish(eval.value, Branch::Simpson, eval.order, eval.diagnostics))
}

/// Intercept probability, SOP at R_s = 0.
pub fn ip(cfg: &SystemConfig) -> Result<SecrecyResult> {
    ip_with_slope(&cfg.with_rs(0.0), secrecy_params(&cfg.with_rs(0.0))?.m_slope)
}

fn ip_with_slope(cfg: &SystemConfig, m_slope: f64) -> Result<SecrecyResult> {
    let mut prep = Prepared::new(&cfg.with_rs(0.0))?;
    prep.params.m_slope = m_slope;
    prep.params.l_offset = 0.0;
    let rule = gauss_laguerre_rule(cfg.quad.laguerre_order)?;
    let sum = rule.integrate_unweighted(|y| prep.outage_integrand(y));
    let value = sum / m_slope;
    let n = rule.order();
    Ok(prep.finish(value, Branch::GaussLaguerre, n, Vec::new()))
}

/// 𝒪_N = φ Q(√(𝒢/Ψ)) / (ℳ N ℋ₂² A₀² (φ − 2)) = F(0) f_e(0) / ℳ.
pub fn asymptotic_offset(cfg: &SystemConfig) -> Result<f64> {
    let prep = Prepared::new(cfg)?;
    Ok(prep.ls.cdf_at_zero() * pdf_at_zero(&prep.es) / prep.params.m_slope)
}

/// ℳ𝒦(u/ℳ) = F(u) (f_e(u/ℳ) − (ℒ/ℳ) f_e'(u/ℳ)), the asymptotic kernel
/// in h_ℓ² units; ∫₀^∞ 𝒦(z) dz is its integral over u divided by ℳ.
fn asymptotic_integrand(prep: &Prepared, u: f64) -> f64 {
    let p = &prep.params;
    let z = u / p.m_slope;
    let f = prep.eve_pdf(z);
    let slope_term = if p.l_offset > 0.0 {
        p.l_offset / p.m_slope * pdf_derivative_h_e_sq(z, &prep.es).expect("z > 0 at quadrature nodes")
    } else {
        0.0
    };
    prep.cdf(u) * (f - slope_term)
}

/// High-SNR expansion of the SOP, first order in ℒ:
/// ∫₀^∞ 𝒦(z) dz − ℒ𝒪_N.
///
/// The integral is taken in h_ℓ² units, z = u/ℳ, with the same
/// Gauss–Laguerre rule as [`ip`]; at ℒ = 0 the two sums then coincide term
/// by term.
pub fn sop_asymptotic(cfg: &SystemConfig) -> Result<SecrecyResult> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    asymptotic_with(prep, cfg.quad.laguerre_order)
}

/// The high-SNR floor of the SOP: [`sop_asymptotic`] with ℒ set to 0 and
/// ℳ kept at its R_s-dependent value.
pub fn sop_floor(cfg: &SystemConfig) -> Result<SecrecyResult> {
    cfg.validate()?;
    let mut prep = Prepared::new(cfg)?;
    prep.params.l_offset = 0.0;
    asymptotic_with(prep, cfg.quad.laguerre_order)
}

fn asymptotic_with(prep: Prepared, laguerre_order: usize) -> Result<SecrecyResult> {
    let rule = gauss_laguerre_rule(laguerre_order)?;
    let m = prep.params.m_slope;
    let integral = rule.integrate_unweighted(|u| asymptotic_integrand(&prep, u)) / m;
    let offset = prep.ls.cdf_at_zero() * pdf_at_zero(&prep.es) / m;
    let value = integral - prep.params.l_offset * offset;
    let n = rule.order();
    Ok(prep.finish(value, Branch::Asymptotic, n, Vec::new()))
}
