//! Independent evaluations used to cross-check the quadrature branches.

use super::{simpson, Branch, Prepared, SecrecyResult, SystemConfig};
use crate::error::Result;
use crate::eve::{pdf_at_zero, pdf_h_e_sq};
use crate::legit::series_partial_sum;
use crate::secrecy::{asymptotic_integrand, boundary_argument, sop_integrand_d2};
use crate::specfun::integrate::{integrate, integrate_to_infinity, Tolerance};

fn tolerance(rel: f64) -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel,
        max_intervals: 50_000,
    }
}

/// Adaptive quadrature of g over [0, ∞) split at `points`, with the last
/// piece mapped to infinity at the given scale.
fn split_integral(mut g: impl FnMut(f64) -> f64, points: &mut Vec<f64>, scale: f64, rel: f64) -> Result<f64> {
    points.retain(|p| *p > 0.0 && p.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut total = 0.0;
    let mut a = 0.0;
    for &b in points.iter() {
        total += integrate(&mut g, a, b, tolerance(rel))?.value;
        a = b;
    }
    total += integrate_to_infinity(&mut g, a, scale, tolerance(rel))?.value;
    Ok(total)
}

/// (1/ℳ) ∫_ℒ^∞ F(u) f_e((u − ℒ)/ℳ) du by adaptive Gauss–Kronrod in w = u − ℒ.
pub(crate) fn outage_integral(prep: &Prepared, rel: f64) -> Result<f64> {
    let p = prep.params;
    let mean = prep.ls.mean_h_ell_sq;
    let eve_width = p.m_slope * prep.es.scale;
    let mut points: Vec<f64> = [0.05, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0]
        .iter()
        .map(|f| f * mean - p.l_offset)
        .chain([1e-3, 0.1, 1.0, 4.0, 16.0].iter().map(|f| f * eve_width))
        .collect();
    let scale = mean.max(eve_width);
    let value = split_integral(|w| prep.outage_integrand(p.l_offset + w), &mut points, scale, rel)?;
    Ok(value / p.m_slope)
}

/// SOP by adaptive quadrature of the direct-form outage integral.
pub fn sop_adaptive(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    Ok(outage_integral(&prep, 1e-10)?.clamp(0.0, 1.0))
}

/// IP by adaptive quadrature.
pub fn ip_adaptive(cfg: &SystemConfig) -> Result<f64> {
    sop_adaptive(&cfg.with_rs(0.0))
}

/// The asymptotic SOP with ∫𝒦 computed adaptively instead of by Gauss–Laguerre.
pub fn sop_asymptotic_adaptive(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let p = prep.params;
    let mean = prep.ls.mean_h_ell_sq;
    let eve_width = p.m_slope * prep.es.scale;
    let mut points: Vec<f64> = [0.05, 0.25, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|f| f * mean)
        .chain([1e-3, 0.1, 1.0, 4.0, 16.0].iter().map(|f| f * eve_width))
        .collect();
    let integral = split_integral(
        |u| asymptotic_integrand(&prep, u),
        &mut points,
        mean.max(eve_width),
        1e-10,
    )? / p.m_slope;
    let offset = prep.ls.cdf_at_zero() * pdf_at_zero(&prep.es) / p.m_slope;
    Ok(integral - p.l_offset * offset)
}

/// The Simpson branch in the complement form
/// 1 − (1/ℳ)[Σ c_s 𝒟₂ − ℬ_N Σ_k Σ c_s 𝒟_{1,k}]/(48ℒS), over every node.
///
/// S is the configured order, or the automatic one capped at
/// 2²⁴ intervals. Requires ℒ > 0.
pub fn sop_verbatim(cfg: &SystemConfig) -> Result<SecrecyResult> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let p = prep.params;
    if !(p.l_offset > 0.0) {
        return Err(crate::error::invalid("the Simpson branch needs R_s > 0"));
    }
    let order = cfg
        .quad
        .simpson_order
        .unwrap_or_else(|| simpson::auto_simpson_order(&p, &prep.ls, &prep.es).min(simpson::MAX_EVALUATED_NODES));
    let ls_prod = p.l_offset * order as f64;
    let mut gauss = 0.0;
    let mut series = 0.0;
    for s in 1..=order + 1 {
        let c = simpson::simpson_coefficient(s, order);
        let z = s as f64 / ls_prod;
        gauss += c * sop_integrand_d2(z, &p, &prep.ls, &prep.es)?;
        let u = 1.0 / z;
        let v = boundary_argument(u, &p);
        if v >= 0.0 {
            let fe = pdf_h_e_sq(v, &prep.es)?;
            if fe > 0.0 {
                series += c * u * u * fe * series_partial_sum(u, &prep.ls, 0, prep.k_max)?;
            }
        }
    }
    let value = 1.0 - (gauss - series) / (48.0 * ls_prod * p.m_slope);
    Ok(prep.finish(value, Branch::Simpson, order, Vec::new()))
}
