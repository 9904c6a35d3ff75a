//! Alternative extended Simpson rule on the t = 1/u map.
//!
//! Nodes sit at t_s = s/(ℒS), s = 1..=S+1, i.e. u_s = ℒS/s, and the
//! eavesdropper density is taken at ℒ(S − s)/(sℳ), which is exact in the
//! node index and negative (density zero) at s = S+1.

use super::{reference, Prepared};
use crate::error::Result;
use crate::eve::{pdf_at_zero, EveStats};
use crate::legit::{cdf_value, LegitStats, K_MAX_CAP};
use crate::secrecy::SecrecyParams;
use crate::specfun::MIN_SIMPSON_ORDER;

/// Nodes per feature width of the integrand when S is chosen automatically.
pub const NODE_DENSITY: f64 = 256.0;

/// Largest automatically chosen S.
pub const MAX_AUTO_ORDER: usize = 1 << 40;

/// Most nodes an automatically sized rule may evaluate.
pub const MAX_EVALUATED_NODES: usize = 1 << 24;

/// Nodes below the cutoff are dropped once their total is provably below
/// this fraction of the running sum.
const SKIP_REL_TOL: f64 = 1e-10;

/// Largest Simpson weight, over the 48 normalization.
const MAX_WEIGHT: f64 = 59.0 / 48.0;

/// Weight c_s of node s ∈ 1..=S+1 for an S-interval rule.
///
/// ```
/// use thz_secrecy::secrecy::simpson_coefficient;
/// assert_eq!(simpson_coefficient(1, 10), 17.0);
/// assert_eq!(simpson_coefficient(10, 10), 59.0);
/// assert_eq!(simpson_coefficient(6, 10), 48.0);
/// ```
///
/// # Panics
///
/// If S < 8 or s lies outside 1..=S+1.
pub fn simpson_coefficient(s: usize, order: usize) -> f64 {
    assert!(
        order >= MIN_SIMPSON_ORDER,
        "Simpson order must be at least {MIN_SIMPSON_ORDER}"
    );
    assert!((1..=order + 1).contains(&s), "node {s} outside 1..={}", order + 1);
    match s.min(order + 2 - s) {
        1 => 17.0,
        2 => 59.0,
        3 => 43.0,
        4 => 49.0,
        _ => 48.0,
    }
}

/// All S+1 weights, first node first.
pub fn simpson_coefficients(order: usize) -> Vec<f64> {
    (1..=order + 1).map(|s| simpson_coefficient(s, order)).collect()
}

/// S resolving both the edge of F_{h_ℓ²} and the decay of f_{|h_e|²} with
/// [`NODE_DENSITY`] nodes, clamped to [8, 2⁴⁰].
pub fn auto_simpson_order(p: &SecrecyParams, ls: &LegitStats, es: &EveStats) -> usize {
    let l = p.l_offset;
    let phi = ls.pe.phi;
    // about twice the coefficient of variation of h_ℓ²
    let rel = (4.0 / ls.ratio() + 4.0 / (phi * (phi + 4.0))).sqrt();
    let width = (ls.mean_h_ell_sq * rel).min(p.m_slope * es.scale);
    let s = (NODE_DENSITY * (l + width).powi(2) / (l * width)).ceil();
    if !(s < MAX_AUTO_ORDER as f64) {
        MAX_AUTO_ORDER
    } else {
        (s as usize).max(MIN_SIMPSON_ORDER)
    }
}

pub(crate) struct SimpsonEval {
    pub value: f64,
    pub order: usize,
    pub diagnostics: Vec<String>,
}

/// Compensated running sum.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Bound on (1/ℳ) ∫ F f_e over u ≤ `u`, in the form the node sum sees it.
///
/// F is bounded by the untruncated series at `u` (every term is positive
/// and the full CDF is monotone) and f_e by its value at the origin.
fn tail_bound(prep: &Prepared, u: f64, fe0: f64) -> f64 {
    MAX_WEIGHT * cdf_value(u, &prep.ls, K_MAX_CAP) * fe0 * u / prep.params.m_slope
}

/// Largest u ≥ ℒ whose tail bound is at most `target`, or ℒ if none is.
fn cutoff(prep: &Prepared, target: f64, fe0: f64) -> f64 {
    let l = prep.params.l_offset;
    if tail_bound(prep, l, fe0) > target {
        return l;
    }
    let mut lo = l.ln();
    let mut hi = prep.ls.mean_h_ell_sq.max(l).ln();
    if tail_bound(prep, hi.exp(), fe0) <= target {
        return hi.exp();
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail_bound(prep, mid.exp(), fe0) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

pub(crate) fn evaluate(prep: &Prepared, order: Option<usize>) -> Result<SimpsonEval> {
    let l = prep.params.l_offset;
    let m = prep.params.m_slope;
    let fe0 = pdf_at_zero(&prep.es);
    let mut diagnostics = Vec::new();
    let order = match order {
        Some(s) => s,
        None => {
            let mut s = auto_simpson_order(&prep.params, &prep.ls, &prep.es);
            // Predict how many nodes survive the cutoff from a coarse pilot
            // value and shrink S if the rule would be too expensive.
            let pilot = reference::outage_integral(prep, 1e-4)?;
            let u_cut = cutoff(prep, SKIP_REL_TOL * pilot, fe0);
            let predicted = l * s as f64 / u_cut + 1.0;
            if predicted > MAX_EVALUATED_NODES as f64 {
                let reduced = ((MAX_EVALUATED_NODES as f64 - 1.0) * u_cut / l).floor() as usize;
                let reduced = reduced.clamp(MIN_SIMPSON_ORDER, s);
                diagnostics.push(format!(
                    "Simpson order reduced from {s} to {reduced} to stay within {MAX_EVALUATED_NODES} node evaluations"
                ));
                s = reduced;
            }
            s
        }
    };
    let sf = order as f64;
    let ls_prod = l * sf;
    let mut acc = Neumaier::default();
    let mut next_check = 16usize;
    for s in 1..=order + 1 {
        let si = s as f64;
        let v = l * (sf - si) / (si * m);
        if v < 0.0 {
            continue;
        }
        let u = ls_prod / si;
        let fe = prep.eve_pdf(v);
        if fe > 0.0 {
            acc.add(simpson_coefficient(s, order) / 48.0 * u * u * prep.cdf(u) * fe);
        }
        if s >= next_check && s < order {
            next_check = s + (s / 16).max(1);
            // Nodes s' > s carry u_{s'}² ≤ (ℒS)²/s'², whose sum over s' > s
            // is at most ℒS·u_s; so the rest is bounded by tail_bound(u_s).
            let value = acc.total() / (ls_prod * m);
            if value > 0.0 && tail_bound(prep, u, fe0) <= SKIP_REL_TOL * value {
                break;
            }
        }
    }
    Ok(SimpsonEval {
        value: acc.total() / (ls_prod * m),
        order,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_pattern() {
        let c = simpson_coefficients(10);
        assert_eq!(
            c,
            vec![17.0, 59.0, 43.0, 49.0, 48.0, 48.0, 48.0, 49.0, 43.0, 59.0, 17.0]
        );
        let c = simpson_coefficients(8);
        assert_eq!(c.len(), 9);
        assert_eq!(c[4], 48.0);
    }

    #[test]
    fn coefficients_sum_to_48_s() {
        for s in 8..200 {
            assert_eq!(simpson_coefficients(s).iter().sum::<f64>(), 48.0 * s as f64);
        }
    }

    #[test]
    #[should_panic]
    fn too_few_intervals_panics() {
        simpson_coefficient(1, 7);
    }

    #[test]
    fn compensated_sum() {
        let mut n = Neumaier::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            n.add(x);
        }
        assert_eq!(n.total(), 2.0);
    }
}
