//! Statistics of the legitimate end-to-end gain h_ℓ².
//!
//! The cascaded sum over the N surface elements is replaced by a Gaussian
//! (central limit) law, and the pointing-error integral is expanded in the
//! series
//!
//! ```text
//! F(z) = 1 − Q((√z/A₀ − √𝒢)/√Ψ) + ℬ Σ_k 𝒯_k(z)
//! 𝒯_k(z) = (2𝒢/Ψ)^(k/2) z^(φ/2) Γ((k − φ + 1)/2, z/(2ΨA₀²)) / k!
//! ```
//!
//! Every term is assembled in log space: ℬ underflows and 𝒯_k overflows
//! long before their product leaves [0, 1].

use crate::channel::{alpha_mu_moment, AlphaMuParams, PointingErrorParams};
use crate::error::{domain, invalid, Error, Result};
use crate::specfun::{digamma, ln_gamma, ln_upper_incomplete_gamma, q_function};

/// Hard cap on the series truncation index.
pub const K_MAX_CAP: usize = 200;

/// Length of the reference series used to measure truncation error.
pub const REFERENCE_TERMS: usize = 150;

/// Element count below which the Gaussian approximation is flagged.
pub const CLT_MIN_ELEMENTS: usize = 10;

/// Series parameters of the h_ℓ² law for a given surface size.
#[derive(Debug, Clone, PartialEq)]
pub struct LegitStats {
    pub n_elements: usize,
    /// ℋ₁, first moment of one α-μ hop.
    pub h1: f64,
    /// ℋ₂, second moment of one α-μ hop.
    pub h2: f64,
    /// Ψ_N = N(ℋ₂² − ℋ₁⁴), variance of the cascaded sum.
    pub psi_n: f64,
    /// 𝒢_N = (Nℋ₁²)², squared mean of the cascaded sum.
    pub g_n: f64,
    /// ℬ_N; frequently below the smallest double, see `ln_b_n`.
    pub b_n: f64,
    pub ln_b_n: f64,
    /// E[h_ℓ²].
    pub mean_h_ell_sq: f64,
    pub pe: PointingErrorParams,
    pub warnings: Vec<String>,
}

/// Builds the series parameters for N elements.
///
/// ```
/// use thz_secrecy::channel::{AlphaMuParams, PointingErrorParams};
/// use thz_secrecy::legit::compute_legit_stats;
/// let fading = AlphaMuParams::new(2.0, 1.0, 1.0).unwrap();
/// let pe = PointingErrorParams::new(25.7404, 0.054).unwrap();
/// let s = compute_legit_stats(1, &fading, &pe).unwrap();
/// // Ψ₁ = 1 − Γ(3/2)⁴ = 1 − π²/16 for Rayleigh hops
/// assert!((s.psi_n - (1.0 - std::f64::consts::PI.powi(2) / 16.0)).abs() < 1e-12);
/// assert!(!s.warnings.is_empty()); // N < 10 is flagged
/// ```
pub fn compute_legit_stats(n: usize, fading: &AlphaMuParams, pe: &PointingErrorParams) -> Result<LegitStats> {
    if n == 0 {
        return Err(invalid("n_elements must be at least 1"));
    }
    fading.validate()?;
    pe.validate()?;
    let nf = n as f64;
    let h1 = alpha_mu_moment(1, fading);
    let h2 = alpha_mu_moment(2, fading);
    let h1_sq = h1 * h1;
    let psi_n = nf * (h2 * h2 - h1_sq * h1_sq);
    if !(psi_n > 0.0) {
        return Err(domain(format!("Ψ_N must be positive, got {psi_n}")));
    }
    let g_n = (nf * h1_sq).powi(2);
    let ln_b_n = -pe.phi / 2.0 * (2.0 * psi_n * pe.a0_sq()).ln()
        - (2.0 * std::f64::consts::PI.sqrt()).ln()
        - g_n / (2.0 * psi_n);
    let mean_h_ell_sq = nf * pe.phi * pe.a0_sq() * (h2 * h2 + (nf - 1.0) * h1_sq * h1_sq) / (pe.phi + 2.0);
    let mut warnings = Vec::new();
    if n < CLT_MIN_ELEMENTS {
        warnings.push(format!(
            "N = {n} is below {CLT_MIN_ELEMENTS}; the Gaussian approximation of the cascaded sum may be inaccurate"
        ));
    }
    Ok(LegitStats {
        n_elements: n,
        h1,
        h2,
        psi_n,
        g_n,
        b_n: ln_b_n.exp(),
        ln_b_n,
        mean_h_ell_sq,
        pe: *pe,
        warnings,
    })
}

impl LegitStats {
    /// 𝒢_N / Ψ_N, the squared signal-to-spread ratio of the cascaded sum.
    pub fn ratio(&self) -> f64 {
        self.g_n / self.psi_n
    }

    /// Second argument of Γ in 𝒯_k: z / (2Ψ_N A₀²).
    fn gamma_argument(&self, z: f64) -> f64 {
        z / (2.0 * self.psi_n * self.pe.a0_sq())
    }

    /// Gaussian part of the CDF, 1 − Q(·) written as Q(−·).
    fn gaussian_part(&self, z: f64) -> f64 {
        q_function(-(z.sqrt() / self.pe.a0 - self.g_n.sqrt()) / self.psi_n.sqrt())
    }

    /// F(0) = Q(√(𝒢_N/Ψ_N)).
    pub fn cdf_at_zero(&self) -> f64 {
        q_function(self.ratio().sqrt())
    }
}

/// Truncation index and tolerance of the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub k_max: usize,
    /// Target bound on the truncation error, also the clamping report threshold.
    pub tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { k_max: 0, tol: 1e-6 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.k_max > K_MAX_CAP {
            return Err(invalid(format!(
                "k_max must not exceed {K_MAX_CAP}, got {}",
                self.k_max
            )));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// ln 𝒯_k(z) for z > 0.
pub fn ln_series_term(k: usize, z: f64, s: &LegitStats) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain(format!("𝒯_k(z) requires z > 0, got {z}")));
    }
    let phi = s.pe.phi;
    let a = (k as f64 - phi + 1.0) / 2.0;
    let ln_gamma_part = ln_upper_incomplete_gamma(a, s.gamma_argument(z))?;
    Ok(term_prefix(k, z, s) + ln_gamma_part)
}

/// (k/2) ln(2𝒢/Ψ) + (φ/2) ln z − ln k!
fn term_prefix(k: usize, z: f64, s: &LegitStats) -> f64 {
    let kf = k as f64;
    kf / 2.0 * (2.0 * s.ratio()).ln() + s.pe.phi / 2.0 * z.ln() - ln_gamma(kf + 1.0)
}

/// 𝒯_k(z), without the ℬ_N factor. May overflow to infinity for large N;
/// [`ln_series_term`] is always finite.
pub fn series_term(k: usize, z: f64, s: &LegitStats) -> Result<f64> {
    Ok(ln_series_term(k, z, s)?.exp())
}

/// Evaluates ℬ_N 𝒯_k(z) for k = 0, 1, … in order.
///
/// Shapes (k − φ + 1)/2 step by one along each parity chain. Non-positive
/// shapes are evaluated directly; positive shapes use the upward recurrence
/// Γ(a + 1, x) = aΓ(a, x) + x^a e^(−x), whose two terms are then both
/// positive.
struct TermWalker<'a> {
    s: &'a LegitStats,
    z: f64,
    x: f64,
    ln_x: f64,
    k: usize,
    /// ln Γ for the previous two k, indexed by parity.
    last: [Option<f64>; 2],
}

impl<'a> TermWalker<'a> {
    fn new(s: &'a LegitStats, z: f64) -> Self {
        let x = s.gamma_argument(z);
        Self {
            s,
            z,
            x,
            ln_x: x.ln(),
            k: 0,
            last: [None, None],
        }
    }

    fn next_term(&mut self) -> f64 {
        let k = self.k;
        let a = (k as f64 - self.s.pe.phi + 1.0) / 2.0;
        let prev = self.last[k % 2];
        let ln_g = match prev {
            Some(lp) if a - 1.0 > 0.0 => {
                let lhs = (a - 1.0).ln() + lp;
                let rhs = (a - 1.0) * self.ln_x - self.x;
                let m = lhs.max(rhs);
                m + ((lhs - m).exp() + (rhs - m).exp()).ln()
            }
            _ => ln_upper_incomplete_gamma(a, self.x).expect("z > 0 checked by caller"),
        };
        self.last[k % 2] = Some(ln_g);
        self.k += 1;
        (self.s.ln_b_n + term_prefix(k, self.z, self.s) + ln_g).exp()
    }
}

/// ℬ_N Σ_{k=0}^{k_max} 𝒯_k(z), stopping early once the remaining terms are
/// below 1e-17 of the running CDF value and decreasing.
fn series_sum(z: f64, s: &LegitStats, k_max: usize, baseline: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let mut walker = TermWalker::new(s, z);
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut falling = 0;
    for _ in 0..=k_max {
        let t = walker.next_term();
        sum += t;
        if t < prev {
            falling += 1;
        } else {
            falling = 0;
        }
        prev = t;
        if falling >= 2 && t <= 1e-17 * (baseline + sum) {
            break;
        }
    }
    sum
}

/// ℬ_N Σ_{k=from}^{to} 𝒯_k(z), with every term evaluated (no early exit).
pub fn series_partial_sum(z: f64, s: &LegitStats, from: usize, to: usize) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain(format!("series requires z > 0, got {z}")));
    }
    let mut walker = TermWalker::new(s, z);
    let mut sum = 0.0;
    for k in 0..=to {
        let t = walker.next_term();
        if k >= from {
            sum += t;
        }
    }
    Ok(sum)
}

/// Value of the truncated CDF at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    /// Clamped to [0, 1].
    pub value: f64,
    /// The truncated series before clamping.
    pub raw: f64,
    /// True when clamping moved the value by more than the control tolerance.
    pub clamped: bool,
}

/// Truncated CDF of h_ℓ² at z ≥ 0.
///
/// ```
/// use thz_secrecy::channel::{AlphaMuParams, PointingErrorParams};
/// use thz_secrecy::legit::{cdf_h_ell_sq, compute_legit_stats, SeriesControl};
/// let fading = AlphaMuParams::new(2.0, 1.5, 1.5).unwrap();
/// let pe = PointingErrorParams::new(25.7404, 0.054).unwrap();
/// let s = compute_legit_stats(20, &fading, &pe).unwrap();
/// let ctrl = SeriesControl { k_max: 150, tol: 1e-6 };
/// let median = cdf_h_ell_sq(s.mean_h_ell_sq, &s, &ctrl).value;
/// assert!(median > 0.3 && median < 0.7);
/// ```
pub fn cdf_h_ell_sq(z: f64, s: &LegitStats, ctrl: &SeriesControl) -> CdfValue {
    let raw = if !(z > 0.0) {
        s.cdf_at_zero()
    } else if z.is_infinite() {
        1.0
    } else {
        let gauss = s.gaussian_part(z);
        gauss + series_sum(z, s, ctrl.k_max, gauss)
    };
    let value = raw.clamp(0.0, 1.0);
    CdfValue {
        value,
        raw,
        clamped: (value - raw).abs() > ctrl.tol,
    }
}

/// Truncated CDF without the clamping report.
pub(crate) fn cdf_value(z: f64, s: &LegitStats, k_max: usize) -> f64 {
    if !(z > 0.0) {
        return s.cdf_at_zero();
    }
    let gauss = s.gaussian_part(z);
    (gauss + series_sum(z, s, k_max, gauss)).clamp(0.0, 1.0)
}

/// Bound on the truncation error of the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBound {
    /// 𝒲_{K_max}.
    pub w: f64,
    /// Bound for z ≥ A₀²𝒢_N.
    pub eps_inside: f64,
    /// Bound for z < A₀²𝒢_N.
    pub eps_outside: f64,
}

impl TruncationBound {
    /// The regional bound that applies at z.
    pub fn at(&self, z: f64, s: &LegitStats) -> f64 {
        if z >= s.pe.a0_sq() * s.g_n {
            self.eps_inside
        } else {
            self.eps_outside
        }
    }
}

/// ln 𝒲_K.
pub fn ln_truncation_w(k_max: usize, s: &LegitStats) -> f64 {
    let r = s.ratio();
    let ln_half_inv = (1.0 / (2.0 * r)).ln();
    let kp1 = k_max + 1;
    let logs: Vec<f64> = (0..=kp1)
        .map(|i| {
            let fi = i as f64;
            fi / 2.0 * ln_half_inv - ln_gamma(fi / 2.0 + 1.0) - ln_gamma((kp1 - i) as f64 + 1.0)
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    kp1 as f64 * r.ln() + lse
}

/// 𝒲_{K_max} and the two regional error bounds.
pub fn truncation_bound(k_max: usize, s: &LegitStats) -> Result<TruncationBound> {
    let ln_w = ln_truncation_w(k_max, s);
    if ln_w + std::f64::consts::LN_2 > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "truncation bound exceeds f64::MAX at K_max = {k_max}"
        )));
    }
    let w = ln_w.exp();
    Ok(TruncationBound {
        w,
        eps_inside: w,
        eps_outside: 2.0 * w,
    })
}

/// Outcome of choosing a truncation index.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k_max: usize,
    /// 2𝒲 at the chosen index, infinite when it overflows.
    pub bound: f64,
    pub warning: Option<String>,
}

/// Smallest K_max ≤ [`K_MAX_CAP`] whose worst-case bound 2𝒲 is ≤ `tol`.
///
/// When no index qualifies the cap is returned along with a warning: the
/// bound is then only a guarantee of the analysis, and convergence of the
/// sum is instead ensured by evaluating terms until they are negligible.
pub fn select_k_max(tol: f64, s: &LegitStats) -> KSelection {
    let ln_tol = tol.ln();
    for k in 0..=K_MAX_CAP {
        let ln_bound = ln_truncation_w(k, s) + std::f64::consts::LN_2;
        if ln_bound <= ln_tol {
            return KSelection {
                k_max: k,
                bound: ln_bound.exp(),
                warning: None,
            };
        }
    }
    let ln_bound = ln_truncation_w(K_MAX_CAP, s) + std::f64::consts::LN_2;
    KSelection {
        k_max: K_MAX_CAP,
        bound: ln_bound.exp(),
        warning: Some(format!(
            "no K_max ≤ {K_MAX_CAP} brings the analytic truncation bound below {tol:e} \
             (𝒢/Ψ = {:.1}); using {K_MAX_CAP} terms with empirical stabilization",
            s.ratio()
        )),
    }
}

/// Φ(α, μ) and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorGrowth {
    pub phi_value: f64,
    pub d_alpha: f64,
    pub d_mu: f64,
}

/// Φ(α, μ) = Γ²(μ + 1/α) / (Γ(μ) Γ(μ + 2/α)) = ℋ₁²/ℋ₂ with its gradient.
///
/// 𝒢_N/Ψ_N = NΦ²/(1 − Φ²), so the truncation bound grows with Φ.
pub fn error_growth_diagnostic(fading: &AlphaMuParams) -> Result<ErrorGrowth> {
    fading.validate()?;
    let (a, m) = (fading.alpha, fading.mu);
    let one = m + 1.0 / a;
    let two = m + 2.0 / a;
    let phi_value = (2.0 * ln_gamma(one) - ln_gamma(m) - ln_gamma(two)).exp();
    let psi_one = digamma(one)?;
    let psi_two = digamma(two)?;
    let d_alpha = phi_value * 2.0 / (a * a) * (psi_two - psi_one);
    let d_mu = phi_value * (2.0 * psi_one - digamma(m)? - psi_two);
    Ok(ErrorGrowth {
        phi_value,
        d_alpha,
        d_mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate::{integrate_to_infinity, Tolerance};

    fn pe() -> PointingErrorParams {
        PointingErrorParams::new(25.7404, 0.054).unwrap()
    }

    fn stats(a: f64, m: f64, h: f64, n: usize) -> LegitStats {
        compute_legit_stats(n, &AlphaMuParams::new(a, m, h).unwrap(), &pe()).unwrap()
    }

    #[test]
    fn rayleigh_single_element() {
        let s = stats(2.0, 1.0, 1.0, 1);
        let pi = std::f64::consts::PI;
        assert!((s.h1 - pi.sqrt() / 2.0).abs() < 1e-15);
        assert!((s.h2 - 1.0).abs() < 1e-15);
        assert!((s.psi_n - (1.0 - pi * pi / 16.0)).abs() < 1e-14);
        assert!((s.g_n - pi * pi / 16.0).abs() < 1e-14);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn scaling_in_n() {
        let a = stats(1.7, 1.1, 1.0, 30);
        let b = stats(1.7, 1.1, 1.0, 60);
        assert!((b.psi_n / a.psi_n - 2.0).abs() < 1e-13);
        assert!((b.g_n / a.g_n - 4.0).abs() < 1e-13);
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn b_n_matches_definition() {
        let s = stats(2.0, 1.5, 1.5, 20);
        let p = s.pe;
        let direct = (2.0 * s.psi_n * p.a0_sq()).powf(-p.phi / 2.0)
            / (2.0 * std::f64::consts::PI.sqrt() * (s.g_n / (2.0 * s.psi_n)).exp());
        assert!(((s.b_n - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn zeroth_term_has_no_prefactor() {
        let s = stats(2.0, 1.5, 1.5, 20);
        let z = 0.4 * s.mean_h_ell_sq;
        let x = z / (2.0 * s.psi_n * s.pe.a0_sq());
        let want = (s.pe.phi / 2.0 * z.ln() + ln_upper_incomplete_gamma((1.0 - s.pe.phi) / 2.0, x).unwrap()).exp();
        assert!(((series_term(0, z, &s).unwrap() - want) / want).abs() < 1e-13);
        assert!(series_term(0, 0.0, &s).is_err());
    }

    #[test]
    fn term_matches_integral_form() {
        // 𝒯_k(z) = (2𝒢/Ψ)^(k/2) z^(φ/2) / k! ∫_{√z/A₀}^∞ 2 y^(k−φ) e^(−y²/(2Ψ)) (2Ψ)^((φ−k−1)/2) dy
        let s = stats(1.7, 1.1, 1.0, 60);
        let z = s.pe.a0_sq() * s.g_n;
        let k = 3usize;
        let phi = s.pe.phi;
        let lo = z.sqrt() / s.pe.a0;
        let integral = integrate_to_infinity(
            |y: f64| ((k as f64 - phi) * y.ln() - y * y / (2.0 * s.psi_n) + (lo * lo) / (2.0 * s.psi_n)).exp(),
            lo,
            s.psi_n.sqrt(),
            Tolerance {
                abs: 0.0,
                rel: 1e-12,
                max_intervals: 20_000,
            },
        )
        .unwrap()
        .value;
        let ln_want = (k as f64 / 2.0) * (2.0 * s.ratio()).ln() + phi / 2.0 * z.ln() - ln_gamma(k as f64 + 1.0)
            + std::f64::consts::LN_2
            + (phi - k as f64 - 1.0) / 2.0 * (2.0 * s.psi_n).ln()
            + integral.ln()
            - (lo * lo) / (2.0 * s.psi_n);
        let got = ln_series_term(k, z, &s).unwrap();
        assert!((got - ln_want).abs() < 1e-8, "{got} vs {ln_want}");
    }

    #[test]
    fn recurrence_walker_matches_direct_terms() {
        let s = stats(2.5, 1.5, 1.5, 40);
        for &frac in &[0.05, 0.5, 1.0, 2.0] {
            let z = frac * s.mean_h_ell_sq;
            let mut w = TermWalker::new(&s, z);
            for k in 0..120 {
                let t = w.next_term();
                let direct = (s.ln_b_n + ln_series_term(k, z, &s).unwrap()).exp();
                let tol = 1e-11 * direct.abs() + 1e-300;
                assert!((t - direct).abs() <= tol, "k={k} z={z}: {t} vs {direct}");
            }
        }
    }

    #[test]
    fn term_ratio_vanishes() {
        let s = stats(2.0, 1.5, 1.5, 20);
        let z = s.mean_h_ell_sq;
        let ratios: Vec<f64> = [50, 100, 200, 400, 800, 1600]
            .iter()
            .map(|&k| (ln_series_term(k + 1, z, &s).unwrap() - ln_series_term(k, z, &s).unwrap()).exp())
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(ratios[5] < 0.5, "{ratios:?}");
    }

    #[test]
    fn cdf_boundary_values() {
        let s = stats(2.0, 1.5, 1.5, 20);
        let ctrl = SeriesControl { k_max: 150, tol: 1e-6 };
        assert_eq!(cdf_h_ell_sq(0.0, &s, &ctrl).value, q_function(s.ratio().sqrt()));
        assert!((cdf_h_ell_sq(1e3 * s.mean_h_ell_sq, &s, &ctrl).value - 1.0).abs() < 1e-6);
        assert_eq!(cdf_h_ell_sq(f64::INFINITY, &s, &ctrl).value, 1.0);
    }

    #[test]
    fn cdf_is_nondecreasing() {
        for (a, m, n) in [(2.0, 1.5, 20), (2.5, 1.5, 40), (1.7, 1.1, 60)] {
            let s = stats(a, m, 1.5, n);
            let ctrl = SeriesControl { k_max: 150, tol: 1e-6 };
            let mut prev = 0.0;
            for i in 0..200 {
                let z = 3.0 * s.mean_h_ell_sq * i as f64 / 199.0;
                let v = cdf_h_ell_sq(z, &s, &ctrl).value;
                assert!(v >= prev - 1e-15, "({a},{m},{n}) z={z}");
                prev = v;
            }
        }
    }

    #[test]
    fn truncation_bound_closed_form_at_zero() {
        let s = stats(2.0, 1.5, 1.5, 20);
        let r = s.ratio();
        let want = r * (1.0 + (1.0 / (2.0 * r)).sqrt() / libm::tgamma(1.5));
        let b = truncation_bound(0, &s).unwrap();
        assert!(((b.w - want) / want).abs() < 1e-13);
        assert_eq!(b.eps_outside, 2.0 * b.w);
        assert_eq!(b.at(s.pe.a0_sq() * s.g_n, &s), b.w);
        assert_eq!(b.at(0.5 * s.pe.a0_sq() * s.g_n, &s), 2.0 * b.w);
    }

    #[test]
    fn truncation_bound_grows_with_ratio() {
        for k in [0, 3, 10] {
            let ws: Vec<f64> = [10, 20, 60]
                .iter()
                .map(|&n| truncation_bound(k, &stats(2.0, 1.5, 1.5, n)).unwrap().w)
                .collect();
            assert!(ws[0] < ws[1] && ws[1] < ws[2], "k={k}: {ws:?}");
        }
    }

    #[test]
    fn tails_respect_the_regional_bound() {
        let s = stats(2.0, 1.5, 1.5, 20);
        for k in [0usize, 5, 20, 60, 120] {
            let b = truncation_bound(k, &s).unwrap();
            for i in 1..=20 {
                let z = 3.0 * s.mean_h_ell_sq * i as f64 / 20.0;
                let tail = series_partial_sum(z, &s, k + 1, REFERENCE_TERMS).unwrap();
                assert!(tail.abs() <= b.at(z, &s), "k={k} z={z}: {tail} > {}", b.at(z, &s));
            }
        }
    }

    #[test]
    fn k_selection() {
        let s = stats(2.0, 1.5, 1.5, 2);
        assert_eq!(select_k_max(f64::INFINITY, &s).k_max, 0);
        let loose = select_k_max(1e-2, &s);
        let tight = select_k_max(1e-8, &s);
        assert!(tight.k_max >= loose.k_max);
        assert!(tight.warning.is_none() && tight.bound <= 1e-8);
        let big = stats(1.7, 1.1, 1.0, 60);
        let capped = select_k_max(1e-6, &big);
        assert_eq!(capped.k_max, K_MAX_CAP);
        assert!(capped.warning.is_some());
    }

    #[test]
    fn error_growth_reference_and_gradient() {
        let g = error_growth_diagnostic(&AlphaMuParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((g.phi_value - 0.5).abs() < 1e-14);
        for ai in 0..8 {
            for mi in 0..8 {
                let a = 0.5 + 0.5 * ai as f64;
                let m = 0.5 + 0.5 * mi as f64;
                let g = error_growth_diagnostic(&AlphaMuParams::new(a, m, 1.0).unwrap()).unwrap();
                assert!(g.d_alpha > 0.0 && g.d_mu > 0.0, "α={a} μ={m}");
                let phi = |a: f64, m: f64| {
                    error_growth_diagnostic(&AlphaMuParams::new(a, m, 1.0).unwrap())
                        .unwrap()
                        .phi_value
                };
                let h = 1e-5;
                let fa = (phi(a + h, m) - phi(a - h, m)) / (2.0 * h);
                let fm = (phi(a, m + h) - phi(a, m - h)) / (2.0 * h);
                assert!(((g.d_alpha - fa) / fa).abs() < 1e-6, "α={a} μ={m}");
                assert!(((g.d_mu - fm) / fm).abs() < 1e-6, "α={a} μ={m}");
            }
        }
    }
}
