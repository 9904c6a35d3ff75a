//! Small-scale fading, pointing-error and path-gain models.

use crate::error::{domain, invalid, Result};
use crate::specfun::{ln_gamma, lower_incomplete_gamma_regularized};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Shape parameters of an α-μ distributed amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaMuParams {
    pub alpha: f64,
    pub mu: f64,
    /// α-root mean value h̄, so that E[Y^α] = h̄^α.
    pub h_bar: f64,
}

impl AlphaMuParams {
    pub fn new(alpha: f64, mu: f64, h_bar: f64) -> Result<Self> {
        let p = Self { alpha, mu, h_bar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("mu", self.mu), ("h_bar", self.h_bar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    fn ln_normalizer(&self) -> f64 {
        self.alpha.ln() + self.mu * self.mu.ln() - self.alpha * self.mu * self.h_bar.ln() - ln_gamma(self.mu)
    }
}

/// Pointing-error severity φ and zero-misalignment collected fraction A₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointingErrorParams {
    pub phi: f64,
    pub a0: f64,
}

impl PointingErrorParams {
    pub fn new(phi: f64, a0: f64) -> Result<Self> {
        let p = Self { phi, a0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 2.0 && self.phi.is_finite()) {
            return Err(invalid(format!("phi must exceed 2, got {}", self.phi)));
        }
        if !(self.a0 > 0.0 && self.a0 <= 1.0) {
            return Err(invalid(format!("a0 must lie in (0, 1], got {}", self.a0)));
        }
        Ok(())
    }

    /// A₀², the upper end of the support of h_p².
    pub fn a0_sq(&self) -> f64 {
        self.a0 * self.a0
    }
}

/// Geometry and antenna parameters of one source → RIS → node link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub frequency_hz: f64,
    /// Linear transmit antenna gain.
    pub gain_tx: f64,
    /// Linear receive antenna gain.
    pub gain_rx: f64,
    /// Source to RIS distance, m.
    pub d1_m: f64,
    /// RIS to node distance, m.
    pub dr_m: f64,
    /// Molecular absorption coefficient, 1/m.
    pub kappa_a: f64,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("frequency_hz", self.frequency_hz),
            ("gain_tx", self.gain_tx),
            ("gain_rx", self.gain_rx),
            ("d1_m", self.d1_m),
            ("dr_m", self.dr_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.kappa_a >= 0.0 && self.kappa_a.is_finite()) {
            return Err(invalid(format!("kappa_a must be nonnegative, got {}", self.kappa_a)));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    /// Total path length d₁ + d_r.
    pub fn distance(&self) -> f64 {
        self.d1_m + self.dr_m
    }
}

/// Density of an α-μ amplitude at z ≥ 0.
///
/// At the origin the density is 0 for αμ > 1, finite for αμ = 1 and
/// unbounded (a domain error) for αμ < 1.
pub fn alpha_mu_pdf(z: f64, p: &AlphaMuParams) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(domain(format!("α-μ density requires z ≥ 0, got {z}")));
    }
    let am = p.alpha * p.mu;
    if z == 0.0 {
        return if am > 1.0 {
            Ok(0.0)
        } else if am == 1.0 {
            Ok(p.ln_normalizer().exp())
        } else {
            Err(domain("α-μ density is unbounded at 0 when αμ < 1"))
        };
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    let ln = p.ln_normalizer() + (am - 1.0) * z.ln() - p.mu * (z / p.h_bar).powf(p.alpha);
    Ok(ln.exp())
}

/// Distribution function P(μ, μ (z/h̄)^α) of an α-μ amplitude.
pub fn alpha_mu_cdf(z: f64, p: &AlphaMuParams) -> f64 {
    if !(z > 0.0) {
        return 0.0;
    }
    let x = p.mu * (z / p.h_bar).powf(p.alpha);
    lower_incomplete_gamma_regularized(p.mu, x).expect("μ > 0 and x ≥ 0 by construction")
}

/// The i-th raw moment ℋ_i = Γ(μ + i/α) h̄^i / (Γ(μ) μ^(i/α)).
///
/// ```
/// use thz_secrecy::channel::{alpha_mu_moment, AlphaMuParams};
/// let rayleigh = AlphaMuParams::new(2.0, 1.0, 1.0).unwrap();
/// assert!((alpha_mu_moment(2, &rayleigh) - 1.0).abs() < 1e-14);
/// ```
pub fn alpha_mu_moment(i: u32, p: &AlphaMuParams) -> f64 {
    let r = i as f64 / p.alpha;
    (ln_gamma(p.mu + r) - ln_gamma(p.mu) - r * p.mu.ln() + i as f64 * p.h_bar.ln()).exp()
}

/// Density of the pointing-error power fraction h_p², supported on [0, A₀²].
pub fn pe_pdf(z: f64, p: &PointingErrorParams) -> f64 {
    if !(z >= 0.0) || z > p.a0_sq() {
        return 0.0;
    }
    if z == 0.0 {
        // φ > 2 makes the exponent φ/2 − 1 positive.
        return 0.0;
    }
    p.phi / 2.0 * ((p.phi / 2.0 - 1.0) * z.ln() - p.phi * p.a0.ln()).exp()
}

/// Distribution function z^(φ/2) / A₀^φ of h_p², clipped to [0, 1].
pub fn pe_cdf(z: f64, p: &PointingErrorParams) -> f64 {
    if !(z > 0.0) {
        0.0
    } else if z >= p.a0_sq() {
        1.0
    } else {
        (p.phi / 2.0 * (z / p.a0_sq()).ln()).exp()
    }
}

/// E[h_p²] = φ A₀² / (φ + 2).
pub fn pe_mean_sq(p: &PointingErrorParams) -> f64 {
    p.phi * p.a0_sq() / (p.phi + 2.0)
}

/// Deterministic path gain h_l = λ√(G_t G_r)/(4π d) · exp(−κ_a d / 2).
///
/// ```
/// use thz_secrecy::channel::{path_gain, LinkGeometry};
/// let g = LinkGeometry {
///     frequency_hz: 300e9, gain_tx: 1e4, gain_rx: 1e4,
///     d1_m: 5.0, dr_m: 20.0, kappa_a: 3.18e-4,
/// };
/// assert!((path_gain(&g) - 3.1682e-2).abs() < 1e-6);
/// ```
pub fn path_gain(g: &LinkGeometry) -> f64 {
    let d = g.distance();
    let friis = g.wavelength() * (g.gain_tx * g.gain_rx).sqrt() / (4.0 * std::f64::consts::PI * d);
    friis * (-g.kappa_a * d / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate::{integrate, integrate_to_infinity, Tolerance};
    use proptest::prelude::*;

    fn section_v_pe() -> PointingErrorParams {
        PointingErrorParams::new(25.7404, 0.054).unwrap()
    }

    #[test]
    fn rayleigh_special_case() {
        let p = AlphaMuParams::new(2.0, 1.0, 1.0).unwrap();
        assert!((alpha_mu_pdf(1.0, &p).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((alpha_mu_cdf(1.0, &p) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((alpha_mu_moment(1, &p) - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn density_at_origin() {
        let p = AlphaMuParams::new(2.0, 1.5, 1.5).unwrap();
        assert_eq!(alpha_mu_pdf(0.0, &p).unwrap(), 0.0);
        let exp = AlphaMuParams::new(1.0, 1.0, 2.0).unwrap();
        assert!((alpha_mu_pdf(0.0, &exp).unwrap() - 0.5).abs() < 1e-15);
        let spiky = AlphaMuParams::new(0.5, 1.0, 1.0).unwrap();
        assert!(alpha_mu_pdf(0.0, &spiky).is_err());
        assert_eq!(alpha_mu_cdf(0.0, &p), 0.0);
        assert!((alpha_mu_cdf(1e6, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_is_normalized() {
        for (a, m, h) in [(2.0, 1.5, 1.5), (2.5, 1.5, 1.5), (1.7, 1.1, 1.0), (3.0, 0.7, 0.4)] {
            let p = AlphaMuParams::new(a, m, h).unwrap();
            let total = integrate_to_infinity(|z| alpha_mu_pdf(z, &p).unwrap_or(0.0), 0.0, h, Tolerance::default())
                .unwrap()
                .value;
            assert!((total - 1.0).abs() < 1e-8, "{a},{m},{h}: {total}");
        }
    }

    #[test]
    fn moments_match_integrals() {
        let p = AlphaMuParams::new(1.7, 1.1, 1.0).unwrap();
        for i in 1..=4 {
            let m = integrate_to_infinity(
                |z| z.powi(i as i32) * alpha_mu_pdf(z, &p).unwrap_or(0.0),
                0.0,
                1.0,
                Tolerance::default(),
            )
            .unwrap()
            .value;
            assert!(((alpha_mu_moment(i, &p) - m) / m).abs() < 1e-8);
        }
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        let p = AlphaMuParams::new(2.5, 1.5, 1.5).unwrap();
        for i in 1..50 {
            let z = i as f64 * 0.06;
            let h = 1e-6 * z;
            let fd = (alpha_mu_cdf(z + h, &p) - alpha_mu_cdf(z - h, &p)) / (2.0 * h);
            let pdf = alpha_mu_pdf(z, &p).unwrap();
            assert!(((fd - pdf) / pdf).abs() < 1e-5, "z={z}");
        }
    }

    #[test]
    fn pointing_error_law() {
        let p = section_v_pe();
        assert_eq!(pe_cdf(p.a0_sq(), &p), 1.0);
        let median = p.a0_sq() / 2f64.powf(2.0 / p.phi);
        assert!((pe_cdf(median, &p) - 0.5).abs() < 1e-14);
        let mass = integrate(|z| pe_pdf(z, &p), 0.0, p.a0_sq(), Tolerance::default())
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((pe_mean_sq(&p) - 2.705_765_107_929_23e-3).abs() < 1e-16);
        let sharp = PointingErrorParams::new(1e9, 0.3).unwrap();
        assert!((pe_mean_sq(&sharp) - 0.09).abs() < 1e-9);
        assert_eq!(pe_pdf(-1.0, &p), 0.0);
        assert_eq!(pe_pdf(1.0, &p), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PointingErrorParams::new(2.0, 0.5).is_err());
        assert!(PointingErrorParams::new(3.0, 1.5).is_err());
        assert!(AlphaMuParams::new(0.0, 1.0, 1.0).is_err());
        let g = LinkGeometry {
            frequency_hz: 1.0,
            gain_tx: 1.0,
            gain_rx: 1.0,
            d1_m: 1.0,
            dr_m: 1.0,
            kappa_a: -1.0,
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn path_gain_reference_points() {
        let lambda = SPEED_OF_LIGHT / 300e9;
        let unit = LinkGeometry {
            frequency_hz: 300e9,
            gain_tx: 1.0,
            gain_rx: 1.0,
            d1_m: lambda / (8.0 * std::f64::consts::PI),
            dr_m: lambda / (8.0 * std::f64::consts::PI),
            kappa_a: 0.0,
        };
        assert!((path_gain(&unit) - 1.0).abs() < 1e-14);
        let sec_v = LinkGeometry {
            frequency_hz: 300e9,
            gain_tx: 1e4,
            gain_rx: 1e4,
            d1_m: 5.0,
            dr_m: 20.0,
            kappa_a: 3.18e-4,
        };
        assert!((sec_v.wavelength() - 9.9931e-4).abs() < 1e-8);
        assert!((path_gain(&sec_v) - 3.1682e-2).abs() < 1e-6);
        let doubled = LinkGeometry {
            d1_m: 10.0,
            dr_m: 40.0,
            kappa_a: 0.0,
            ..sec_v
        };
        let base = LinkGeometry { kappa_a: 0.0, ..sec_v };
        assert!((path_gain(&doubled) * 2.0 - path_gain(&base)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn jensen_gap_is_strict(alpha in 0.3f64..6.0, mu in 0.2f64..8.0, h in 0.1f64..3.0) {
            let p = AlphaMuParams::new(alpha, mu, h).unwrap();
            let h1 = alpha_mu_moment(1, &p);
            let h2 = alpha_mu_moment(2, &p);
            prop_assert!(h1 * h1 < h2);
        }

        #[test]
        fn path_gain_decreases_with_distance(d1 in 0.5f64..50.0, dr in 0.5f64..50.0, k in 0.0f64..0.05, dd in 0.01f64..5.0) {
            let g = LinkGeometry { frequency_hz: 300e9, gain_tx: 1e4, gain_rx: 1e4, d1_m: d1, dr_m: dr, kappa_a: k };
            let base = path_gain(&g);
            let farther_src = LinkGeometry { d1_m: d1 + dd, ..g };
            let farther_node = LinkGeometry { dr_m: dr + dd, ..g };
            let lossier = LinkGeometry { kappa_a: k + 1e-3, ..g };
            prop_assert!(path_gain(&farther_src) < base);
            prop_assert!(path_gain(&farther_node) < base);
            prop_assert!(path_gain(&lossier) < base);
        }
    }
}
