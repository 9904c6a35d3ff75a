//! Analytic-versus-simulation checks for one scenario.

use rand::Rng;

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::eve::{compute_eve_stats, mean_h_e_sq, pdf_h_e_sq};
use crate::legit::{
    cdf_h_ell_sq, compute_legit_stats, select_k_max, series_partial_sum, truncation_bound, SeriesControl,
    REFERENCE_TERMS,
};
use crate::mc::{
    chunk_stream, empirical_sop, histogram_in, ks_distance, mean_with_stderr, simulate_gains, snr_pairs, EvePhase,
    McRun, MIN_ORACLE_TRIALS,
};
use crate::secrecy::{avg_snr, ip, ip_adaptive, sop, sop_adaptive};

/// KS bound between the CLT-based CDF of h_ℓ² and simulation.
pub const KS_BOUND: f64 = 0.02;

/// L1 bound between the eavesdropper density and a 200-bin histogram.
pub const L1_BOUND: f64 = 0.05;

/// Absolute floor of the SOP/IP agreement with simulation.
pub const MC_FLOOR: f64 = 0.02;

/// Random points per truncation-bound check.
const BOUND_POINTS: usize = 20;

/// Stream index of the truncation-bound points, clear of the trial chunks.
const BOUND_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// The measured quantity, in the units of `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

/// Runs every check for the scenario with `trials` simulated trials.
pub fn run_checks(sc: &Scenario, trials: usize, seed: u64) -> Result<Vec<Check>> {
    if trials < MIN_ORACLE_TRIALS {
        return Err(Error::InsufficientSamples {
            got: trials,
            need: MIN_ORACLE_TRIALS,
        });
    }
    let cfg = &sc.system;
    cfg.validate()?;
    let ls = compute_legit_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let es = compute_eve_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let k_max = if cfg.auto_k_max {
        select_k_max(cfg.series.tol, &ls).k_max
    } else {
        cfg.series.k_max
    };
    let mut checks = Vec::new();

    // Worst tail-to-bound ratio over random points; at most 1 when the bound holds.
    let mut rng = chunk_stream(seed, BOUND_STREAM);
    let mut worst: f64 = 0.0;
    if k_max < REFERENCE_TERMS {
        let bound = truncation_bound(k_max, &ls).ok();
        for _ in 0..BOUND_POINTS {
            let z = ls.mean_h_ell_sq * (0.01 + 2.99 * rng.random::<f64>());
            let tail = series_partial_sum(z, &ls, k_max + 1, REFERENCE_TERMS)?.abs();
            let ratio = bound.map_or(0.0, |b| tail / b.at(z, &ls));
            worst = worst.max(ratio);
        }
    }
    checks.push(Check::at_most("truncation_bound_ratio", worst, 1.0));

    let gains = simulate_gains(
        cfg.n_elements,
        &cfg.fading,
        &cfg.pe,
        &McRun::new(trials, seed),
        EvePhase::Uniform,
    )?;
    // The distribution check always uses the automatically selected index.
    let ctrl = SeriesControl {
        k_max: select_k_max(cfg.series.tol, &ls).k_max,
        tol: cfg.series.tol,
    };
    let ell: Vec<f64> = gains.iter().map(|g| g.h_ell_sq()).collect();
    let ks = ks_distance(&ell, |z| cdf_h_ell_sq(z, &ls, &ctrl).value)?;
    checks.push(Check::at_most("ks_cdf_h_ell_sq", ks, KS_BOUND));

    let eve: Vec<f64> = gains.iter().map(|g| g.h_eve_sq()).collect();
    let mut sorted = eve.clone();
    sorted.sort_by(f64::total_cmp);
    let upper = sorted[((sorted.len() - 1) as f64 * 0.999) as usize];
    let hist = histogram_in(&eve, 0.0, upper, 200)?;
    let l1 = hist.l1_distance(|z| pdf_h_e_sq(z, &es).unwrap_or(f64::NAN));
    checks.push(Check::at_most("l1_pdf_h_e_sq", l1, L1_BOUND));
    let m = mean_with_stderr(&eve)?;
    checks.push(Check::at_most(
        "mean_h_e_sq_sigmas",
        (m.point - mean_h_e_sq(&es)).abs() / m.std_err,
        3.0,
    ));

    let pairs = snr_pairs(&gains, cfg)?;
    let (snr_ell, snr_eve) = avg_snr(cfg)?;
    let m = mean_with_stderr(&pairs.iter().map(|p| p.0).collect::<Vec<_>>())?;
    checks.push(Check::at_most(
        "avg_snr_ell_sigmas",
        (m.point - snr_ell).abs() / m.std_err,
        3.0,
    ));
    let m = mean_with_stderr(&pairs.iter().map(|p| p.1).collect::<Vec<_>>())?;
    checks.push(Check::at_most(
        "avg_snr_eve_sigmas",
        (m.point - snr_eve).abs() / m.std_err,
        3.0,
    ));

    let analytic_sop = sop(cfg)?.value;
    let est = empirical_sop(&pairs, cfg.rs)?;
    checks.push(Check::at_most(
        "sop_vs_mc",
        (analytic_sop - est.point).abs(),
        MC_FLOOR.max(3.0 * est.std_err),
    ));
    let analytic_ip = ip(cfg)?.value;
    let est = empirical_sop(&pairs, 0.0)?;
    checks.push(Check::at_most(
        "ip_vs_mc",
        (analytic_ip - est.point).abs(),
        MC_FLOOR.max(3.0 * est.std_err),
    ));

    let reference = if cfg.rs > 0.0 { sop_adaptive(cfg)? } else { analytic_sop };
    checks.push(Check::at_most(
        "sop_vs_adaptive",
        (analytic_sop - reference).abs(),
        sc.tol,
    ));
    checks.push(Check::at_most(
        "ip_vs_adaptive",
        (analytic_ip - ip_adaptive(cfg)?).abs(),
        sc.tol,
    ));
    let zero_rate = sop(&cfg.with_rs(0.0))?.value;
    checks.push(Check::at_most(
        "sop_zero_rate_minus_ip",
        (zero_rate - analytic_ip).abs(),
        0.0,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::far_user_scenario;

    #[test]
    fn too_few_trials() {
        let sc = far_user_scenario();
        assert!(matches!(
            run_checks(&sc, 9_999, 1),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn impossible_tolerance_fails_the_quadrature_checks() {
        let mut sc = far_user_scenario();
        sc.tol = 1e-30;
        let checks = run_checks(&sc, 20_000, 1).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"sop_vs_adaptive"), "{failed:?}");
        assert!(checks.iter().any(|c| c.name == "truncation_bound_ratio" && c.passed));
        assert!(checks.iter().any(|c| c.name == "sop_zero_rate_minus_ip" && c.passed));
    }
}
