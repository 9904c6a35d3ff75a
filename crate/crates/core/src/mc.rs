//! Monte-Carlo simulation of the end-to-end gains and SNRs.
//!
//! Trials are split into chunks of `chunk_size`; chunk `c` draws from a
//! ChaCha8 stream keyed by (seed, c), so results do not depend on how the
//! chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::channel::{path_gain, AlphaMuParams, PointingErrorParams};
use crate::error::{invalid, Error, Result};
use crate::secrecy::SystemConfig;

/// Fewest trials accepted for an estimate used as an oracle.
pub const MIN_ORACLE_TRIALS: usize = 10_000;

pub const DEFAULT_CHUNK_SIZE: usize = 4096;

/// Trial count, seed and chunking of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McRun {
    pub n_trials: usize,
    pub seed: u64,
    pub chunk_size: usize,
}

impl McRun {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_trials == 0 || self.chunk_size == 0 {
            return Err(invalid("n_trials and chunk_size must be positive"));
        }
        Ok(())
    }

    fn n_chunks(&self) -> usize {
        self.n_trials.div_ceil(self.chunk_size)
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub point: f64,
    pub std_err: f64,
    pub n_trials: usize,
}

/// Phases φ_n of the eavesdropper's cascaded terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvePhase {
    /// Independent and uniform on [0, 2π).
    #[default]
    Uniform,
    /// All zero, so the eavesdropper sum adds coherently.
    Zero,
}

/// The random stream of chunk `chunk` under `seed`.
pub fn chunk_stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Draws from the α-μ law as h̄ (G/μ)^(1/α) with G ~ Gamma(μ, 1).
pub fn sample_alpha_mu<R: Rng + ?Sized>(n: usize, p: &AlphaMuParams, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = AlphaMuSampler::new(p)?;
    Ok((0..n).map(|_| sampler.draw(rng)).collect())
}

/// Draws of h_p² = A₀² U^(2/φ), U uniform on (0, 1].
pub fn sample_pe_sq<R: Rng + ?Sized>(n: usize, p: &PointingErrorParams, rng: &mut R) -> Result<Vec<f64>> {
    p.validate()?;
    Ok((0..n).map(|_| draw_pe_sq(p, rng)).collect())
}

struct AlphaMuSampler {
    gamma: Gamma<f64>,
    inv_mu: f64,
    inv_alpha: f64,
    h_bar: f64,
}

impl AlphaMuSampler {
    fn new(p: &AlphaMuParams) -> Result<Self> {
        p.validate()?;
        let gamma = Gamma::new(p.mu, 1.0).map_err(|e| invalid(format!("gamma sampler: {e}")))?;
        Ok(Self {
            gamma,
            inv_mu: 1.0 / p.mu,
            inv_alpha: 1.0 / p.alpha,
            h_bar: p.h_bar,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.h_bar * (self.gamma.sample(rng) * self.inv_mu).powf(self.inv_alpha)
    }
}

fn draw_pe_sq<R: Rng + ?Sized>(p: &PointingErrorParams, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    p.a0_sq() * u.powf(2.0 / p.phi)
}

/// Geometry-free gains of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    /// h_{f,ℓ}² = (Σ|h_n||g_{n,ℓ}|)².
    pub hf_ell_sq: f64,
    /// |h_{f,e}|², from the in-phase and quadrature sums.
    pub hf_eve_sq: f64,
    pub hp_ell_sq: f64,
    pub hp_eve_sq: f64,
}

impl GainSample {
    /// h_ℓ² = h_{f,ℓ}² h_{p,ℓ}².
    pub fn h_ell_sq(&self) -> f64 {
        self.hf_ell_sq * self.hp_ell_sq
    }

    /// |h_e|² = |h_{f,e}|² h_{p,e}².
    pub fn h_eve_sq(&self) -> f64 {
        self.hf_eve_sq * self.hp_eve_sq
    }
}

/// Simulates `run.n_trials` trials of the cascaded gains.
///
/// Per trial and element the draws are |h_n|, |g_{n,ℓ}|, |g_{n,e}| and φ_n,
/// in that order, followed by one pointing-error draw per receiver. Output
/// order follows the trial index.
pub fn simulate_gains(
    n_elements: usize,
    fading: &AlphaMuParams,
    pe: &PointingErrorParams,
    run: &McRun,
    phase: EvePhase,
) -> Result<Vec<GainSample>> {
    run.validate()?;
    if n_elements == 0 {
        return Err(invalid("n_elements must be at least 1"));
    }
    pe.validate()?;
    let sampler = AlphaMuSampler::new(fading)?;
    let chunks: Vec<Vec<GainSample>> = (0..run.n_chunks())
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_stream(run.seed, c as u64);
            let len = run.chunk_size.min(run.n_trials - c * run.chunk_size);
            (0..len)
                .map(|_| one_trial(n_elements, &sampler, pe, phase, &mut rng))
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

fn one_trial(
    n_elements: usize,
    sampler: &AlphaMuSampler,
    pe: &PointingErrorParams,
    phase: EvePhase,
    rng: &mut ChaCha8Rng,
) -> GainSample {
    let mut ell = 0.0;
    let mut re = 0.0;
    let mut im = 0.0;
    for _ in 0..n_elements {
        let h = sampler.draw(rng);
        let g_ell = sampler.draw(rng);
        let g_eve = sampler.draw(rng);
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        ell += h * g_ell;
        let amp = h * g_eve;
        match phase {
            EvePhase::Uniform => {
                let (s, c) = theta.sin_cos();
                re += amp * c;
                im += amp * s;
            }
            EvePhase::Zero => re += amp,
        }
    }
    GainSample {
        hf_ell_sq: ell * ell,
        hf_eve_sq: re * re + im * im,
        hp_ell_sq: draw_pe_sq(pe, rng),
        hp_eve_sq: draw_pe_sq(pe, rng),
    }
}

/// (γ_ℓ, γ_e) for each gain sample under the configuration's link budget.
pub fn snr_pairs(gains: &[GainSample], cfg: &SystemConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let ell = cfg.snr_tx_ell * path_gain(&cfg.geom_ell).powi(2);
    let eve = cfg.snr_tx_eve * path_gain(&cfg.geom_eve).powi(2);
    Ok(gains.iter().map(|g| (ell * g.h_ell_sq(), eve * g.h_eve_sq())).collect())
}

/// Simulates (γ_ℓ, γ_e) pairs for a configuration.
pub fn simulate_link(cfg: &SystemConfig, run: &McRun) -> Result<Vec<(f64, f64)>> {
    let gains = simulate_gains(cfg.n_elements, &cfg.fading, &cfg.pe, run, EvePhase::Uniform)?;
    snr_pairs(&gains, cfg)
}

/// Estimate of Pr(γ_ℓ ≤ 2^R_s (1 + γ_e) − 1).
///
/// ```
/// use thz_secrecy::mc::empirical_sop;
/// let pairs = vec![(2.0, 1.0); 10_000];
/// assert_eq!(empirical_sop(&pairs, 0.0).unwrap().point, 0.0);
/// assert_eq!(empirical_sop(&pairs, 10.0).unwrap().point, 1.0);
/// ```
pub fn empirical_sop(samples: &[(f64, f64)], rs: f64) -> Result<McEstimate> {
    if samples.len() < MIN_ORACLE_TRIALS {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            need: MIN_ORACLE_TRIALS,
        });
    }
    if !(rs >= 0.0) {
        return Err(invalid(format!("rs must be nonnegative, got {rs}")));
    }
    let two_rs = rs.exp2();
    let offset = (rs * std::f64::consts::LN_2).exp_m1();
    let hits = samples
        .iter()
        .filter(|(ell, eve)| *ell <= two_rs * eve + offset)
        .count();
    Ok(proportion(hits, samples.len()))
}

fn proportion(hits: usize, n: usize) -> McEstimate {
    let point = hits as f64 / n as f64;
    McEstimate {
        point,
        std_err: (point * (1.0 - point) / n as f64).sqrt(),
        n_trials: n,
    }
}

/// Sample mean and its standard error.
pub fn mean_with_stderr(samples: &[f64]) -> Result<McEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("mean of an empty sample"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        point: mean,
        std_err: (var / n).sqrt(),
        n_trials: samples.len(),
    })
}

/// Fraction of samples ≤ each grid point; the grid must be sorted.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical CDF of an empty sample"));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(invalid("grid must be sorted"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| sorted.partition_point(|&s| s <= x) as f64 / n)
        .collect())
}

/// A density-normalized histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// n_bins + 1 edges.
    pub edges: Vec<f64>,
    /// Count / (bin width · total count).
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Σ |density_i − pdf(mid_i)| width_i.
    pub fn l1_distance(&self, pdf: impl Fn(f64) -> f64) -> f64 {
        (0..self.density.len())
            .map(|i| (self.density[i] - pdf(self.midpoint(i))).abs() * self.width(i))
            .sum()
    }
}

/// Histogram over the sample range.
pub fn empirical_pdf_hist(samples: &[f64], n_bins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("histogram of an empty sample"));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let hi = if hi > lo { hi } else { lo + 1.0 };
    histogram_in(samples, lo, hi, n_bins)
}

/// Histogram over [lo, hi]; samples outside count toward the total only.
pub fn histogram_in(samples: &[f64], lo: f64, hi: f64, n_bins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("histogram of an empty sample"));
    }
    if n_bins == 0 || !(lo < hi) {
        return Err(invalid(format!(
            "need n_bins > 0 and lo < hi, got {n_bins} bins on [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in samples {
        if x >= lo && x <= hi {
            let i = (((x - lo) / width) as usize).min(n_bins - 1);
            counts[i] += 1;
        }
    }
    let edges = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    let total = samples.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (width * total)).collect();
    Ok(Histogram { edges, density })
}

/// Kolmogorov–Smirnov distance sup |F_n − F| between a sample and a CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64 + Sync) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("KS distance of an empty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .reduce(|| 0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{alpha_mu_cdf, alpha_mu_moment, pe_cdf, pe_mean_sq};

    fn pe() -> PointingErrorParams {
        PointingErrorParams::new(25.7404, 0.054).unwrap()
    }

    #[test]
    fn rayleigh_power_has_unit_mean() {
        let p = AlphaMuParams::new(2.0, 1.0, 1.0).unwrap();
        let y = sample_alpha_mu(1_000_000, &p, &mut chunk_stream(1, 0)).unwrap();
        let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
        let m = mean_with_stderr(&sq).unwrap();
        assert!((m.point - 1.0).abs() < 3.0 * m.std_err, "{m:?}");
    }

    #[test]
    fn alpha_mu_moments_and_distribution() {
        for (alpha, mu) in [(1.7, 1.1), (2.5, 1.5), (3.0, 0.6)] {
            let p = AlphaMuParams::new(alpha, mu, 1.5).unwrap();
            let y = sample_alpha_mu(1_000_000, &p, &mut chunk_stream(2, 0)).unwrap();
            for i in [1, 2] {
                let pow: Vec<f64> = y.iter().map(|v| v.powi(i as i32)).collect();
                let m = mean_with_stderr(&pow).unwrap();
                assert!(
                    (m.point - alpha_mu_moment(i, &p)).abs() < 3.0 * m.std_err,
                    "α={alpha} i={i}"
                );
            }
            let ks = ks_distance(&y, |z| alpha_mu_cdf(z, &p)).unwrap();
            assert!(ks <= 0.002, "α={alpha}: {ks}");
        }
    }

    #[test]
    fn pointing_error_draws() {
        let p = pe();
        let x = sample_pe_sq(1_000_000, &p, &mut chunk_stream(3, 0)).unwrap();
        assert!(x.iter().all(|&v| (0.0..=p.a0_sq()).contains(&v)));
        let m = mean_with_stderr(&x).unwrap();
        assert!((m.point - pe_mean_sq(&p)).abs() < 3.0 * m.std_err);
        assert!(ks_distance(&x, |z| pe_cdf(z, &p)).unwrap() <= 0.002);
    }

    #[test]
    fn chunking_does_not_change_the_draws() {
        let f = AlphaMuParams::new(1.7, 1.1, 1.0).unwrap();
        let run = McRun {
            n_trials: 10_000,
            seed: 9,
            chunk_size: 1000,
        };
        let a = simulate_gains(4, &f, &pe(), &run, EvePhase::Uniform).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_gains(4, &f, &pe(), &run, EvePhase::Uniform).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 10_000);
        // a ragged final chunk
        let run = McRun {
            n_trials: 2_500,
            seed: 9,
            chunk_size: 1000,
        };
        let c = simulate_gains(4, &f, &pe(), &run, EvePhase::Uniform).unwrap();
        assert_eq!(&c[..], &a[..2_500]);
    }

    #[test]
    fn single_element_without_phase_is_symmetric() {
        let f = AlphaMuParams::new(1.7, 1.1, 1.0).unwrap();
        let run = McRun::new(200_000, 4);
        let g = simulate_gains(1, &f, &pe(), &run, EvePhase::Zero).unwrap();
        let ell: Vec<f64> = g.iter().map(|s| s.h_ell_sq()).collect();
        let eve: Vec<f64> = g.iter().map(|s| s.h_eve_sq()).collect();
        let grid: Vec<f64> = (1..50).map(|i| i as f64 * 2e-4).collect();
        let a = empirical_cdf(&ell, &grid).unwrap();
        let b = empirical_cdf(&eve, &grid).unwrap();
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
        assert!(g.iter().all(|s| s.hf_eve_sq >= 0.0 && s.hf_ell_sq.is_finite()));
    }

    #[test]
    fn sop_estimate_edges() {
        let pairs = vec![(3.0, 1.0); 20_000];
        let e = empirical_sop(&pairs, 0.0).unwrap();
        assert_eq!((e.point, e.std_err), (0.0, 0.0));
        assert_eq!(empirical_sop(&pairs, 50.0).unwrap().point, 1.0);
        assert!(matches!(
            empirical_sop(&pairs[..9_999], 0.0),
            Err(Error::InsufficientSamples {
                got: 9_999,
                need: 10_000
            })
        ));
        let mut mixed = vec![(3.0, 1.0); 10_000];
        mixed.extend(vec![(1.0, 3.0); 30_000]);
        let e = empirical_sop(&mixed, 0.0).unwrap();
        assert_eq!(e.point, 0.75);
        assert!((e.std_err - (0.75f64 * 0.25 / 40_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empirical_cdf_and_histogram() {
        assert_eq!(empirical_cdf(&[2.0], &[1.0, 3.0]).unwrap(), vec![0.0, 1.0]);
        assert!(empirical_cdf(&[], &[1.0]).is_err());
        assert!(empirical_cdf(&[1.0], &[2.0, 1.0]).is_err());
        let x = sample_pe_sq(50_000, &pe(), &mut chunk_stream(5, 0)).unwrap();
        let h = empirical_pdf_hist(&x, 37).unwrap();
        let mass: f64 = (0..37).map(|i| h.density[i] * h.width(i)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(empirical_pdf_hist(&[], 5).is_err());
        let h = histogram_in(&[0.5, 1.5, 9.0, 0.25], 0.0, 2.0, 2).unwrap();
        assert_eq!(h.density, vec![0.5, 0.25]);
    }

    #[test]
    fn ks_of_a_perfect_grid() {
        let n = 1000;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&x, |z| z).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
