//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed validation, 2 configuration or usage
//! error, 3 parameter or numerical error, 4 too few simulation trials.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::channel::db_to_linear;
use crate::config::{default_scenario, load_config, ConfigError, Scenario};
use crate::error::Error;
use crate::eve::{compute_eve_stats, pdf_h_e_sq};
use crate::legit::{cdf_h_ell_sq, compute_legit_stats, select_k_max, SeriesControl};
use crate::mc::{empirical_sop, simulate_gains, snr_pairs, EvePhase, McRun, MIN_ORACLE_TRIALS};
use crate::secrecy::{avg_snr, ip, sop, sop_asymptotic, SystemConfig};
use crate::validate::run_checks;

#[derive(Debug, Parser)]
#[command(name = "thz-secrecy", version, about = "Secrecy outage of RIS-aided THz links")]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CDF of h_ℓ² and density of |h_e|² on a log grid.
    Stats(Common),
    /// SOP, IP and the asymptotic SOP across a parameter sweep.
    SopSweep(SweepArgs),
    /// Checks the analytic results against simulation.
    Validate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file; the built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Secrecy rate in bits/s/Hz.
    #[arg(long)]
    pub rs: Option<f64>,
    /// Series truncation index.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Simpson subinterval count.
    #[arg(long)]
    pub simpson: Option<usize>,
    /// Gauss–Laguerre node count.
    #[arg(long)]
    pub laguerre: Option<usize>,
    /// Simulated trials, at least 10000.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// VAR:START:STOP:STEPS with VAR one of d_r_eve, n_elements, snr_db, rs.
    #[arg(long)]
    pub sweep: SweepSpec,
    /// Add simulated SOP columns.
    #[arg(long, overrides_with = "no_mc")]
    pub mc: bool,
    /// Analytic columns only (the default).
    #[arg(long = "no-mc", overrides_with = "mc")]
    pub no_mc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    DREve,
    NElements,
    SnrDb,
    Rs,
}

impl SweepVar {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "d_r_eve" => Some(Self::DREve),
            "n_elements" => Some(Self::NElements),
            "snr_db" => Some(Self::SnrDb),
            "rs" => Some(Self::Rs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [var, start, stop, steps] = parts[..] else {
            return Err(format!("expected VAR:START:STOP:STEPS, got `{s}`"));
        };
        let variable = SweepVar::parse(var)
            .ok_or_else(|| format!("unknown sweep variable `{var}` (d_r_eve, n_elements, snr_db, rs)"))?;
        let start: f64 = start.parse().map_err(|_| format!("bad start `{start}`"))?;
        let stop: f64 = stop.parse().map_err(|_| format!("bad stop `{stop}`"))?;
        let steps: usize = steps.parse().map_err(|_| format!("bad step count `{steps}`"))?;
        if !(start < stop) || steps < 2 {
            return Err("sweep needs START < STOP and STEPS ≥ 2".into());
        }
        Ok(Self {
            variable,
            start,
            stop,
            steps,
        })
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Usage(String),
    Model(Error),
    Output(std::io::Error),
    ChecksFailed(Vec<&'static str>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Config(_) | CliError::Usage(_) | CliError::Output(_) => 2,
            CliError::Model(Error::InsufficientSamples { .. }) => 4,
            CliError::Model(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "output: {e}"),
            CliError::ChecksFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

/// C `%.9e`: nine fraction digits and an exponent of at least two digits.
///
/// ```
/// use thz_secrecy::cli::format_sci;
/// assert_eq!(format_sci(1.23456789e-3), "1.234567890e-03");
/// assert_eq!(format_sci(-25.0), "-2.500000000e+01");
/// assert_eq!(format_sci(0.0), "0.000000000e+00");
/// assert_eq!(format_sci(3e-300), "3.000000000e-300");
/// ```
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

fn scenario(common: &Common) -> Result<Scenario, CliError> {
    let mut sc = match &common.config {
        Some(path) => load_config(path).map_err(CliError::Config)?,
        None => default_scenario(),
    };
    let cfg = &mut sc.system;
    if let Some(rs) = common.rs {
        cfg.rs = rs;
    }
    if let Some(k) = common.kmax {
        cfg.series.k_max = k;
        cfg.auto_k_max = false;
    }
    if let Some(s) = common.simpson {
        cfg.quad.simpson_order = Some(s);
    }
    if let Some(n) = common.laguerre {
        cfg.quad.laguerre_order = n;
    }
    if let Some(t) = common.trials {
        sc.trials = t;
    }
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    sc.system.validate()?;
    Ok(sc)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(CliError::Output),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(CliError::Output),
    }
}

fn warn(lines: &[String]) {
    let mut err = std::io::stderr().lock();
    for l in lines {
        let _ = writeln!(err, "warning: {l}");
    }
}

/// Renders the `stats` CSV.
pub fn stats_csv(sc: &Scenario) -> Result<String, CliError> {
    let cfg = &sc.system;
    let ls = compute_legit_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let es = compute_eve_stats(cfg.n_elements, &cfg.fading, &cfg.pe)?;
    let (k_max, mut warnings) = if cfg.auto_k_max {
        let sel = select_k_max(cfg.series.tol, &ls);
        (sel.k_max, sel.warning.into_iter().collect())
    } else {
        (cfg.series.k_max, Vec::new())
    };
    let grid = &sc.grid;
    if grid.points == 0 {
        return Err(CliError::Usage("the stats grid is empty (grid_points = 0)".into()));
    }
    let z_min = grid.z_min.unwrap_or(1e-3 * ls.mean_h_ell_sq);
    let z_max = grid.z_max.unwrap_or(10.0 * ls.mean_h_ell_sq);
    if !(z_min > 0.0 && z_min < z_max && z_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "the stats grid needs 0 < z_min < z_max, got [{z_min}, {z_max}]"
        )));
    }
    warnings.extend(ls.warnings.iter().cloned());
    warn(&warnings);
    let (snr_ell, snr_eve) = avg_snr(cfg)?;
    let mut s = String::new();
    for (name, v) in [
        ("psi_n", ls.psi_n),
        ("g_n", ls.g_n),
        ("b_n", ls.b_n),
        ("h1", ls.h1),
        ("h2", ls.h2),
        ("snr_ell_avg", snr_ell),
        ("snr_eve_avg", snr_eve),
    ] {
        let _ = writeln!(s, "# {name} = {}", format_sci(v));
    }
    let _ = writeln!(s, "# k_max = {k_max}");
    s.push_str("z,cdf_h_ell_sq,pdf_h_e_sq\n");
    let ctrl = SeriesControl {
        k_max,
        tol: cfg.series.tol,
    };
    let n = grid.points;
    let ratio = (z_max / z_min).ln();
    let rows: Vec<Result<String, Error>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z = if n == 1 {
                z_min
            } else if i == n - 1 {
                z_max
            } else {
                z_min * (ratio * i as f64 / (n - 1) as f64).exp()
            };
            let f = cdf_h_ell_sq(z, &ls, &ctrl).value;
            let p = pdf_h_e_sq(z, &es)?;
            Ok(format!("{},{},{}\n", format_sci(z), format_sci(f), format_sci(p)))
        })
        .collect();
    for r in rows {
        s.push_str(&r?);
    }
    Ok(s)
}

fn apply_sweep(base: &SystemConfig, var: SweepVar, v: f64) -> Result<SystemConfig, CliError> {
    let mut c = base.clone();
    match var {
        SweepVar::DREve => c.geom_eve.dr_m = v,
        SweepVar::NElements => {
            let n = v.round();
            if (v - n).abs() > 1e-9 || n < 1.0 {
                return Err(CliError::Usage(format!(
                    "n_elements sweep value {v} is not a positive integer"
                )));
            }
            c.n_elements = n as usize;
        }
        SweepVar::SnrDb => {
            c.snr_tx_ell = db_to_linear(v);
            c.snr_tx_eve = db_to_linear(v);
        }
        SweepVar::Rs => c.rs = v,
    }
    c.validate()?;
    Ok(c)
}

/// Renders the `sop-sweep` CSV.
pub fn sweep_csv(sc: &Scenario, sweep: &SweepSpec, with_mc: bool) -> Result<String, CliError> {
    if with_mc && sc.trials < MIN_ORACLE_TRIALS {
        return Err(Error::InsufficientSamples {
            got: sc.trials,
            need: MIN_ORACLE_TRIALS,
        }
        .into());
    }
    let values = sweep.values();
    let configs = values
        .iter()
        .map(|&v| apply_sweep(&sc.system, sweep.variable, v))
        .collect::<Result<Vec<_>, _>>()?;
    let analytic = configs
        .par_iter()
        .map(|c| {
            let s = sop(c)?;
            let i = ip(c)?;
            let a = sop_asymptotic(c)?;
            let mut diag = s.diagnostics;
            diag.extend(i.diagnostics);
            Ok(((s.value, i.value, a.value), diag))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::with_capacity(values.len());
    let mut warnings = Vec::new();
    for (row, diag) in analytic {
        rows.push(row);
        for d in diag {
            if !warnings.contains(&d) {
                warnings.push(d);
            }
        }
    }
    warn(&warnings);
    let mut mc = Vec::new();
    if with_mc {
        let run = McRun::new(sc.trials, sc.seed);
        let mut shared = None;
        for c in &configs {
            let fresh;
            let gains = if sweep.variable == SweepVar::NElements {
                fresh = simulate_gains(c.n_elements, &c.fading, &c.pe, &run, EvePhase::Uniform)?;
                &fresh
            } else {
                if shared.is_none() {
                    shared = Some(simulate_gains(c.n_elements, &c.fading, &c.pe, &run, EvePhase::Uniform)?);
                }
                shared.as_ref().expect("just filled")
            };
            mc.push(empirical_sop(&snr_pairs(gains, c)?, c.rs)?);
        }
    }
    let mut s = String::from("sweep_value,sop_analytic,ip_analytic,sop_asymptotic");
    if with_mc {
        s.push_str(",sop_mc,sop_mc_stderr");
    }
    s.push('\n');
    for (k, (v, (sa, ia, asy))) in values.iter().zip(&rows).enumerate() {
        let _ = write!(
            s,
            "{},{},{},{}",
            format_sci(*v),
            format_sci(*sa),
            format_sci(*ia),
            format_sci(*asy)
        );
        if with_mc {
            let _ = write!(s, ",{},{}", format_sci(mc[k].point), format_sci(mc[k].std_err));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Renders the `validate` table and whether every check passed.
pub fn validate_report(sc: &Scenario) -> Result<(String, Vec<&'static str>), CliError> {
    let checks = run_checks(sc, sc.trials, sc.seed)?;
    let mut s = format!("{:<26} {:>16} {:>16}  result\n", "check", "value", "threshold");
    let mut failed = Vec::new();
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "{:<26} {:>16} {:>16}  {verdict}",
            c.name,
            format_sci(c.value),
            format_sci(c.threshold)
        );
        if !c.passed {
            failed.push(c.name);
        }
    }
    Ok((s, failed))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stats(common) => {
            let sc = scenario(common)?;
            emit(&common.out, &stats_csv(&sc)?)
        }
        Command::SopSweep(args) => {
            let sc = scenario(&args.common)?;
            emit(&args.common.out, &sweep_csv(&sc, &args.sweep, args.mc && !args.no_mc)?)
        }
        Command::Validate(common) => {
            let sc = scenario(common)?;
            let (report, failed) = validate_report(&sc)?;
            emit(&common.out, &report)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::ChecksFailed(failed))
            }
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_parsing() {
        let s: SweepSpec = "d_r_eve:5:30:6".parse().unwrap();
        assert_eq!(s.variable, SweepVar::DREve);
        assert_eq!(s.values(), vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert!("d_r_eve:5:30".parse::<SweepSpec>().is_err());
        assert!("bogus:5:30:6".parse::<SweepSpec>().is_err());
        assert!("rs:1:0:5".parse::<SweepSpec>().is_err());
        assert!("rs:0:1:1".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn sci_format_matches_c() {
        assert_eq!(format_sci(1.0), "1.000000000e+00");
        assert_eq!(format_sci(123456.789), "1.234567890e+05");
        assert_eq!(format_sci(9.9999999999), "1.000000000e+01");
        assert_eq!(format_sci(f64::NAN), "nan");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::ChecksFailed(vec![]).exit_code(), 1);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
        assert_eq!(CliError::Model(Error::Domain(String::new())).exit_code(), 3);
        assert_eq!(
            CliError::Model(Error::InsufficientSamples { got: 1, need: 2 }).exit_code(),
            4
        );
    }
}
