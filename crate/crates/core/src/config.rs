//! Scenario files: one `key = value` per line, `#` starts a comment.
//!
//! Keys follow the [`SystemConfig`] fields. Keys ending in `_db` are read in
//! decibels and stored linear. `snr_db` sets both 𝒫/σ_ℓ² and 𝒫/σ_e²; the
//! per-node keys override it regardless of order.
//!
//! ```
//! use thz_secrecy::config::parse_config;
//! let sc = parse_config("n_elements = 40\nrs = 0.5  # bits/s/Hz\nsnr_db = 70\n").unwrap();
//! assert_eq!(sc.system.n_elements, 40);
//! assert_eq!(sc.system.snr_tx_ell, 1e7);
//! ```

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::channel::{db_to_linear, AlphaMuParams, LinkGeometry, PointingErrorParams};
use crate::legit::SeriesControl;
use crate::secrecy::SystemConfig;
use crate::specfun::QuadratureSpec;

/// The shipped default scenario.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.conf");

/// The far-user scenario: d_{r,ℓ} = 25 m and a single series term.
pub const FAR_USER_CONFIG: &str = include_str!("../../../configs/far_user.conf");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: cannot parse `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
}

/// z grid of the `stats` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Defaults to 10⁻³ E[h_ℓ²].
    pub z_min: Option<f64>,
    /// Defaults to 10 E[h_ℓ²].
    pub z_max: Option<f64>,
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: SystemConfig,
    pub grid: GridSpec,
    pub trials: usize,
    pub seed: u64,
    /// Absolute tolerance of the analytic cross-checks in `validate`.
    pub tol: f64,
}

const KEYS: &[&str] = &[
    "n_elements",
    "alpha",
    "mu",
    "h_bar",
    "phi",
    "a0",
    "frequency_hz",
    "gain_tx_db",
    "gain_rx_db",
    "d1_m",
    "d_r_ell_m",
    "d_r_eve_m",
    "kappa_a",
    "snr_db",
    "snr_tx_ell_db",
    "snr_tx_eve_db",
    "rs",
    "k_max",
    "series_tol",
    "simpson_order",
    "laguerre_order",
    "grid_points",
    "grid_z_min",
    "grid_z_max",
    "trials",
    "seed",
    "tol",
];

struct Entry {
    line: usize,
    value: String,
}

struct Entries(HashMap<&'static str, Entry>);

impl Entries {
    fn bad(&self, key: &str) -> ConfigError {
        let e = &self.0[key];
        ConfigError::BadValue {
            line: e.line,
            key: key.to_string(),
            value: e.value.clone(),
        }
    }

    fn real(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse::<f64>().map_err(|_| self.bad(key)),
        }
    }

    fn db(&self, key: &'static str, default_db: f64) -> Result<f64, ConfigError> {
        self.real(key, default_db).map(db_to_linear)
    }

    /// A nonnegative integer, also accepted in exponent form such as `1e6`.
    fn count(&self, key: &'static str, default: u64) -> Result<u64, ConfigError> {
        let Some(e) = self.0.get(key) else { return Ok(default) };
        if let Ok(v) = e.value.parse::<u64>() {
            return Ok(v);
        }
        match e.value.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
            _ => Err(self.bad(key)),
        }
    }

    fn count_or_auto(&self, key: &'static str) -> Result<Option<u64>, ConfigError> {
        match self.0.get(key) {
            Some(e) if e.value.eq_ignore_ascii_case("auto") => Ok(None),
            Some(_) => self.count(key, 0).map(Some),
            None => Ok(None),
        }
    }

    fn optional_real(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(_) => self.real(key, 0.0).map(Some),
        }
    }
}

fn to_usize(v: u64, entries: &Entries, key: &str) -> Result<usize, ConfigError> {
    usize::try_from(v).map_err(|_| entries.bad(key))
}

/// Parses scenario text. Only syntax is checked here; parameter ranges are
/// checked by [`SystemConfig::validate`].
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if map
            .insert(
                known,
                Entry {
                    line,
                    value: value.to_string(),
                },
            )
            .is_some()
        {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
    }
    let e = Entries(map);

    let fading = AlphaMuParams {
        alpha: e.real("alpha", 1.7)?,
        mu: e.real("mu", 1.1)?,
        h_bar: e.real("h_bar", 1.0)?,
    };
    let pe = PointingErrorParams {
        phi: e.real("phi", 25.7404)?,
        a0: e.real("a0", 0.054)?,
    };
    let geom_ell = LinkGeometry {
        frequency_hz: e.real("frequency_hz", 300e9)?,
        gain_tx: e.db("gain_tx_db", 40.0)?,
        gain_rx: e.db("gain_rx_db", 40.0)?,
        d1_m: e.real("d1_m", 5.0)?,
        dr_m: e.real("d_r_ell_m", 20.0)?,
        kappa_a: e.real("kappa_a", 3.18e-4)?,
    };
    let geom_eve = LinkGeometry {
        dr_m: e.real("d_r_eve_m", 10.0)?,
        ..geom_ell
    };
    let snr_db = e.real("snr_db", 60.0)?;
    let k_max = e.count_or_auto("k_max")?;
    let simpson = e.count_or_auto("simpson_order")?;
    let system = SystemConfig {
        n_elements: to_usize(e.count("n_elements", 60)?, &e, "n_elements")?,
        fading,
        pe,
        geom_ell,
        geom_eve,
        snr_tx_ell: e.db("snr_tx_ell_db", snr_db)?,
        snr_tx_eve: e.db("snr_tx_eve_db", snr_db)?,
        rs: e.real("rs", 0.2)?,
        series: SeriesControl {
            k_max: match k_max {
                Some(k) => to_usize(k, &e, "k_max")?,
                None => 0,
            },
            tol: e.real("series_tol", 1e-6)?,
        },
        auto_k_max: k_max.is_none(),
        quad: QuadratureSpec {
            simpson_order: simpson.map(|s| to_usize(s, &e, "simpson_order")).transpose()?,
            laguerre_order: to_usize(e.count("laguerre_order", 32)?, &e, "laguerre_order")?,
        },
    };
    Ok(Scenario {
        system,
        grid: GridSpec {
            points: to_usize(e.count("grid_points", 200)?, &e, "grid_points")?,
            z_min: e.optional_real("grid_z_min")?,
            z_max: e.optional_real("grid_z_max")?,
        },
        trials: to_usize(e.count("trials", 1_000_000)?, &e, "trials")?,
        seed: e.count("seed", 42)?,
        tol: e.real("tol", 1e-3)?,
    })
}

pub fn load_config(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Io {
        path: path.display().to_string(),
        reason: err.to_string(),
    })?;
    parse_config(&text)
}

/// The shipped default scenario.
pub fn default_scenario() -> Scenario {
    parse_config(DEFAULT_CONFIG).expect("shipped config parses")
}

/// The far-user scenario.
pub fn far_user_scenario() -> Scenario {
    parse_config(FAR_USER_CONFIG).expect("shipped config parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_the_defaults() {
        let sc = parse_config("").unwrap();
        assert_eq!(sc, default_scenario());
        assert!(sc.system.validate().is_ok());
        assert!(sc.system.auto_k_max);
        assert_eq!(sc.system.geom_ell.gain_tx, 1e4);
        assert_eq!(sc.system.snr_tx_ell, 1e6);
    }

    #[test]
    fn fig3_preset() {
        let sc = far_user_scenario();
        assert_eq!(sc.system.geom_ell.dr_m, 25.0);
        assert_eq!(sc.system.series.k_max, 0);
        assert!(!sc.system.auto_k_max);
        assert_eq!(sc.system.n_elements, 60);
        assert_eq!(sc.system.fading.h_bar, 1.0);
    }

    #[test]
    fn per_node_snr_overrides_common_snr_in_any_order() {
        let sc = parse_config("snr_tx_eve_db = 50\nsnr_db = 70\n").unwrap();
        assert_eq!(sc.system.snr_tx_ell, 1e7);
        assert_eq!(sc.system.snr_tx_eve, 1e5);
    }

    #[test]
    fn counts_and_auto() {
        let sc = parse_config("trials = 1e5\nk_max = 12\nsimpson_order = auto\nseed = 7").unwrap();
        assert_eq!(sc.trials, 100_000);
        assert_eq!(sc.system.series.k_max, 12);
        assert!(!sc.system.auto_k_max);
        assert_eq!(sc.system.quad.simpson_order, None);
        assert_eq!(sc.seed, 7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_config("# c\nfoo\n"), Err(ConfigError::Syntax { line: 2 }));
        assert!(matches!(
            parse_config("bogus = 1"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("rs = 1\nrs = 2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(parse_config("alpha = x"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(
            parse_config("trials = 1.5"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(parse_config("rs ="), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn out_of_range_values_parse_but_fail_validation() {
        let sc = parse_config("phi = 1.5").unwrap();
        assert!(sc.system.validate().is_err());
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/x.conf")),
            Err(ConfigError::Io { .. })
        ));
    }
}
