//! Run defaults, loaded from TOML.
//!
//! Precedence is command-line flag, then config file, then the built-in
//! values below. The config file is taken from `--config`, else from the
//! `BIZCYCLE_CONFIG` environment variable, else built-ins are used as is.
//! `config/defaults.toml` in the crate lists every key with its built-in value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandpass::{bands_with_overrides, parse_band, CycleBand, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::hp::{LAMBDA_ANNUAL, LAMBDA_QUARTERLY};
use crate::spectral::{Detrend, Taper, DEFAULT_HARMONIC_TOLERANCE, DEFAULT_MIN_PROMINENCE_RATIO};

pub const CONFIG_ENV: &str = "BIZCYCLE_CONFIG";

/// The shipped defaults file, kept in sync with [`Config::default`] by tests.
pub const DEFAULTS_TOML: &str = include_str!("../config/defaults.toml");

const STEP_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct Config {
    pub hp: HpConfig,
    pub bandpass: BandpassConfig,
    pub spectral: SpectralConfig,
    pub bands: BandsConfig,
    pub mix: MixConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HpConfig {
    pub lambda_quarterly: f64,
    pub lambda_annual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandpassConfig {
    pub truncation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// `none`, `mean`, `linear` or `hp`.
    pub detrend: String,
    /// λ for `hp` detrending; `None` means the per-step default.
    pub detrend_lambda: Option<f64>,
    pub taper: Taper,
    pub segments: usize,
    pub padding: usize,
    pub min_prominence: f64,
    pub harmonic_tolerance: f64,
}

/// Band overrides in `NAME=MIN:MAX` form (`MAX` may be `inf`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandsConfig {
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub max_order: u32,
    pub raman_duration: f64,
    pub raman_dt: f64,
}

impl Default for HpConfig {
    fn default() -> Self {
        Self {
            lambda_quarterly: LAMBDA_QUARTERLY,
            lambda_annual: LAMBDA_ANNUAL,
        }
    }
}

impl Default for BandpassConfig {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            detrend: "linear".into(),
            detrend_lambda: None,
            taper: Taper::None,
            segments: 1,
            padding: 1,
            min_prominence: DEFAULT_MIN_PROMINENCE_RATIO,
            harmonic_tolerance: DEFAULT_HARMONIC_TOLERANCE,
        }
    }
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t1: 1000.0,
            dt: 0.25,
            max_order: 3,
            raman_duration: 10.0,
            raman_dt: 0.001,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be non-negative, got {v}"
        )))
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Load from an explicit path, else from `BIZCYCLE_CONFIG`, else built-ins.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(path) => Self::from_file(path),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(path) if !path.is_empty() => Self::from_file(Path::new(&path)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("hp.lambda_quarterly", self.hp.lambda_quarterly)?;
        non_negative("hp.lambda_annual", self.hp.lambda_annual)?;
        if self.bandpass.truncation == 0 {
            return Err(Error::Config(
                "bandpass.truncation must be at least 1".into(),
            ));
        }
        let s = &self.spectral;
        parse_detrend(&s.detrend, s.detrend_lambda.or(Some(0.0)))?;
        if let Some(l) = s.detrend_lambda {
            non_negative("spectral.detrend_lambda", l)?;
        }
        if s.segments == 0 || s.padding == 0 {
            return Err(Error::Config(
                "spectral.segments and spectral.padding must be at least 1".into(),
            ));
        }
        non_negative("spectral.min_prominence", s.min_prominence)?;
        non_negative("spectral.harmonic_tolerance", s.harmonic_tolerance)?;
        self.bands(&[])?;
        let m = &self.mix;
        positive("mix.dt", m.dt)?;
        positive("mix.raman_dt", m.raman_dt)?;
        non_negative("mix.raman_duration", m.raman_duration)?;
        if !(m.t0.is_finite() && m.t1.is_finite() && m.t1 > m.t0) {
            return Err(Error::Config(format!(
                "mix.t1 must exceed mix.t0, got [{}, {}]",
                m.t0, m.t1
            )));
        }
        if !matches!(m.max_order, 2 | 3) {
            return Err(Error::Config(format!(
                "mix.max_order must be 2 or 3, got {}",
                m.max_order
            )));
        }
        Ok(())
    }

    /// Configured λ for a sampling step, for quarterly and annual data only.
    pub fn lambda_for_step(&self, step: f64) -> Option<f64> {
        if (step - 0.25).abs() <= STEP_MATCH {
            Some(self.hp.lambda_quarterly)
        } else if (step - 1.0).abs() <= STEP_MATCH {
            Some(self.hp.lambda_annual)
        } else {
            None
        }
    }

    pub fn band_overrides(&self) -> Result<Vec<CycleBand>> {
        self.bands.overrides.iter().map(|s| parse_band(s)).collect()
    }

    /// Canonical bands with config overrides, then `extra` overrides, applied.
    pub fn bands(&self, extra: &[CycleBand]) -> Result<Vec<CycleBand>> {
        let mut all = self.band_overrides()?;
        all.extend_from_slice(extra);
        bands_with_overrides(&all)
    }
}

/// `none`, `mean`, `linear`, or `hp` with the given λ.
pub fn parse_detrend(name: &str, lambda: Option<f64>) -> Result<Detrend> {
    match name.to_ascii_lowercase().as_str() {
        "none" => Ok(Detrend::None),
        "mean" => Ok(Detrend::Mean),
        "linear" => Ok(Detrend::Linear),
        "hp" => match lambda {
            Some(l) if l >= 0.0 && l.is_finite() => Ok(Detrend::Hp(l)),
            Some(l) => Err(Error::Domain(format!(
                "lambda must be a finite non-negative number, got {l}"
            ))),
            None => Err(Error::Config(
                "hp detrending needs a lambda for this sampling step".into(),
            )),
        },
        _ => Err(Error::Config(format!(
            "unknown detrend mode {name:?} (expected none, mean, linear or hp)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_builtins() {
        assert_eq!(Config::from_toml(DEFAULTS_TOML).unwrap(), Config::default());
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let c = Config::from_toml("[hp]\nlambda_annual = 6.25\n").unwrap();
        assert_eq!(c.hp.lambda_annual, 6.25);
        assert_eq!(c.hp.lambda_quarterly, 1600.0);
        assert_eq!(c.bandpass.truncation, 12);
        assert_eq!(c.lambda_for_step(1.0), Some(6.25));
        assert_eq!(c.lambda_for_step(0.5), None);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_toml("[hp]\nlambda_annual = -1\n").is_err());
        assert!(Config::from_toml("[mix]\nmax_order = 4\n").is_err());
        assert!(Config::from_toml("[spectral]\ndetrend = \"cubic\"\n").is_err());
        assert!(Config::from_toml("[bands]\noverrides = [\"Juglar=5:9\"]\n").is_err());
        assert!(Config::from_toml("[nonsense]\nx = 1\n").is_err());
    }

    #[test]
    fn band_overrides_apply() {
        let c = Config::from_toml("[bands]\noverrides = [\"Kuznets=14:25\"]\n").unwrap();
        let bands = c.bands(&[]).unwrap();
        let k = bands.iter().find(|b| b.name.as_str() == "Kuznets").unwrap();
        assert_eq!(k.period_min, 14.0);
    }

    #[test]
    fn detrend_names() {
        assert_eq!(
            parse_detrend("HP", Some(100.0)).unwrap(),
            Detrend::Hp(100.0)
        );
        assert!(parse_detrend("hp", None).is_err());
        assert!(parse_detrend("hp", Some(-1.0))
            .unwrap_err()
            .to_string()
            .contains("lambda"));
    }
}
