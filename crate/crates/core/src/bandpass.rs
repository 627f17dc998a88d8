//! Cycle bands and truncated ideal band-pass filters.
//!
//! The filter for a band `[p_min, p_max)` years is the ideal band-pass
//! impulse response truncated at `|j| ≤ K` lags, then shifted by a constant
//! so the weights sum to zero. Zero-sum weights have zero gain at frequency
//! zero and therefore remove constants and (by symmetry) linear trends.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Default truncation in samples for annual and quarterly data.
pub const DEFAULT_TRUNCATION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandName {
    Kitchin,
    Juglar,
    Kuznets,
    Kondratieff,
    GrandSupercycle,
    Unclassified,
}

impl BandName {
    pub const ALL: [BandName; 6] = [
        BandName::Kitchin,
        BandName::Juglar,
        BandName::Kuznets,
        BandName::Kondratieff,
        BandName::GrandSupercycle,
        BandName::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BandName::Kitchin => "Kitchin",
            BandName::Juglar => "Juglar",
            BandName::Kuznets => "Kuznets",
            BandName::Kondratieff => "Kondratieff",
            BandName::GrandSupercycle => "GrandSupercycle",
            BandName::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "kitchin" => Ok(BandName::Kitchin),
            "juglar" => Ok(BandName::Juglar),
            "kuznets" => Ok(BandName::Kuznets),
            "kondratieff" | "kondratiev" => Ok(BandName::Kondratieff),
            "grandsupercycle" | "grand" | "supercycle" => Ok(BandName::GrandSupercycle),
            "unclassified" => Ok(BandName::Unclassified),
            _ => Err(Error::Config(format!("unknown band name {s:?}"))),
        }
    }
}

/// A half-open period band `[period_min, period_max)` in years.
/// `period_max = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleBand {
    pub name: BandName,
    pub period_min: f64,
    pub period_max: Option<f64>,
}

impl CycleBand {
    pub fn new(name: BandName, period_min: f64, period_max: Option<f64>) -> Result<Self> {
        let ok_min = period_min > 0.0 && period_min.is_finite();
        let ok_max = match period_max {
            Some(max) => max.is_finite() && max > period_min,
            None => true,
        };
        if !ok_min || !ok_max {
            return Err(Error::Config(format!(
                "band {name} needs 0 < period_min < period_max, got [{period_min}, {})",
                period_max.map_or("inf".to_string(), |m| m.to_string())
            )));
        }
        Ok(Self {
            name,
            period_min,
            period_max,
        })
    }

    pub fn kitchin() -> Self {
        Self::new(BandName::Kitchin, 3.0, Some(7.0)).unwrap()
    }

    pub fn juglar() -> Self {
        Self::new(BandName::Juglar, 7.0, Some(11.0)).unwrap()
    }

    pub fn kuznets() -> Self {
        Self::new(BandName::Kuznets, 15.0, Some(25.0)).unwrap()
    }

    pub fn kondratieff() -> Self {
        Self::new(BandName::Kondratieff, 45.0, Some(60.0)).unwrap()
    }

    pub fn grand_supercycle() -> Self {
        Self::new(BandName::GrandSupercycle, 70.0, None).unwrap()
    }

    pub fn contains(&self, period: f64) -> bool {
        period >= self.period_min && self.period_max.is_none_or(|max| period < max)
    }

    fn upper(&self) -> f64 {
        self.period_max.unwrap_or(f64::INFINITY)
    }

    fn overlaps(&self, other: &CycleBand) -> bool {
        self.period_min < other.upper() && other.period_min < self.upper()
    }
}

/// The five canonical bands, in increasing period order.
pub fn canonical_bands() -> Vec<CycleBand> {
    vec![
        CycleBand::kitchin(),
        CycleBand::juglar(),
        CycleBand::kuznets(),
        CycleBand::kondratieff(),
        CycleBand::grand_supercycle(),
    ]
}

/// Canonical bands with any same-named band replaced by an override.
pub fn bands_with_overrides(overrides: &[CycleBand]) -> Result<Vec<CycleBand>> {
    let mut bands = canonical_bands();
    for o in overrides {
        match bands.iter_mut().find(|b| b.name == o.name) {
            Some(b) => *b = *o,
            None => bands.push(*o),
        }
    }
    validate_bands(&bands)?;
    Ok(bands)
}

/// Bands must be pairwise disjoint and must not use the `Unclassified` label.
pub fn validate_bands(bands: &[CycleBand]) -> Result<()> {
    for (i, a) in bands.iter().enumerate() {
        if a.name == BandName::Unclassified {
            return Err(Error::Config(
                "Unclassified cannot be used as a band".into(),
            ));
        }
        for b in &bands[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::Config(format!(
                    "bands {} and {} overlap",
                    a.name, b.name
                )));
            }
        }
    }
    Ok(())
}

/// The band covering `period`, or `Unclassified`. Assumes validated bands.
pub fn classify_period(period: f64, bands: &[CycleBand]) -> BandName {
    bands
        .iter()
        .find(|b| b.contains(period))
        .map_or(BandName::Unclassified, |b| b.name)
}

/// Parse `NAME` (a canonical band) or `NAME=MIN:MAX` (MAX may be `inf`).
pub fn parse_band(spec: &str) -> Result<CycleBand> {
    let Some((name, range)) = spec.split_once('=') else {
        let name: BandName = spec.parse()?;
        return canonical_bands()
            .into_iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Config(format!("{name} has no canonical range")));
    };
    let name: BandName = name.trim().parse()?;
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("band range {range:?} must be MIN:MAX")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad band minimum {lo:?}")))?;
    let hi = hi.trim();
    let hi = if hi.is_empty() || hi.eq_ignore_ascii_case("inf") {
        None
    } else {
        Some(
            hi.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad band maximum {hi:?}")))?,
        )
    };
    CycleBand::new(name, lo, hi)
}

/// Symmetric filter weights for lags `-K..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterWeights {
    /// Weights for lags `-K..=K`; index `K` is lag 0.
    weights: Vec<f64>,
    truncation: usize,
    band: CycleBand,
    step: f64,
}

impl FilterWeights {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn band(&self) -> &CycleBand {
        &self.band
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// All `2K + 1` weights ordered from lag `-K` to lag `+K`.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn center(&self) -> f64 {
        self.weights[self.truncation]
    }

    /// Weight at a signed lag, or 0 outside the truncation window.
    pub fn at_lag(&self, lag: isize) -> f64 {
        let k = self.truncation as isize;
        if lag.abs() > k {
            0.0
        } else {
            self.weights[(lag + k) as usize]
        }
    }

    /// `(lag, weight)` pairs from `-K` to `K`.
    pub fn lags(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let k = self.truncation as isize;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as isize - k, w))
    }

    /// Gain `|Σ_j w_j e^{-i 2π f j Δt}|` at frequency `f` in cycles/year.
    pub fn gain(&self, frequency: f64) -> f64 {
        let omega = 2.0 * PI * frequency * self.step;
        let tail: f64 = (1..=self.truncation)
            .map(|j| self.at_lag(j as isize) * (omega * j as f64).cos())
            .sum();
        (self.center() + 2.0 * tail).abs()
    }
}

pub fn bandpass_weights(band: &CycleBand, step: f64, truncation: usize) -> Result<FilterWeights> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if truncation < 1 {
        return Err(Error::Size("truncation K must be at least 1".into()));
    }
    if band.period_min < 2.0 * step {
        return Err(Error::Nyquist(format!(
            "band {} starts at period {} years, below the Nyquist period {} for step {step}",
            band.name,
            band.period_min,
            2.0 * step
        )));
    }

    let omega_high = 2.0 * PI * step / band.period_min;
    let omega_low = band.period_max.map_or(0.0, |p| 2.0 * PI * step / p);

    let k = truncation as isize;
    let mut weights: Vec<f64> = (-k..=k)
        .map(|j| {
            if j == 0 {
                (omega_high - omega_low) / PI
            } else {
                let jf = j as f64;
                ((omega_high * jf).sin() - (omega_low * jf).sin()) / (PI * jf)
            }
        })
        .collect();
    // Symmetrize exactly so rounding in sin(-x) cannot break w(-j) == w(j).
    for j in 1..=truncation {
        weights[truncation - j] = weights[truncation + j];
    }
    let shift = weights.iter().sum::<f64>() / weights.len() as f64;
    for w in &mut weights {
        *w -= shift;
    }

    Ok(FilterWeights {
        weights,
        truncation,
        band: *band,
        step,
    })
}

/// Convolve a series with precomputed weights, trimming `K` samples per end.
pub fn apply_weights(series: &TimeSeries, weights: &FilterWeights) -> Result<TimeSeries> {
    let k = weights.truncation();
    let n = series.len();
    if n <= 2 * k + 1 {
        return Err(Error::Size(format!(
            "series of length {n} is too short for truncation {k} (needs more than {})",
            2 * k + 1
        )));
    }
    if (series.step() - weights.step()).abs() > 1e-9 * series.step() {
        return Err(Error::Config(format!(
            "weights were built for step {} but the series has step {}",
            weights.step(),
            series.step()
        )));
    }
    let x = series.values();
    let w = weights.as_slice();
    let out = par_range_map!(k..n - k, |t| {
        w.iter()
            .enumerate()
            .map(|(i, wi)| wi * x[t + i - k])
            .sum::<f64>()
    });
    let start = series.time_at(k);
    Ok(TimeSeries::new(start, series.step(), out)?
        .with_label(series.label())
        .with_units(series.units()))
}

pub fn apply_bandpass(
    series: &TimeSeries,
    band: &CycleBand,
    truncation: usize,
) -> Result<TimeSeries> {
    let weights = bandpass_weights(band, series.step(), truncation)?;
    apply_weights(series, &weights)
}
