//! Periodogram estimation, peak detection and band classification.
//!
//! Normalization: the one-sided periodogram of `N` samples at step `Δt` is
//!
//! ```text
//! P_k = c_k |X_k|² Δt / N,    f_k = k / (N Δt),   k = 0..=⌊N/2⌋
//! ```
//!
//! with `c_k = 2` except at DC and (even `N`) Nyquist where `c_k = 1`. With
//! `Δf = 1/(N Δt)` this gives `Σ P_k Δf = (1/N) Σ x_t²`, the mean square of
//! the detrended input (its variance for every detrend mode except `none`).
//! A pure tone of amplitude `A` on a bin contributes `P Δf = A²/2`, so
//! `A = √(2 P Δf)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bandpass::{classify_period, validate_bands, BandName, CycleBand};
use crate::error::{Error, Result};
use crate::hp::hp_filter;
use crate::series::TimeSeries;

pub const MIN_PERIODOGRAM_LEN: usize = 8;

/// Default tolerance for [`harmonic_ratio_test`].
pub const DEFAULT_HARMONIC_TOLERANCE: f64 = 0.05;

/// Prominence threshold, as a multiple of the median power, that white noise
/// stays below in 99% of single-segment periodograms of 512 samples.
///
/// Produced once by [`crate::calibration::calibrate_prominence_threshold`]
/// (seeds 0..2000, N = 512, mean detrend, no taper, 0.99 quantile) and frozen
/// here; `calibration_reproduces_frozen_threshold` in the test suite reruns it.
pub const DEFAULT_MIN_PROMINENCE_RATIO: f64 = 15.710701320610662;

/// Power ratio to the strongest bin below which a local maximum is treated
/// as round-off. Corresponds to an amplitude ratio of 1e-10.
pub const PEAK_NOISE_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "lambda")]
pub enum Detrend {
    None,
    Mean,
    Linear,
    Hp(f64),
}

impl fmt::Display for Detrend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detrend::None => f.write_str("none"),
            Detrend::Mean => f.write_str("mean"),
            Detrend::Linear => f.write_str("linear"),
            Detrend::Hp(l) => write!(f, "hp({l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    None,
    Hann,
}

impl FromStr for Taper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Taper::None),
            "hann" | "hanning" => Ok(Taper::Hann),
            _ => Err(Error::Config(format!("unknown taper {s:?}"))),
        }
    }
}

impl fmt::Display for Taper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Taper::None => "none",
            Taper::Hann => "hann",
        })
    }
}

/// How a [`Spectrum`] was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMethod {
    pub detrend: Detrend,
    pub taper: Taper,
    /// Number of half-overlapping segments averaged (1 = plain periodogram).
    pub segments: usize,
    /// Zero-padding factor applied to each segment (1 = none). Display only.
    pub padding: usize,
}

impl SpectralMethod {
    pub fn new(detrend: Detrend, taper: Taper) -> Self {
        Self {
            detrend,
            taper,
            segments: 1,
            padding: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    frequencies: Vec<f64>,
    power: Vec<f64>,
    method: SpectralMethod,
    step: f64,
    /// Frequency spacing of the grid.
    df: f64,
}

impl Spectrum {
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn method(&self) -> &SpectralMethod {
        &self.method
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// `Σ P Δf`
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.df
    }

    /// Power integrated over bins with `lo ≤ f ≤ hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p)
            .sum::<f64>()
            * self.df
    }

    pub fn nearest_bin(&self, frequency: f64) -> usize {
        let k = (frequency / self.df).round();
        (k.max(0.0) as usize).min(self.power.len() - 1)
    }

    /// Sinusoid amplitude implied by the power in bin `k`.
    ///
    /// DC carries `A²` rather than `A²/2`, so it is not doubled.
    pub fn amplitude_at(&self, k: usize) -> f64 {
        let e = self.power[k] * self.df;
        if k == 0 {
            e.sqrt()
        } else {
            (2.0 * e).sqrt()
        }
    }

    /// Width of the frequency span whose power is within `db` decibels of
    /// the maximum: highest minus lowest qualifying frequency.
    pub fn bandwidth_db(&self, db: f64) -> f64 {
        let max = self.power.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return 0.0;
        }
        let floor = max * 10f64.powf(-db / 10.0);
        let mut hits = self
            .frequencies
            .iter()
            .zip(&self.power)
            .filter(|(_, p)| **p >= floor)
            .map(|(f, _)| *f);
        let first = hits.next().unwrap_or(0.0);
        let last = hits.next_back().unwrap_or(first);
        last - first
    }
}

fn hann(n: usize) -> Vec<f64> {
    // periodic (DFT-even) form
    (0..n)
        .map(|t| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * t as f64 / n as f64).cos())
        .collect()
}

/// Remove the requested trend from the series values.
pub fn detrend_values(series: &TimeSeries, detrend: Detrend) -> Result<Vec<f64>> {
    let x = series.values();
    let n = x.len() as f64;
    Ok(match detrend {
        Detrend::None => x.to_vec(),
        Detrend::Mean => {
            let mean = x.iter().sum::<f64>() / n;
            x.iter().map(|v| v - mean).collect()
        }
        Detrend::Linear => {
            let t_mean = (n - 1.0) / 2.0;
            let x_mean = x.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let dt = t as f64 - t_mean;
                sxy += dt * (v - x_mean);
                sxx += dt * dt;
            }
            let slope = sxy / sxx;
            x.iter()
                .enumerate()
                .map(|(t, v)| v - x_mean - slope * (t as f64 - t_mean))
                .collect()
        }
        Detrend::Hp(lambda) => hp_filter(series, lambda)?.cycle.into_values(),
    })
}

/// One-sided power of real samples zero-padded to `padded_len`, normalized
/// by the unpadded length `n`. Returns `(power, df)`.
fn one_sided_power(x: &[f64], padded_len: usize, step: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(padded_len, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new()
        .plan_fft_forward(padded_len)
        .process(&mut buf);
    let half = padded_len / 2;
    let scale = step / n as f64;
    let power = (0..=half)
        .map(|k| {
            let c = if k == 0 || (padded_len.is_multiple_of(2) && k == half) {
                1.0
            } else {
                2.0
            };
            c * buf[k].norm_sqr() * scale
        })
        .collect();
    (power, 1.0 / (padded_len as f64 * step))
}

/// Single-segment periodogram with the given detrend and taper.
pub fn periodogram(series: &TimeSeries, detrend: Detrend, taper: Taper) -> Result<Spectrum> {
    periodogram_with(series, &SpectralMethod::new(detrend, taper))
}

/// Periodogram with optional Welch averaging and zero-padding.
///
/// Segments have length `⌊2N/(m+1)⌋` and overlap by half. Each is tapered
/// independently; Hann-tapered power is divided by the mean squared window
/// value so that it integrates to the mean square of the untapered input in
/// expectation.
pub fn periodogram_with(series: &TimeSeries, method: &SpectralMethod) -> Result<Spectrum> {
    let n = series.len();
    if n < MIN_PERIODOGRAM_LEN {
        return Err(Error::Size(format!(
            "periodogram needs at least {MIN_PERIODOGRAM_LEN} samples, got {n}"
        )));
    }
    if method.segments == 0 || method.padding == 0 {
        return Err(Error::Config(
            "segment count and padding factor must be at least 1".into(),
        ));
    }
    let x = detrend_values(series, method.detrend)?;

    let m = method.segments;
    let seg_len = if m == 1 { n } else { 2 * n / (m + 1) };
    if seg_len < MIN_PERIODOGRAM_LEN {
        return Err(Error::Size(format!(
            "{m} segments of {n} samples leaves {seg_len} per segment, need at least {MIN_PERIODOGRAM_LEN}"
        )));
    }
    let hop = if m == 1 { 0 } else { seg_len / 2 };
    let window = match method.taper {
        Taper::None => None,
        Taper::Hann => Some(hann(seg_len)),
    };
    let window_power = window.as_ref().map_or(1.0, |w| {
        w.iter().map(|v| v * v).sum::<f64>() / seg_len as f64
    });
    let padded = seg_len * method.padding;
    let step = series.step();

    let spectra = par_range_map!(0..m, |s| {
        let seg = &x[s * hop..s * hop + seg_len];
        let tapered: Vec<f64> = match &window {
            Some(w) => seg.iter().zip(w).map(|(v, w)| v * w).collect(),
            None => seg.to_vec(),
        };
        one_sided_power(&tapered, padded, step)
    });

    let df = spectra[0].1;
    let bins = spectra[0].0.len();
    let mut power = vec![0.0; bins];
    for (p, _) in &spectra {
        for (acc, v) in power.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let scale = 1.0 / (m as f64 * window_power);
    for p in &mut power {
        *p *= scale;
    }
    let frequencies = (0..bins)
        .map(|k| k as f64 / (padded as f64 * step))
        .collect();

    Ok(Spectrum {
        frequencies,
        power,
        method: *method,
        step,
        df,
    })
}

/// Spectrum of a complex field sampled at `step`, folded onto `|f|`.
///
/// Negative-frequency bins are added onto their positive mirror and the
/// result is halved, so that a field `A e^{iθ(t)}` integrates to `A²/2` just
/// like the real signal `A cos θ(t)`. Total power equals `½ mean |z|²` when
/// the DC and Nyquist bins are empty; those two bins are doubled instead.
pub fn complex_field_spectrum(
    field: &[Complex64],
    step: f64,
    method: SpectralMethod,
) -> Result<Spectrum> {
    let n = field.len();
    if n < MIN_PERIODOGRAM_LEN {
        return Err(Error::Size(format!(
            "field spectrum needs at least {MIN_PERIODOGRAM_LEN} samples, got {n}"
        )));
    }
    let mut buf = field.to_vec();
    FftPlanner::<f64>::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let half = n / 2;
    let scale = step / (2.0 * n as f64);
    let power = (0..=half)
        .map(|k| {
            let mut p = buf[k].norm_sqr();
            if k != 0 && !(n.is_multiple_of(2) && k == half) {
                p += buf[n - k].norm_sqr();
            } else {
                // DC and Nyquist have no separate mirror; keep the real-signal convention
                p *= 2.0;
            }
            p * scale
        })
        .collect();
    let frequencies = (0..=half).map(|k| k as f64 / (n as f64 * step)).collect();
    Ok(Spectrum {
        frequencies,
        power,
        method,
        step,
        df: 1.0 / (n as f64 * step),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub frequency: f64,
    pub period: f64,
    pub power: f64,
    pub prominence: f64,
}

impl SpectralPeak {
    pub fn new(frequency: f64, power: f64, prominence: f64) -> Self {
        Self {
            frequency,
            period: 1.0 / frequency,
            power,
            prominence,
        }
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

/// Prominence of the local maximum at `i`: its height above the higher of the
/// two lowest points reachable before meeting strictly higher power.
fn prominence(p: &[f64], i: usize) -> f64 {
    let mut left_min = p[i];
    for &v in p[..i].iter().rev() {
        if v > p[i] {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = p[i];
    for &v in &p[i + 1..] {
        if v > p[i] {
            break;
        }
        right_min = right_min.min(v);
    }
    p[i] - left_min.max(right_min)
}

/// Strict local maxima (bin 0 and the last bin excluded) whose prominence is
/// at least `min_prominence_ratio × median(power)`, by descending power.
///
/// Maxima below [`PEAK_NOISE_FLOOR`] times the largest power are FFT
/// round-off, not signal, and are never reported.
pub fn find_peaks(spectrum: &Spectrum, min_prominence_ratio: f64) -> Vec<SpectralPeak> {
    let p = spectrum.power();
    if p.len() < 3 {
        return Vec::new();
    }
    let max = p.iter().cloned().fold(0.0f64, f64::max);
    let floor = PEAK_NOISE_FLOOR * max;
    let threshold = min_prominence_ratio.max(0.0) * median(p);
    let mut peaks: Vec<SpectralPeak> = (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] > p[i + 1])
        .filter_map(|i| {
            let prom = prominence(p, i);
            (prom >= threshold && p[i] > floor)
                .then(|| SpectralPeak::new(spectrum.frequencies()[i], p[i], prom))
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.power
            .total_cmp(&a.power)
            .then(a.frequency.total_cmp(&b.frequency))
    });
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakClassification {
    pub peak: SpectralPeak,
    pub band: BandName,
}

pub fn classify_peaks(
    peaks: &[SpectralPeak],
    bands: &[CycleBand],
) -> Result<Vec<PeakClassification>> {
    validate_bands(bands)?;
    Ok(peaks
        .iter()
        .map(|peak| PeakClassification {
            peak: *peak,
            band: classify_period(peak.period, bands),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRatio {
    pub f_low: f64,
    pub f_high: f64,
    pub harmonic: u32,
    pub tolerance: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Is `f_high` the `n`-th harmonic of `f_low` to within relative `tol`?
pub fn harmonic_ratio_test(f_low: f64, f_high: f64, n: u32, tol: f64) -> Result<HarmonicRatio> {
    if !(f_low > 0.0) || !(f_high > 0.0) || !f_low.is_finite() || !f_high.is_finite() {
        return Err(Error::Domain(format!(
            "frequencies must be positive, got {f_low} and {f_high}"
        )));
    }
    if f_high < f_low {
        return Err(Error::Domain(format!(
            "f_high ({f_high}) must not be below f_low ({f_low})"
        )));
    }
    if n == 0 || !(tol >= 0.0) {
        return Err(Error::Domain(format!(
            "harmonic number must be positive and tolerance non-negative, got {n} and {tol}"
        )));
    }
    let ratio = f_high / f_low;
    let target = n as f64;
    Ok(HarmonicRatio {
        f_low,
        f_high,
        harmonic: n,
        tolerance: tol,
        ratio,
        pass: (ratio - target).abs() <= tol * target,
    })
}
