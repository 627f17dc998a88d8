//! Offline Monte-Carlo calibration of the peak prominence threshold.
//!
//! Not used at run time: the result is frozen into
//! [`crate::spectral::DEFAULT_MIN_PROMINENCE_RATIO`] and re-checked by tests.

use std::ops::Range;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::series::TimeSeries;
use crate::spectral::{find_peaks, periodogram, Detrend, Taper};

/// Gaussian white noise of unit variance, reproducible from `seed`.
pub fn white_noise(seed: u64, n: usize) -> Result<TimeSeries> {
    let mut rng = StdRng::seed_from_u64(seed);
    let values = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    TimeSeries::new(0.0, 1.0, values)
}

/// Largest peak prominence of one noise realization, in units of the
/// median periodogram power. Zero when the spectrum has no local maximum.
pub fn max_prominence_ratio(seed: u64, n: usize) -> Result<f64> {
    let noise = white_noise(seed, n)?;
    let spectrum = periodogram(&noise, Detrend::Mean, Taper::None)?;
    let mut power = spectrum.power().to_vec();
    power.sort_by(|a, b| a.total_cmp(b));
    let mid = power.len() / 2;
    let median = if power.len() % 2 == 0 {
        0.5 * (power[mid - 1] + power[mid])
    } else {
        power[mid]
    };
    Ok(find_peaks(&spectrum, 0.0)
        .iter()
        .map(|p| p.prominence / median)
        .fold(0.0, f64::max))
}

/// The `quantile` of [`max_prominence_ratio`] over `seeds`.
///
/// Seeds are evaluated in parallel with the `parallel` feature; the result
/// does not depend on it.
pub fn calibrate_prominence_threshold(n: usize, seeds: Range<u64>, quantile: f64) -> Result<f64> {
    let seeds: Vec<u64> = seeds.collect();
    let mut ratios = par_try_map!(seeds, |&s| max_prominence_ratio(s, n))?;
    ratios.sort_by(|a, b| a.total_cmp(b));
    let idx = ((quantile.clamp(0.0, 1.0) * ratios.len() as f64).ceil() as usize)
        .saturating_sub(1)
        .min(ratios.len() - 1);
    Ok(ratios[idx])
}
