//! Business-cycle extraction and nonlinear cycle-interaction simulation.
//!
//! The crate is organized bottom-up:
//!
//! - [`series`]: uniformly sampled time series, CSV ingestion, growth and log transforms
//! - [`banded`]: symmetric pentadiagonal LDLᵀ solver used by the HP filter
//! - [`hp`]: Hodrick-Prescott trend/cycle decomposition
//! - [`bandpass`]: cycle bands and truncated ideal band-pass filters
//! - [`spectral`]: periodogram, peak detection, band classification, harmonic-ratio test
//! - [`nonlinear`]: tone synthesis, polynomial medium, mixing products, Kerr phase
//!   modulation, Raman-like power transfer and Brillouin-like reflection
//! - [`chronology`]: embedded long-wave chronology and phase growth tables
//! - [`calibration`]: offline Monte-Carlo calibration of the peak prominence threshold
//! - [`config`] and [`cli`]: the `bizcycle` command-line front end
//!
//! Data-parallel loops go through the [`par`] helpers. With the default
//! `parallel` feature they run on rayon; without it they run sequentially and
//! produce identical results.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[macro_use]
pub mod par;

pub mod banded;
pub mod bandpass;
pub mod calibration;
pub mod chronology;
pub mod cli;
pub mod config;
pub mod error;
pub mod hp;
pub mod nonlinear;
pub mod output;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
pub use series::{GrowthMode, GrowthSeries, TimeSeries};
