//! The `bizcycle` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or options. Every
//! command computes all of its outputs before creating any file, so a
//! validation failure never leaves partial results behind.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::bandpass::{apply_weights, bandpass_weights, parse_band, BandName, CycleBand};
use crate::chronology::{
    builtin_chronology, builtin_phase_growth, growth_windows, phase_average_growth, table_rows,
    Chronology, GrowthPhase, PhaseGrowthRecord, TableVersion, WavePhase, CHRONOLOGY_VERSION,
};
use crate::config::{parse_detrend, Config};
use crate::error::Error;
use crate::hp::hp_filter;
use crate::nonlinear::{
    apply_polynomial, brillouin_reflect, kerr_phase_modulation, predict_products, raman_transfer,
    synthesize, KerrMode, MixingProduct, NonlinearMedium, Tone, ToneSet,
};
use crate::output::{columns_text, csv_text, json_text, Bundle, Cell};
use crate::series::{
    growth, load_csv, log_transform, CsvSchema, GrowthMode, GrowthSeries, TimeSeries,
};
use crate::spectral::{
    classify_peaks, find_peaks, harmonic_ratio_test, periodogram_with, Detrend, SpectralMethod,
    Spectrum, Taper,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_io() { EXIT_IO } else { EXIT_VALIDATION },
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Prefix an error with the option it came from, keeping its exit code.
trait OptionContext<T> {
    fn opt(self, option: &str) -> CliResult<T>;
}

impl<T> OptionContext<T> for crate::Result<T> {
    fn opt(self, option: &str) -> CliResult<T> {
        self.map_err(|e| {
            let mut c = CliError::from(e);
            c.message = format!("--{option}: {}", c.message);
            c
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bizcycle",
    version,
    about = "Business-cycle extraction and nonlinear cycle interaction"
)]
pub struct Cli {
    /// TOML file with run defaults (falls back to $BIZCYCLE_CONFIG).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hodrick-Prescott trend/cycle decomposition.
    Decompose(DecomposeArgs),
    /// Band-pass filter a series to one cycle band.
    Bandpass(BandpassArgs),
    /// Periodogram, peak detection and band classification.
    Spectrum(SpectrumArgs),
    /// Nonlinear-medium simulations.
    #[command(subcommand)]
    Mix(MixCommand),
    /// Embedded long-wave chronology and phase growth tables.
    #[command(subcommand)]
    Chronology(ChronologyCommand),
    /// First differences or percent growth of a level series.
    Growth(GrowthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with time and value columns.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Zero-based column holding the time.
    #[arg(long, default_value_t = 0)]
    pub time_column: usize,
    /// Zero-based column holding the value.
    #[arg(long, default_value_t = 1)]
    pub value_column: usize,
    /// Take natural logs of the values first.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Smoothing parameter (defaults by sampling step: 1600 quarterly, 100 annual).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Externally computed cycle to compare against.
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BandpassArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Band name, or NAME=MIN:MAX in years.
    #[arg(long, default_value = "Juglar")]
    pub band: String,
    /// Filter half-length K in samples.
    #[arg(long, allow_negative_numbers = true)]
    pub truncation: Option<i64>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// none, mean, linear or hp.
    #[arg(long)]
    pub detrend: Option<String>,
    /// λ for hp detrending.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// none or hann.
    #[arg(long)]
    pub taper: Option<String>,
    /// Half-overlapping segments to average.
    #[arg(long, allow_negative_numbers = true)]
    pub segments: Option<i64>,
    /// Zero-padding factor.
    #[arg(long, allow_negative_numbers = true)]
    pub padding: Option<i64>,
    /// Peak prominence threshold, as a multiple of the median power.
    #[arg(long, allow_negative_numbers = true)]
    pub min_prominence: Option<f64>,
    /// Relative tolerance of the harmonic-ratio report.
    #[arg(long, allow_negative_numbers = true)]
    pub harmonic_tol: Option<f64>,
    /// Band override NAME=MIN:MAX (repeatable).
    #[arg(long)]
    pub band: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Window start in years.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Window end in years (exclusive).
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Sampling step in years.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MediumArgs {
    /// JSON object with medium coefficients.
    #[arg(long, value_name = "PATH")]
    pub medium: Option<PathBuf>,
    /// Linear coefficient; overrides --medium.
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    /// Quadratic coefficient; overrides --medium.
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    /// Cubic coefficient; overrides --medium.
    #[arg(long, allow_negative_numbers = true)]
    pub a3: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum MixCommand {
    /// Predicted mixing products against the measured output spectrum.
    Products {
        /// JSON list of {amplitude, frequency, phase}.
        #[arg(long, value_name = "PATH")]
        tones: PathBuf,
        #[command(flatten)]
        medium: MediumArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Highest polynomial order expanded, 2 or 3.
        #[arg(long)]
        max_order: Option<u32>,
        /// Peak prominence threshold for the measured peak list.
        #[arg(long, allow_negative_numbers = true)]
        min_prominence: Option<f64>,
        /// Output directory, created if missing.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Self- or cross-phase modulation spectrum.
    Kerr {
        #[arg(long, value_name = "PATH")]
        tones: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// spm or xpm.
        #[arg(long, default_value = "spm")]
        mode: String,
        #[command(flatten)]
        window: WindowArgs,
        /// Output directory, created if missing.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Power transfer from the faster to the slower cycle.
    Raman {
        #[arg(long, allow_negative_numbers = true)]
        p_high: f64,
        #[arg(long, allow_negative_numbers = true)]
        p_low: f64,
        #[arg(long, allow_negative_numbers = true)]
        gain: f64,
        #[arg(long, allow_negative_numbers = true)]
        duration: Option<f64>,
        /// Integration step.
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        /// Output directory, created if missing.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Doppler-shifted back-reflection of each tone.
    Brillouin {
        #[arg(long, value_name = "PATH")]
        tones: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        reflectivity: f64,
        #[arg(long, allow_negative_numbers = true)]
        shift: f64,
        /// Output directory, created if missing.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChronologyCommand {
    /// Dump the embedded tables as JSON.
    Show {
        /// Write to a file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Average a growth series over the phase windows of the growth table.
    PhaseAverage {
        #[command(flatten)]
        input: InputArgs,
        /// Table version whose year windows to use: 1 or 2.
        #[arg(long, default_value = "1")]
        version: String,
        /// The input holds levels; convert to percent growth first.
        #[arg(long)]
        levels: bool,
        /// Write to a file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// absolute or percent.
    #[arg(long, default_value = "absolute")]
    pub mode: String,
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let config = Config::load(cli.config.as_deref()).opt("config")?;
    match &cli.command {
        Command::Decompose(a) => decompose(a, &config),
        Command::Bandpass(a) => bandpass(a, &config),
        Command::Spectrum(a) => spectrum(a, &config),
        Command::Mix(m) => mix(m, &config),
        Command::Chronology(c) => chronology(c),
        Command::Growth(a) => growth_cmd(a),
    }
}

fn read_series(path: &Path, input: &InputArgs, option: &str) -> CliResult<TimeSeries> {
    let file = File::open(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let schema = CsvSchema {
        time_column: input.time_column,
        value_column: input.value_column,
    };
    let series = load_csv(io::BufReader::new(file), &schema).opt(option)?;
    if input.log {
        log_transform(&series).opt("log")
    } else {
        Ok(series)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, option: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("--{option}: {}: {e}", path.display())))
}

fn write_bundle(bundle: &Bundle, dir: &Path) -> CliResult<()> {
    bundle.write_to(dir).map(|_| ()).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot write to {}: {e}", dir.display()),
    })
}

fn write_or_print(text: &str, out: Option<&Path>) -> CliResult<()> {
    let result = match out {
        Some(path) => std::fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot write output: {e}"),
    })
}

fn count_option(value: Option<i64>, fallback: usize, option: &str) -> CliResult<usize> {
    match value {
        None => Ok(fallback),
        Some(v) if v >= 1 => Ok(v as usize),
        Some(v) => Err(CliError::invalid(format!(
            "--{option} must be at least 1, got {v}"
        ))),
    }
}

fn series_rows(series: &TimeSeries) -> Vec<Vec<Cell>> {
    series
        .times()
        .zip(series.values())
        .map(|(t, v)| vec![Cell::Num(t), Cell::Num(*v)])
        .collect()
}

#[derive(Serialize)]
struct DecompositionSummary {
    lambda: f64,
    #[serde(rename = "T")]
    len: usize,
    objective_value: f64,
    start: f64,
    step: f64,
}

fn decompose(a: &DecomposeArgs, config: &Config) -> CliResult<()> {
    if let Some(l) = a.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(CliError::invalid(format!(
                "--lambda must be a finite non-negative number, got {l}"
            )));
        }
    }
    let series = read_series(&a.input.input, &a.input, "input")?;
    let reference = match &a.reference {
        Some(path) => Some(read_series(path, &a.input, "reference")?),
        None => None,
    };
    let lambda = match a.lambda.or_else(|| config.lambda_for_step(series.step())) {
        Some(l) => l,
        None => {
            return Err(CliError::invalid(format!(
                "--lambda is required for sampling step {}",
                series.step()
            )))
        }
    };
    let d = hp_filter(&series, lambda).opt("lambda")?;
    let diff = match &reference {
        Some(r) => Some(d.cycle_difference(r).opt("reference")?),
        None => None,
    };

    let mut bundle = Bundle::new();
    let rows = series.times().enumerate().map(|(i, t)| {
        vec![
            Cell::Num(t),
            Cell::Num(series.values()[i]),
            Cell::Num(d.trend.values()[i]),
            Cell::Num(d.cycle.values()[i]),
        ]
    });
    bundle.add(
        "decomposition.csv",
        csv_text(&["time", "y", "trend", "cycle"], rows)?,
    );
    bundle.add(
        "decomposition.json",
        json_text(&DecompositionSummary {
            lambda,
            len: series.len(),
            objective_value: d.objective(),
            start: series.start(),
            step: series.step(),
        })?,
    );
    let times: Vec<f64> = series.times().collect();
    bundle.add(
        "cycle.dat",
        columns_text("time cycle", &times, d.cycle.values()),
    );
    if let Some(diff) = diff {
        bundle.add(
            "cycle_difference.csv",
            csv_text(&["time", "difference"], series_rows(&diff))?,
        );
    }
    write_bundle(&bundle, &a.out)
}

fn bandpass(a: &BandpassArgs, config: &Config) -> CliResult<()> {
    let band = parse_band(&a.band).opt("band")?;
    let k = count_option(a.truncation, config.bandpass.truncation, "truncation")?;
    let series = read_series(&a.input.input, &a.input, "input")?;
    let weights = bandpass_weights(&band, series.step(), k).opt("band")?;
    let filtered = apply_weights(&series, &weights).opt("truncation")?;

    let mut bundle = Bundle::new();
    bundle.add(
        "filtered.csv",
        csv_text(&["time", "value"], series_rows(&filtered))?,
    );
    let rows = weights
        .lags()
        .map(|(lag, w)| vec![Cell::Int(lag as i64), Cell::Num(w)]);
    bundle.add("weights.csv", csv_text(&["lag", "weight"], rows)?);
    write_bundle(&bundle, &a.out)
}

#[derive(Serialize)]
struct PeakRow {
    frequency: f64,
    period: f64,
    power: f64,
    prominence: f64,
    band: BandName,
}

fn spectrum_rows(spectrum: &Spectrum) -> Vec<Vec<Cell>> {
    spectrum
        .frequencies()
        .iter()
        .zip(spectrum.power())
        .map(|(&f, &p)| vec![Cell::Num(f), Cell::Num(1.0 / f), Cell::Num(p)])
        .collect()
}

fn spectrum(a: &SpectrumArgs, config: &Config) -> CliResult<()> {
    let s = &config.spectral;
    let min_prominence = a.min_prominence.unwrap_or(s.min_prominence);
    if !(min_prominence >= 0.0 && min_prominence.is_finite()) {
        return Err(CliError::invalid(format!(
            "--min-prominence must be non-negative, got {min_prominence}"
        )));
    }
    let tol = a.harmonic_tol.unwrap_or(s.harmonic_tolerance);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::invalid(format!(
            "--harmonic-tol must be non-negative, got {tol}"
        )));
    }
    if let Some(l) = a.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(CliError::invalid(format!(
                "--lambda must be a finite non-negative number, got {l}"
            )));
        }
    }
    let taper: Taper = match &a.taper {
        Some(t) => t.parse().opt("taper")?,
        None => s.taper,
    };
    let segments = count_option(a.segments, s.segments, "segments")?;
    let padding = count_option(a.padding, s.padding, "padding")?;
    let overrides = a
        .band
        .iter()
        .map(|b| parse_band(b))
        .collect::<crate::Result<Vec<CycleBand>>>()
        .opt("band")?;
    let bands = config.bands(&overrides).opt("band")?;

    let series = read_series(&a.input.input, &a.input, "input")?;
    let detrend_name = a.detrend.as_deref().unwrap_or(&s.detrend);
    let lambda = a
        .lambda
        .or(s.detrend_lambda)
        .or_else(|| config.lambda_for_step(series.step()));
    let detrend: Detrend = parse_detrend(detrend_name, lambda).opt("detrend")?;
    let method = SpectralMethod {
        detrend,
        taper,
        segments,
        padding,
    };
    let spec = periodogram_with(&series, &method).opt("segments")?;
    let peaks = find_peaks(&spec, min_prominence);
    let classified = classify_peaks(&peaks, &bands).opt("band")?;

    let rows: Vec<PeakRow> = classified
        .iter()
        .map(|c| PeakRow {
            frequency: c.peak.frequency,
            period: c.peak.period,
            power: c.peak.power,
            prominence: c.peak.prominence,
            band: c.band,
        })
        .collect();
    // strongest peak of each band; peaks are sorted by descending power
    let strongest = |name: BandName| rows.iter().find(|r| r.band == name);
    let harmonic = match (
        strongest(BandName::Kondratieff),
        strongest(BandName::Kuznets),
    ) {
        (Some(k), Some(z)) if z.frequency >= k.frequency => {
            Some(harmonic_ratio_test(k.frequency, z.frequency, 3, tol).opt("harmonic-tol")?)
        }
        _ => None,
    };

    let mut bundle = Bundle::new();
    bundle.add(
        "spectrum.csv",
        csv_text(&["frequency", "period", "power"], spectrum_rows(&spec))?,
    );
    bundle.add("peaks.json", json_text(&rows)?);
    if let Some(h) = harmonic {
        bundle.add("harmonic.json", json_text(&h)?);
    }
    write_bundle(&bundle, &a.out)
}

struct Window {
    t0: f64,
    t1: f64,
    dt: f64,
}

fn window(w: &WindowArgs, config: &Config) -> Window {
    Window {
        t0: w.t0.unwrap_or(config.mix.t0),
        t1: w.t1.unwrap_or(config.mix.t1),
        dt: w.dt.unwrap_or(config.mix.dt),
    }
}

fn read_medium(m: &MediumArgs) -> CliResult<NonlinearMedium> {
    let mut medium = match &m.medium {
        Some(path) => read_json::<NonlinearMedium>(path, "medium")?,
        None => NonlinearMedium::default(),
    };
    if let Some(v) = m.a1 {
        medium.a1 = v;
    }
    if let Some(v) = m.a2 {
        medium.a2 = v;
    }
    if let Some(v) = m.a3 {
        medium.a3 = v;
    }
    medium.validate().opt("medium")?;
    Ok(medium)
}

#[derive(Serialize)]
struct ComparisonRow {
    kind: String,
    frequency: f64,
    parents: String,
    predicted_amplitude: f64,
    bin_frequency: f64,
    bin_predicted_amplitude: f64,
    measured_amplitude: f64,
    relative_error: f64,
}

/// Predicted against measured amplitude per product. Products sharing a
/// spectral bin are compared through their coherent sum.
fn comparison(products: &[MixingProduct], spectrum: &Spectrum) -> Vec<ComparisonRow> {
    let bins: Vec<usize> = products
        .iter()
        .map(|p| spectrum.nearest_bin(p.frequency))
        .collect();
    products
        .iter()
        .zip(&bins)
        .map(|(p, &bin)| {
            let combined: Complex64 = products
                .iter()
                .zip(&bins)
                .filter(|(_, &b)| b == bin)
                .map(|(q, _)| Complex64::from_polar(q.amplitude, q.phase))
                .sum();
            let predicted = combined.norm();
            let measured = spectrum.amplitude_at(bin);
            let relative_error = if predicted > 0.0 {
                (measured - predicted).abs() / predicted
            } else {
                measured
            };
            ComparisonRow {
                kind: p.kind.to_string(),
                frequency: p.frequency,
                parents: p
                    .parents
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                predicted_amplitude: p.amplitude,
                bin_frequency: spectrum.frequencies()[bin],
                bin_predicted_amplitude: predicted,
                measured_amplitude: measured,
                relative_error,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct KerrReport {
    mode: KerrMode,
    kappa: f64,
    input_total_power: f64,
    output_total_power: f64,
    relative_power_change: f64,
    input_bandwidth_20db: f64,
    output_bandwidth_20db: f64,
}

#[derive(Serialize)]
struct RamanReport {
    gain: f64,
    duration: f64,
    dt: f64,
    steps: usize,
    final_p_high: f64,
    final_p_low: f64,
    max_total_drift: f64,
    max_relative_step_change: f64,
}

#[derive(Serialize)]
struct Reflection {
    incident: Tone,
    reflected: Tone,
    incident_power: f64,
    reflected_power: f64,
}

fn mix(m: &MixCommand, config: &Config) -> CliResult<()> {
    match m {
        MixCommand::Products {
            tones,
            medium,
            window: w,
            max_order,
            min_prominence,
            out,
        } => {
            let medium = read_medium(medium)?;
            let order = max_order.unwrap_or(config.mix.max_order);
            let min_prominence = min_prominence.unwrap_or(config.spectral.min_prominence);
            if !(min_prominence >= 0.0 && min_prominence.is_finite()) {
                return Err(CliError::invalid(format!(
                    "--min-prominence must be non-negative, got {min_prominence}"
                )));
            }
            let tones: ToneSet = read_json(tones, "tones")?;
            let w = window(w, config);
            let input = synthesize(&tones, w.t0, w.t1, w.dt).opt("dt")?;
            let output = apply_polynomial(&input, &medium).opt("medium")?;
            let products = predict_products(&tones, &medium, order).opt("max-order")?;
            let spec = periodogram_with(&output, &SpectralMethod::new(Detrend::None, Taper::None))
                .opt("dt")?;
            let peaks = find_peaks(&spec, min_prominence);

            let mut bundle = Bundle::new();
            bundle.add("products.json", json_text(&products)?);
            let rows = input.times().enumerate().map(|(i, t)| {
                vec![
                    Cell::Num(t),
                    Cell::Num(input.values()[i]),
                    Cell::Num(output.values()[i]),
                ]
            });
            bundle.add("series.csv", csv_text(&["time", "input", "output"], rows)?);
            bundle.add(
                "spectrum.csv",
                csv_text(&["frequency", "period", "power"], spectrum_rows(&spec))?,
            );
            bundle.add("peaks.json", json_text(&peaks)?);
            let report = comparison(&products, &spec);
            let rows = report.iter().map(|r| {
                vec![
                    Cell::from(r.kind.as_str()),
                    Cell::Num(r.frequency),
                    Cell::from(r.parents.as_str()),
                    Cell::Num(r.predicted_amplitude),
                    Cell::Num(r.bin_frequency),
                    Cell::Num(r.bin_predicted_amplitude),
                    Cell::Num(r.measured_amplitude),
                    Cell::Num(r.relative_error),
                ]
            });
            bundle.add(
                "comparison.csv",
                csv_text(
                    &[
                        "kind",
                        "frequency",
                        "parents",
                        "predicted_amplitude",
                        "bin_frequency",
                        "bin_predicted_amplitude",
                        "measured_amplitude",
                        "relative_error",
                    ],
                    rows,
                )?,
            );
            bundle.add("comparison.json", json_text(&report)?);
            write_bundle(&bundle, out)
        }
        MixCommand::Kerr {
            tones,
            kappa,
            mode,
            window: w,
            out,
        } => {
            if !(*kappa >= 0.0 && kappa.is_finite()) {
                return Err(CliError::invalid(format!(
                    "--kappa must be finite and non-negative, got {kappa}"
                )));
            }
            let mode: KerrMode = mode.parse().opt("mode")?;
            let tones: ToneSet = read_json(tones, "tones")?;
            let w = window(w, config);
            let before = kerr_phase_modulation(&tones, 0.0, mode, w.t0, w.t1, w.dt).opt("dt")?;
            let after = kerr_phase_modulation(&tones, *kappa, mode, w.t0, w.t1, w.dt).opt("dt")?;
            let p_in = before.total_power();
            let p_out = after.total_power();
            let report = KerrReport {
                mode,
                kappa: *kappa,
                input_total_power: p_in,
                output_total_power: p_out,
                relative_power_change: if p_in > 0.0 {
                    (p_out - p_in) / p_in
                } else {
                    0.0
                },
                input_bandwidth_20db: before.bandwidth_db(20.0),
                output_bandwidth_20db: after.bandwidth_db(20.0),
            };
            let mut bundle = Bundle::new();
            bundle.add(
                "spectrum.csv",
                csv_text(&["frequency", "period", "power"], spectrum_rows(&after))?,
            );
            bundle.add("kerr.json", json_text(&report)?);
            write_bundle(&bundle, out)
        }
        MixCommand::Raman {
            p_high,
            p_low,
            gain,
            duration,
            dt,
            out,
        } => {
            let duration = duration.unwrap_or(config.mix.raman_duration);
            let dt = dt.unwrap_or(config.mix.raman_dt);
            let traj = raman_transfer(*p_high, *p_low, *gain, duration, dt).opt("gain")?;
            let total0 = p_high + p_low;
            let drift = traj
                .p_high
                .iter()
                .zip(&traj.p_low)
                .map(|(h, l)| (h + l - total0).abs())
                .fold(0.0, f64::max);
            let report = RamanReport {
                gain: *gain,
                duration,
                dt,
                steps: traj.times.len() - 1,
                final_p_high: *traj.p_high.last().unwrap_or(p_high),
                final_p_low: *traj.p_low.last().unwrap_or(p_low),
                max_total_drift: drift,
                max_relative_step_change: traj.max_relative_step_change,
            };
            let rows = traj.times.iter().enumerate().map(|(i, &t)| {
                vec![
                    Cell::Num(t),
                    Cell::Num(traj.p_high[i]),
                    Cell::Num(traj.p_low[i]),
                ]
            });
            let mut bundle = Bundle::new();
            bundle.add("trajectory.csv", csv_text(&["t", "P_high", "P_low"], rows)?);
            bundle.add("raman.json", json_text(&report)?);
            write_bundle(&bundle, out)
        }
        MixCommand::Brillouin {
            tones,
            reflectivity,
            shift,
            out,
        } => {
            let medium = NonlinearMedium {
                sbs_reflectivity: *reflectivity,
                sbs_doppler_shift: *shift,
                ..NonlinearMedium::default()
            };
            medium.validate().opt("reflectivity")?;
            let tones: ToneSet = read_json(tones, "tones")?;
            let rows = tones
                .tones()
                .iter()
                .map(|t| {
                    let r = brillouin_reflect(t, &medium).opt("shift")?;
                    Ok(Reflection {
                        incident: *t,
                        reflected: r,
                        incident_power: t.amplitude * t.amplitude / 2.0,
                        reflected_power: r.amplitude * r.amplitude / 2.0,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let mut bundle = Bundle::new();
            bundle.add("reflected.json", json_text(&rows)?);
            write_bundle(&bundle, out)
        }
    }
}

#[derive(Serialize)]
struct ChronologyDump {
    version: &'static str,
    chronology: Chronology,
    table_rows: Vec<WavePhase>,
    phase_growth: Vec<PhaseGrowthRecord>,
}

#[derive(Serialize)]
struct PhaseAverageRow {
    wave_number: u8,
    phase: GrowthPhase,
    start: f64,
    end: f64,
    table_rate: f64,
    average: f64,
}

fn chronology(c: &ChronologyCommand) -> CliResult<()> {
    match c {
        ChronologyCommand::Show { out } => {
            let dump = ChronologyDump {
                version: CHRONOLOGY_VERSION,
                chronology: builtin_chronology(),
                table_rows: table_rows(),
                phase_growth: builtin_phase_growth(),
            };
            write_or_print(&json_text(&dump)?, out.as_deref())
        }
        ChronologyCommand::PhaseAverage {
            input,
            version,
            levels,
            out,
        } => {
            let version: TableVersion = version.parse().opt("version")?;
            let series = read_series(&input.input, input, "input")?;
            let g: GrowthSeries = if *levels {
                growth(&series, GrowthMode::PercentGrowth).opt("input")?
            } else {
                GrowthSeries::from_series(&series, GrowthMode::PercentGrowth)
            };
            let windows = growth_windows(version);
            let averages = phase_average_growth(&g, &windows).opt("input")?;
            let rows: Vec<PhaseAverageRow> = builtin_phase_growth()
                .iter()
                .zip(&windows)
                .zip(&averages)
                .map(|((r, w), avg)| PhaseAverageRow {
                    wave_number: r.wave_number,
                    phase: r.phase,
                    start: w.0,
                    end: w.1,
                    table_rate: r.rate(version),
                    average: *avg,
                })
                .collect();
            write_or_print(&json_text(&rows)?, out.as_deref())
        }
    }
}

fn growth_cmd(a: &GrowthArgs) -> CliResult<()> {
    let mode = match a.mode.to_ascii_lowercase().as_str() {
        "absolute" | "absolute-difference" => GrowthMode::AbsoluteDifference,
        "percent" | "percent-growth" => GrowthMode::PercentGrowth,
        other => {
            return Err(CliError::invalid(format!(
                "--mode must be absolute or percent, got {other:?}"
            )))
        }
    };
    let series = read_series(&a.input.input, &a.input, "input")?;
    let g = growth(&series, mode).opt("mode")?;
    let rows = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| vec![Cell::Num(g.time_at(i)), Cell::Num(*v)]);
    let text = csv_text(&["time", "growth"], rows)?;
    write_or_print(&text, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn io_errors_map_to_exit_one() {
        let e: CliError = Error::Io(io::Error::other("x")).into();
        assert_eq!(e.code, EXIT_IO);
        let e: CliError = Error::Domain("x".into()).into();
        assert_eq!(e.code, EXIT_VALIDATION);
    }

    #[test]
    fn option_name_is_prefixed() {
        let r: crate::Result<()> = Err(Error::Domain("bad".into()));
        assert_eq!(
            r.opt("lambda").unwrap_err().message,
            "--lambda: domain error: bad"
        );
    }
}
