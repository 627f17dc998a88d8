//! Business-cycle tones passing through a nonlinear medium.
//!
//! The medium is a memoryless cubic `y = a1 x + a2 x² + a3 x³` plus three
//! separately parameterized effects: Kerr-type phase modulation (SPM/XPM),
//! a Raman-like power transfer from the faster to the slower cycle, and a
//! Brillouin-like Doppler-shifted reflection.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::spectral::{complex_field_spectrum, Detrend, SpectralMethod, Spectrum, Taper};

/// Relative tolerance under which two tone frequencies count as equal.
pub const FREQUENCY_EPS: f64 = 1e-12;

/// Kerr modulation requires `dt ≤ 1 / (2 · KERR_GUARD · f_max)`.
pub const KERR_GUARD: f64 = 4.0;

fn wrap_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if p >= TAU {
        0.0
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: f64,
    /// Cycles per year.
    pub frequency: f64,
    /// Radians, normalized to `[0, 2π)`.
    #[serde(default)]
    pub phase: f64,
}

impl Tone {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Domain(format!(
                "tone amplitude must be finite and non-negative, got {amplitude}"
            )));
        }
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::Domain(format!(
                "tone frequency must be positive, got {frequency}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::Domain(format!(
                "tone phase must be finite, got {phase}"
            )));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase: wrap_phase(phase),
        })
    }

    pub fn angle(&self, t: f64) -> f64 {
        TAU * self.frequency * t + self.phase
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.angle(t).cos()
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct ToneSet {
    tones: Vec<Tone>,
}

impl<'de> Deserialize<'de> for ToneSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Tone>::deserialize(d)?;
        let tones = raw
            .into_iter()
            .map(|t| Tone::new(t.amplitude, t.frequency, t.phase))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        ToneSet::new(tones).map_err(serde::de::Error::custom)
    }
}

impl ToneSet {
    pub fn new(tones: Vec<Tone>) -> Result<Self> {
        for (i, a) in tones.iter().enumerate() {
            for b in &tones[i + 1..] {
                let scale = a.frequency.abs().max(b.frequency.abs());
                if (a.frequency - b.frequency).abs() <= FREQUENCY_EPS * scale {
                    return Err(Error::Domain(format!(
                        "tone frequencies must be distinct, {} appears twice",
                        a.frequency
                    )));
                }
            }
        }
        Ok(Self { tones })
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    pub fn max_frequency(&self) -> f64 {
        self.tones.iter().map(|t| t.frequency).fold(0.0, f64::max)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.tones.iter().map(|tone| tone.value(t)).sum()
    }
}

fn one() -> f64 {
    1.0
}

/// Medium coefficients. Every effect defaults to off and the polynomial
/// defaults to the identity (`a1 = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearMedium {
    #[serde(default = "one")]
    pub a1: f64,
    #[serde(default)]
    pub a2: f64,
    #[serde(default)]
    pub a3: f64,
    #[serde(default)]
    pub kerr_kappa: f64,
    #[serde(default)]
    pub raman_gain: f64,
    #[serde(default)]
    pub sbs_reflectivity: f64,
    #[serde(default)]
    pub sbs_doppler_shift: f64,
}

impl Default for NonlinearMedium {
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 0.0,
            a3: 0.0,
            kerr_kappa: 0.0,
            raman_gain: 0.0,
            sbs_reflectivity: 0.0,
            sbs_doppler_shift: 0.0,
        }
    }
}

impl NonlinearMedium {
    pub fn polynomial(a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            a1,
            a2,
            a3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("kerr_kappa", self.kerr_kappa),
            ("raman_gain", self.raman_gain),
            ("sbs_reflectivity", self.sbs_reflectivity),
            ("sbs_doppler_shift", self.sbs_doppler_shift),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be finite, got {v}")));
        }
        if !(0.0..=1.0).contains(&self.sbs_reflectivity) {
            return Err(Error::Domain(format!(
                "sbs_reflectivity must lie in [0, 1], got {}",
                self.sbs_reflectivity
            )));
        }
        if self.sbs_doppler_shift < 0.0 {
            return Err(Error::Domain(format!(
                "sbs_doppler_shift must be non-negative, got {}",
                self.sbs_doppler_shift
            )));
        }
        if self.kerr_kappa < 0.0 {
            return Err(Error::Domain(format!(
                "kerr_kappa must be non-negative, got {}",
                self.kerr_kappa
            )));
        }
        if self.raman_gain < 0.0 {
            return Err(Error::Domain(format!(
                "raman_gain must be non-negative, got {}",
                self.raman_gain
            )));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.a2 == 0.0 && self.a3 == 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        x * (self.a1 + x * (self.a2 + x * self.a3))
    }
}

fn sample_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Domain(format!("need t1 > t0, got [{t0}, {t1})")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let n = ((t1 - t0) / dt - 1e-9).ceil() as usize;
    if n < 2 {
        return Err(Error::Size(format!(
            "window [{t0}, {t1}) with dt {dt} yields fewer than 2 samples"
        )));
    }
    Ok(n)
}

fn check_nyquist(tones: &ToneSet, dt: f64, guard: f64) -> Result<()> {
    let fmax = tones.max_frequency();
    if fmax > 0.0 && dt > 1.0 / (2.0 * guard * fmax) {
        return Err(Error::Nyquist(format!(
            "dt {dt} is too coarse for tone frequency {fmax}: need dt <= {}",
            1.0 / (2.0 * guard * fmax)
        )));
    }
    Ok(())
}

/// Sample `Σ A_i cos(2π f_i t + φ_i)` on `t = t0 + k dt` for `t` in `[t0, t1)`.
pub fn synthesize(tones: &ToneSet, t0: f64, t1: f64, dt: f64) -> Result<TimeSeries> {
    let n = sample_count(t0, t1, dt)?;
    check_nyquist(tones, dt, 1.0)?;
    let values = par_range_map!(0..n, |k| tones.value(t0 + k as f64 * dt));
    TimeSeries::new(t0, dt, values)
}

/// Pass a series through the memoryless cubic `a1 x + a2 x² + a3 x³`.
pub fn apply_polynomial(series: &TimeSeries, medium: &NonlinearMedium) -> Result<TimeSeries> {
    let values = par_map!(series.values(), |&x| medium.eval(x));
    series.with_values(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProductKind {
    Fundamental,
    Harmonic2,
    Harmonic3,
    #[serde(rename = "IMD_sum")]
    ImdSum,
    #[serde(rename = "IMD_diff")]
    ImdDiff,
    /// `2 f1 - f2` for `f1 < f2`.
    #[serde(rename = "FWM_low")]
    FwmLow,
    /// `2 f2 - f1` for `f1 < f2`.
    #[serde(rename = "FWM_high")]
    FwmHigh,
    /// `2 f1 + f2`
    #[serde(rename = "IMD3_sum_low")]
    Imd3SumLow,
    /// `2 f2 + f1`
    #[serde(rename = "IMD3_sum_high")]
    Imd3SumHigh,
    /// `±f_i ± f_j ± f_k` for three distinct tones.
    #[serde(rename = "Triple")]
    Triple,
    #[serde(rename = "DC")]
    Dc,
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// A spectral line produced by the medium: `amplitude · cos(2π f t + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProduct {
    pub kind: ProductKind,
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Indices into the source [`ToneSet`].
    pub parents: Vec<usize>,
}

impl MixingProduct {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).cos()
    }
}

struct ProductTable<'a> {
    tones: &'a [Tone],
    out: Vec<MixingProduct>,
}

impl ProductTable<'_> {
    /// Add `coeff · cos(Σ m_i θ_i)`, folding sign and negative frequency.
    fn push(&mut self, kind: ProductKind, terms: &[(usize, i32)], coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let mut frequency = 0.0;
        let mut phase = 0.0;
        for &(i, m) in terms {
            frequency += m as f64 * self.tones[i].frequency;
            phase += m as f64 * self.tones[i].phase;
        }
        let mut amplitude = coeff;
        if amplitude < 0.0 {
            amplitude = -amplitude;
            phase += PI;
        }
        if frequency < 0.0 {
            frequency = -frequency;
            phase = -phase;
        }
        let mut parents: Vec<usize> = terms.iter().map(|&(i, _)| i).collect();
        parents.dedup();
        self.out.push(MixingProduct {
            kind,
            frequency,
            amplitude,
            phase: wrap_phase(phase),
            parents,
        });
    }
}

/// Closed-form line table of `a1 x + a2 x² + a3 x³` for `x = Σ A_i cos θ_i`.
///
/// With `max_order = 2` the cubic coefficient is ignored. Entries with zero
/// amplitude are omitted; coinciding frequencies are kept as separate rows.
pub fn predict_products(
    tones: &ToneSet,
    medium: &NonlinearMedium,
    max_order: u32,
) -> Result<Vec<MixingProduct>> {
    if !(max_order == 2 || max_order == 3) {
        return Err(Error::Domain(format!(
            "max_order must be 2 or 3, got {max_order}"
        )));
    }
    if tones.is_empty() {
        return Err(Error::Size("need at least one tone".into()));
    }
    medium.validate()?;
    let a1 = medium.a1;
    let a2 = medium.a2;
    let a3 = if max_order == 3 { medium.a3 } else { 0.0 };

    // Pairs are ordered by frequency so that FWM_low is always 2 f_low - f_high.
    let mut order: Vec<usize> = (0..tones.len()).collect();
    order.sort_by(|&i, &j| {
        tones.tones()[i]
            .frequency
            .total_cmp(&tones.tones()[j].frequency)
    });
    let amp = |i: usize| tones.tones()[i].amplitude;

    let mut table = ProductTable {
        tones: tones.tones(),
        out: Vec::new(),
    };

    let dc: f64 = order.iter().map(|&i| amp(i) * amp(i)).sum::<f64>() * a2 / 2.0;
    if dc != 0.0 {
        table.out.push(MixingProduct {
            kind: ProductKind::Dc,
            frequency: 0.0,
            amplitude: dc.abs(),
            phase: if dc < 0.0 { PI } else { 0.0 },
            parents: order.clone(),
        });
    }

    for &i in &order {
        let a = amp(i);
        let cross: f64 = order
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| amp(j) * amp(j))
            .sum();
        let fundamental = a1 * a + 0.75 * a3 * a * a * a + 1.5 * a3 * a * cross;
        table.push(ProductKind::Fundamental, &[(i, 1)], fundamental);
        table.push(ProductKind::Harmonic2, &[(i, 2)], a2 * a * a / 2.0);
        table.push(ProductKind::Harmonic3, &[(i, 3)], a3 * a * a * a / 4.0);
    }

    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            let (ai, aj) = (amp(i), amp(j));
            table.push(ProductKind::ImdSum, &[(j, 1), (i, 1)], a2 * ai * aj);
            table.push(ProductKind::ImdDiff, &[(j, 1), (i, -1)], a2 * ai * aj);
            table.push(
                ProductKind::FwmLow,
                &[(i, 2), (j, -1)],
                0.75 * a3 * ai * ai * aj,
            );
            table.push(
                ProductKind::FwmHigh,
                &[(j, 2), (i, -1)],
                0.75 * a3 * aj * aj * ai,
            );
            table.push(
                ProductKind::Imd3SumLow,
                &[(i, 2), (j, 1)],
                0.75 * a3 * ai * ai * aj,
            );
            table.push(
                ProductKind::Imd3SumHigh,
                &[(j, 2), (i, 1)],
                0.75 * a3 * aj * aj * ai,
            );
        }
    }

    for (p, &i) in order.iter().enumerate() {
        for (q, &j) in order.iter().enumerate().skip(p + 1) {
            for &k in &order[q + 1..] {
                let c = 1.5 * a3 * amp(i) * amp(j) * amp(k);
                table.push(ProductKind::Triple, &[(i, 1), (j, 1), (k, 1)], c);
                table.push(ProductKind::Triple, &[(i, -1), (j, 1), (k, 1)], c);
                table.push(ProductKind::Triple, &[(i, 1), (j, -1), (k, 1)], c);
                table.push(ProductKind::Triple, &[(i, 1), (j, 1), (k, -1)], c);
            }
        }
    }

    Ok(table.out)
}

/// Sum of all product lines at time `t`.
pub fn evaluate_products(products: &[MixingProduct], t: f64) -> f64 {
    products.iter().map(|p| p.value(t)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KerrMode {
    /// Each tone is phase-shifted by its own instantaneous power.
    Spm,
    /// Each tone is phase-shifted by the other tones' instantaneous power.
    Xpm,
}

impl std::str::FromStr for KerrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spm" => Ok(KerrMode::Spm),
            "xpm" => Ok(KerrMode::Xpm),
            _ => Err(Error::Config(format!("unknown Kerr mode {s:?}"))),
        }
    }
}

/// Per-tone complex fields after Kerr phase modulation.
///
/// Tone `i` is carried as `z_i(t) = A_i e^{iθ_i(t)}`. Its instantaneous power
/// is `P_i(t) = 2 (Re z_i)² = A_i² (1 + cos 2θ_i)`, whose cycle average is
/// the envelope power `A_i²`. SPM multiplies `z_i` by `exp(iκ P_i)`, XPM by
/// `exp(iκ Σ_{j≠i} P_j)`. Only phases change, so `|z_i|` is untouched.
pub fn kerr_fields(
    tones: &ToneSet,
    kappa: f64,
    mode: KerrMode,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<Vec<Complex64>>> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!(
            "kappa must be finite and non-negative, got {kappa}"
        )));
    }
    let n = sample_count(t0, t1, dt)?;
    check_nyquist(tones, dt, KERR_GUARD)?;
    let ts = tones.tones();
    let indices: Vec<usize> = (0..ts.len()).collect();
    Ok(par_map!(indices, |&i| {
        (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                let theta = ts[i].angle(t);
                let inst = |tone: &Tone| {
                    let x = tone.value(t);
                    2.0 * x * x
                };
                let power = match mode {
                    KerrMode::Spm => inst(&ts[i]),
                    KerrMode::Xpm => ts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, tone)| inst(tone))
                        .sum(),
                };
                Complex64::from_polar(ts[i].amplitude, theta + kappa * power)
            })
            .collect::<Vec<_>>()
    }))
}

/// Spectrum of the summed Kerr-modulated field.
pub fn kerr_phase_modulation(
    tones: &ToneSet,
    kappa: f64,
    mode: KerrMode,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Spectrum> {
    let fields = kerr_fields(tones, kappa, mode, t0, t1, dt)?;
    let n = sample_count(t0, t1, dt)?;
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    for field in &fields {
        for (acc, z) in total.iter_mut().zip(field) {
            *acc += z;
        }
    }
    complex_field_spectrum(&total, dt, SpectralMethod::new(Detrend::None, Taper::None))
}

/// Sampled Raman-like exchange between a fast and a slow cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanTrajectory {
    pub times: Vec<f64>,
    pub p_high: Vec<f64>,
    pub p_low: Vec<f64>,
    /// Largest relative change of either power over one step. Values near or
    /// above 1 mean the step is too coarse for the chosen gain.
    pub max_relative_step_change: f64,
}

type State = [f64; 2];

fn rk4_step<F: Fn(&State) -> State>(f: &F, y: &State, h: f64) -> State {
    let k1 = f(y);
    let k2 = f(&[y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f(&[y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f(&[y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrate `dP_h/dt = -g P_h P_l`, `dP_l/dt = g P_h P_l` with classical RK4.
///
/// Both derivatives are the same product with opposite sign, so each stage
/// leaves `P_h + P_l` unchanged up to rounding.
pub fn raman_transfer(
    p_high: f64,
    p_low: f64,
    gain: f64,
    duration: f64,
    dt: f64,
) -> Result<RamanTrajectory> {
    for (name, v) in [
        ("p_high", p_high),
        ("p_low", p_low),
        ("gain", gain),
        ("duration", duration),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let steps = (duration / dt).round() as usize;
    let rhs = |y: &State| {
        let flow = gain * y[0] * y[1];
        [-flow, flow]
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut high = Vec::with_capacity(steps + 1);
    let mut low = Vec::with_capacity(steps + 1);
    let mut y = [p_high, p_low];
    let mut max_change = 0.0f64;
    times.push(0.0);
    high.push(y[0]);
    low.push(y[1]);
    for k in 1..=steps {
        let next = rk4_step(&rhs, &y, dt);
        for c in 0..2 {
            if y[c] != 0.0 {
                max_change = max_change.max(((next[c] - y[c]) / y[c]).abs());
            }
        }
        y = next;
        times.push(k as f64 * dt);
        high.push(y[0]);
        low.push(y[1]);
    }
    Ok(RamanTrajectory {
        times,
        p_high: high,
        p_low: low,
        max_relative_step_change: max_change,
    })
}

/// Reflect a tone off a moving grating: amplitude scaled by the
/// reflectivity, frequency shifted down by the Doppler shift.
pub fn brillouin_reflect(tone: &Tone, medium: &NonlinearMedium) -> Result<Tone> {
    medium.validate()?;
    if medium.sbs_doppler_shift >= tone.frequency {
        return Err(Error::Domain(format!(
            "Doppler shift {} must be below the tone frequency {}",
            medium.sbs_doppler_shift, tone.frequency
        )));
    }
    Tone::new(
        medium.sbs_reflectivity * tone.amplitude,
        tone.frequency - medium.sbs_doppler_shift,
        tone.phase,
    )
}
