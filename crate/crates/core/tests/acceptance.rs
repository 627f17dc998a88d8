//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bizcycle::bandpass::{
    apply_bandpass, bandpass_weights, canonical_bands, classify_period, BandName, CycleBand,
};
use bizcycle::chronology::{
    builtin_chronology, builtin_phase_growth, table_rows, Chronology, GrowthPhase, PhaseKind,
    SourceTable, YearRange,
};
use bizcycle::hp::hp_filter;
use bizcycle::nonlinear::{
    apply_polynomial, brillouin_reflect, kerr_phase_modulation, predict_products, raman_transfer,
    synthesize, KerrMode, NonlinearMedium, ProductKind, Tone, ToneSet,
};
use bizcycle::spectral::{
    classify_peaks, detrend_values, find_peaks, harmonic_ratio_test, periodogram, Detrend, Taper,
    DEFAULT_MIN_PROMINENCE_RATIO,
};
use bizcycle::TimeSeries;
use common::{fitted_amplitude, hp_trend_dense, max_abs, max_abs_diff, pearson, response};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<F: FnOnce() -> Outcome>(limit: Option<Duration>, f: F) -> Outcome {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    match (result, limit) {
        (Ok(d), Some(l)) if took > l => Err(format!("{d}; took {took:?}, limit {l:?}")),
        (Ok(d), Some(_)) => Ok(format!("{d}; {took:?}")),
        (r, _) => r,
    }
}

fn series(start: f64, step: f64, values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(start, step, values).unwrap()
}

fn hp_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = rng.random_range(10..=200);
        let lambda = [6.25, 100.0, 1600.0][i % 3];
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let d = hp_filter(&series(0.0, 1.0, y.clone()), lambda).unwrap();
        worst = worst.max(max_abs_diff(d.trend.values(), &hp_trend_dense(&y, lambda)));
    }
    check(worst <= 1e-8, format!("max |banded - dense| = {worst:e}"))
}

fn hp_limits() -> Outcome {
    let y: Vec<f64> = (0..80).map(|t| ((t * 37) % 11) as f64 - 5.0).collect();
    let zero = hp_filter(&series(0.0, 1.0, y), 0.0).unwrap();
    let exact_zero = zero.cycle.values().iter().all(|&c| c == 0.0);
    let line: Vec<f64> = (0..120).map(|t| 3.0 + 0.5 * t as f64).collect();
    let big = hp_filter(&series(0.0, 1.0, line.clone()), 1e12).unwrap();
    let rel = max_abs(big.cycle.values()) / max_abs(&line);
    check(
        exact_zero && rel <= 1e-6,
        format!("lambda=0 cycle exactly zero: {exact_zero}; lambda=1e12 max|c|/max|y| = {rel:e}"),
    )
}

fn cycle_recovery() -> Outcome {
    let step = 0.25;
    let t: Vec<f64> = (0..200).map(|i| i as f64 * step).collect();
    let truth: Vec<f64> = t.iter().map(|t| (2.0 * PI * t / 8.0).sin()).collect();
    let y: Vec<f64> = t
        .iter()
        .zip(&truth)
        .map(|(t, c)| 100.0 + 1.5 * t + 0.02 * t * t + c)
        .collect();
    let d = hp_filter(&series(1960.0, step, y), 1600.0).unwrap();
    let r = pearson(d.cycle.values(), &truth);
    check(r >= 0.95, format!("correlation {r:.6}"))
}

fn fwm_signature() -> Outcome {
    let tones = ToneSet::new(vec![
        Tone::new(1.0, 0.10, 0.0).unwrap(),
        Tone::new(1.0, 0.14, 0.0).unwrap(),
    ])
    .unwrap();
    let a3 = 1.0;
    let medium = NonlinearMedium::polynomial(0.0, 0.0, a3);
    let out = apply_polynomial(&synthesize(&tones, 0.0, 1000.0, 0.25).unwrap(), &medium).unwrap();
    let spec = periodogram(&out, Detrend::None, Taper::None).unwrap();
    let peaks = find_peaks(&spec, DEFAULT_MIN_PROMINENCE_RATIO);
    let predicted = predict_products(&tones, &medium, 3).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for (kind, f) in [(ProductKind::FwmLow, 0.06), (ProductKind::FwmHigh, 0.18)] {
        let peak = peaks.iter().find(|p| (p.frequency - f).abs() <= spec.df());
        let pred = predicted
            .iter()
            .find(|p| p.kind == kind)
            .map(|p| p.amplitude);
        match (peak, pred) {
            (Some(p), Some(a)) => {
                let measured = spec.amplitude_at(spec.nearest_bin(p.frequency));
                let err = (measured - 0.75 * a3).abs() / (0.75 * a3);
                ok &= err <= 0.02 && (a - 0.75 * a3).abs() <= 1e-12;
                notes.push(format!(
                    "{kind} peak {} amp {measured:.6} (err {err:.1e})",
                    p.frequency
                ));
            }
            _ => {
                ok = false;
                notes.push(format!("{kind} missing"));
            }
        }
    }
    check(ok, notes.join(", "))
}

fn third_harmonic() -> Outcome {
    let tones = ToneSet::new(vec![Tone::new(1.0, 1.0 / 54.0, 0.0).unwrap()]).unwrap();
    let medium = NonlinearMedium::polynomial(1.0, 0.0, 0.5);
    let out = apply_polynomial(&synthesize(&tones, 0.0, 1080.0, 1.0).unwrap(), &medium).unwrap();
    let spec = periodogram(&out, Detrend::Mean, Taper::None).unwrap();
    let peaks = find_peaks(&spec, DEFAULT_MIN_PROMINENCE_RATIO);
    let classified = classify_peaks(&peaks, &canonical_bands()).unwrap();
    let h3 = classified
        .iter()
        .find(|c| (c.peak.period - 18.0).abs() <= 1e-9);
    let h = harmonic_ratio_test(1.0 / 54.0, 1.0 / 18.0, 3, 0.05).unwrap();
    match h3 {
        Some(c) => check(
            c.band == BandName::Kuznets && h.pass && h.ratio == 3.0,
            format!(
                "product period {} labelled {}; ratio {} pass {}",
                c.peak.period, c.band, h.ratio, h.pass
            ),
        ),
        None => Err("no spectral peak at period 18".into()),
    }
}

fn conservation() -> Outcome {
    let one = ToneSet::new(vec![Tone::new(1.0, 0.1, 0.0).unwrap()]).unwrap();
    // bin indices 50 and 65 differ by an odd number, so the two tones'
    // sideband combs never share a bin
    let two = ToneSet::new(vec![
        Tone::new(1.0, 0.10, 0.0).unwrap(),
        Tone::new(0.8, 0.13, 1.0).unwrap(),
    ])
    .unwrap();
    let mut drift = 0.0f64;
    for (tones, mode) in [
        (&one, KerrMode::Spm),
        (&two, KerrMode::Spm),
        (&two, KerrMode::Xpm),
    ] {
        let p0 = kerr_phase_modulation(tones, 0.0, mode, 0.0, 500.0, 0.1)
            .unwrap()
            .total_power();
        for kappa in [0.5, 1.0, 2.0] {
            let p = kerr_phase_modulation(tones, kappa, mode, 0.0, 500.0, 0.1)
                .unwrap()
                .total_power();
            drift = drift.max((p - p0).abs() / p0);
        }
    }

    let traj = raman_transfer(1.0, 1.0, 1.0, 10.0, 1e-3).unwrap();
    let steps = traj.times.len() - 1;
    let raman_drift = traj
        .p_high
        .iter()
        .zip(&traj.p_low)
        .map(|(h, l)| (h + l - 2.0).abs())
        .fold(0.0, f64::max);
    let logistic = [1.0, 5.0, 10.0]
        .iter()
        .map(|&t| {
            let i = (t / 1e-3_f64).round() as usize;
            (traj.p_low[i] - 2.0 / (1.0 + (-2.0 * t).exp())).abs()
        })
        .fold(0.0, f64::max);

    let mut amplified = false;
    for r in [0.0, 0.25, 0.5, 0.9, 1.0] {
        for shift in [0.0, 0.01, 0.05] {
            let medium = NonlinearMedium {
                sbs_reflectivity: r,
                sbs_doppler_shift: shift,
                ..NonlinearMedium::default()
            };
            let tone = Tone::new(1.7, 0.1, 0.4).unwrap();
            let out = brillouin_reflect(&tone, &medium).unwrap();
            amplified |= out.amplitude.powi(2) > tone.amplitude.powi(2);
        }
    }
    check(
        drift <= 1e-6 && raman_drift <= 1e-9 && steps == 10_000 && logistic <= 1e-6 && !amplified,
        format!(
            "Kerr drift {drift:e}; Raman drift {raman_drift:e} over {steps} steps; \
             logistic error {logistic:e}; reflection amplified: {amplified}"
        ),
    )
}

fn bandpass_contract() -> Outcome {
    let band = CycleBand::juglar();
    let w = bandpass_weights(&band, 1.0, 12).unwrap();
    let sum = w.as_slice().iter().sum::<f64>();
    let amp = |period: f64| {
        let x: Vec<f64> = (0..300)
            .map(|t| (2.0 * PI * t as f64 / period).sin())
            .collect();
        let y = apply_bandpass(&series(0.0, 1.0, x), &band, 12).unwrap();
        let t: Vec<f64> = y.times().collect();
        fitted_amplitude(&t, y.values(), 1.0 / period)
    };
    let a10 = amp(10.0);
    let oracle = response(w.as_slice(), 0.1, 1.0);
    let a4 = amp(4.0);
    let in_range = (0.85..=1.1).contains(&a10);
    let matches = (a10 - oracle).abs() <= 0.01 * oracle;
    check(
        sum.abs() <= 1e-12 && in_range && matches && a4 <= 0.2,
        format!(
            "weight sum {sum:e}; 10-year ratio {a10:.6} in [0.85, 1.1]: {in_range}; \
             response oracle {oracle:.6}, within 1%: {matches}; 4-year ratio {a4:.6}"
        ),
    )
}

fn parseval() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = rng.random_range(8..=600);
        let y: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-10.0..10.0) + 0.05 * i as f64)
            .collect();
        let s = series(0.0, 1.0, y);
        let detrend = [Detrend::Mean, Detrend::Linear][i % 2];
        let spec = periodogram(&s, detrend, Taper::None).unwrap();
        let x = detrend_values(&s, detrend).unwrap();
        let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        worst = worst.max((spec.total_power() - var).abs() / var);
    }
    check(worst <= 1e-9, format!("max relative error {worst:e}"))
}

fn table_fidelity() -> Outcome {
    let g = builtin_phase_growth();
    let rate = |w: u8, p: GrowthPhase, v2: bool| {
        g.iter()
            .find(|r| r.wave_number == w && r.phase == p)
            .map(|r| if v2 { r.rate_v2 } else { r.rate_v1 })
    };
    let spots = [
        (rate(2, GrowthPhase::EndOfA, false), 2.09),
        (rate(2, GrowthPhase::B, false), 1.68),
        (rate(3, GrowthPhase::B, true), 0.98),
        (rate(4, GrowthPhase::A, false), 4.84),
        (rate(4, GrowthPhase::B, false), 3.05),
        (rate(5, GrowthPhase::A, false), 3.49),
        (rate(5, GrowthPhase::A, true), 3.42),
    ];
    let cells_ok = spots.iter().all(|(got, want)| *got == Some(*want))
        && g.iter()
            .map(|r| (r.years_v1, r.years_v2, r.rate_v1, r.rate_v2))
            .eq([
                ((1871, 1875), (1871, 1875), 2.09, 2.09),
                ((1876, 1894), (1876, 1894), 1.68, 1.68),
                ((1895, 1913), (1895, 1929), 2.57, 2.34),
                ((1914, 1946), (1930, 1946), 1.50, 0.98),
                ((1947, 1973), (1947, 1973), 4.84, 4.84),
                ((1974, 1991), (1974, 1983), 3.05, 2.88),
                ((1992, 2007), (1984, 2007), 3.49, 3.42),
            ]);

    use PhaseKind::{AUpswing as A, BDownswing as B};
    use SourceTable::{Classic as T1, PostKondratieff as T2};
    let r = |a, b| Some(YearRange::new(a, b));
    let expected = [
        (1, A, T1, YearRange::new(1788, 1792), r(1810, 1817)),
        (1, B, T1, YearRange::new(1810, 1817), r(1844, 1851)),
        (2, A, T1, YearRange::new(1844, 1851), r(1870, 1875)),
        (2, B, T1, YearRange::new(1870, 1875), r(1890, 1896)),
        (3, A, T1, YearRange::new(1890, 1896), r(1914, 1920)),
        (3, B, T1, YearRange::new(1914, 1920), None),
        (3, A, T2, YearRange::new(1890, 1896), r(1914, 1920)),
        (3, B, T2, YearRange::new(1914, 1929), r(1939, 1950)),
        (4, A, T2, YearRange::new(1939, 1950), r(1968, 1974)),
        (4, B, T2, YearRange::new(1968, 1974), r(1984, 1991)),
        (5, A, T2, YearRange::new(1984, 1991), r(2008, 2010)),
        (5, B, T2, YearRange::new(2008, 2010), None),
    ];
    let rows = table_rows();
    let rows_ok = rows.len() == expected.len()
        && rows
            .iter()
            .zip(&expected)
            .all(|(row, e)| (row.wave_number, row.phase, row.source, row.begin, row.end) == *e);

    let c = builtin_chronology();
    let json = c.to_json().unwrap();
    let back = Chronology::from_json(&json).unwrap();
    let round_trip = back == c && back.to_json().unwrap() == json;
    check(
        cells_ok && rows_ok && round_trip,
        format!(
            "growth cells verbatim: {cells_ok}; {} table rows verbatim: {rows_ok}; \
             JSON round trip exact: {round_trip}",
            rows.len()
        ),
    )
}

fn classification() -> Outcome {
    let bands = canonical_bands();
    let periods = [3.0, 6.99, 7.0, 10.0, 13.0, 20.0, 30.0, 50.0, 65.0, 80.0];
    let labels: Vec<BandName> = periods
        .iter()
        .map(|&p| classify_period(p, &bands))
        .collect();
    let unique = periods
        .iter()
        .all(|&p| bands.iter().filter(|b| b.contains(p)).count() <= 1);
    let expected = [
        BandName::Kitchin,
        BandName::Kitchin,
        BandName::Juglar,
        BandName::Juglar,
        BandName::Unclassified,
        BandName::Kuznets,
        BandName::Unclassified,
        BandName::Kondratieff,
        BandName::Unclassified,
        BandName::GrandSupercycle,
    ];
    check(
        unique && labels == expected,
        periods
            .iter()
            .zip(&labels)
            .map(|(p, l)| format!("{p}->{l}"))
            .collect::<Vec<_>>()
            .join(" ")
            .to_string(),
    )
}

fn linear_invariance() -> Outcome {
    let tones = ToneSet::new(vec![
        Tone::new(1.0, 0.10, 0.0).unwrap(),
        Tone::new(0.6, 0.14, 0.7).unwrap(),
        Tone::new(0.3, 0.031, 2.0).unwrap(),
    ])
    .unwrap();
    let medium = NonlinearMedium {
        a1: 1.7,
        ..NonlinearMedium::default()
    };
    let out = apply_polynomial(&synthesize(&tones, 0.0, 1000.0, 0.25).unwrap(), &medium).unwrap();
    let spec = periodogram(&out, Detrend::None, Taper::None).unwrap();
    let mut found: Vec<f64> = find_peaks(&spec, 0.0).iter().map(|p| p.frequency).collect();
    found.sort_by(f64::total_cmp);
    let mut input: Vec<f64> = tones.tones().iter().map(|t| t.frequency).collect();
    input.sort_by(f64::total_cmp);
    let bins_equal = found.len() == input.len()
        && found
            .iter()
            .zip(&input)
            .all(|(a, b)| (a - b).abs() < 0.5 * spec.df());
    let predicted = predict_products(&tones, &medium, 3).unwrap();
    let only_fundamentals = predicted.iter().all(|p| p.kind == ProductKind::Fundamental)
        && predicted.len() == tones.len();
    let base = kerr_phase_modulation(&tones, 0.0, KerrMode::Spm, 0.0, 1000.0, 0.25).unwrap();
    let kerr_peaks = find_peaks(&base, 0.0).len();
    check(
        bins_equal && only_fundamentals && kerr_peaks == tones.len(),
        format!(
            "input {input:?}, output peaks {found:?}, predicted {} products",
            predicted.len()
        ),
    )
}

fn run_cli(args: &[&str], dir: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_bizcycle"))
        .args(args)
        .current_dir(dir)
        .env_remove("BIZCYCLE_CONFIG")
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut q = String::from("time,value\n");
    for i in 0..160 {
        let t = i as f64 * 0.25;
        q.push_str(&format!(
            "{},{}\n",
            1960.0 + t,
            5.0 + 0.1 * t + (2.0 * PI * t / 6.0).sin()
        ));
    }
    fs::write(d.join("q.csv"), q).unwrap();
    let mut a = String::from("time,value\n");
    for i in 0..540 {
        let t = i as f64;
        a.push_str(&format!(
            "{},{}\n",
            1500 + i,
            2.0 * (2.0 * PI * t / 54.0).cos() + (2.0 * PI * t / 18.0).cos()
        ));
    }
    fs::write(d.join("a.csv"), a).unwrap();
    fs::write(
        d.join("tones.json"),
        r#"[{"amplitude": 1, "frequency": 0.1}, {"amplitude": 1, "frequency": 0.14}]"#,
    )
    .unwrap();

    let commands: [&[&str]; 3] = [
        &["decompose", "--input", "q.csv"],
        &["spectrum", "--input", "a.csv"],
        &["mix", "products", "--tones", "tones.json", "--a3", "1"],
    ];
    let mut compared = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = format!("run{run}_{i}");
            let mut args = cmd.to_vec();
            args.extend(["--out", &out]);
            if !run_cli(&args, d) {
                return Err(format!("{} failed", cmd.join(" ")));
            }
            outs.push(d.join(out));
        }
        let mut names: Vec<_> = fs::read_dir(&outs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            if fs::read(outs[0].join(&name)).unwrap() != fs::read(outs[1].join(&name)).unwrap() {
                return Err(format!("{} differs between runs", name.to_string_lossy()));
            }
            compared += 1;
        }
    }
    check(
        compared >= 9,
        format!("{compared} output files byte-identical across runs"),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "HP oracle equivalence",
            Box::new(|| timed(Some(Duration::from_secs(1)), hp_oracle)),
        ),
        ("HP limit laws", Box::new(hp_limits)),
        (
            "quarterly cycle recovery",
            Box::new(|| timed(Some(Duration::from_millis(100)), cycle_recovery)),
        ),
        (
            "FWM signature",
            Box::new(|| timed(Some(Duration::from_secs(1)), fwm_signature)),
        ),
        ("third-harmonic consistency", Box::new(third_harmonic)),
        ("conservation suite", Box::new(conservation)),
        ("band-pass contract", Box::new(bandpass_contract)),
        ("Parseval", Box::new(parseval)),
        ("table fidelity", Box::new(table_fidelity)),
        ("classification totality", Box::new(classification)),
        ("linear-interaction invariance", Box::new(linear_invariance)),
        ("CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("[PASS] {:>2}. {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
