//! Long-wave (Kondratieff) chronology and per-phase world GDP growth rates.
//!
//! Boundary dates are kept as year ranges exactly as tabulated. Anything that
//! needs a single year takes a [`Convention`] that resolves each range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{GrowthMode, GrowthSeries};

pub const CHRONOLOGY_VERSION: &str = "long-waves-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseKind {
    #[serde(rename = "A_upswing")]
    AUpswing,
    #[serde(rename = "B_downswing")]
    BDownswing,
}

/// Which published table a row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceTable {
    /// Long waves identified by Kondratieff himself (waves 1 to 3).
    #[serde(rename = "classic")]
    Classic,
    /// Post-Kondratieff long waves (waves 3 to 5).
    #[serde(rename = "post_kondratieff")]
    PostKondratieff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub earliest: i32,
    pub latest: i32,
}

impl YearRange {
    pub const fn new(earliest: i32, latest: i32) -> Self {
        Self { earliest, latest }
    }

    pub fn resolve(&self, convention: Convention) -> f64 {
        match convention {
            Convention::Earliest => self.earliest as f64,
            Convention::Latest => self.latest as f64,
            Convention::Midpoint => 0.5 * (self.earliest as f64 + self.latest as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Earliest,
    Latest,
    Midpoint,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "earliest" => Ok(Convention::Earliest),
            "latest" => Ok(Convention::Latest),
            "midpoint" | "mid" => Ok(Convention::Midpoint),
            _ => Err(Error::Config(format!("unknown date convention {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePhase {
    pub wave_number: u8,
    pub phase: PhaseKind,
    pub begin: YearRange,
    /// `None` when the table gives no end date.
    pub end: Option<YearRange>,
    /// The tabulated end is marked as provisional (or missing).
    pub uncertain_end: bool,
    pub source: SourceTable,
    /// Set when a boundary is an interpretation of prose rather than a printed range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl WavePhase {
    /// `[begin, end)` under the convention, if the end is known.
    pub fn interval(&self, convention: Convention) -> Option<(f64, f64)> {
        self.end
            .map(|end| (self.begin.resolve(convention), end.resolve(convention)))
    }

    fn check(&self) -> Result<()> {
        let b = self.begin;
        let ok = b.earliest <= b.latest
            && self
                .end
                .is_none_or(|e| b.latest < e.earliest && e.earliest <= e.latest);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "wave {} {:?} has inconsistent boundary ranges",
                self.wave_number, self.phase
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chronology {
    pub version: String,
    pub phases: Vec<WavePhase>,
}

impl Chronology {
    pub fn validate(&self) -> Result<()> {
        for p in &self.phases {
            p.check()?;
        }
        for pair in self.phases.windows(2) {
            if pair[1].begin.earliest < pair[0].begin.earliest {
                return Err(Error::Config("phases are not ordered by begin date".into()));
            }
            if pair[0].wave_number == pair[1].wave_number && pair[0].phase == pair[1].phase {
                return Err(Error::Config(format!(
                    "wave {} phase {:?} appears twice in a row",
                    pair[0].wave_number, pair[0].phase
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Chronology = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn find(&self, wave_number: u8, phase: PhaseKind) -> Option<&WavePhase> {
        self.phases
            .iter()
            .find(|p| p.wave_number == wave_number && p.phase == phase)
    }
}

use PhaseKind::{AUpswing as A, BDownswing as B};
use SourceTable::{Classic, PostKondratieff};

const fn r(a: i32, b: i32) -> YearRange {
    YearRange::new(a, b)
}

fn row(
    wave_number: u8,
    phase: PhaseKind,
    begin: YearRange,
    end: Option<YearRange>,
    uncertain_end: bool,
    source: SourceTable,
) -> WavePhase {
    WavePhase {
        wave_number,
        phase,
        begin,
        end,
        uncertain_end,
        source,
        note: None,
    }
}

/// Every printed row of both chronology tables, including the two
/// differing versions of wave 3 phase B and the wave 3 A row they share.
pub fn table_rows() -> Vec<WavePhase> {
    let mut first = row(1, A, r(1788, 1792), Some(r(1810, 1817)), false, Classic);
    first.note =
        Some("begin encodes 'the end of the 1780s or beginning of the 1790s' as 1788-1792".into());
    let mut classic_3b = row(3, B, r(1914, 1920), None, true, Classic);
    classic_3b.note = Some("the classic table gives no end date for this phase".into());
    let mut post_3b = row(
        3,
        B,
        r(1914, 1929),
        Some(r(1939, 1950)),
        false,
        PostKondratieff,
    );
    post_3b.note = Some("begin printed as 'from 1914 to 1928/29'".into());
    let mut last = row(5, B, r(2008, 2010), None, true, PostKondratieff);
    last.note = Some("begin printed as '2008-2010?', end printed as '?'".into());

    vec![
        first,
        row(1, B, r(1810, 1817), Some(r(1844, 1851)), false, Classic),
        row(2, A, r(1844, 1851), Some(r(1870, 1875)), false, Classic),
        row(2, B, r(1870, 1875), Some(r(1890, 1896)), false, Classic),
        row(3, A, r(1890, 1896), Some(r(1914, 1920)), false, Classic),
        classic_3b,
        row(
            3,
            A,
            r(1890, 1896),
            Some(r(1914, 1920)),
            false,
            PostKondratieff,
        ),
        post_3b,
        row(
            4,
            A,
            r(1939, 1950),
            Some(r(1968, 1974)),
            false,
            PostKondratieff,
        ),
        row(
            4,
            B,
            r(1968, 1974),
            Some(r(1984, 1991)),
            false,
            PostKondratieff,
        ),
        row(
            5,
            A,
            r(1984, 1991),
            Some(r(2008, 2010)),
            true,
            PostKondratieff,
        ),
        last,
    ]
}

/// One row per wave phase, waves 1 to 5.
///
/// The shared wave 3 A row is merged, and wave 3 B uses the post-Kondratieff
/// row because the classic table leaves its end open. The classic variant
/// stays available through [`table_rows`].
pub fn builtin_chronology() -> Chronology {
    let rows = table_rows();
    let mut phases: Vec<WavePhase> = Vec::new();
    for p in rows {
        if p.wave_number == 3 && p.source == Classic && p.phase == B {
            continue;
        }
        if phases
            .iter()
            .any(|q| q.wave_number == p.wave_number && q.phase == p.phase)
        {
            continue;
        }
        phases.push(p);
    }
    Chronology {
        version: CHRONOLOGY_VERSION.to_string(),
        phases,
    }
}

/// The phase containing `year` under `convention`, if any.
///
/// Phases without a known end never match, so years after the last dated
/// boundary return `None`. Adjacent phases share a resolved boundary and the
/// intervals are half-open, so at most one phase matches.
pub fn detect_phase(
    year: f64,
    chronology: &Chronology,
    convention: Convention,
) -> Option<&WavePhase> {
    chronology.phases.iter().find(|p| {
        p.interval(convention)
            .is_some_and(|(begin, end)| year >= begin && year < end)
    })
}

/// Which year columns of the growth table to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableVersion {
    #[serde(rename = "1")]
    V1,
    #[serde(rename = "2")]
    V2,
}

impl std::str::FromStr for TableVersion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches(['v', 'V']) {
            "1" => Ok(TableVersion::V1),
            "2" => Ok(TableVersion::V2),
            _ => Err(Error::Config(format!("version must be 1 or 2, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthPhase {
    /// Only the closing years of an upswing are covered.
    #[serde(rename = "end_of_A")]
    EndOfA,
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrowthRecord {
    pub wave_number: u8,
    pub phase: GrowthPhase,
    pub years_v1: (i32, i32),
    pub years_v2: (i32, i32),
    /// Average annual world GDP growth, percent per year.
    pub rate_v1: f64,
    pub rate_v2: f64,
}

impl PhaseGrowthRecord {
    pub fn years(&self, version: TableVersion) -> (i32, i32) {
        match version {
            TableVersion::V1 => self.years_v1,
            TableVersion::V2 => self.years_v2,
        }
    }

    pub fn rate(&self, version: TableVersion) -> f64 {
        match version {
            TableVersion::V1 => self.rate_v1,
            TableVersion::V2 => self.rate_v2,
        }
    }
}

/// Average annual world GDP growth by long-wave phase, 1871-2007.
pub fn builtin_phase_growth() -> Vec<PhaseGrowthRecord> {
    let rec = |wave_number, phase, years_v1, years_v2, rate_v1, rate_v2| PhaseGrowthRecord {
        wave_number,
        phase,
        years_v1,
        years_v2,
        rate_v1,
        rate_v2,
    };
    vec![
        rec(
            2,
            GrowthPhase::EndOfA,
            (1871, 1875),
            (1871, 1875),
            2.09,
            2.09,
        ),
        rec(2, GrowthPhase::B, (1876, 1894), (1876, 1894), 1.68, 1.68),
        rec(3, GrowthPhase::A, (1895, 1913), (1895, 1929), 2.57, 2.34),
        rec(3, GrowthPhase::B, (1914, 1946), (1930, 1946), 1.50, 0.98),
        rec(4, GrowthPhase::A, (1947, 1973), (1947, 1973), 4.84, 4.84),
        rec(4, GrowthPhase::B, (1974, 1991), (1974, 1983), 3.05, 2.88),
        rec(5, GrowthPhase::A, (1992, 2007), (1984, 2007), 3.49, 3.42),
    ]
}

/// Table windows for one version, in table order.
pub fn growth_windows(version: TableVersion) -> Vec<(f64, f64)> {
    builtin_phase_growth()
        .iter()
        .map(|r| {
            let (a, b) = r.years(version);
            (a as f64, b as f64)
        })
        .collect()
}

const WINDOW_EPS: f64 = 1e-9;

/// Mean of the growth values stamped inside each inclusive `[start, end]` window.
pub fn phase_average_growth(growth: &GrowthSeries, windows: &[(f64, f64)]) -> Result<Vec<f64>> {
    if growth.mode() != GrowthMode::PercentGrowth {
        return Err(Error::Domain(
            "phase averages are defined for percent-growth series".into(),
        ));
    }
    if growth.is_empty() {
        return Err(Error::Size("growth series is empty".into()));
    }
    let span = (growth.start(), growth.end_time());
    windows
        .iter()
        .map(|&(start, end)| {
            if !(end >= start) {
                return Err(Error::Range(format!(
                    "window [{start}, {end}] ends before it starts"
                )));
            }
            if start < span.0 - WINDOW_EPS || end > span.1 + WINDOW_EPS {
                return Err(Error::Range(format!(
                    "window [{start}, {end}] is outside the series span [{}, {}]",
                    span.0, span.1
                )));
            }
            let (sum, count) = growth
                .values()
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let t = growth.time_at(*i);
                    t >= start - WINDOW_EPS && t <= end + WINDOW_EPS
                })
                .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
            if count == 0 {
                return Err(Error::Range(format!(
                    "window [{start}, {end}] contains no samples"
                )));
            }
            Ok(sum / count as f64)
        })
        .collect()
}
