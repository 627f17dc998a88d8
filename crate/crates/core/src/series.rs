//! Uniformly sampled time series and elementary transforms.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that CSV timestamps are evenly spaced.
pub const SPACING_TOLERANCE: f64 = 1e-9;

/// A uniformly sampled level series.
///
/// The time axis is stored as `(start, step)` so that non-uniform sampling is
/// unrepresentable. All values are finite and there are at least two samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: f64,
    step: f64,
    values: Vec<f64>,
    #[serde(default)]
    label: String,
    #[serde(default)]
    units: String,
}

impl TimeSeries {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::Domain(format!(
                "start time must be finite, got {start}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Size(format!(
                "a time series needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("value at index {i} is not finite")));
        }
        Ok(Self {
            start,
            step,
            values,
            label: String::new(),
            units: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = units.into();
        self
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.time_at(i))
    }

    pub fn end_time(&self) -> f64 {
        self.time_at(self.values.len() - 1)
    }

    /// Same time axis and metadata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.start, self.step, values)?;
        out.label = self.label.clone();
        out.units = self.units.clone();
        Ok(out)
    }

    /// Returns `true` if both series share the same start, step and length.
    pub fn same_axis(&self, other: &TimeSeries) -> bool {
        self.start == other.start && self.step == other.step && self.len() == other.len()
    }
}

/// Column mapping for [`load_csv`]. Columns are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub time_column: usize,
    pub value_column: usize,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            time_column: 0,
            value_column: 1,
        }
    }
}

/// Parse a `(time, value)` CSV into a [`TimeSeries`].
///
/// A single header row is skipped when the first row's mapped cells are not
/// numeric. The sampling step is taken from the first gap and every later gap
/// must match it to within [`SPACING_TOLERANCE`] relative. Row numbers in
/// errors are 1-based line numbers of the input.
pub fn load_csv<R: Read>(source: R, schema: &CsvSchema) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);

    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse {
                row,
                message: e.to_string(),
            }
        })?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 1);
        if record.iter().all(|cell| cell.is_empty()) {
            continue;
        }
        let time_cell = record.get(schema.time_column);
        let value_cell = record.get(schema.value_column);
        let parsed = (
            time_cell.and_then(|c| c.parse::<f64>().ok()),
            value_cell.and_then(|c| c.parse::<f64>().ok()),
        );
        if first {
            first = false;
            if parsed.0.is_none() && parsed.1.is_none() {
                // header row
                continue;
            }
        }
        match parsed {
            (Some(t), Some(v)) if t.is_finite() && v.is_finite() => rows.push((row, t, v)),
            (Some(_), Some(_)) => {
                return Err(Error::Parse {
                    row,
                    message: "non-finite number".into(),
                })
            }
            (None, _) => {
                return Err(Error::Parse {
                    row,
                    message: format!(
                        "time column {} is not numeric: {:?}",
                        schema.time_column,
                        time_cell.unwrap_or("<missing>")
                    ),
                })
            }
            (_, None) => {
                return Err(Error::Parse {
                    row,
                    message: format!(
                        "value column {} is not numeric: {:?}",
                        schema.value_column,
                        value_cell.unwrap_or("<missing>")
                    ),
                })
            }
        }
    }

    if rows.len() < 2 {
        return Err(Error::Size(format!(
            "need at least 2 data rows, found {}",
            rows.len()
        )));
    }

    let start = rows[0].1;
    let step = rows[1].1 - rows[0].1;
    if step <= 0.0 {
        return Err(Error::Spacing {
            row: rows[1].0,
            expected: f64::NAN,
            found: step,
        });
    }
    for pair in rows.windows(2).skip(1) {
        let gap = pair[1].1 - pair[0].1;
        if (gap - step).abs() > SPACING_TOLERANCE * step {
            return Err(Error::Spacing {
                row: pair[1].0,
                expected: step,
                found: gap,
            });
        }
    }

    TimeSeries::new(start, step, rows.into_iter().map(|r| r.2).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    AbsoluteDifference,
    PercentGrowth,
}

/// Per-period first differences (or percent growth) of a level series.
///
/// The first value is stamped at the time of the second source sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    start: f64,
    // time of the level before the first value, kept exact for cumulative_sum
    origin: f64,
    step: f64,
    values: Vec<f64>,
    mode: GrowthMode,
}

impl GrowthSeries {
    /// Wrap already-computed growth values, e.g. a growth-rate CSV.
    pub fn from_series(series: &TimeSeries, mode: GrowthMode) -> Self {
        Self {
            start: series.start(),
            origin: series.start() - series.step(),
            step: series.step(),
            values: series.values().to_vec(),
            mode,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> GrowthMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn end_time(&self) -> f64 {
        self.time_at(self.values.len().saturating_sub(1))
    }

    /// Undo an absolute-difference growth series given the first level.
    pub fn cumulative_sum(&self, initial: f64) -> Result<TimeSeries> {
        if self.mode != GrowthMode::AbsoluteDifference {
            return Err(Error::Domain(
                "cumulative sum is only defined for absolute differences".into(),
            ));
        }
        let mut levels = Vec::with_capacity(self.values.len() + 1);
        levels.push(initial);
        let mut acc = initial;
        for d in &self.values {
            acc += d;
            levels.push(acc);
        }
        TimeSeries::new(self.origin, self.step, levels)
    }
}

/// First differences `y[i+1] - y[i]`, or percent growth `100 (y[i+1]/y[i] - 1)`.
pub fn growth(series: &TimeSeries, mode: GrowthMode) -> Result<GrowthSeries> {
    let y = series.values();
    if mode == GrowthMode::PercentGrowth {
        if let Some(i) = y.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "percent growth needs strictly positive levels; value {} at index {i}",
                y[i]
            )));
        }
    }
    let values = y
        .windows(2)
        .map(|w| match mode {
            GrowthMode::AbsoluteDifference => w[1] - w[0],
            GrowthMode::PercentGrowth => 100.0 * (w[1] / w[0] - 1.0),
        })
        .collect();
    Ok(GrowthSeries {
        start: series.start() + series.step(),
        origin: series.start(),
        step: series.step(),
        values,
        mode,
    })
}

/// Elementwise natural logarithm.
pub fn log_transform(series: &TimeSeries) -> Result<TimeSeries> {
    if let Some(i) = series.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain(format!(
            "log transform needs strictly positive values; value {} at index {i}",
            series.values()[i]
        )));
    }
    series.with_values(series.values().iter().map(|v| v.ln()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<TimeSeries> {
        load_csv(text.as_bytes(), &CsvSchema::default())
    }

    #[test]
    fn parses_annual_rows() {
        let ts = load("1950,100\n1951,102\n1952,105").unwrap();
        assert_eq!(ts.start(), 1950.0);
        assert_eq!(ts.step(), 1.0);
        assert_eq!(ts.values(), &[100.0, 102.0, 105.0]);
    }

    #[test]
    fn infers_step_from_first_gap() {
        let ts = load("1950,100\n1952,105").unwrap();
        assert_eq!(ts.step(), 2.0);
    }

    #[test]
    fn reports_row_of_bad_cell() {
        match load("1950,100\n1951,x") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn skips_header_and_counts_it_as_a_row() {
        let ts = load("year,gdp\n1950,1\n1951,2").unwrap();
        assert_eq!(ts.len(), 2);
        match load("year,gdp\n1950,1\n1951,oops") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_uneven_spacing_and_short_input() {
        assert!(matches!(
            load("1950,1\n1951,2\n1953,3"),
            Err(Error::Spacing { row: 3, .. })
        ));
        assert!(matches!(load("1950,1\n1950,2"), Err(Error::Spacing { .. })));
        assert!(matches!(load("1950,1"), Err(Error::Size(_))));
        assert!(matches!(load(""), Err(Error::Size(_))));
    }

    #[test]
    fn quarterly_times_pass_the_spacing_check() {
        let text: String = (0..40)
            .map(|i| format!("{},{}\n", 1950.0 + 0.1 * i as f64, i))
            .collect();
        let ts = load(&text).unwrap();
        assert!((ts.step() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn custom_column_mapping() {
        let schema = CsvSchema {
            time_column: 1,
            value_column: 2,
        };
        let ts = load_csv("a,2000,5\nb,2001,6\n".as_bytes(), &schema).unwrap();
        assert_eq!(ts.values(), &[5.0, 6.0]);
    }

    #[test]
    fn absolute_growth() {
        let ts = TimeSeries::new(2000.0, 1.0, vec![1.0, 2.0, 4.0]).unwrap();
        let g = growth(&ts, GrowthMode::AbsoluteDifference).unwrap();
        assert_eq!(g.values(), &[1.0, 2.0]);
        assert_eq!(g.start(), 2001.0);
    }

    #[test]
    fn constant_series_has_zero_growth() {
        let ts = TimeSeries::new(0.0, 1.0, vec![5.0; 4]).unwrap();
        for mode in [GrowthMode::AbsoluteDifference, GrowthMode::PercentGrowth] {
            assert_eq!(growth(&ts, mode).unwrap().values(), &[0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn percent_growth_value() {
        let ts = TimeSeries::new(1871.0, 1.0, vec![100.0, 102.09]).unwrap();
        let g = growth(&ts, GrowthMode::PercentGrowth).unwrap();
        assert!((g.values()[0] - 2.09).abs() < 1e-12);
    }

    #[test]
    fn percent_growth_rejects_non_positive() {
        let ts = TimeSeries::new(0.0, 1.0, vec![1.0, 0.0, 2.0]).unwrap();
        assert!(matches!(
            growth(&ts, GrowthMode::PercentGrowth),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn log_transform_values() {
        let e = std::f64::consts::E;
        let ts = TimeSeries::new(0.0, 0.25, vec![1.0, e, e * e]).unwrap();
        let l = log_transform(&ts).unwrap();
        for (got, want) in l.values().iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(l.step(), 0.25);
        let ones = TimeSeries::new(0.0, 1.0, vec![1.0; 3]).unwrap();
        assert_eq!(log_transform(&ones).unwrap().values(), &[0.0; 3]);
        let pair = TimeSeries::new(0.0, 1.0, vec![100.0, 200.0]).unwrap();
        assert_eq!(
            log_transform(&pair).unwrap().values(),
            &[100f64.ln(), 200f64.ln()]
        );
        let bad = TimeSeries::new(0.0, 1.0, vec![1.0, -1.0]).unwrap();
        assert!(matches!(log_transform(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_invariants() {
        assert!(TimeSeries::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, 1.0, vec![1.0, f64::NAN]).is_err());
    }
}
