//! Hodrick-Prescott trend/cycle decomposition.
//!
//! For a series `y` of length `T` and smoothing parameter `λ`, the trend `g`
//! minimizes
//!
//! ```text
//! Σ_t (y_t - g_t)²  +  λ Σ_{t=2}^{T-1} ((g_{t+1} - g_t) - (g_t - g_{t-1}))²
//! ```
//!
//! whose normal equations are `(I + λ KᵀK) g = y` with `K` the `(T-2) × T`
//! second-difference operator. The system is pentadiagonal and SPD.
//!
//! The solver works on the cycle instead of the trend: subtracting `y` from
//! both sides gives `(I + λ KᵀK) c = λ KᵀK y`. The right-hand side vanishes
//! for `λ = 0` and for straight lines, so those limits come out exactly zero
//! instead of as the difference of two nearly equal large numbers.

use serde::{Deserialize, Serialize};

use crate::banded::SymmetricPentadiagonal;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Smoothing parameter for quarterly data.
pub const LAMBDA_QUARTERLY: f64 = 1600.0;
/// Conventional smoothing parameter for annual data.
pub const LAMBDA_ANNUAL: f64 = 100.0;

const STEP_MATCH: f64 = 1e-9;

/// Conventional λ for a sampling step in years, if one is defined.
///
/// Returns `None` for steps other than quarterly and annual; callers must
/// then ask for an explicit value.
pub fn default_lambda(step: f64) -> Option<f64> {
    if (step - 0.25).abs() <= STEP_MATCH {
        Some(LAMBDA_QUARTERLY)
    } else if (step - 1.0).abs() <= STEP_MATCH {
        Some(LAMBDA_ANNUAL)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCycleDecomposition {
    pub source: TimeSeries,
    pub trend: TimeSeries,
    pub cycle: TimeSeries,
    pub lambda: f64,
}

impl TrendCycleDecomposition {
    pub fn objective(&self) -> f64 {
        objective_values(self.source.values(), self.trend.values(), self.lambda)
    }

    /// `cycle - reference`, for comparing against an externally de-trended series.
    pub fn cycle_difference(&self, reference: &TimeSeries) -> Result<TimeSeries> {
        if !self.cycle.same_axis(reference) {
            return Err(Error::Size(format!(
                "reference series axis (start {}, step {}, len {}) does not match the cycle (start {}, step {}, len {})",
                reference.start(),
                reference.step(),
                reference.len(),
                self.cycle.start(),
                self.cycle.step(),
                self.cycle.len()
            )));
        }
        let diff = self
            .cycle
            .values()
            .iter()
            .zip(reference.values())
            .map(|(c, r)| c - r)
            .collect();
        self.cycle.with_values(diff)
    }
}

/// `K x`, length `n - 2`.
pub fn second_differences(x: &[f64]) -> Vec<f64> {
    x.windows(3)
        .map(|w| (w[2] - w[1]) - (w[1] - w[0]))
        .collect()
}

/// `Kᵀ z` for `z` of length `n - 2`, returning length `n`.
fn second_difference_transpose(z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len() + 2];
    for (r, &v) in z.iter().enumerate() {
        out[r] += v;
        out[r + 1] -= 2.0 * v;
        out[r + 2] += v;
    }
    out
}

/// The five diagonals of `I + λ KᵀK` for length `n ≥ 3`.
pub fn system_matrix(n: usize, lambda: f64) -> SymmetricPentadiagonal {
    let mut a = SymmetricPentadiagonal::zeros(n);
    for r in 0..n.saturating_sub(2) {
        a.diag[r] += lambda;
        a.diag[r + 1] += 4.0 * lambda;
        a.diag[r + 2] += lambda;
        a.off1[r] -= 2.0 * lambda;
        a.off1[r + 1] -= 2.0 * lambda;
        a.off2[r] += lambda;
    }
    for d in &mut a.diag {
        *d += 1.0;
    }
    a
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be a finite non-negative number, got {lambda}"
        )));
    }
    Ok(())
}

pub fn hp_filter(series: &TimeSeries, lambda: f64) -> Result<TrendCycleDecomposition> {
    validate_lambda(lambda)?;
    let y = series.values();
    let n = y.len();
    if n < 3 {
        return Err(Error::Size(format!(
            "HP filter needs at least 3 samples, got {n}"
        )));
    }

    let rhs: Vec<f64> = second_difference_transpose(&second_differences(y))
        .into_iter()
        .map(|v| lambda * v)
        .collect();
    let cycle = system_matrix(n, lambda).factor()?.solve(&rhs)?;
    let trend: Vec<f64> = y.iter().zip(&cycle).map(|(y, c)| y - c).collect();

    Ok(TrendCycleDecomposition {
        source: series.clone(),
        trend: series.with_values(trend)?,
        cycle: series.with_values(cycle)?,
        lambda,
    })
}

/// Decompose many series with the same λ. Runs in parallel with the
/// `parallel` feature.
pub fn hp_filter_batch(series: &[TimeSeries], lambda: f64) -> Result<Vec<TrendCycleDecomposition>> {
    par_try_map!(series, |s| hp_filter(s, lambda))
}

fn objective_values(y: &[f64], g: &[f64], lambda: f64) -> f64 {
    let fit: f64 = y.iter().zip(g).map(|(y, g)| (y - g) * (y - g)).sum();
    let smooth: f64 = second_differences(g).iter().map(|d| d * d).sum();
    fit + lambda * smooth
}

/// The HP objective evaluated at an arbitrary candidate trend `g`.
pub fn hp_objective(y: &TimeSeries, g: &TimeSeries, lambda: f64) -> Result<f64> {
    validate_lambda(lambda)?;
    if y.len() != g.len() {
        return Err(Error::Size(format!(
            "series and trend lengths differ: {} vs {}",
            y.len(),
            g.len()
        )));
    }
    if y.len() < 3 {
        return Err(Error::Size(format!(
            "HP objective needs at least 3 samples, got {}",
            y.len()
        )));
    }
    Ok(objective_values(y.values(), g.values(), lambda))
}
