//! Uniformly sampled time series with a physical unit tag.

use std::fmt;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Physical unit carried by a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[serde(rename = "MW")]
    Mw,
    PerUnit,
    KwPerM2,
    Degrees,
    #[serde(rename = "MWh")]
    Mwh,
    /// Dimensionless, unbounded (e.g. MW-thermal per MW-electric).
    Ratio,
}

impl Unit {
    /// Closed interval every value of this unit must lie in, if any.
    pub fn valid_range(self) -> Option<(f64, f64)> {
        match self {
            Unit::PerUnit => Some((0.0, 1.0)),
            Unit::Degrees => Some((0.0, 90.0)),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Mw => "MW",
            Unit::PerUnit => "per-unit",
            Unit::KwPerM2 => "kW/m2",
            Unit::Degrees => "degrees",
            Unit::Mwh => "MWh",
            Unit::Ratio => "ratio",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("time series is empty")]
    Empty,
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("value {value} at index {index} outside [{lo}, {hi}] for unit {unit}")]
    OutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
        unit: Unit,
    },
    #[error("time step must be positive")]
    NonPositiveStep,
}

/// A uniformly sampled series: `values[k]` covers `[start + k·step, start + (k+1)·step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    step: TimeDelta,
    values: Vec<f64>,
    unit: Unit,
}

impl TimeSeries {
    pub fn new(
        start: DateTime<Utc>,
        step: TimeDelta,
        values: Vec<f64>,
        unit: Unit,
    ) -> Result<Self, SeriesError> {
        if step <= TimeDelta::zero() {
            return Err(SeriesError::NonPositiveStep);
        }
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(SeriesError::NonFinite { index });
            }
            if let Some((lo, hi)) = unit.valid_range() {
                if value < lo || value > hi {
                    return Err(SeriesError::OutOfRange {
                        index,
                        value,
                        lo,
                        hi,
                        unit,
                    });
                }
            }
        }
        Ok(Self {
            start,
            step,
            values,
            unit,
        })
    }

    /// Hourly series starting at `start`.
    pub fn hourly(
        start: DateTime<Utc>,
        values: Vec<f64>,
        unit: Unit,
    ) -> Result<Self, SeriesError> {
        Self::new(start, TimeDelta::hours(1), values, unit)
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn step(&self) -> TimeDelta {
        self.step
    }

    /// Step length in hours; the energy of a power sample is `value · step_hours()`.
    pub fn step_hours(&self) -> f64 {
        self.step.num_milliseconds() as f64 / 3_600_000.0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.values.get(t).copied()
    }

    pub fn timestamp(&self, t: usize) -> DateTime<Utc> {
        self.start + self.step * t as i32
    }

    pub fn timestamps(&self) -> impl Iterator<Item = DateTime<Utc>> + '_ {
        (0..self.values.len()).map(move |t| self.timestamp(t))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same start, step and length as `other`.
    pub fn is_aligned_with(&self, other: &TimeSeries) -> bool {
        self.start == other.start && self.step == other.step && self.len() == other.len()
    }

    /// Replaces the values, keeping start, step and unit.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, SeriesError> {
        Self::new(self.start, self.step, values, self.unit)
    }

    /// Same samples under a different unit tag (validated against the new unit).
    pub fn with_unit(&self, unit: Unit) -> Result<Self, SeriesError> {
        Self::new(self.start, self.step, self.values.clone(), unit)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
