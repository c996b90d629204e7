//! File formats: time-series CSV, scenario JSON, result files, and the
//! optional cached resource fetcher.
//!
//! All timestamps are UTC. Converting local-time data is left to whoever
//! produces the CSV files.

mod fetch;
mod results;
mod scenario_json;
mod series;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scenario::ConfigError;
use crate::timeseries::Unit;

pub use fetch::{fetch_resource, FetchError, FetchRequest, ResourceProvider, TOKEN_VAR};
#[cfg(feature = "fetch")]
pub use fetch::NinjaProvider;
pub use results::{
    read_dispatch_csv, read_sizing_json, write_results, SizingSummary, CURTAILMENT_FILE,
    DISPATCH_FILE, SIZING_FILE,
};
pub use scenario_json::{read_scenario, resample_scenario, write_scenario};
pub use series::{
    format_number, format_timestamp, parse_number, parse_timeseries_csv, parse_timestamp,
    read_timeseries_csv, resample, save_timeseries_csv, write_timeseries_csv, ResampleMode,
};

/// File location shown in messages; empty when parsing from memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Location(pub Option<PathBuf>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some(p) => write!(f, "{}: ", p.display()),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}line {line}: {reason}")]
    Parse {
        path: Location,
        line: usize,
        reason: String,
    },
    #[error("{path}line {line}: {reason}")]
    Gap {
        path: Location,
        line: usize,
        reason: String,
    },
    #[error("{path}line {line}: value {value} outside the valid range for {unit}")]
    Range {
        path: Location,
        line: usize,
        value: f64,
        unit: Unit,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        IoError::Parse {
            path: Location::default(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn gap(line: usize, reason: impl Into<String>) -> Self {
        IoError::Gap {
            path: Location::default(),
            line,
            reason: reason.into(),
        }
    }

    /// Attaches `file` to line-located errors.
    pub(crate) fn in_file(mut self, file: &Path) -> Self {
        if let IoError::Parse { path, .. } | IoError::Gap { path, .. } | IoError::Range { path, .. } =
            &mut self
        {
            path.0 = Some(file.to_path_buf());
        }
        self
    }
}
