//! Hourly capacity factors from a remote provider, cached as CSV.
//!
//! Downstream code only ever reads the cached file, so offline runs behave
//! exactly like online ones once the cache is filled. The HTTP provider is
//! compiled only with the `fetch` feature.

use std::fs;
use std::path::Path;

use chrono::{Datelike, TimeZone, Utc};
use thiserror::Error;

use super::series::{read_timeseries_csv, save_timeseries_csv};
use super::{IoError, Location};
use crate::scenario::RenewableTech;
use crate::timeseries::{TimeSeries, Unit};

/// Environment variable holding the provider token.
pub const TOKEN_VAR: &str = "RESSIZE_NINJA_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FetchRequest {
    pub lat: f64,
    pub lon: f64,
    pub year: i32,
    pub technology: RenewableTech,
}

impl FetchRequest {
    /// Cache file name, unique per request.
    pub fn cache_name(&self) -> String {
        let tech = match self.technology {
            RenewableTech::Pv => "pv",
            RenewableTech::Wind => "wind",
        };
        format!("{tech}_{:.4}_{:.4}_{}.csv", self.lat, self.lon, self.year)
    }

    /// Hours in the requested calendar year.
    pub fn hours(&self) -> usize {
        let leap = chrono::NaiveDate::from_ymd_opt(self.year, 2, 29).is_some();
        if leap {
            8784
        } else {
            8760
        }
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    Network(String),
    #[error("provider rejected the credentials; set {var} to a valid token")]
    Auth { var: &'static str },
    #[error("provider quota exhausted: {0}")]
    Quota(String),
    #[error("provider returned {got} hourly values, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Source of hourly per-unit capacity factors for one calendar year (UTC).
pub trait ResourceProvider {
    fn hourly_capacity_factors(&self, req: &FetchRequest) -> Result<Vec<f64>, FetchError>;
}

/// Returns the cached series for `req`, fetching and caching it first if
/// needed. Values outside [0, 1] are reported as a range error and nothing
/// is cached.
pub fn fetch_resource(
    req: &FetchRequest,
    provider: &dyn ResourceProvider,
    cache_dir: &Path,
) -> Result<TimeSeries, FetchError> {
    let path = cache_dir.join(req.cache_name());
    if path.exists() {
        return Ok(read_timeseries_csv(&path, Unit::PerUnit)?);
    }
    let values = provider.hourly_capacity_factors(req)?;
    if values.len() != req.hours() {
        return Err(FetchError::Length {
            got: values.len(),
            expected: req.hours(),
        });
    }
    if let Some(k) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(IoError::Range {
            path: Location(Some(path)),
            line: k + 2,
            value: values[k],
            unit: Unit::PerUnit,
        }
        .into());
    }
    let start = Utc.with_ymd_and_hms(req.year, 1, 1, 0, 0, 0).unwrap();
    debug_assert_eq!(start.year(), req.year);
    let ts = TimeSeries::hourly(start, values, Unit::PerUnit).expect("checked above");
    fs::create_dir_all(cache_dir).map_err(|e| IoError::io(cache_dir, e))?;
    // Write under a private name, then rename: concurrent fetches of the same
    // request never expose a partial file and the last writer wins.
    let tmp = cache_dir.join(format!(".{}.{}.tmp", req.cache_name(), std::process::id()));
    save_timeseries_csv(&ts, &tmp)?;
    fs::rename(&tmp, &path).map_err(|e| IoError::io(&path, e))?;
    Ok(read_timeseries_csv(&path, Unit::PerUnit)?)
}

#[cfg(feature = "fetch")]
pub use http::NinjaProvider;

#[cfg(feature = "fetch")]
mod http {
    use super::*;

    const BASE_URL: &str = "https://www.renewables.ninja/api/data";

    /// Renewables.ninja point API (1 kW reference plant, so outputs are per unit).
    pub struct NinjaProvider {
        token: String,
        base_url: String,
        client: reqwest::blocking::Client,
    }

    impl NinjaProvider {
        pub fn new(token: impl Into<String>) -> Self {
            Self {
                token: token.into(),
                base_url: BASE_URL.into(),
                client: reqwest::blocking::Client::new(),
            }
        }

        /// Reads the token from [`TOKEN_VAR`].
        pub fn from_env() -> Result<Self, FetchError> {
            match std::env::var(TOKEN_VAR) {
                Ok(t) if !t.trim().is_empty() => Ok(Self::new(t.trim())),
                _ => Err(FetchError::Auth { var: TOKEN_VAR }),
            }
        }

        pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
            self.base_url = url.into();
            self
        }
    }

    impl ResourceProvider for NinjaProvider {
        fn hourly_capacity_factors(&self, req: &FetchRequest) -> Result<Vec<f64>, FetchError> {
            let from = format!("{}-01-01", req.year);
            let to = format!("{}-12-31", req.year);
            let (lat, lon) = (req.lat.to_string(), req.lon.to_string());
            let mut query: Vec<(&str, &str)> = vec![
                ("lat", &lat),
                ("lon", &lon),
                ("date_from", &from),
                ("date_to", &to),
                ("capacity", "1.0"),
                ("format", "json"),
            ];
            let kind = match req.technology {
                RenewableTech::Pv => {
                    query.extend([
                        ("dataset", "merra2"),
                        ("system_loss", "0.1"),
                        ("tracking", "0"),
                        ("tilt", "35"),
                        ("azim", "180"),
                    ]);
                    "pv"
                }
                RenewableTech::Wind => {
                    query.extend([("height", "100"), ("turbine", "Vestas V90 2000")]);
                    "wind"
                }
            };
            let resp = self
                .client
                .get(format!("{}/{kind}", self.base_url))
                .header("Authorization", format!("Token {}", self.token))
                .query(&query)
                .send()
                .map_err(|e| FetchError::Network(e.to_string()))?;
            let status = resp.status();
            match status.as_u16() {
                401 | 403 => return Err(FetchError::Auth { var: TOKEN_VAR }),
                429 => return Err(FetchError::Quota(resp.text().unwrap_or_default())),
                _ if !status.is_success() => {
                    return Err(FetchError::Network(format!("HTTP {status}")))
                }
                _ => {}
            }
            let text = resp.text().map_err(|e| FetchError::Network(e.to_string()))?;
            let body: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| FetchError::Network(format!("invalid JSON: {e}")))?;
            parse_ninja(&body)
        }
    }

    /// `{"data": {"<epoch ms>": {"electricity": v}, ...}}`, ordered by time.
    pub(super) fn parse_ninja(body: &serde_json::Value) -> Result<Vec<f64>, FetchError> {
        let bad = |m: &str| FetchError::Network(format!("unexpected response: {m}"));
        let data = body
            .get("data")
            .and_then(|d| d.as_object())
            .ok_or_else(|| bad("no data object"))?;
        let mut rows = Vec::with_capacity(data.len());
        for (k, v) in data {
            let t: i64 = k.parse().map_err(|_| bad("non-numeric timestamp key"))?;
            let e = v
                .get("electricity")
                .and_then(|e| e.as_f64())
                .ok_or_else(|| bad("missing electricity value"))?;
            rows.push((t, e));
        }
        rows.sort_by_key(|r| r.0);
        Ok(rows.into_iter().map(|r| r.1).collect())
    }
}
