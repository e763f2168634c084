//! Study configuration: which localities to analyse, their wave restriction
//! dates, and the global analysis parameters.
//!
//! The file format is TOML:
//!
//! ```toml
//! # optional globals (defaults shown)
//! period_length_days = 56
//! window_length_days = 14
//! epsilon = 1e-9
//!
//! [stl]                 # optional, any subset of the decomposition knobs
//! seasonal_span = 11
//!
//! [[localities]]
//! id = "lombardia"
//! country = "Italy"
//! sub_region_1 = "Lombardy"    # omit for country-level rows
//! # sub_region_2 = "..."       # set for district-level rows
//! wave1 = 2020-02-23           # TOML local dates, not strings
//! wave2 = 2020-11-06
//! ```

use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::decompose::StlParams;
use crate::error::{Error, Result};

/// Exact-match selector for one locality's rows in the CMR file.
///
/// `None` sub-region fields require the corresponding cell to be empty, so
/// the selector pins a single spatial granularity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalitySelector {
    pub country: String,
    pub sub_region_1: Option<String>,
    pub sub_region_2: Option<String>,
}

impl LocalitySelector {
    /// Whether a row with these region cells belongs to this locality.
    pub fn matches(&self, country: &str, sub_region_1: &str, sub_region_2: &str) -> bool {
        self.country == country
            && self.sub_region_1.as_deref().unwrap_or("") == sub_region_1
            && self.sub_region_2.as_deref().unwrap_or("") == sub_region_2
    }

    /// Human-readable form, e.g. `Italy / Lombardy`.
    pub fn describe(&self) -> String {
        let mut s = self.country.clone();
        for part in [&self.sub_region_1, &self.sub_region_2].into_iter().flatten() {
            s.push_str(" / ");
            s.push_str(part);
        }
        s
    }
}

/// One locality under study: selector plus the two wave restriction dates.
#[derive(Debug, Clone, Serialize)]
pub struct StudyLocality {
    /// Identifier used in file names and reports; free-form, unique.
    pub id: String,
    #[serde(flatten)]
    pub selector: LocalitySelector,
    /// Initial restriction date of the first wave (day 0 of its period).
    pub wave1: NaiveDate,
    /// Initial restriction date of the second wave.
    pub wave2: NaiveDate,
}

/// Validated study configuration.
#[derive(Debug, Clone, Serialize)]
pub struct StudyConfig {
    pub localities: Vec<StudyLocality>,
    /// Length of each wave period in days (default 56).
    pub period_length_days: usize,
    /// Length of the consecutive comparison windows (default 14; must
    /// divide the period length).
    pub window_length_days: usize,
    /// Decomposition parameters applied to every series.
    pub stl: StlParams,
    /// Component-equality tolerance for dominance classification.
    pub epsilon: f64,
}

impl StudyConfig {
    pub const DEFAULT_PERIOD_DAYS: usize = 56;
    pub const DEFAULT_WINDOW_DAYS: usize = 14;
    pub const DEFAULT_EPSILON: f64 = 1e-9;

    /// Number of consecutive windows per wave period.
    pub fn windows_per_period(&self) -> usize {
        self.period_length_days / self.window_length_days
    }

    /// Structural validation; called by [`load_study_config`], exposed for
    /// configs assembled in code.
    pub fn validate(&self) -> Result<()> {
        if self.period_length_days == 0 || self.window_length_days == 0 {
            return Err(Error::Config(
                "period_length_days and window_length_days must be positive".into(),
            ));
        }
        if !self.period_length_days.is_multiple_of(self.window_length_days) {
            return Err(Error::Config(format!(
                "period_length_days ({}) is not a multiple of window_length_days ({})",
                self.period_length_days, self.window_length_days
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        self.stl
            .validate()
            .map_err(|e| Error::Config(format!("stl: {e}")))?;

        for loc in &self.localities {
            if loc.id.is_empty() {
                return Err(Error::Config("locality id must not be empty".into()));
            }
            if loc.wave1 >= loc.wave2 {
                return Err(Error::Config(format!(
                    "locality `{}`: wave1 date {} must precede wave2 date {}",
                    loc.id, loc.wave1, loc.wave2
                )));
            }
        }
        for (i, a) in self.localities.iter().enumerate() {
            for b in &self.localities[i + 1..] {
                if a.id == b.id {
                    return Err(Error::Config(format!("duplicate locality id `{}`", a.id)));
                }
                if a.selector == b.selector {
                    return Err(Error::Config(format!(
                        "localities `{}` and `{}` share the selector {}",
                        a.id,
                        b.id,
                        a.selector.describe()
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// TOML wire format
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    period_length_days: Option<usize>,
    window_length_days: Option<usize>,
    epsilon: Option<f64>,
    stl: Option<RawStl>,
    #[serde(default)]
    localities: Vec<RawLocality>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStl {
    period: Option<usize>,
    seasonal_span: Option<usize>,
    trend_span: Option<usize>,
    lowpass_span: Option<usize>,
    seasonal_degree: Option<u8>,
    trend_degree: Option<u8>,
    lowpass_degree: Option<u8>,
    inner_iterations: Option<usize>,
    outer_iterations: Option<usize>,
}

impl RawStl {
    fn apply(&self, mut params: StlParams) -> StlParams {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    params.$field = v;
                }
            };
        }
        take!(period);
        take!(seasonal_span);
        take!(trend_span);
        take!(lowpass_span);
        take!(seasonal_degree);
        take!(trend_degree);
        take!(lowpass_degree);
        take!(inner_iterations);
        take!(outer_iterations);
        params
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocality {
    id: String,
    country: String,
    sub_region_1: Option<String>,
    sub_region_2: Option<String>,
    wave1: toml::value::Datetime,
    wave2: toml::value::Datetime,
}

/// Converts a TOML datetime into a plain calendar date, rejecting values
/// that carry a time or offset component.
fn local_date(dt: &toml::value::Datetime, context: &str) -> Result<NaiveDate> {
    let invalid = |msg: &str| Error::Config(format!("{context}: {msg} (got `{dt}`)"));
    if dt.time.is_some() || dt.offset.is_some() {
        return Err(invalid("expected a plain date without time or offset"));
    }
    let date = dt.date.ok_or_else(|| invalid("expected a date"))?;
    NaiveDate::from_ymd_opt(date.year.into(), date.month.into(), date.day.into())
        .ok_or_else(|| invalid("not a valid calendar date"))
}

/// Loads and validates a study configuration from TOML.
///
/// Omitted globals default to a 56-day period, 14-day windows, the standard
/// weekly decomposition parameters and an epsilon of 1e−9.
pub fn load_study_config<R: Read>(mut reader: R) -> Result<StudyConfig> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_study_config(&text)
}

/// [`load_study_config`] over an in-memory string.
pub fn parse_study_config(text: &str) -> Result<StudyConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let mut localities = Vec::with_capacity(raw.localities.len());
    for rl in &raw.localities {
        let context = format!("locality `{}`", rl.id);
        localities.push(StudyLocality {
            id: rl.id.clone(),
            selector: LocalitySelector {
                country: rl.country.clone(),
                sub_region_1: rl.sub_region_1.clone(),
                sub_region_2: rl.sub_region_2.clone(),
            },
            wave1: local_date(&rl.wave1, &context)?,
            wave2: local_date(&rl.wave2, &context)?,
        });
    }

    let stl = match &raw.stl {
        Some(overrides) => overrides.apply(StlParams::weekly()),
        None => StlParams::weekly(),
    };

    let config = StudyConfig {
        localities,
        period_length_days: raw
            .period_length_days
            .unwrap_or(StudyConfig::DEFAULT_PERIOD_DAYS),
        window_length_days: raw
            .window_length_days
            .unwrap_or(StudyConfig::DEFAULT_WINDOW_DAYS),
        stl,
        epsilon: raw.epsilon.unwrap_or(StudyConfig::DEFAULT_EPSILON),
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_dates_in_order_and_fills_defaults() {
        let cfg = parse_study_config(
            r#"
            [[localities]]
            id = "lombardia"
            country = "Italy"
            sub_region_1 = "Lombardy"
            wave1 = 2020-02-23
            wave2 = 2020-11-06
            "#,
        )
        .unwrap();
        assert_eq!(cfg.period_length_days, 56);
        assert_eq!(cfg.window_length_days, 14);
        assert_eq!(cfg.windows_per_period(), 4);
        assert_eq!(cfg.epsilon, 1e-9);
        assert_eq!(cfg.localities.len(), 1);
        let loc = &cfg.localities[0];
        assert_eq!(loc.wave1, NaiveDate::from_ymd_opt(2020, 2, 23).unwrap());
        assert_eq!(loc.wave2, NaiveDate::from_ymd_opt(2020, 11, 6).unwrap());
        assert_eq!(loc.selector.sub_region_2, None);
    }

    #[test]
    fn rejects_reversed_wave_dates() {
        let err = parse_study_config(
            r#"
            [[localities]]
            id = "x"
            country = "Italy"
            wave1 = 2020-11-06
            wave2 = 2020-02-23
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
        assert!(err.to_string().contains("must precede"), "{err}");
    }

    #[test]
    fn rejects_period_not_divisible_by_window() {
        let err = parse_study_config(
            r#"
            period_length_days = 56
            window_length_days = 13
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not a multiple"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_datetime_values() {
        let err = parse_study_config("period_len = 56").unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        let err = parse_study_config(
            r#"
            [[localities]]
            id = "x"
            country = "Italy"
            wave1 = 2020-02-23T10:00:00
            wave2 = 2020-11-06
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("without time"), "{err}");
    }

    #[test]
    fn rejects_duplicate_ids_and_selectors() {
        let err = parse_study_config(
            r#"
            [[localities]]
            id = "a"
            country = "Italy"
            wave1 = 2020-02-23
            wave2 = 2020-11-06

            [[localities]]
            id = "a"
            country = "France"
            wave1 = 2020-03-12
            wave2 = 2020-10-30
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate locality id"), "{err}");

        let err = parse_study_config(
            r#"
            [[localities]]
            id = "a"
            country = "Italy"
            wave1 = 2020-02-23
            wave2 = 2020-11-06

            [[localities]]
            id = "b"
            country = "Italy"
            wave1 = 2020-03-12
            wave2 = 2020-10-30
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("share the selector"), "{err}");
    }

    #[test]
    fn stl_overrides_apply_on_top_of_defaults() {
        let cfg = parse_study_config(
            r#"
            epsilon = 0.001

            [stl]
            seasonal_span = 13
            outer_iterations = 2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.epsilon, 0.001);
        assert_eq!(cfg.stl.seasonal_span, 13);
        assert_eq!(cfg.stl.outer_iterations, 2);
        // untouched knobs keep their defaults
        assert_eq!(cfg.stl.period, 7);
        assert_eq!(cfg.stl.trend_span, 15);
    }

    #[test]
    fn invalid_stl_override_is_rejected() {
        let err = parse_study_config("[stl]\nseasonal_span = 4").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }
}
