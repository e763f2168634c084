//! Reading mobility data and the study configuration.
//!
//! The input format is the Google Community Mobility Reports (CMR) global
//! CSV: one row per locality and day, six `*_percent_change_from_baseline`
//! value columns, and a handful of region-identifier columns. Localities are
//! selected by exact string equality on the region columns, so a selector
//! always addresses exactly one spatial granularity (a region row such as
//! Lombardy is distinct from any of its district rows).

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

pub mod config;
mod gaps;

pub use config::{load_study_config, LocalitySelector, StudyConfig, StudyLocality};
pub use gaps::{fill_gaps, MAX_GAP_DAYS};

/// The six place categories reported by the CMR dataset.
///
/// Only the five non-residential categories take part in the analysis;
/// residential mobility is measured in time spent rather than visits and is
/// not comparable in scale, so it is parsed but excluded downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaceCategory {
    RetailRecreation,
    GroceryPharmacy,
    Parks,
    TransitStations,
    Workplaces,
    Residential,
}

impl PlaceCategory {
    /// All six categories, in the column order of the CMR file.
    pub const ALL: [PlaceCategory; 6] = [
        PlaceCategory::RetailRecreation,
        PlaceCategory::GroceryPharmacy,
        PlaceCategory::Parks,
        PlaceCategory::TransitStations,
        PlaceCategory::Workplaces,
        PlaceCategory::Residential,
    ];

    /// The five categories used for analysis, in the fixed axis/report
    /// order shared by radar charts and tables.
    pub const ANALYSIS: [PlaceCategory; 5] = [
        PlaceCategory::Workplaces,
        PlaceCategory::GroceryPharmacy,
        PlaceCategory::Parks,
        PlaceCategory::RetailRecreation,
        PlaceCategory::TransitStations,
    ];

    /// The CSV column carrying this category's values.
    pub fn column_name(self) -> &'static str {
        match self {
            PlaceCategory::RetailRecreation => "retail_and_recreation_percent_change_from_baseline",
            PlaceCategory::GroceryPharmacy => "grocery_and_pharmacy_percent_change_from_baseline",
            PlaceCategory::Parks => "parks_percent_change_from_baseline",
            PlaceCategory::TransitStations => "transit_stations_percent_change_from_baseline",
            PlaceCategory::Workplaces => "workplaces_percent_change_from_baseline",
            PlaceCategory::Residential => "residential_percent_change_from_baseline",
        }
    }

    /// Human-readable name, used in legends and error messages.
    pub fn label(self) -> &'static str {
        match self {
            PlaceCategory::RetailRecreation => "Retail & recreation",
            PlaceCategory::GroceryPharmacy => "Grocery & pharmacy",
            PlaceCategory::Parks => "Parks",
            PlaceCategory::TransitStations => "Transit stations",
            PlaceCategory::Workplaces => "Workplaces",
            PlaceCategory::Residential => "Residential",
        }
    }

    /// Abbreviated name used on chart axes.
    pub fn abbrev(self) -> &'static str {
        match self {
            PlaceCategory::RetailRecreation => "R&R",
            PlaceCategory::GroceryPharmacy => "G&P",
            PlaceCategory::Parks => "P",
            PlaceCategory::TransitStations => "Ts",
            PlaceCategory::Workplaces => "W",
            PlaceCategory::Residential => "Res",
        }
    }

    /// Short machine-friendly key used in report columns and file names.
    pub fn key(self) -> &'static str {
        match self {
            PlaceCategory::RetailRecreation => "rr",
            PlaceCategory::GroceryPharmacy => "gp",
            PlaceCategory::Parks => "p",
            PlaceCategory::TransitStations => "ts",
            PlaceCategory::Workplaces => "w",
            PlaceCategory::Residential => "res",
        }
    }

    /// True for the one category excluded from analysis.
    pub fn is_residential(self) -> bool {
        self == PlaceCategory::Residential
    }
}

impl std::fmt::Display for PlaceCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for PlaceCategory {
    type Err = String;

    /// Accepts the short key (`w`, `gp`, ...) or the full column name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PlaceCategory::ALL
            .into_iter()
            .find(|c| s == c.key() || s == c.column_name())
            .ok_or_else(|| format!("unknown place category `{s}`"))
    }
}

/// A daily time series of percent-change-from-baseline values for one
/// locality and category.
///
/// Dates are strictly increasing but not necessarily contiguous until
/// [`fill_gaps`] has run; `filled` marks the points that were interpolated
/// rather than observed.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySeries {
    locality_id: String,
    category: PlaceCategory,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    filled: Vec<bool>,
}

impl MobilitySeries {
    /// Builds a series from observed `(date, value)` points.
    ///
    /// Points may arrive in any order; they are sorted by date. Errors on
    /// duplicate dates and non-finite values.
    pub fn new(
        locality_id: impl Into<String>,
        category: PlaceCategory,
        points: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Result<Self> {
        let locality_id = locality_id.into();
        let mut sorted: Vec<(NaiveDate, f64)> = points.into_iter().collect();
        sorted.sort_by_key(|(d, _)| *d);
        let mut dates = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        for (i, (date, value)) in sorted.into_iter().enumerate() {
            if dates.last() == Some(&date) {
                return Err(Error::DuplicateObservation {
                    locality: locality_id,
                    category,
                    date,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite(i));
            }
            dates.push(date);
            values.push(value);
        }
        let filled = vec![false; dates.len()];
        Ok(MobilitySeries {
            locality_id,
            category,
            dates,
            values,
            filled,
        })
    }

    pub fn locality_id(&self) -> &str {
        &self.locality_id
    }

    pub fn category(&self) -> PlaceCategory {
        self.category
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-point flags: `true` where the value was interpolated.
    pub fn filled(&self) -> &[bool] {
        &self.filled
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }

    /// True when every day between the first and last date is present.
    pub fn is_contiguous(&self) -> bool {
        self.dates
            .windows(2)
            .all(|w| (w[1] - w[0]).num_days() == 1)
    }

    /// The observed or filled value on `date`, if present.
    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.values[i])
    }

    /// Index of `date` in the series, if present.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// A copy of this series with the same dates and flags but new values.
    ///
    /// Used by transformation stages (calibration, trend isolation) that
    /// preserve the time axis. Errors if the lengths differ or a value is
    /// non-finite.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.dates.len() {
            return Err(Error::InvalidParams(format!(
                "replacement values have length {}, series has {}",
                values.len(),
                self.dates.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(MobilitySeries {
            locality_id: self.locality_id.clone(),
            category: self.category,
            dates: self.dates.clone(),
            values,
            filled: self.filled.clone(),
        })
    }
}

/// All series parsed for one configured locality.
#[derive(Debug, Clone)]
pub struct LocalityData {
    /// The study-config identifier (not the CMR region strings).
    pub id: String,
    /// The selector that matched this locality's rows.
    pub selector: LocalitySelector,
    /// One series per category that had at least one observed value,
    /// in [`PlaceCategory::ALL`] order.
    pub series: Vec<MobilitySeries>,
}

impl LocalityData {
    /// The series for `category`, if any value was observed for it.
    pub fn series_for(&self, category: PlaceCategory) -> Option<&MobilitySeries> {
        self.series.iter().find(|s| s.category == category)
    }
}

/// Region-identifier columns every CMR file must provide, in addition to
/// `date` and the six category columns.
const REGION_COLUMNS: [&str; 3] = ["country_region", "sub_region_1", "sub_region_2"];

/// Full CMR column set, used when serializing.
const CMR_HEADER: [&str; 15] = [
    "country_region_code",
    "country_region",
    "sub_region_1",
    "sub_region_2",
    "metro_area",
    "iso_3166_2_code",
    "census_fips_code",
    "place_id",
    "date",
    "retail_and_recreation_percent_change_from_baseline",
    "grocery_and_pharmacy_percent_change_from_baseline",
    "parks_percent_change_from_baseline",
    "transit_stations_percent_change_from_baseline",
    "workplaces_percent_change_from_baseline",
    "residential_percent_change_from_baseline",
];

/// Parses a CMR-format CSV stream, keeping only rows that match one of the
/// configured localities.
///
/// Matching is exact string equality on `country_region`, `sub_region_1`
/// and `sub_region_2`; a selector field of `None` requires the cell to be
/// empty, so a region-level selector never swallows district-level rows
/// (and vice versa).
///
/// Returns one [`LocalityData`] per configured locality, in configuration
/// order. Empty value cells become gaps (absent dates) to be repaired by
/// [`fill_gaps`]. Errors if a required column is missing, a cell fails to
/// parse, two rows carry the same (locality, category, date), or a
/// configured locality matches no rows at all.
pub fn parse_cmr_csv<R: Read>(reader: R, localities: &[StudyLocality]) -> Result<Vec<LocalityData>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();

    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let region_cols: Vec<usize> = REGION_COLUMNS
        .iter()
        .map(|c| column(c))
        .collect::<Result<_>>()?;
    let date_col = column("date")?;
    let value_cols: Vec<usize> = PlaceCategory::ALL
        .iter()
        .map(|c| column(c.column_name()))
        .collect::<Result<_>>()?;

    // (locality index, category) -> date -> value, plus a matched-row count
    // per locality so we can report selectors that never fire.
    let mut collected: Vec<[BTreeMap<NaiveDate, f64>; 6]> =
        localities.iter().map(|_| Default::default()).collect();
    let mut matched_rows = vec![0u64; localities.len()];

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("").trim();

        let country = cell(region_cols[0]);
        let sub1 = cell(region_cols[1]);
        let sub2 = cell(region_cols[2]);

        for (li, locality) in localities.iter().enumerate() {
            if !locality.selector.matches(country, sub1, sub2) {
                continue;
            }
            matched_rows[li] += 1;

            let date_cell = cell(date_col);
            let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d").map_err(|e| {
                Error::MalformedRow {
                    line,
                    message: format!("invalid date `{date_cell}`: {e}"),
                }
            })?;

            for (ci, category) in PlaceCategory::ALL.into_iter().enumerate() {
                let raw = cell(value_cols[ci]);
                if raw.is_empty() {
                    continue; // gap
                }
                let value: f64 = raw.parse().map_err(|_| Error::MalformedRow {
                    line,
                    message: format!(
                        "invalid number `{raw}` in column `{}`",
                        category.column_name()
                    ),
                })?;
                if !value.is_finite() {
                    return Err(Error::MalformedRow {
                        line,
                        message: format!("non-finite value in column `{}`", category.column_name()),
                    });
                }
                if collected[li][ci].insert(date, value).is_some() {
                    return Err(Error::DuplicateObservation {
                        locality: locality.id.clone(),
                        category,
                        date,
                    });
                }
            }
        }
    }

    let mut out = Vec::with_capacity(localities.len());
    for (li, locality) in localities.iter().enumerate() {
        if matched_rows[li] == 0 {
            return Err(Error::UnknownLocality(locality.id.clone()));
        }
        let mut series = Vec::new();
        for (ci, category) in PlaceCategory::ALL.into_iter().enumerate() {
            let points = std::mem::take(&mut collected[li][ci]);
            if points.is_empty() {
                continue;
            }
            series.push(MobilitySeries::new(&locality.id, category, points)?);
        }
        out.push(LocalityData {
            id: locality.id.clone(),
            selector: locality.selector.clone(),
            series,
        });
    }
    Ok(out)
}

/// Serializes locality series back into CMR-shaped CSV.
///
/// The inverse of [`parse_cmr_csv`] up to row order: one row per locality
/// and date (dates taken from the union across categories), categories
/// without a value on a date left empty. Identifier columns the selector
/// does not carry (`place_id` etc.) are left empty; the reader ignores
/// them. Used by fixture tooling and round-trip tests.
pub fn write_cmr_csv(localities: &[LocalityData]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CMR_HEADER).expect("write to Vec cannot fail");

    for locality in localities {
        let mut dates: Vec<NaiveDate> = Vec::new();
        for s in &locality.series {
            dates.extend_from_slice(s.dates());
        }
        dates.sort_unstable();
        dates.dedup();

        for date in dates {
            let mut row: Vec<String> = Vec::with_capacity(CMR_HEADER.len());
            row.push(String::new()); // country_region_code
            row.push(locality.selector.country.clone());
            row.push(locality.selector.sub_region_1.clone().unwrap_or_default());
            row.push(locality.selector.sub_region_2.clone().unwrap_or_default());
            row.extend(std::iter::repeat_with(String::new).take(4)); // metro_area .. place_id
            row.push(date.format("%Y-%m-%d").to_string());
            for category in PlaceCategory::ALL {
                let value = locality
                    .series_for(category)
                    .and_then(|s| s.value_on(date));
                row.push(value.map_or_else(String::new, format_cmr_value));
            }
            wtr.write_record(&row).expect("write to Vec cannot fail");
        }
    }

    let bytes = wtr.into_inner().expect("flush to Vec cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// CMR cells are integers in the published files; keep integral values
/// integral so round-trips are byte-faithful, and fall back to the shortest
/// lossless float form otherwise.
fn format_cmr_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Serializable summary of one series, used in diagnostics output.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesSummary {
    pub locality_id: String,
    pub category: String,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub observed: usize,
    pub filled: usize,
}

impl From<&MobilitySeries> for SeriesSummary {
    fn from(s: &MobilitySeries) -> Self {
        let filled = s.filled().iter().filter(|&&f| f).count();
        SeriesSummary {
            locality_id: s.locality_id().to_string(),
            category: s.category().key().to_string(),
            first_date: s.first_date().expect("summarized series is non-empty"),
            last_date: s.last_date().expect("summarized series is non-empty"),
            observed: s.len() - filled,
            filled,
        }
    }
}
