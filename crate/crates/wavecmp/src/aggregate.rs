//! Wave slicing, AUC aggregation and Pareto-dominance classification.
//!
//! Each restriction wave contributes one 56-day period starting at the
//! locality's initial restriction date (day 0), further cut into four
//! consecutive 14-day windows. A slice is summarized per category by the
//! area under its scaled curve — a unit-width rectangle sum, so a 56-day
//! slice scores between 0 and 56. Two waves are then compared by Pareto
//! dominance over the five category AUCs: **smaller is stronger** (less
//! residual mobility means a harder reduction), and a wave dominates when
//! it is no weaker on every category and strictly stronger on at least one
//! — exactly the "one radar polygon contains the other" picture.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};
use crate::ingest::{PlaceCategory, StudyConfig, StudyLocality};
use crate::prepare::PreparedSeries;

/// Which restriction wave a slice belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Wave {
    First,
    Second,
}

impl Wave {
    pub fn number(self) -> u8 {
        match self {
            Wave::First => 1,
            Wave::Second => 2,
        }
    }
}

impl std::fmt::Display for Wave {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "wave {}", self.number())
    }
}

/// Index of the whole-period pseudo-window.
pub const WHOLE_PERIOD: usize = 0;

/// A contiguous run of scaled daily values for one wave, either the whole
/// period (`window_index` 0) or one of its consecutive windows (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSlice {
    pub locality_id: String,
    pub wave: Wave,
    pub window_index: usize,
    /// First day of the slice; the restriction date for the whole period
    /// and for window 1.
    pub start_date: NaiveDate,
    pub length_days: usize,
    /// Scaled values per category, each of `length_days` entries.
    pub values: BTreeMap<PlaceCategory, Vec<f64>>,
}

/// Per-category AUC aggregation of one slice, with the slice's metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AucVector {
    pub locality_id: String,
    pub wave: Wave,
    pub window_index: usize,
    pub start_date: NaiveDate,
    pub length_days: usize,
    /// One non-negative component per category, each in `[0, length_days]`.
    pub components: BTreeMap<PlaceCategory, f64>,
}

impl AucVector {
    /// Errors unless `other` covers the same categories, window index and
    /// slice length — the preconditions for comparing or plotting a pair.
    pub fn ensure_comparable(&self, other: &AucVector) -> Result<()> {
        if self.locality_id != other.locality_id {
            return Err(Error::Incompatible(format!(
                "different localities: `{}` vs `{}`",
                self.locality_id, other.locality_id
            )));
        }
        if self.window_index != other.window_index || self.length_days != other.length_days {
            return Err(Error::Incompatible(format!(
                "different windows: index {} over {} days vs index {} over {} days",
                self.window_index, self.length_days, other.window_index, other.length_days
            )));
        }
        if self.components.len() != other.components.len()
            || !self
                .components
                .keys()
                .zip(other.components.keys())
                .all(|(a, b)| a == b)
        {
            return Err(Error::Incompatible(
                "AUC vectors cover different category sets".into(),
            ));
        }
        Ok(())
    }

    /// Components in the canonical analysis order.
    pub fn component_array(&self) -> Vec<f64> {
        PlaceCategory::ANALYSIS
            .iter()
            .filter_map(|c| self.components.get(c).copied())
            .collect()
    }
}

/// Extracts one wave's slice from prepared series.
///
/// The slice covers `length_days` daily samples starting at
/// `restriction_date` (inclusive — the restriction date is day 0). Every
/// prepared series must cover that range; a shortfall names the missing
/// span.
pub fn slice_wave(
    prepared: &[PreparedSeries],
    wave: Wave,
    restriction_date: NaiveDate,
    length_days: usize,
) -> Result<WaveSlice> {
    if length_days == 0 {
        return Err(Error::InvalidParams("slice length must be positive".into()));
    }
    let first = prepared
        .first()
        .ok_or_else(|| Error::InvalidParams("no prepared series to slice".into()))?;
    let locality_id = first.locality_id.clone();

    let mut values = BTreeMap::new();
    for series in prepared {
        if series.locality_id != locality_id {
            return Err(Error::Incompatible(format!(
                "mixed localities in slice input: `{}` vs `{locality_id}`",
                series.locality_id
            )));
        }
        let end = restriction_date + Days::new(length_days as u64 - 1);
        let start_index = series.index_of(restriction_date).ok_or_else(|| {
            Error::SliceOutOfRange(format!(
                "`{locality_id}` {}: needs [{restriction_date}, {end}], data starts {}",
                series.category,
                series
                    .dates
                    .first()
                    .map_or_else(|| "never".to_string(), |d| d.to_string()),
            ))
        })?;
        if start_index + length_days > series.values.len() {
            let last = series.dates.last().expect("non-empty series");
            return Err(Error::SliceOutOfRange(format!(
                "`{locality_id}` {}: needs [{restriction_date}, {end}], data ends {last}",
                series.category,
            )));
        }
        values.insert(
            series.category,
            series.values[start_index..start_index + length_days].to_vec(),
        );
    }

    Ok(WaveSlice {
        locality_id,
        wave,
        window_index: WHOLE_PERIOD,
        start_date: restriction_date,
        length_days,
        values,
    })
}

/// Cuts a slice into consecutive, non-overlapping windows of `window_len`
/// days; window k (1-based) starts (k−1)·window_len days after the slice.
///
/// The slice length must be a positive multiple of `window_len`.
pub fn split_windows(slice: &WaveSlice, window_len: usize) -> Result<Vec<WaveSlice>> {
    if window_len == 0 || !slice.length_days.is_multiple_of(window_len) {
        return Err(Error::InvalidParams(format!(
            "cannot split {} days into windows of {window_len}",
            slice.length_days
        )));
    }
    let count = slice.length_days / window_len;
    let mut windows = Vec::with_capacity(count);
    for k in 0..count {
        let offset = k * window_len;
        let values: BTreeMap<PlaceCategory, Vec<f64>> = slice
            .values
            .iter()
            .map(|(c, v)| (*c, v[offset..offset + window_len].to_vec()))
            .collect();
        windows.push(WaveSlice {
            locality_id: slice.locality_id.clone(),
            wave: slice.wave,
            window_index: k + 1,
            start_date: slice.start_date + Days::new(offset as u64),
            length_days: window_len,
            values,
        });
    }
    Ok(windows)
}

/// Aggregates a slice into its per-category AUC vector.
///
/// The integral is a unit-width rectangle sum — one rectangle per day — so
/// a slice of all-ones scores exactly `length_days` and all-zeros scores 0.
pub fn auc(slice: &WaveSlice) -> AucVector {
    let components = slice
        .values
        .iter()
        .map(|(c, v)| (*c, v.iter().sum::<f64>()))
        .collect();
    AucVector {
        locality_id: slice.locality_id.clone(),
        wave: slice.wave,
        window_index: slice.window_index,
        start_date: slice.start_date,
        length_days: slice.length_days,
        components,
    }
}

/// Outcome of comparing AUC vector `a` against `b`.
///
/// Smaller components dominate: they mean stronger mobility reduction. On a
/// radar chart, `Dominates` is `a`'s polygon sitting inside `b`'s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceRelation {
    /// `a` is at least as strong everywhere and strictly stronger somewhere.
    Dominates,
    /// Mirror image: `b` dominates `a`.
    DominatedBy,
    /// Each is strictly stronger somewhere — the polygons cross.
    Incomparable,
    /// All components equal within tolerance.
    Equal,
}

impl DominanceRelation {
    /// The same relation seen from the other argument's side.
    pub fn flipped(self) -> Self {
        match self {
            DominanceRelation::Dominates => DominanceRelation::DominatedBy,
            DominanceRelation::DominatedBy => DominanceRelation::Dominates,
            symmetric => symmetric,
        }
    }
}

impl std::fmt::Display for DominanceRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DominanceRelation::Dominates => "Dominates",
            DominanceRelation::DominatedBy => "DominatedBy",
            DominanceRelation::Incomparable => "Incomparable",
            DominanceRelation::Equal => "Equal",
        })
    }
}

impl std::str::FromStr for DominanceRelation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Dominates" => Ok(DominanceRelation::Dominates),
            "DominatedBy" => Ok(DominanceRelation::DominatedBy),
            "Incomparable" => Ok(DominanceRelation::Incomparable),
            "Equal" => Ok(DominanceRelation::Equal),
            other => Err(format!("unknown dominance relation `{other}`")),
        }
    }
}

/// Classifies the Pareto relation between two AUC vectors.
///
/// Components within `epsilon` of each other count as equal. `a` dominates
/// `b` when every component satisfies `a ≤ b + ε` and at least one
/// satisfies `a < b − ε`; with `epsilon = 0` this is strict Pareto
/// dominance (a strict partial order). Vectors must share categories and
/// window metadata.
pub fn dominance(a: &AucVector, b: &AucVector, epsilon: f64) -> Result<DominanceRelation> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    a.ensure_comparable(b)?;

    let mut stronger = 0usize; // components where a < b − ε
    let mut weaker = 0usize; // components where a > b + ε
    for (va, vb) in a.components.values().zip(b.components.values()) {
        if va < &(vb - epsilon) {
            stronger += 1;
        } else if va > &(vb + epsilon) {
            weaker += 1;
        }
    }
    Ok(match (stronger > 0, weaker > 0) {
        (false, false) => DominanceRelation::Equal,
        (true, false) => DominanceRelation::Dominates,
        (false, true) => DominanceRelation::DominatedBy,
        (true, true) => DominanceRelation::Incomparable,
    })
}

/// One wave-1-versus-wave-2 comparison: the two AUC vectors and how wave 1
/// fared.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowComparison {
    /// 0 for the whole period, else the 1-based window number.
    pub window_index: usize,
    pub wave1: AucVector,
    pub wave2: AucVector,
    /// Relation of wave 1 relative to wave 2.
    pub relation: DominanceRelation,
}

impl WindowComparison {
    /// Days since the restriction date covered by this comparison,
    /// inclusive on both ends.
    pub fn day_range(&self) -> (usize, usize) {
        let start = match self.window_index {
            WHOLE_PERIOD => 0,
            k => (k - 1) * self.wave1.length_days,
        };
        (start, start + self.wave1.length_days - 1)
    }

    /// The window column value used in reports: `whole-period` or the
    /// window number.
    pub fn window_label(&self) -> String {
        match self.window_index {
            WHOLE_PERIOD => "whole-period".to_string(),
            k => k.to_string(),
        }
    }
}

/// The full comparison set for one locality: whole period plus every
/// consecutive window.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub locality_id: String,
    pub wave1_start: NaiveDate,
    pub wave2_start: NaiveDate,
    pub whole_period: WindowComparison,
    pub windows: Vec<WindowComparison>,
}

impl ComparisonReport {
    /// Whole-period comparison followed by the windows, in order.
    pub fn comparisons(&self) -> impl Iterator<Item = &WindowComparison> {
        std::iter::once(&self.whole_period).chain(self.windows.iter())
    }

    /// Canonical comma-separated serialization: a header plus one record
    /// per comparison. Category columns follow the analysis order, wave 1
    /// before wave 2; the `relation` column is wave 1's
    /// [`DominanceRelation`]. Start dates are each window's own first day.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("locality,window,length_days,wave1_start,wave2_start");
        for wave in [1u8, 2] {
            for category in PlaceCategory::ANALYSIS {
                out.push_str(&format!(",{}_w{wave}", category.key()));
            }
        }
        out.push_str(",relation\n");

        for cmp in self.comparisons() {
            out.push_str(&format!(
                "{},{},{},{},{}",
                self.locality_id,
                cmp.window_label(),
                cmp.wave1.length_days,
                cmp.wave1.start_date,
                cmp.wave2.start_date,
            ));
            for vector in [&cmp.wave1, &cmp.wave2] {
                for value in vector.component_array() {
                    out.push_str(&format!(",{value:.6}"));
                }
            }
            out.push_str(&format!(",{}\n", cmp.relation));
        }
        out
    }
}

/// Runs the whole comparison for one locality: slice both wave periods,
/// split windows, aggregate AUCs and classify each pair.
pub fn compare_waves(
    prepared: &[PreparedSeries],
    locality: &StudyLocality,
    config: &StudyConfig,
) -> Result<ComparisonReport> {
    let period = config.period_length_days;
    let slice1 = slice_wave(prepared, Wave::First, locality.wave1, period)?;
    let slice2 = slice_wave(prepared, Wave::Second, locality.wave2, period)?;

    let compare = |s1: &WaveSlice, s2: &WaveSlice| -> Result<WindowComparison> {
        let wave1 = auc(s1);
        let wave2 = auc(s2);
        let relation = dominance(&wave1, &wave2, config.epsilon)?;
        Ok(WindowComparison {
            window_index: s1.window_index,
            wave1,
            wave2,
            relation,
        })
    };

    let whole_period = compare(&slice1, &slice2)?;
    let windows: Vec<WindowComparison> = split_windows(&slice1, config.window_length_days)?
        .iter()
        .zip(&split_windows(&slice2, config.window_length_days)?)
        .map(|(s1, s2)| compare(s1, s2))
        .collect::<Result<_>>()?;

    Ok(ComparisonReport {
        locality_id: locality.id.clone(),
        wave1_start: locality.wave1,
        wave2_start: locality.wave2,
        whole_period,
        windows,
    })
}
