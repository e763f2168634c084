//! Series preparation: calibration, trend isolation and common-range
//! scaling.
//!
//! Raw percent-change values are not directly comparable — neither across
//! categories (parks swing far harder than groceries) nor across waves
//! (reporting drift). Three steps make them comparable within a locality:
//!
//! 1. **Zero-mean calibration** — subtract the mean of the segment strictly
//!    before the first wave's restriction date, so "0" means "business as
//!    usual before any restrictions".
//! 2. **Trend isolation** — keep only the trend component of the
//!    decomposition; weekday seasonality and noise would otherwise dominate
//!    short-window comparisons.
//! 3. **Common-range scaling** — min–max scale each category's trend to
//!    [0,1] over the full series extent, so every category spans the same
//!    range and both waves pass through one shared transform.
//!
//! The scaled values are mobility *levels*: 0 is the lowest level the
//! locality ever reached, 1 the highest. A stronger mobility reduction
//! therefore means *smaller* values.

use chrono::NaiveDate;

use crate::decompose::{stl_decompose, StlParams, StlResult};
use crate::error::{Error, Result};
use crate::ingest::{fill_gaps, LocalityData, MobilitySeries, PlaceCategory, StudyLocality};

/// Everything needed to undo the value transformations of preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    /// Mean of the pre-restriction segment, subtracted during calibration.
    pub calibration_offset: f64,
    /// Trend minimum over the full extent; maps to scaled 0.
    pub scale_min: f64,
    /// Trend maximum over the full extent; maps to scaled 1.
    pub scale_max: f64,
    /// Decomposition parameters that produced the trend.
    pub stl: StlParams,
}

/// A fully prepared category series: calibrated, trend-isolated and scaled
/// to [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSeries {
    pub locality_id: String,
    pub category: PlaceCategory,
    /// Contiguous daily dates.
    pub dates: Vec<NaiveDate>,
    /// Scaled trend values, all within [0,1].
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl PreparedSeries {
    /// Inverts the min–max scaling, recovering calibrated trend values.
    pub fn calibrated_trend(&self) -> Vec<f64> {
        let Provenance {
            scale_min,
            scale_max,
            ..
        } = self.provenance;
        self.values
            .iter()
            .map(|v| v * (scale_max - scale_min) + scale_min)
            .collect()
    }

    /// Index of `date` in the series, if covered.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }
}

/// A calibrated trend series awaiting scaling — the intermediate product
/// between decomposition and [`scale_common_range`].
#[derive(Debug, Clone)]
pub struct CalibratedTrend {
    pub locality_id: String,
    pub category: PlaceCategory,
    pub dates: Vec<NaiveDate>,
    pub trend: Vec<f64>,
    pub calibration_offset: f64,
}

/// Per-category decomposition traces kept for the diagnostics output.
#[derive(Debug, Clone)]
pub struct SeriesDiagnostics {
    pub category: PlaceCategory,
    pub dates: Vec<NaiveDate>,
    /// Gap-filled input values (pre-calibration).
    pub raw: Vec<f64>,
    pub calibrated: Vec<f64>,
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
    pub scaled: Vec<f64>,
}

/// The prepared five-category bundle for one locality.
#[derive(Debug, Clone)]
pub struct PreparedLocality {
    pub locality_id: String,
    /// One entry per analysis category, in [`PlaceCategory::ANALYSIS`] order.
    pub series: Vec<PreparedSeries>,
    /// Decomposition traces, same order as `series`.
    pub diagnostics: Vec<SeriesDiagnostics>,
}

impl PreparedLocality {
    pub fn series_for(&self, category: PlaceCategory) -> Option<&PreparedSeries> {
        self.series.iter().find(|s| s.category == category)
    }
}

/// Days of observed data required strictly before the first restriction
/// date for the calibration baseline to be meaningful — one full week, so
/// every weekday contributes once.
pub const MIN_CALIBRATION_DAYS: usize = 7;

/// Subtracts the mean of the segment strictly before
/// `wave1_restriction_date` from every value, returning the shifted series
/// and the offset that was removed.
///
/// Errors if no observation precedes the restriction date. Callers that
/// feed the analysis pipeline additionally require
/// [`MIN_CALIBRATION_DAYS`] of pre-restriction data — enforced by
/// [`prepare_locality`], not here, so short synthetic series remain usable
/// in isolation.
pub fn calibrate_zero_mean(
    series: &MobilitySeries,
    wave1_restriction_date: NaiveDate,
) -> Result<(MobilitySeries, f64)> {
    let pre_len = series
        .dates()
        .partition_point(|&d| d < wave1_restriction_date);
    if pre_len == 0 {
        return Err(Error::Calibration {
            locality: series.locality_id().to_string(),
            category: series.category(),
            message: format!("no observations strictly before {wave1_restriction_date}"),
        });
    }
    let offset = series.values()[..pre_len].iter().sum::<f64>() / pre_len as f64;
    let shifted = series
        .with_values(series.values().iter().map(|v| v - offset).collect())?;
    Ok((shifted, offset))
}

/// Runs the decomposition and returns only the trend component.
///
/// The series must be gap-free (contiguous daily dates); calibrate first if
/// zero-mean semantics are wanted. Use [`stl_decompose`] directly when the
/// seasonal and remainder components are needed too.
pub fn isolate_trend(series: &MobilitySeries, params: &StlParams) -> Result<Vec<f64>> {
    decompose_series(series, params).map(|r| r.trend)
}

fn decompose_series(series: &MobilitySeries, params: &StlParams) -> Result<StlResult> {
    if !series.is_contiguous() {
        return Err(Error::DataQuality {
            locality: series.locality_id().to_string(),
            message: format!("{} series has unfilled gaps", series.category()),
        });
    }
    stl_decompose(series.values(), params)
}

/// Min–max scales each category's trend to [0,1] over its full extent.
///
/// Expects exactly the five analysis categories with identical date ranges.
/// Scaling is per category — each uses its own min and max — which is what
/// balances magnitudes across categories within the locality. A flat trend
/// cannot be scaled and yields a degenerate-scale error.
pub fn scale_common_range(
    trends: &[CalibratedTrend],
    stl: &StlParams,
) -> Result<Vec<PreparedSeries>> {
    let find = |category: PlaceCategory| -> Result<&CalibratedTrend> {
        let mut found = trends.iter().filter(|t| t.category == category);
        let first = found.next().ok_or_else(|| Error::DataQuality {
            locality: trends.first().map_or_else(String::new, |t| t.locality_id.clone()),
            message: format!("missing {category} trend"),
        })?;
        if found.next().is_some() {
            return Err(Error::DataQuality {
                locality: first.locality_id.clone(),
                message: format!("duplicate {category} trend"),
            });
        }
        Ok(first)
    };

    let reference = find(PlaceCategory::ANALYSIS[0])?;
    let mut prepared = Vec::with_capacity(PlaceCategory::ANALYSIS.len());
    for category in PlaceCategory::ANALYSIS {
        let t = find(category)?;
        if t.locality_id != reference.locality_id {
            return Err(Error::Incompatible(format!(
                "trends from different localities: `{}` vs `{}`",
                reference.locality_id, t.locality_id
            )));
        }
        if t.dates != reference.dates {
            return Err(Error::DataQuality {
                locality: t.locality_id.clone(),
                message: format!(
                    "{category} covers a different date range than {}",
                    reference.category
                ),
            });
        }
        if t.trend.len() != t.dates.len() {
            return Err(Error::InvalidParams(format!(
                "{category}: trend length {} does not match {} dates",
                t.trend.len(),
                t.dates.len()
            )));
        }

        let min = t.trend.iter().copied().fold(f64::INFINITY, f64::min);
        let max = t.trend.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) || max == min {
            return Err(Error::DegenerateScale {
                locality: t.locality_id.clone(),
                category,
            });
        }
        let range = max - min;
        let values: Vec<f64> = t.trend.iter().map(|v| (v - min) / range).collect();
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));

        prepared.push(PreparedSeries {
            locality_id: t.locality_id.clone(),
            category,
            dates: t.dates.clone(),
            values,
            provenance: Provenance {
                calibration_offset: t.calibration_offset,
                scale_min: min,
                scale_max: max,
                stl: *stl,
            },
        });
    }
    Ok(prepared)
}

/// Full preparation pipeline for one locality: gap-fill, calibrate,
/// decompose and scale all five analysis categories.
///
/// Enforces the analysis preconditions that the individual operations keep
/// relaxed: every analysis category must be present, and at least
/// [`MIN_CALIBRATION_DAYS`] observed days must precede the first wave's
/// restriction date.
pub fn prepare_locality(
    data: &LocalityData,
    locality: &StudyLocality,
    stl: &StlParams,
) -> Result<PreparedLocality> {
    let mut trends = Vec::with_capacity(PlaceCategory::ANALYSIS.len());
    let mut traces = Vec::with_capacity(PlaceCategory::ANALYSIS.len());

    for category in PlaceCategory::ANALYSIS {
        let raw = data.series_for(category).ok_or_else(|| Error::DataQuality {
            locality: data.id.clone(),
            message: format!("no {category} data for selector {}", data.selector.describe()),
        })?;
        let filled = fill_gaps(raw)?;

        let pre_days = filled.dates().partition_point(|&d| d < locality.wave1);
        if pre_days < MIN_CALIBRATION_DAYS {
            return Err(Error::Calibration {
                locality: data.id.clone(),
                category,
                message: format!(
                    "only {pre_days} day(s) before {}, need at least {MIN_CALIBRATION_DAYS}",
                    locality.wave1
                ),
            });
        }

        let (calibrated, offset) = calibrate_zero_mean(&filled, locality.wave1)?;
        let decomposed = decompose_series(&calibrated, stl)?;

        traces.push(SeriesDiagnostics {
            category,
            dates: filled.dates().to_vec(),
            raw: filled.values().to_vec(),
            calibrated: calibrated.values().to_vec(),
            trend: decomposed.trend.clone(),
            seasonal: decomposed.seasonal,
            remainder: decomposed.remainder,
            scaled: Vec::new(), // filled in below, once scaling is known
        });
        trends.push(CalibratedTrend {
            locality_id: data.id.clone(),
            category,
            dates: filled.dates().to_vec(),
            trend: decomposed.trend,
            calibration_offset: offset,
        });
    }

    let series = scale_common_range(&trends, stl)?;
    for (trace, prepared) in traces.iter_mut().zip(&series) {
        debug_assert_eq!(trace.category, prepared.category);
        trace.scaled = prepared.values.clone();
    }

    Ok(PreparedLocality {
        locality_id: data.id.clone(),
        series,
        diagnostics: traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LocalitySelector;
    use chrono::Days;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn daily_series(
        category: PlaceCategory,
        start: &str,
        values: impl IntoIterator<Item = f64>,
    ) -> MobilitySeries {
        let start = date(start);
        MobilitySeries::new(
            "test",
            category,
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (start + Days::new(i as u64), v)),
        )
        .unwrap()
    }

    #[test]
    fn calibration_subtracts_the_pre_restriction_mean() {
        let series = daily_series(PlaceCategory::Workplaces, "2020-01-01", [2.0, 4.0, 10.0]);
        let (shifted, offset) = calibrate_zero_mean(&series, date("2020-01-03")).unwrap();
        assert_eq!(offset, 3.0);
        assert_eq!(shifted.values(), &[-1.0, 1.0, 7.0]);
        assert_eq!(shifted.dates(), series.dates());
    }

    #[test]
    fn zero_mean_pre_segment_is_untouched() {
        let series = daily_series(PlaceCategory::Workplaces, "2020-01-01", [-1.0, 1.0, 5.0]);
        let (shifted, offset) = calibrate_zero_mean(&series, date("2020-01-03")).unwrap();
        assert_eq!(offset, 0.0);
        assert_eq!(shifted.values(), series.values());
    }

    #[test]
    fn calibration_needs_at_least_one_prior_observation() {
        let series = daily_series(PlaceCategory::Workplaces, "2020-01-01", [2.0, 4.0]);
        let err = calibrate_zero_mean(&series, date("2020-01-01")).unwrap_err();
        assert!(matches!(err, Error::Calibration { .. }), "{err:?}");
    }

    #[test]
    fn trend_of_a_constant_series_is_the_constant() {
        let series = daily_series(PlaceCategory::Parks, "2020-01-01", vec![5.5; 42]);
        let trend = isolate_trend(&series, &StlParams::weekly()).unwrap();
        assert!(trend.iter().all(|t| (t - 5.5).abs() < 1e-6));
    }

    #[test]
    fn trend_removes_weekly_autocorrelation() {
        // ramp + hard weekly dips + mild deterministic jitter
        let pattern = crate::testutil::WEEK_PATTERN;
        let values: Vec<f64> = (0..140)
            .map(|i| {
                -0.2 * i as f64 + 8.0 * pattern[i % 7] + (i as f64 * 2.7).sin() * 0.4
            })
            .collect();
        let series = daily_series(PlaceCategory::Workplaces, "2020-01-01", values);
        let trend = isolate_trend(&series, &StlParams::weekly()).unwrap();

        fn lag7_autocorr_of_diffs(xs: &[f64]) -> f64 {
            let d: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            let cov = d
                .iter()
                .zip(&d[7..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>();
            cov / var
        }

        let raw_ac = lag7_autocorr_of_diffs(series.values());
        let trend_ac = lag7_autocorr_of_diffs(&trend);
        assert!(
            trend_ac.abs() < raw_ac.abs(),
            "trend lag-7 autocorrelation {trend_ac} should undercut raw {raw_ac}"
        );
        assert!(raw_ac > 0.5, "weekly dips should show up in the raw series");
    }

    #[test]
    fn gappy_series_is_rejected_by_trend_isolation() {
        let series = MobilitySeries::new(
            "test",
            PlaceCategory::Parks,
            [
                (date("2020-01-01"), 1.0),
                (date("2020-01-03"), 2.0),
                (date("2020-01-04"), 3.0),
            ],
        )
        .unwrap();
        let err = isolate_trend(&series, &StlParams::weekly()).unwrap_err();
        assert!(matches!(err, Error::DataQuality { .. }), "{err:?}");
    }

    fn trend_bundle(values_by_category: &[(PlaceCategory, Vec<f64>)]) -> Vec<CalibratedTrend> {
        let start = date("2020-02-01");
        values_by_category
            .iter()
            .map(|(category, trend)| CalibratedTrend {
                locality_id: "test".into(),
                category: *category,
                dates: (0..trend.len())
                    .map(|i| start + Days::new(i as u64))
                    .collect(),
                trend: trend.clone(),
                calibration_offset: 0.0,
            })
            .collect()
    }

    fn five_trends(make: impl Fn(usize, PlaceCategory) -> f64, len: usize) -> Vec<CalibratedTrend> {
        trend_bundle(
            &PlaceCategory::ANALYSIS
                .iter()
                .map(|&c| (c, (0..len).map(|i| make(i, c)).collect::<Vec<_>>()))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn scaling_maps_extremes_to_the_unit_interval() {
        let trends = five_trends(
            |i, c| {
                if c == PlaceCategory::Parks {
                    // spans [−80, 0] with midpoint −40 present
                    match i {
                        0 => -80.0,
                        1 => -40.0,
                        _ => 0.0,
                    }
                } else {
                    i as f64
                }
            },
            5,
        );
        let prepared = scale_common_range(&trends, &StlParams::weekly()).unwrap();
        let parks = prepared
            .iter()
            .find(|p| p.category == PlaceCategory::Parks)
            .unwrap();
        assert_eq!(parks.values[0], 0.0);
        assert_eq!(parks.values[1], 0.5);
        assert_eq!(parks.values[2], 1.0);

        for p in &prepared {
            let min = p.values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(min, 0.0, "{}", p.category);
            assert_eq!(max, 1.0, "{}", p.category);
        }
        // output follows the canonical analysis order
        let order: Vec<PlaceCategory> = prepared.iter().map(|p| p.category).collect();
        assert_eq!(order, PlaceCategory::ANALYSIS);
    }

    #[test]
    fn flat_series_cannot_be_scaled() {
        let trends = five_trends(
            |i, c| {
                if c == PlaceCategory::TransitStations {
                    42.0
                } else {
                    i as f64
                }
            },
            6,
        );
        let err = scale_common_range(&trends, &StlParams::weekly()).unwrap_err();
        match err {
            Error::DegenerateScale { category, .. } => {
                assert_eq!(category, PlaceCategory::TransitStations)
            }
            other => panic!("expected DegenerateScale, got {other:?}"),
        }
    }

    #[test]
    fn scaling_requires_all_five_categories_on_one_range() {
        let mut trends = five_trends(|i, _| i as f64, 6);
        trends.pop();
        let err = scale_common_range(&trends, &StlParams::weekly()).unwrap_err();
        assert!(matches!(err, Error::DataQuality { .. }), "{err:?}");

        let mut trends = five_trends(|i, _| i as f64, 6);
        trends[2].dates.pop();
        trends[2].trend.pop();
        let err = scale_common_range(&trends, &StlParams::weekly()).unwrap_err();
        assert!(matches!(err, Error::DataQuality { .. }), "{err:?}");
    }

    #[test]
    fn provenance_inverts_back_to_calibrated_trend() {
        let trends = five_trends(|i, c| (i as f64 * 0.3).sin() * (c.key().len() + 1) as f64, 40);
        let prepared = scale_common_range(&trends, &StlParams::weekly()).unwrap();
        for (t, p) in trends.iter().zip(&prepared) {
            let inverted = p.calibrated_trend();
            for (a, b) in t.trend.iter().zip(&inverted) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(p.provenance.calibration_offset, t.calibration_offset);
        }
    }

    /// End-to-end preparation over synthetic locality data.
    #[test]
    fn prepare_locality_runs_the_full_pipeline() {
        let start = date("2020-02-01");
        let wave1 = date("2020-02-15");
        let n = 120usize;
        let series: Vec<MobilitySeries> = PlaceCategory::ALL
            .iter()
            .map(|&category| {
                let scale = (category.key().len() + 1) as f64 * 10.0;
                MobilitySeries::new(
                    "synthetic",
                    category,
                    (0..n).map(|i| {
                        let drop = if i >= 14 { -(i as f64 - 14.0).min(30.0) } else { 0.0 };
                        (
                            start + Days::new(i as u64),
                            5.0 + drop * scale / 10.0
                                + crate::testutil::WEEK_PATTERN[i % 7] * 3.0,
                        )
                    }),
                )
                .unwrap()
            })
            .collect();
        let data = LocalityData {
            id: "synthetic".into(),
            selector: LocalitySelector {
                country: "Nowhere".into(),
                sub_region_1: None,
                sub_region_2: None,
            },
            series,
        };
        let locality = StudyLocality {
            id: "synthetic".into(),
            selector: data.selector.clone(),
            wave1,
            wave2: date("2020-04-01"),
        };

        let prepared = prepare_locality(&data, &locality, &StlParams::weekly()).unwrap();
        assert_eq!(prepared.series.len(), 5);
        assert_eq!(prepared.diagnostics.len(), 5);
        for (s, d) in prepared.series.iter().zip(&prepared.diagnostics) {
            assert!(s.values.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(s.dates.len(), n);
            assert_eq!(d.scaled, s.values);
            assert_eq!(d.raw.len(), n);
            // reconstruction: calibrated == trend + seasonal + remainder
            for i in 0..n {
                let rebuilt = d.trend[i] + d.seasonal[i] + d.remainder[i];
                assert!((rebuilt - d.calibrated[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn prepare_locality_enforces_the_calibration_window() {
        let start = date("2020-02-10");
        let series: Vec<MobilitySeries> = PlaceCategory::ANALYSIS
            .iter()
            .map(|&category| {
                MobilitySeries::new(
                    "short",
                    category,
                    (0..60).map(|i| (start + Days::new(i as u64), i as f64)),
                )
                .unwrap()
            })
            .collect();
        let data = LocalityData {
            id: "short".into(),
            selector: LocalitySelector {
                country: "Nowhere".into(),
                sub_region_1: None,
                sub_region_2: None,
            },
            series,
        };
        let locality = StudyLocality {
            id: "short".into(),
            selector: data.selector.clone(),
            wave1: date("2020-02-14"), // only 4 days of history
            wave2: date("2020-03-14"),
        };
        let err = prepare_locality(&data, &locality, &StlParams::weekly()).unwrap_err();
        match err {
            Error::Calibration { message, .. } => {
                assert!(message.contains("4 day(s)"), "{message}")
            }
            other => panic!("expected Calibration, got {other:?}"),
        }
    }

    #[test]
    fn prepare_locality_names_a_missing_category() {
        let data = LocalityData {
            id: "missing".into(),
            selector: LocalitySelector {
                country: "Nowhere".into(),
                sub_region_1: None,
                sub_region_2: None,
            },
            series: vec![daily_series(PlaceCategory::Workplaces, "2020-01-01", vec![1.0; 30])],
        };
        let locality = StudyLocality {
            id: "missing".into(),
            selector: data.selector.clone(),
            wave1: date("2020-01-15"),
            wave2: date("2020-02-15"),
        };
        let err = prepare_locality(&data, &locality, &StlParams::weekly()).unwrap_err();
        match err {
            Error::DataQuality { message, .. } => {
                assert!(message.contains("Grocery & pharmacy"), "{message}")
            }
            other => panic!("expected DataQuality, got {other:?}"),
        }
    }
}
