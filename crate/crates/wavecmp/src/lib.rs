//! Compare community-mobility reduction across two restriction waves.
//!
//! This crate turns Google Community Mobility Reports — daily per-category
//! percentage changes from a pre-pandemic baseline — into a verdict on
//! whether a locality's first or second restriction wave reduced mobility
//! harder. The pipeline runs in four stages, one module each:
//!
//! 1. [`ingest`]: parse the CMR CSV, select localities at the right
//!    spatial granularity, fill short gaps, and load the study
//!    configuration (restriction dates per locality).
//! 2. [`decompose`]: strip the strong weekday rhythm with an STL
//!    (seasonal-trend decomposition by loess) and keep the trend.
//! 3. [`prepare`]: calibrate each trend to its pre-restriction level and
//!    min-max scale per category so localities and categories become
//!    comparable ([`prepare::PreparedSeries`], values in `[0, 1]`).
//! 4. [`aggregate`]: cut out the two 56-day wave periods and their 14-day
//!    windows, reduce each to a five-component AUC vector, and classify
//!    every wave-1/wave-2 pair by Pareto dominance — smaller AUC means
//!    stronger reduction.
//!
//! [`render`] draws the results: paired radar charts whose polygon
//! containment mirrors the dominance verdict, annotated trend plots, and
//! plain-text report tables.
//!
//! The decomposition core is usable on its own:
//!
//! ```
//! use wavecmp::{stl_decompose, StlParams};
//!
//! // a weekly rhythm riding on a slow drift
//! let pattern = [8.0, -4.0, 2.0, -7.0, 5.0, -3.0, -1.0];
//! let series: Vec<f64> = (0..140)
//!     .map(|day| day as f64 * 0.1 + pattern[day % 7])
//!     .collect();
//!
//! let parts = stl_decompose(&series, &StlParams::weekly())?;
//! // trend + seasonal + remainder reconstructs the input exactly
//! for day in 0..series.len() {
//!     let rebuilt = parts.trend[day] + parts.seasonal[day] + parts.remainder[day];
//!     assert!((series[day] - rebuilt).abs() < 1e-9);
//! }
//! # Ok::<(), wavecmp::Error>(())
//! ```
//!
//! Everything is deterministic: no clocks, no ambient randomness, and
//! rendering the same inputs twice yields byte-identical artifacts.

pub mod aggregate;
pub mod decompose;
pub mod error;
pub mod guide;
pub mod ingest;
pub mod prepare;
pub mod render;

pub use aggregate::{
    auc, compare_waves, dominance, slice_wave, split_windows, AucVector, ComparisonReport,
    DominanceRelation, Wave, WaveSlice, WindowComparison,
};
pub use decompose::{
    loess_fit_at, loess_smooth_series, stl_decompose, LoessParams, StlParams, StlResult,
};
pub use error::{Error, Result};
pub use ingest::{
    fill_gaps, load_study_config, parse_cmr_csv, write_cmr_csv, LocalityData, LocalitySelector,
    MobilitySeries, PlaceCategory, StudyConfig, StudyLocality,
};
pub use prepare::{
    calibrate_zero_mean, isolate_trend, prepare_locality, scale_common_range, PreparedLocality,
    PreparedSeries,
};
pub use render::{radar_chart, report_table, series_plot, ChartSpec};

#[cfg(test)]
pub(crate) mod testutil {
    /// Zero-mean weekly pattern with amplitude 1, shared by smoothing tests.
    pub(crate) const WEEK_PATTERN: [f64; 7] = [0.9, -0.6, 0.3, -1.0, 0.7, -0.4, 0.1];
}
