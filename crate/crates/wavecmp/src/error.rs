//! Error type shared by every stage of the pipeline.

use crate::ingest::PlaceCategory;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a CSV and writing a chart.
///
/// Variants are grouped by pipeline stage; the `Display` messages are meant
/// to be shown to an operator verbatim, so they name the offending column,
/// locality or index rather than describing internal state.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    // --- ingest -----------------------------------------------------------
    /// The CSV header is missing a column the reader relies on.
    #[error("input is missing required column `{0}`")]
    MissingColumn(String),

    /// A data row could not be interpreted (bad date, bad number, ...).
    #[error("row {line}: {message}")]
    MalformedRow { line: u64, message: String },

    /// A locality requested in the study config matched no rows at all.
    #[error("no rows found for locality `{0}`")]
    UnknownLocality(String),

    /// Two rows claim a value for the same locality, category and date.
    #[error("duplicate observation for `{locality}` {category} on {date}")]
    DuplicateObservation {
        locality: String,
        category: PlaceCategory,
        date: chrono::NaiveDate,
    },

    /// The study configuration file is syntactically or semantically invalid.
    #[error("invalid study config: {0}")]
    Config(String),

    /// Observed data is too holey or too short to analyse honestly.
    #[error("data quality for `{locality}`: {message}")]
    DataQuality { locality: String, message: String },

    /// The pre-restriction segment cannot support zero-mean calibration.
    #[error("calibration for `{locality}` {category}: {message}")]
    Calibration {
        locality: String,
        category: PlaceCategory,
        message: String,
    },

    // --- numerics ---------------------------------------------------------
    /// Smoothing or decomposition parameters fail their structural rules.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A series is shorter than the operation can support.
    #[error("series too short: need at least {needed} points, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    /// A NaN or infinity showed up where a finite sample was required.
    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    /// A local fit has no usable neighbourhood (all weights vanished, or the
    /// design matrix is singular).
    #[error("degenerate local fit at x = {0}")]
    DegenerateFit(f64),

    /// Min–max scaling is impossible because the series never moves.
    #[error("cannot scale {category} for `{locality}`: series is constant")]
    DegenerateScale {
        locality: String,
        category: PlaceCategory,
    },

    // --- aggregation ------------------------------------------------------
    /// A requested date range is not fully covered by the prepared series.
    #[error("slice not covered by data: {0}")]
    SliceOutOfRange(String),

    /// Two aggregate vectors cannot be compared (different axes or windows).
    #[error("vectors are not comparable: {0}")]
    Incompatible(String),

    // --- rendering --------------------------------------------------------
    /// Chart input violates the documented value range.
    #[error("chart input out of range: {0}")]
    ChartRange(String),

    // --- environment ------------------------------------------------------
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Structural CSV failure (bad UTF-8, ragged rows, ...).
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
