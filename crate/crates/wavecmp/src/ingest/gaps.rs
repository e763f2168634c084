//! Interior gap repair for mobility series.
//!
//! Published CMR files contain sporadic empty cells. The decomposition
//! stage needs a regular daily series, so short interior gaps are closed by
//! linear interpolation; anything longer than one full weekly period means
//! the series cannot honestly support a weekday-seasonality analysis and is
//! rejected instead.

use chrono::Days;

use crate::error::{Error, Result};
use crate::ingest::MobilitySeries;

/// Longest interior gap (in missing days) that interpolation may close.
/// One full seasonal period: beyond that an entire weekly cycle is guesswork.
pub const MAX_GAP_DAYS: i64 = 7;

/// Returns a contiguous daily copy of `series`, interpolating interior gaps
/// of at most [`MAX_GAP_DAYS`] missing days.
///
/// Interpolated points are flagged in the result's [`MobilitySeries::filled`]
/// metadata. A series that is already contiguous is returned unchanged, so
/// the operation is idempotent. There are no leading or trailing gaps by
/// construction — the series spans observed dates only.
///
/// Errors with a data-quality report if a gap exceeds the tolerance, and
/// with a length error if the series has fewer than two points.
pub fn fill_gaps(series: &MobilitySeries) -> Result<MobilitySeries> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: series.len(),
        });
    }
    if series.is_contiguous() {
        return Ok(series.clone());
    }

    let dates = series.dates();
    let values = series.values();
    let flags = series.filled();

    let mut out_dates = Vec::with_capacity(series.len());
    let mut out_values = Vec::with_capacity(series.len());
    let mut out_filled = Vec::with_capacity(series.len());

    out_dates.push(dates[0]);
    out_values.push(values[0]);
    out_filled.push(flags[0]);

    for i in 1..series.len() {
        let span = (dates[i] - dates[i - 1]).num_days();
        let missing = span - 1;
        if missing > MAX_GAP_DAYS {
            return Err(Error::DataQuality {
                locality: series.locality_id().to_string(),
                message: format!(
                    "{}: {missing}-day gap between {} and {} exceeds the {MAX_GAP_DAYS}-day limit",
                    series.category(),
                    dates[i - 1],
                    dates[i],
                ),
            });
        }
        for k in 1..span {
            let t = k as f64 / span as f64;
            out_dates.push(dates[i - 1] + Days::new(k as u64));
            out_values.push(values[i - 1] + (values[i] - values[i - 1]) * t);
            out_filled.push(true);
        }
        out_dates.push(dates[i]);
        out_values.push(values[i]);
        out_filled.push(flags[i]);
    }

    Ok(MobilitySeries {
        locality_id: series.locality_id().to_string(),
        category: series.category(),
        dates: out_dates,
        values: out_values,
        filled: out_filled,
    })
}
