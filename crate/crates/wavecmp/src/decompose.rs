//! Numerical core: loess local regression and seasonal-trend decomposition.
//!
//! A daily mobility series mixes three things: the slow trend the analysis
//! cares about, a strong weekday pattern (people simply move differently on
//! Sundays), and noise. [`stl_decompose`] splits a series into exactly those
//! three additive components using iterated loess smoothing — locally
//! weighted polynomial regression with tricube neighbourhood weights — plus
//! an optional robustness loop that down-weights outliers via the bisquare
//! function.
//!
//! All series here are equally spaced, so x-coordinates are sample indices.
//! Everything is a pure function of its inputs; the per-subseries smoothing
//! steps inside the decomposition are independent of one another, so callers
//! may parallelize across series freely without affecting results.

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters for one loess smoothing pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoessParams {
    /// Number of nearest neighbours in each local fit (the bandwidth, often
    /// written q). When larger than the series, all points are used and
    /// weight distances are inflated by `span / n`.
    pub span: usize,
    /// Local polynomial degree: 0 (weighted mean), 1 (linear) or 2.
    pub degree: u8,
}

impl LoessParams {
    pub fn new(span: usize, degree: u8) -> Self {
        LoessParams { span, degree }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree > 2 {
            return Err(Error::InvalidParams(format!(
                "loess degree must be 0, 1 or 2, got {}",
                self.degree
            )));
        }
        if self.span < self.degree as usize + 1 {
            return Err(Error::InvalidParams(format!(
                "loess span {} cannot support degree {} (need at least degree + 1 points)",
                self.span, self.degree
            )));
        }
        Ok(())
    }
}

/// Tricube neighbourhood weight: (1 − u³)³ for 0 ≤ u < 1, else 0.
fn tricube(u: f64) -> f64 {
    if u < 1.0 {
        let t = 1.0 - u * u * u;
        t * t * t
    } else {
        0.0
    }
}

/// Bisquare robustness weight: (1 − u²)² for 0 ≤ u < 1, else 0.
fn bisquare(u: f64) -> f64 {
    if u < 1.0 {
        let t = 1.0 - u * u;
        t * t
    } else {
        0.0
    }
}

/// The contiguous window of the `q` nearest neighbours of `x0` in sorted
/// `xs`, as a half-open index range.
fn nearest_window(xs: &[f64], x0: f64, q: usize) -> (usize, usize) {
    let n = xs.len();
    let q = q.min(n);
    let mut hi = xs.partition_point(|&x| x < x0);
    let mut lo = hi;
    for _ in 0..q {
        let d_lo = if lo > 0 { x0 - xs[lo - 1] } else { f64::INFINITY };
        let d_hi = if hi < n { xs[hi] - x0 } else { f64::INFINITY };
        if d_lo <= d_hi {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    (lo, hi)
}

/// Evaluates a loess fit at a single position.
///
/// Fits a weighted polynomial of `params.degree` to the `params.span`
/// nearest neighbours of `x0` and returns its value at `x0`. Neighbourhood
/// weights are tricube in the distance normalized by the span-th nearest
/// distance; when `external_weights` are given (robustness weights, in
/// `[0,1]`), they multiply the neighbourhood weights. `x0` may lie outside
/// the range of `xs`, in which case the window is the asymmetric run of
/// nearest points — this is what extends cycle-subseries beyond their ends.
///
/// A window with too little spread for the requested degree degrades to a
/// lower-degree fit (ultimately the weighted mean); the fit only errors
/// when no point in the window retains positive weight.
pub fn loess_fit_at(
    xs: &[f64],
    ys: &[f64],
    x0: f64,
    params: &LoessParams,
    external_weights: Option<&[f64]>,
) -> Result<f64> {
    params.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams(format!(
            "xs has length {}, ys has length {}",
            xs.len(),
            ys.len()
        )));
    }
    if let Some(w) = external_weights {
        if w.len() != xs.len() {
            return Err(Error::InvalidParams(format!(
                "external weights have length {}, series has {}",
                w.len(),
                xs.len()
            )));
        }
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParams(
            "xs must be strictly increasing".into(),
        ));
    }

    let (lo, hi) = nearest_window(xs, x0, params.span);

    // Normalizing distance: the farthest distance inside the window,
    // inflated by span/n when the requested span exceeds the data.
    let mut lambda = xs[lo..hi]
        .iter()
        .map(|&x| (x - x0).abs())
        .fold(0.0f64, f64::max);
    if params.span > xs.len() {
        lambda *= params.span as f64 / xs.len() as f64;
    }

    let degree = params.degree as usize;

    // Accumulate weighted moments of z = (x − x0)/λ. Scaling by λ keeps the
    // normal equations well-conditioned; the fitted value at z = 0 is
    // unchanged by the scaling.
    let mut m = [0.0f64; 5]; // Σ w·zʲ, j = 0..=2·degree
    let mut b = [0.0f64; 3]; // Σ w·zʲ·y, j = 0..=degree
    let mut positive = 0usize;
    for i in lo..hi {
        let dist = (xs[i] - x0).abs();
        let u = if lambda > 0.0 {
            dist / lambda
        } else if dist > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let mut w = tricube(u);
        if let Some(ext) = external_weights {
            w *= ext[i];
        }
        if w <= 0.0 {
            continue;
        }
        positive += 1;
        let z = if lambda > 0.0 { (xs[i] - x0) / lambda } else { 0.0 };
        let mut zp = 1.0;
        for mj in m.iter_mut().take(2 * degree + 1) {
            *mj += w * zp;
            zp *= z;
        }
        let mut zp = 1.0;
        for bj in b.iter_mut().take(degree + 1) {
            *bj += w * zp * ys[i];
            zp *= z;
        }
    }

    if positive == 0 {
        return Err(Error::DegenerateFit(x0));
    }

    // Solve the (degree+1)-sized normal equations for the constant
    // coefficient — the fitted value at z = 0. A window too thin for the
    // requested degree leaves the system singular (e.g. a minimal span at a
    // grid point puts all weight on one sample, since the window-edge
    // points get tricube weight exactly 0); like the classic STL local
    // fitting routine we then degrade to the highest degree the window
    // still supports rather than fail, which keeps constants fixed points
    // at every span.
    let mut degree = degree;
    let beta0 = loop {
        match degree {
            0 => break b[0] / m[0],
            1 => {
                let det = m[0] * m[2] - m[1] * m[1];
                if det > 1e-12 * m[0] * m[0] {
                    break (b[0] * m[2] - b[1] * m[1]) / det;
                }
            }
            _ => {
                let det = m[0] * (m[2] * m[4] - m[3] * m[3]) - m[1] * (m[1] * m[4] - m[3] * m[2])
                    + m[2] * (m[1] * m[3] - m[2] * m[2]);
                if det > 1e-12 * m[0] * m[0] * m[0] {
                    let det_a = b[0] * (m[2] * m[4] - m[3] * m[3])
                        - m[1] * (b[1] * m[4] - m[3] * b[2])
                        + m[2] * (b[1] * m[3] - m[2] * b[2]);
                    break det_a / det;
                }
            }
        }
        degree -= 1;
    };

    if beta0.is_finite() {
        Ok(beta0)
    } else {
        Err(Error::DegenerateFit(x0))
    }
}

/// Smooths an equally spaced series by evaluating [`loess_fit_at`] at every
/// index position. Boundary points use the asymmetric nearest-neighbour
/// window, so the output has the input's length.
pub fn loess_smooth_series(
    ys: &[f64],
    params: &LoessParams,
    robustness: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
    let mut out = Vec::with_capacity(ys.len());
    for i in 0..ys.len() {
        out.push(loess_fit_at(&xs, ys, i as f64, params, robustness)?);
    }
    Ok(out)
}

/// Parameters of the seasonal-trend decomposition.
///
/// The field names follow the customary notation: spans are loess
/// bandwidths (odd point counts), `period` is the seasonality length in
/// samples. [`StlParams::weekly`] gives the defaults used for daily data
/// with a weekday pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StlParams {
    /// Seasonality period p in samples (7 for weekday patterns).
    pub period: usize,
    /// Span n_s of the cycle-subseries smoother; odd, ≥ 7.
    pub seasonal_span: usize,
    /// Span n_t of the trend smoother; odd, ≥ [`StlParams::min_trend_span`].
    pub trend_span: usize,
    /// Span n_l of the low-pass smoother; odd, ≥ the smallest odd ≥ period.
    pub lowpass_span: usize,
    /// Local polynomial degree of the seasonal smoother (0, 1 or 2).
    pub seasonal_degree: u8,
    /// Local polynomial degree of the trend smoother.
    pub trend_degree: u8,
    /// Local polynomial degree of the low-pass smoother.
    pub lowpass_degree: u8,
    /// Inner-loop passes n_i per robustness pass; ≥ 1.
    pub inner_iterations: usize,
    /// Robustness (outer) iterations n_o; 0 disables outlier down-weighting.
    pub outer_iterations: usize,
}

impl StlParams {
    /// Defaults for daily series with weekday seasonality: period 7,
    /// n_s = 11 (weekly pattern allowed to evolve slowly), n_l = 7,
    /// n_t = 15, all degrees 1, two inner passes, one robustness pass.
    pub fn weekly() -> Self {
        StlParams::for_period(7)
    }

    /// Defaults for an arbitrary period: n_s = 11, n_l = smallest odd ≥
    /// period, n_t per [`StlParams::min_trend_span`] (except period 7,
    /// which keeps its customary slightly wider trend span of 15).
    pub fn for_period(period: usize) -> Self {
        let seasonal_span = 11;
        let min_trend = StlParams::min_trend_span(period, seasonal_span);
        StlParams {
            period,
            seasonal_span,
            trend_span: if period == 7 { 15 } else { min_trend },
            lowpass_span: next_odd(period),
            seasonal_degree: 1,
            trend_degree: 1,
            lowpass_degree: 1,
            inner_iterations: 2,
            outer_iterations: 1,
        }
    }

    /// The smallest odd trend span that lets the trend smoother pass the
    /// seasonal frequency: smallest odd integer ≥ 1.5·p / (1 − 1.5/n_s).
    pub fn min_trend_span(period: usize, seasonal_span: usize) -> usize {
        let ratio = 1.5 * period as f64 / (1.0 - 1.5 / seasonal_span as f64);
        next_odd(ratio.ceil() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.period < 2 {
            return fail(format!("period must be at least 2, got {}", self.period));
        }
        if self.seasonal_span.is_multiple_of(2) || self.seasonal_span < 7 {
            return fail(format!(
                "seasonal_span must be an odd integer ≥ 7, got {}",
                self.seasonal_span
            ));
        }
        let min_l = next_odd(self.period);
        if self.lowpass_span.is_multiple_of(2) || self.lowpass_span < min_l {
            return fail(format!(
                "lowpass_span must be an odd integer ≥ {min_l} for period {}, got {}",
                self.period, self.lowpass_span
            ));
        }
        let min_t = StlParams::min_trend_span(self.period, self.seasonal_span);
        if self.trend_span.is_multiple_of(2) || self.trend_span < min_t {
            return fail(format!(
                "trend_span must be an odd integer ≥ {min_t} for period {} and seasonal_span {}, got {}",
                self.period, self.seasonal_span, self.trend_span
            ));
        }
        for (name, degree) in [
            ("seasonal_degree", self.seasonal_degree),
            ("trend_degree", self.trend_degree),
            ("lowpass_degree", self.lowpass_degree),
        ] {
            if degree > 2 {
                return fail(format!("{name} must be 0, 1 or 2, got {degree}"));
            }
        }
        if self.inner_iterations == 0 {
            return fail("inner_iterations must be at least 1".into());
        }
        Ok(())
    }

    fn seasonal_loess(&self) -> LoessParams {
        LoessParams::new(self.seasonal_span, self.seasonal_degree)
    }

    fn trend_loess(&self) -> LoessParams {
        LoessParams::new(self.trend_span, self.trend_degree)
    }

    fn lowpass_loess(&self) -> LoessParams {
        LoessParams::new(self.lowpass_span, self.lowpass_degree)
    }
}

fn next_odd(x: usize) -> usize {
    if x.is_multiple_of(2) {
        x + 1
    } else {
        x
    }
}

/// The three additive components of a decomposed series.
#[derive(Debug, Clone, PartialEq)]
pub struct StlResult {
    /// Slowly varying level of the series.
    pub trend: Vec<f64>,
    /// Periodic component; close to zero mean over each period.
    pub seasonal: Vec<f64>,
    /// What is left: input − trend − seasonal, by definition.
    pub remainder: Vec<f64>,
    /// Robustness weights from the last outer pass, in [0,1]; all ones when
    /// `outer_iterations` is 0.
    pub robustness_weights: Vec<f64>,
}

/// Decomposes an equally spaced series into trend + seasonal + remainder.
///
/// The inner loop alternates between estimating the seasonal component (by
/// loess-smoothing each of the `period` cycle-subseries, extended one
/// period beyond both ends, then removing the low-frequency leakage picked
/// up by a `period`, `period`, 3 moving-average cascade plus loess) and
/// re-estimating the trend from the deseasonalized series. The outer loop
/// recomputes bisquare robustness weights from the remainder — points with
/// residuals beyond six times the median absolute residual lose all
/// influence — and repeats the inner loop with them.
///
/// Requires at least two full periods of data and finite values.
pub fn stl_decompose(series: &[f64], params: &StlParams) -> Result<StlResult> {
    params.validate()?;
    let n = series.len();
    let p = params.period;
    if n < 2 * p {
        return Err(Error::SeriesTooShort { needed: 2 * p, got: n });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }

    let seasonal_params = params.seasonal_loess();
    let lowpass_params = params.lowpass_loess();
    let trend_params = params.trend_loess();

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut weights = vec![1.0; n];

    for pass in 0..=params.outer_iterations {
        if pass > 0 {
            let remainder: Vec<f64> =
                (0..n).map(|i| series[i] - trend[i] - seasonal[i]).collect();
            weights = robustness_weights(&remainder);
        }
        for _ in 0..params.inner_iterations {
            let detrended: Vec<f64> = (0..n).map(|i| series[i] - trend[i]).collect();

            // Seasonal candidate: smoothed cycle-subseries on the grid
            // extended one period before and after the data.
            let extended = smooth_cycle_subseries(&detrended, &weights, p, &seasonal_params)?;

            // Low-pass filter of the candidate; whatever survives three
            // moving averages is trend leakage, not seasonality.
            let ma = moving_average(&moving_average(&moving_average(&extended, p), p), 3);
            debug_assert_eq!(ma.len(), n);
            let lowpass = loess_smooth_series(&ma, &lowpass_params, None)?;

            for i in 0..n {
                seasonal[i] = extended[i + p] - lowpass[i];
            }

            let deseasonalized: Vec<f64> = (0..n).map(|i| series[i] - seasonal[i]).collect();
            trend = loess_smooth_series(&deseasonalized, &trend_params, Some(&weights))?;
        }
    }

    let remainder = (0..n).map(|i| series[i] - trend[i] - seasonal[i]).collect();
    Ok(StlResult {
        trend,
        seasonal,
        remainder,
        robustness_weights: weights,
    })
}

/// Smooths each cycle-subseries (all samples sharing a phase within the
/// period) and re-interleaves the results on a grid extended one full
/// period before and after the data, so the low-pass moving averages have
/// material to consume at both ends.
fn smooth_cycle_subseries(
    detrended: &[f64],
    weights: &[f64],
    period: usize,
    params: &LoessParams,
) -> Result<Vec<f64>> {
    let n = detrended.len();
    let mut extended = vec![f64::NAN; n + 2 * period];
    for k in 0..period {
        let sub: Vec<f64> = detrended[k..].iter().step_by(period).copied().collect();
        let sub_weights: Vec<f64> = weights[k..].iter().step_by(period).copied().collect();
        let xs: Vec<f64> = (0..sub.len()).map(|j| j as f64).collect();
        // Evaluate at subseries positions −1 ..= len: one phantom cycle on
        // each side.
        for e in 0..sub.len() + 2 {
            let x0 = e as f64 - 1.0;
            extended[k + e * period] =
                loess_fit_at(&xs, &sub, x0, params, Some(&sub_weights))?;
        }
    }
    debug_assert!(
        extended.iter().all(|v| v.is_finite()),
        "cycle-subseries interleave left holes"
    );
    Ok(extended)
}

/// Centered moving average of window `len`; output shrinks by `len − 1`.
fn moving_average(xs: &[f64], len: usize) -> Vec<f64> {
    xs.windows(len)
        .map(|w| w.iter().sum::<f64>() / len as f64)
        .collect()
}

/// Bisquare robustness weights from a remainder series: u is the absolute
/// residual over six times the median absolute residual. A zero median
/// (perfect fit) yields all-ones weights.
fn robustness_weights(remainder: &[f64]) -> Vec<f64> {
    let mut abs: Vec<f64> = remainder.iter().map(|r| r.abs()).collect();
    let h = 6.0 * median_in_place(&mut abs);
    if h <= 0.0 {
        return vec![1.0; remainder.len()];
    }
    remainder.iter().map(|r| bisquare(r.abs() / h)).collect()
}

/// Median of a non-empty slice, reordering it in the process.
fn median_in_place(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("median input is NaN-free"));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::WEEK_PATTERN;

    fn indices(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn weight_kernels_match_their_definitions() {
        assert_eq!(tricube(0.0), 1.0);
        assert!((tricube(0.5) - 0.669_921_875).abs() < 1e-15);
        assert_eq!(tricube(1.0), 0.0);
        assert_eq!(tricube(2.0), 0.0);
        assert_eq!(bisquare(0.0), 1.0);
        assert!((bisquare(0.5) - 0.5625).abs() < 1e-15);
        assert_eq!(bisquare(1.0), 0.0);
    }

    #[test]
    fn constants_are_fixed_points() {
        let xs = indices(30);
        let ys = vec![4.25; 30];
        for degree in 0..=2u8 {
            for span in [3usize, 7, 11, 100] {
                if span < degree as usize + 1 {
                    continue;
                }
                let params = LoessParams::new(span, degree);
                for &x0 in &[0.0, 3.0, 14.5, 29.0, -2.0, 35.0] {
                    let fit = loess_fit_at(&xs, &ys, x0, &params, None).unwrap();
                    // far one-sided extrapolation windows are worst
                    // conditioned and still land well inside 1e-9
                    assert!(
                        (fit - 4.25).abs() < 1e-9,
                        "degree {degree} span {span} x0 {x0}: {fit}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_one_reproduces_lines_even_outside_the_range() {
        let xs = indices(25);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.75 * x).collect();
        for span in [5usize, 9, 25, 40] {
            let params = LoessParams::new(span, 1);
            for &x0 in &[0.0, 7.0, 12.5, 24.0, -1.0, 25.0, 30.5] {
                let fit = loess_fit_at(&xs, &ys, x0, &params, None).unwrap();
                assert!(
                    (fit - (3.0 - 0.75 * x0)).abs() < 1e-9,
                    "span {span} x0 {x0}: {fit}"
                );
            }
        }
    }

    #[test]
    fn degree_two_reproduces_quadratics() {
        let xs = indices(25);
        let f = |x: f64| 1.0 + 0.5 * x - 0.03 * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let params = LoessParams::new(11, 2);
        for &x0 in &[0.0, 6.0, 12.0, 24.0, 26.0] {
            let fit = loess_fit_at(&xs, &ys, x0, &params, None).unwrap();
            assert!((fit - f(x0)).abs() < 1e-9, "x0 {x0}: {fit} vs {}", f(x0));
        }
    }

    #[test]
    fn degree_zero_is_the_tricube_weighted_mean() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![10.0, 20.0, 30.0, 40.0];
        let params = LoessParams::new(3, 0);
        // window around x0=1: {0,1,2}, lambda = 1 → weights 0, 1, 0... the
        // farthest points sit exactly at u = 1, so only x=1 survives.
        let fit = loess_fit_at(&xs, &ys, 1.0, &params, None).unwrap();
        assert!((fit - 20.0).abs() < 1e-12);

        // off-grid x0: window {0,1,2} around 0.9, lambda = |2−0.9| = 1.1
        let fit = loess_fit_at(&xs, &ys, 0.9, &params, None).unwrap();
        let w = |x: f64| tricube((x - 0.9f64).abs() / 1.1);
        let expect = (w(0.0) * 10.0 + w(1.0) * 20.0 + w(2.0) * 30.0) / (w(0.0) + w(1.0) + w(2.0));
        assert!((fit - expect).abs() < 1e-12);
    }

    #[test]
    fn external_weights_can_silence_points() {
        let xs = indices(6);
        let ys = vec![5.0, 5.0, 5.0, 9.0, 9.0, 9.0];
        let ext = vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let params = LoessParams::new(6, 0);
        let fit = loess_fit_at(&xs, &ys, 2.5, &params, Some(&ext)).unwrap();
        assert!((fit - 5.0).abs() < 1e-12, "{fit}");
    }

    #[test]
    fn thin_windows_degrade_instead_of_failing() {
        // two points cannot support a quadratic; the fit falls back to the
        // line through them
        let xs = vec![0.0, 1.0];
        let ys = vec![1.0, 2.0];
        let fit = loess_fit_at(&xs, &ys, 0.5, &LoessParams::new(3, 2), None).unwrap();
        assert!((fit - 1.5).abs() < 1e-12, "{fit}");

        // a minimal span at a grid point zeroes both neighbours (they sit
        // exactly on the window edge), leaving one usable sample — the fit
        // becomes that sample's value
        let xs = indices(9);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let fit = loess_fit_at(&xs, &ys, 4.0, &LoessParams::new(3, 1), None).unwrap();
        assert!((fit - 8.0).abs() < 1e-12, "{fit}");

        // no usable points at all is still an error
        let err =
            loess_fit_at(&xs, &ys, 4.0, &LoessParams::new(3, 1), Some(&[0.0; 9])).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)), "{err:?}");
    }

    #[test]
    fn smoothing_matches_per_point_fits() {
        // noisy sine, deterministic "noise"
        let ys: Vec<f64> = (0..80)
            .map(|i| {
                let x = i as f64;
                (x / 9.0).sin() * 4.0 + (x * 12.9898).sin() * 0.5
            })
            .collect();
        let params = LoessParams::new(21, 1);
        let smoothed = loess_smooth_series(&ys, &params, None).unwrap();
        let xs = indices(80);
        for (i, &s) in smoothed.iter().enumerate() {
            let direct = loess_fit_at(&xs, &ys, i as f64, &params, None).unwrap();
            assert!((s - direct).abs() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn span_larger_than_series_inflates_distances() {
        // with inflation, even the farthest point keeps positive weight
        let xs = indices(5);
        let ys = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let fit = loess_fit_at(&xs, &ys, 0.0, &LoessParams::new(50, 1), None).unwrap();
        assert!((fit - 1.0).abs() < 1e-9, "{fit}"); // still an exact line
    }

    #[test]
    fn weekly_defaults_satisfy_the_span_rules() {
        let params = StlParams::weekly();
        params.validate().unwrap();
        assert_eq!(params.period, 7);
        assert_eq!(params.seasonal_span, 11);
        assert_eq!(params.lowpass_span, 7);
        assert_eq!(params.trend_span, 15);
        assert_eq!(StlParams::min_trend_span(7, 11), 13);
    }

    #[test]
    fn parameter_validation_rejects_rule_violations() {
        let ok = StlParams::weekly();
        let cases: Vec<(&str, StlParams)> = vec![
            ("period 1", StlParams { period: 1, ..ok }),
            ("even seasonal span", StlParams { seasonal_span: 10, ..ok }),
            ("seasonal span below 7", StlParams { seasonal_span: 5, ..ok }),
            ("even lowpass", StlParams { lowpass_span: 8, ..ok }),
            ("lowpass below period", StlParams { lowpass_span: 5, ..ok }),
            ("trend span below rule", StlParams { trend_span: 11, ..ok }),
            ("even trend span", StlParams { trend_span: 16, ..ok }),
            ("cubic degree", StlParams { trend_degree: 3, ..ok }),
            ("zero inner iterations", StlParams { inner_iterations: 0, ..ok }),
        ];
        for (name, params) in cases {
            assert!(params.validate().is_err(), "{name} should be rejected");
        }
        // the rule minimum itself is accepted
        StlParams { trend_span: 13, ..ok }.validate().unwrap();
    }

    #[test]
    fn short_or_non_finite_series_are_rejected() {
        let params = StlParams::weekly();
        let err = stl_decompose(&[1.0; 13], &params).unwrap_err();
        assert!(
            matches!(err, Error::SeriesTooShort { needed: 14, got: 13 }),
            "{err:?}"
        );
        let mut ys = vec![1.0; 14];
        ys[5] = f64::NAN;
        assert!(matches!(
            stl_decompose(&ys, &params),
            Err(Error::NonFinite(5))
        ));
    }

    #[test]
    fn pure_weekly_pattern_is_recovered_as_seasonal() {
        let n = 70;
        let ys: Vec<f64> = (0..n).map(|i| WEEK_PATTERN[i % 7]).collect();
        let result = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        for i in 0..n {
            assert!(
                (result.seasonal[i] - WEEK_PATTERN[i % 7]).abs() < 1e-8,
                "seasonal at {i}: {}",
                result.seasonal[i]
            );
            assert!(result.trend[i].abs() < 1e-8, "trend at {i}");
            assert!(result.remainder[i].abs() < 1e-8, "remainder at {i}");
        }
    }

    #[test]
    fn linear_ramp_is_recovered_as_trend() {
        let n = 84;
        let ys: Vec<f64> = (0..n).map(|i| 3.0 + 0.25 * i as f64).collect();
        let result = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        for (i, y) in ys.iter().enumerate() {
            assert!(
                (result.trend[i] - y).abs() < 1e-8,
                "trend at {i}: {} vs {y}",
                result.trend[i]
            );
            assert!(result.seasonal[i].abs() < 1e-8, "seasonal at {i}");
        }
    }

    #[test]
    fn ramp_plus_weekly_pattern_splits_cleanly() {
        let n = 112;
        let ramp = |i: usize| -20.0 + 0.4 * i as f64;
        let ys: Vec<f64> = (0..n).map(|i| ramp(i) + WEEK_PATTERN[i % 7]).collect();
        let result = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        for i in 0..n {
            assert!((result.trend[i] - ramp(i)).abs() < 1e-8, "trend at {i}");
            assert!(
                (result.seasonal[i] - WEEK_PATTERN[i % 7]).abs() < 1e-8,
                "seasonal at {i}"
            );
        }
    }

    #[test]
    fn reconstruction_identity_holds_for_arbitrary_input() {
        // deterministic pseudo-random series
        let ys: Vec<f64> = (0..120)
            .map(|i| {
                let x = i as f64;
                (x * 0.7).sin() * 12.0 + (x * 1.3).cos() * 5.0 + x * 0.1
            })
            .collect();
        let result = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        assert_eq!(result.trend.len(), ys.len());
        assert_eq!(result.seasonal.len(), ys.len());
        assert_eq!(result.remainder.len(), ys.len());
        for (i, y) in ys.iter().enumerate() {
            let rebuilt = result.trend[i] + result.seasonal[i] + result.remainder[i];
            assert!((rebuilt - y).abs() < 1e-9, "index {i}");
        }
    }

    #[test]
    fn robustness_weights_are_ones_without_outer_iterations() {
        let ys: Vec<f64> = (0..42).map(|i| (i as f64 * 0.9).sin()).collect();
        let params = StlParams {
            outer_iterations: 0,
            ..StlParams::weekly()
        };
        let result = stl_decompose(&ys, &params).unwrap();
        assert!(result.robustness_weights.iter().all(|&w| w == 1.0));

        let robust = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        assert!(robust
            .robustness_weights
            .iter()
            .all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn spikes_lose_their_robustness_weight() {
        let mut ys: Vec<f64> = (0..84)
            .map(|i| (i as f64 / 10.0).sin() * 3.0 + (i as f64 * 2.3).sin() * 0.3)
            .collect();
        ys[40] += 50.0;
        let result = stl_decompose(&ys, &StlParams::weekly()).unwrap();
        assert!(
            result.robustness_weights[40] < 0.05,
            "spike weight {}",
            result.robustness_weights[40]
        );
        // the bulk of the series keeps substantial weight; the spike's own
        // neighbourhood legitimately pays some, since the first-pass trend
        // smears the spike locally
        let high = result
            .robustness_weights
            .iter()
            .filter(|&&w| w > 0.5)
            .count();
        assert!(high >= 65, "only {high} of 84 points kept substantial weight");
    }

    #[test]
    fn robustness_localizes_spike_damage_to_the_trend() {
        let n = 140;
        let spike_at = 70;
        let clean: Vec<f64> = (0..n)
            .map(|i| (i as f64 / 20.0).sin() * 5.0 + (i as f64 * 2.3).sin() * 0.3)
            .collect();
        let mut spiked = clean.clone();
        spiked[spike_at] += 50.0;

        let robust_params = StlParams::weekly();
        let plain_params = StlParams {
            outer_iterations: 0,
            ..robust_params
        };

        let far: Vec<usize> = (0..n)
            .filter(|&i| (i as i64 - spike_at as i64).unsigned_abs() as usize >= 2 * robust_params.trend_span)
            .collect();
        assert!(!far.is_empty());

        let deviation = |params: &StlParams| -> f64 {
            let clean_trend = stl_decompose(&clean, params).unwrap().trend;
            let spiked_trend = stl_decompose(&spiked, params).unwrap().trend;
            far.iter()
                .map(|&i| (spiked_trend[i] - clean_trend[i]).abs())
                .fold(0.0, f64::max)
        };

        let robust_dev = deviation(&robust_params);
        let plain_dev = deviation(&plain_params);
        assert!(
            robust_dev < plain_dev,
            "robust far-field deviation {robust_dev} should undercut non-robust {plain_dev}"
        );
    }

    #[test]
    fn median_handles_even_and_odd_lengths() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
