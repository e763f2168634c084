//! Decomposition parameter flags shared by the subcommands.

use clap::Args;
use wavecmp::StlParams;

/// Optional overrides for the seasonal-trend decomposition; unset flags
/// keep the base parameters (from the study config, or derived from the
/// period).
#[derive(Debug, Default, Args)]
pub struct StlOverrides {
    /// Cycle-subseries smoother span (odd, >= 7)
    #[arg(long = "stl-seasonal-span", value_name = "N")]
    pub seasonal_span: Option<usize>,
    /// Trend smoother span (odd, >= the period-derived minimum)
    #[arg(long = "stl-trend-span", value_name = "N")]
    pub trend_span: Option<usize>,
    /// Low-pass smoother span (odd, >= the smallest odd number >= period)
    #[arg(long = "stl-lowpass-span", value_name = "N")]
    pub lowpass_span: Option<usize>,
    /// Cycle-subseries smoother degree (0, 1 or 2)
    #[arg(long = "stl-seasonal-degree", value_name = "D")]
    pub seasonal_degree: Option<u8>,
    /// Trend smoother degree (0, 1 or 2)
    #[arg(long = "stl-trend-degree", value_name = "D")]
    pub trend_degree: Option<u8>,
    /// Low-pass smoother degree (0, 1 or 2)
    #[arg(long = "stl-lowpass-degree", value_name = "D")]
    pub lowpass_degree: Option<u8>,
    /// Inner-loop passes per robustness pass
    #[arg(long = "stl-inner-iterations", value_name = "N")]
    pub inner_iterations: Option<usize>,
    /// Robustness (outer) passes; 0 disables outlier down-weighting
    #[arg(long = "stl-outer-iterations", value_name = "N")]
    pub outer_iterations: Option<usize>,
}

impl StlOverrides {
    /// Applies every set flag onto `base`. The caller validates the result.
    pub fn apply(&self, base: StlParams) -> StlParams {
        let mut params = base;
        macro_rules! take {
            ($field:ident) => {
                if let Some(value) = self.$field {
                    params.$field = value;
                }
            };
        }
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
