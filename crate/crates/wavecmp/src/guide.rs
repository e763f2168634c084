//! The user guide, compiled into the crate so its examples are doc-tests.
//!
//! Each module below carries one chapter of the mdbook under `book/` as its
//! documentation. Nothing here is code — the point is that `cargo test`
//! compiles and runs every example in the guide, so the book cannot drift
//! from the library it describes. Read the rendered book (`mdbook serve
//! book`) for the intended reading experience; the chapter order is:
//! [`introduction`], [`data_model`], [`local_regression`],
//! [`seasonal_trend_decomposition`], [`preparation`], [`dominance`],
//! [`charts_and_reports`], [`command_line`].

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/data-model.md")]
pub mod data_model {}

#[doc = include_str!("../../../book/src/local-regression.md")]
pub mod local_regression {}

#[doc = include_str!("../../../book/src/seasonal-trend-decomposition.md")]
pub mod seasonal_trend_decomposition {}

#[doc = include_str!("../../../book/src/preparation.md")]
pub mod preparation {}

#[doc = include_str!("../../../book/src/dominance.md")]
pub mod dominance {}

#[doc = include_str!("../../../book/src/charts-and-reports.md")]
pub mod charts_and_reports {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
