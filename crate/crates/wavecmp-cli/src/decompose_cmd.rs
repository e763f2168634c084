//! The `decompose` subcommand: run the seasonal-trend decomposition on one
//! series from a CSV file, for inspecting what the pipeline does to a
//! single signal.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;

use wavecmp::{stl_decompose, Error, StlParams};

use crate::flags::StlOverrides;

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Input CSV with a `value` column; a `date` column, when present, is
    /// carried through to the output
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Seasonality period in samples
    #[arg(long, value_name = "N", default_value_t = 7)]
    pub period: usize,
    /// Output CSV path; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub stl: StlOverrides,
}

pub fn run(args: &DecomposeArgs) -> anyhow::Result<()> {
    let params = args.stl.apply(StlParams::for_period(args.period));

    let (labels, values) = read_series(args)?;
    let result = stl_decompose(&values, &params)
        .with_context(|| format!("decomposing {}", args.input.display()))?;

    let label_header = if labels.is_some() { "date" } else { "index" };
    let mut out = format!("{label_header},observed,trend,seasonal,remainder\n");
    for i in 0..values.len() {
        let label = match &labels {
            Some(labels) => labels[i].clone(),
            None => i.to_string(),
        };
        out.push_str(&format!(
            "{label},{},{},{},{}\n",
            values[i], result.trend[i], result.seasonal[i], result.remainder[i]
        ));
    }

    match &args.output {
        Some(path) => {
            fs::write(path, out).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}

/// Reads the value column (and the optional date column) from the input.
fn read_series(args: &DecomposeArgs) -> anyhow::Result<(Option<Vec<String>>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let headers = reader.headers().map_err(Error::from)?.clone();
    let value_column = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("value"))
        .ok_or_else(|| Error::MissingColumn("value".into()))?;
    let date_column = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("date"));

    let mut labels = date_column.map(|_| Vec::new());
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(Error::from)?;
        let line = record
            .position()
            .map_or(row as u64 + 2, |p| p.line());
        let cell = record.get(value_column).unwrap_or("").trim();
        let value: f64 = cell.parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("cannot parse `{cell}` as a number"),
        })?;
        values.push(value);
        if let (Some(labels), Some(column)) = (labels.as_mut(), date_column) {
            labels.push(record.get(column).unwrap_or("").to_string());
        }
    }
    Ok((labels, values))
}
