//! The `analyze` subcommand: the full pipeline for every configured
//! locality, producing a deterministic artifact tree.
//!
//! Per locality the tree holds a machine-readable `report.csv`, the aligned
//! `report.txt`, five radar charts (whole period plus one per window), the
//! annotated `series.svg`, and optionally `diagnostics.csv` with the raw
//! decomposition traces. A `manifest.json` at the root records input and
//! output digests so runs can be compared and reproduced.
//!
//! Artifacts are rendered in memory first and flushed only after analysis
//! has finished; a failure before the flush therefore leaves the output
//! directory untouched, and a failure during it removes what was already
//! written.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;

use wavecmp::prepare::SeriesDiagnostics;
use wavecmp::{
    compare_waves, parse_cmr_csv, prepare_locality, render, LocalityData, StudyConfig,
    StudyLocality,
};

use crate::flags::StlOverrides;
use crate::manifest::{sha256_hex, InputRecord, OutputRecord, RunManifest, ToolInfo};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Mobility input: a CMR-format CSV covering the configured localities
    #[arg(long, value_name = "FILE")]
    pub cmr: PathBuf,
    /// Study configuration (TOML): localities, wave dates, parameters
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Output directory for the artifact tree
    #[arg(long, value_name = "DIR", env = "WAVECMP_OUT")]
    pub out: PathBuf,
    /// Override the dominance equality tolerance from the config
    #[arg(long, value_name = "EPS")]
    pub epsilon: Option<f64>,
    /// Use decomposition defaults derived for this period instead of the
    /// config's parameters (refine with the other --stl-* flags)
    #[arg(long = "stl-period", value_name = "DAYS")]
    pub stl_period: Option<usize>,
    #[command(flatten)]
    pub stl: StlOverrides,
    /// Also write per-locality decomposition traces (diagnostics.csv)
    #[arg(long)]
    pub diagnostics: bool,
    /// Analyze remaining localities when one fails; failures are reported
    /// and the run still exits nonzero
    #[arg(long)]
    pub keep_going: bool,
}

/// Everything one locality contributes to the artifact tree, rendered but
/// not yet written.
struct LocalityArtifacts {
    /// Directory name under the output root.
    dir: String,
    /// File name → content, in a fixed order.
    files: Vec<(String, Vec<u8>)>,
    /// Aligned comparison table for stdout.
    table: String,
}

pub fn run(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let config_bytes = fs::read(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut config = wavecmp::load_study_config(config_bytes.as_slice())
        .with_context(|| format!("loading {}", args.config.display()))?;

    if let Some(epsilon) = args.epsilon {
        config.epsilon = epsilon;
    }
    let stl_base = match args.stl_period {
        Some(period) => wavecmp::StlParams::for_period(period),
        None => config.stl,
    };
    config.stl = args.stl.apply(stl_base);
    config.validate().context("after CLI overrides")?;

    let cmr_bytes =
        fs::read(&args.cmr).with_context(|| format!("reading CMR data {}", args.cmr.display()))?;
    let data = parse_cmr_csv(cmr_bytes.as_slice(), &config.localities)
        .with_context(|| format!("parsing {}", args.cmr.display()))?;

    // claim one directory name per locality up front so collisions fail
    // before any work happens
    let dirs: Vec<String> = config
        .localities
        .iter()
        .map(|l| artifact_dir_name(&l.id))
        .collect();
    for (i, dir) in dirs.iter().enumerate() {
        if let Some(j) = dirs[..i].iter().position(|d| d == dir) {
            bail!(
                "locality ids `{}` and `{}` both map to artifact directory `{dir}`",
                config.localities[j].id,
                config.localities[i].id
            );
        }
    }

    // localities are independent; analyze them concurrently and collect in
    // config order so output and exit behavior stay deterministic
    let results: Vec<wavecmp::Result<LocalityArtifacts>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .localities
            .iter()
            .zip(&dirs)
            .map(|(locality, dir)| {
                let locality_data = data
                    .iter()
                    .find(|d| d.id == locality.id)
                    .expect("parser yields every configured locality");
                let config = &config;
                scope.spawn(move || {
                    analyze_locality(locality_data, locality, config, dir, args.diagnostics)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("locality worker panicked"))
            .collect()
    });

    let mut artifacts = Vec::new();
    let mut failures = Vec::new();
    for (locality, result) in config.localities.iter().zip(results) {
        match result {
            Ok(rendered) => artifacts.push(rendered),
            Err(error) => failures.push((locality.id.clone(), error)),
        }
    }

    if !failures.is_empty() && !args.keep_going {
        for (id, error) in &failures {
            eprintln!("{id}: {error}");
        }
        bail!(
            "{} of {} localities failed; nothing written (--keep-going writes the rest)",
            failures.len(),
            config.localities.len()
        );
    }

    let manifest = |outputs: Vec<OutputRecord>| RunManifest {
        tool: ToolInfo::current(),
        inputs: vec![
            InputRecord {
                role: "cmr",
                path: args.cmr.display().to_string(),
                sha256: sha256_hex(&cmr_bytes),
            },
            InputRecord {
                role: "config",
                path: args.config.display().to_string(),
                sha256: sha256_hex(&config_bytes),
            },
        ],
        config: config.clone(),
        outputs,
    };

    let mut stager = Stager::new(args.out.clone());
    if let Err(error) = write_tree(&mut stager, &artifacts, manifest) {
        stager.discard();
        return Err(error.context("writing artifacts (partial outputs removed)"));
    }

    for (i, artifact) in artifacts.iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{}", artifact.table);
    }

    if !failures.is_empty() {
        for (id, error) in &failures {
            eprintln!("{id}: {error}");
        }
        bail!(
            "{} of {} localities failed; artifacts written for the rest",
            failures.len(),
            config.localities.len()
        );
    }
    Ok(())
}

/// Runs prepare → compare → render for one locality, entirely in memory.
fn analyze_locality(
    data: &LocalityData,
    locality: &StudyLocality,
    config: &StudyConfig,
    dir: &str,
    diagnostics: bool,
) -> wavecmp::Result<LocalityArtifacts> {
    let prepared = prepare_locality(data, locality, &config.stl)?;
    let report = compare_waves(&prepared.series, locality, config)?;

    let mut files: Vec<(String, Vec<u8>)> = Vec::with_capacity(9);
    files.push(("report.csv".into(), report.to_csv_string().into_bytes()));
    let table = render::report_table(&report);
    files.push(("report.txt".into(), table.clone().into_bytes()));
    files.push((
        "radar_whole.svg".into(),
        render::radar_chart((&report.whole_period.wave1, &report.whole_period.wave2))?
            .into_bytes(),
    ));
    for window in &report.windows {
        files.push((
            format!("radar_window{}.svg", window.window_index),
            render::radar_chart((&window.wave1, &window.wave2))?.into_bytes(),
        ));
    }
    files.push((
        "series.svg".into(),
        render::series_plot(&prepared.series, locality, config)?.into_bytes(),
    ));
    if diagnostics {
        files.push((
            "diagnostics.csv".into(),
            diagnostics_csv(&prepared.diagnostics).into_bytes(),
        ));
    }

    Ok(LocalityArtifacts {
        dir: dir.to_string(),
        files,
        table,
    })
}

/// Flushes every rendered artifact plus the manifest.
fn write_tree(
    stager: &mut Stager,
    artifacts: &[LocalityArtifacts],
    manifest: impl FnOnce(Vec<OutputRecord>) -> RunManifest,
) -> anyhow::Result<()> {
    let mut outputs = Vec::new();
    for artifact in artifacts {
        for (name, bytes) in &artifact.files {
            let relative = format!("{}/{name}", artifact.dir);
            stager.write(&relative, bytes)?;
            outputs.push(OutputRecord {
                path: relative,
                sha256: sha256_hex(bytes),
            });
        }
    }
    let manifest_bytes = manifest(outputs).to_json_bytes()?;
    stager.write("manifest.json", &manifest_bytes)?;
    Ok(())
}

/// Tracks written files so a failed flush can undo itself.
struct Stager {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Stager {
    fn new(root: PathBuf) -> Self {
        Stager {
            root,
            written: Vec::new(),
        }
    }

    fn write(&mut self, relative: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    fn discard(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}

/// Directory name for a locality id: alphanumerics, `-` and `_` survive,
/// everything else becomes `-`. Deterministic and traversal-safe.
fn artifact_dir_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || matches!(c, '-' | '_') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Long-format CSV of the per-category decomposition traces.
fn diagnostics_csv(diagnostics: &[SeriesDiagnostics]) -> String {
    let mut out = String::from("date,category,raw,calibrated,trend,seasonal,remainder,scaled\n");
    for series in diagnostics {
        for (i, date) in series.dates.iter().enumerate() {
            out.push_str(&format!(
                "{date},{},{},{},{},{},{},{}\n",
                series.category.key(),
                series.raw[i],
                series.calibrated[i],
                series.trend[i],
                series.seasonal[i],
                series.remainder[i],
                series.scaled[i],
            ));
        }
    }
    out
}
