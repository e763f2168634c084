//! Integration tests for the command-line contract: exit codes, artifact
//! layout, failure isolation and the run manifest. Each test drives the
//! compiled binary against the frozen fixtures (or small inline inputs).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// A unique scratch directory per test, cleaned up on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("wavecmp-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).expect("scratch dir");
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn wavecmp(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wavecmp"));
    for a in args {
        cmd.arg(a.as_ref());
    }
    cmd.output().expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[test]
fn analyze_writes_the_full_artifact_tree() {
    let scratch = Scratch::new("tree");
    let out = scratch.path("out");
    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &fixture("study.toml"),
        &"--out",
        &out,
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let expected_dirs = [
        "Lombardia",
        "Île-de-France",
        "Birmingham-District",
        "Berlin",
        "Toronto-Division",
    ];
    for dir in expected_dirs {
        for file in [
            "report.csv",
            "report.txt",
            "radar_whole.svg",
            "radar_window1.svg",
            "radar_window2.svg",
            "radar_window3.svg",
            "radar_window4.svg",
            "series.svg",
        ] {
            let path = out.join(dir).join(file);
            assert!(path.is_file(), "missing artifact {}", path.display());
        }
    }
    assert!(out.join("manifest.json").is_file());

    // The stdout report names every locality and uses the relation labels.
    let stdout = stdout_of(&result);
    for dir in ["Lombardia", "Île-de-France", "Berlin"] {
        assert!(stdout.contains(dir), "stdout missing {dir}");
    }
    assert!(stdout.contains("Dominates(w1)"));
    assert!(stdout.contains("whole-period"));
}

#[test]
fn manifest_records_inputs_and_outputs_with_digests() {
    let scratch = Scratch::new("manifest");
    let out = scratch.path("out");
    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &fixture("study.toml"),
        &"--out",
        &out,
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap())
            .expect("valid JSON manifest");

    assert_eq!(manifest["tool"]["name"], "wavecmp");
    assert!(manifest["tool"]["version"].as_str().is_some_and(|v| !v.is_empty()));

    let inputs = manifest["inputs"].as_array().expect("inputs array");
    assert_eq!(inputs.len(), 2);
    let cmr_bytes = std::fs::read(fixture("cmr_snapshot.csv")).unwrap();
    assert_eq!(inputs[0]["role"], "cmr");
    assert_eq!(inputs[0]["sha256"], sha256_hex(&cmr_bytes));
    assert_eq!(inputs[1]["role"], "config");

    let outputs = manifest["outputs"].as_array().expect("outputs array");
    assert_eq!(outputs.len(), 40, "8 artifacts for each of 5 localities");
    let report = outputs
        .iter()
        .find(|o| o["path"] == "Lombardia/report.csv")
        .expect("Lombardia report listed");
    let actual = std::fs::read(out.join("Lombardia/report.csv")).unwrap();
    assert_eq!(report["sha256"], sha256_hex(&actual));

    // The manifest also embeds the effective configuration.
    assert_eq!(manifest["config"]["period_length_days"], 56);
    assert_eq!(manifest["config"]["localities"].as_array().unwrap().len(), 5);
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let result = wavecmp(&[&"analyze", &"--cmr", &fixture("cmr_snapshot.csv")]);
    assert_eq!(result.status.code(), Some(2), "usage errors must exit 2");
    assert!(stderr_of(&result).contains("--config"));
}

#[test]
fn unmatched_locality_is_a_data_error_naming_it() {
    let scratch = Scratch::new("unmatched");
    let config = scratch.path("study.toml");
    std::fs::write(
        &config,
        "[[localities]]\n\
         id = \"Atlantis\"\n\
         country = \"Atlantis\"\n\
         wave1 = 2020-03-01\n\
         wave2 = 2020-11-01\n",
    )
    .unwrap();

    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &config,
        &"--out",
        &scratch.path("out"),
    ]);
    assert_eq!(result.status.code(), Some(1), "data errors must exit 1");
    assert!(
        stderr_of(&result).contains("Atlantis"),
        "error must name the unmatched locality: {}",
        stderr_of(&result)
    );
    assert!(!scratch.path("out").exists(), "nothing may be written on failure");
}

/// A config whose Berlin entry moves the first restriction date to the
/// second day of the data, leaving too little pre-restriction history to
/// calibrate. Parsing succeeds; preparation fails for Berlin only.
fn config_with_broken_berlin(path: &Path) {
    std::fs::write(
        path,
        "[[localities]]\n\
         id = \"Lombardia\"\n\
         country = \"Italy\"\n\
         sub_region_1 = \"Lombardy\"\n\
         wave1 = 2020-02-23\n\
         wave2 = 2020-11-06\n\n\
         [[localities]]\n\
         id = \"Berlin\"\n\
         country = \"Germany\"\n\
         sub_region_1 = \"Berlin\"\n\
         wave1 = 2020-01-17\n\
         wave2 = 2020-11-02\n",
    )
    .unwrap();
}

#[test]
fn failed_locality_aborts_the_run_by_default() {
    let scratch = Scratch::new("abort");
    let config = scratch.path("study.toml");
    config_with_broken_berlin(&config);
    let out = scratch.path("out");

    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &config,
        &"--out",
        &out,
    ]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = stderr_of(&result);
    assert!(stderr.contains("Berlin"), "must name the failing locality: {stderr}");
    assert!(!out.exists(), "no partial tree may survive an aborted run");
}

#[test]
fn keep_going_writes_the_healthy_localities() {
    let scratch = Scratch::new("keepgoing");
    let config = scratch.path("study.toml");
    config_with_broken_berlin(&config);
    let out = scratch.path("out");

    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &config,
        &"--out",
        &out,
        &"--keep-going",
    ]);
    assert_eq!(result.status.code(), Some(1), "failures still exit 1");
    assert!(stderr_of(&result).contains("Berlin"));

    assert!(out.join("Lombardia/report.csv").is_file(), "healthy locality written");
    assert!(!out.join("Berlin").exists(), "failed locality not written");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["outputs"].as_array().unwrap().len(),
        8,
        "manifest lists only the written artifacts"
    );
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let scratch = Scratch::new("envout");
    let out = scratch.path("from-env");

    let result = Command::new(env!("CARGO_BIN_EXE_wavecmp"))
        .args(["analyze", "--cmr"])
        .arg(fixture("cmr_snapshot.csv"))
        .arg("--config")
        .arg(fixture("study.toml"))
        .env("WAVECMP_OUT", &out)
        .output()
        .expect("binary runs");
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn diagnostics_flag_adds_per_series_traces() {
    let scratch = Scratch::new("diag");
    let out = scratch.path("out");
    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &fixture("study.toml"),
        &"--out",
        &out,
        &"--diagnostics",
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let diag = std::fs::read_to_string(out.join("Berlin/diagnostics.csv")).unwrap();
    let header = diag.lines().next().unwrap();
    assert_eq!(header, "date,category,raw,calibrated,trend,seasonal,remainder,scaled");
    assert!(diag.lines().count() > 5 * 300, "traces cover all five categories");
}

#[test]
fn epsilon_flag_widens_the_equality_band() {
    let scratch = Scratch::new("epsilon");
    let out = scratch.path("out");
    // An absurdly wide band makes every per-category difference negligible,
    // so every comparison collapses to Equal.
    let result = wavecmp(&[
        &"analyze",
        &"--cmr",
        &fixture("cmr_snapshot.csv"),
        &"--config",
        &fixture("study.toml"),
        &"--out",
        &out,
        &"--epsilon",
        &"1000",
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    let stdout = stdout_of(&result);
    assert!(stdout.contains("Equal"));
    assert!(!stdout.contains("Dominates(w1)"));
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

fn write_sample_series(path: &Path, days: usize) {
    let pattern = [8.0, -4.0, 2.0, -7.0, 5.0, -3.0, -1.0];
    let mut text = String::from("date,value\n");
    for i in 0..days {
        let date = chrono::NaiveDate::from_ymd_opt(2020, 3, 1).unwrap()
            + chrono::TimeDelta::days(i as i64);
        let value = 5.0 + 0.2 * i as f64 + pattern[i % 7];
        text.push_str(&format!("{date},{value}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn decompose_splits_a_series_into_three_components() {
    let scratch = Scratch::new("decompose");
    let input = scratch.path("series.csv");
    let output = scratch.path("parts.csv");
    write_sample_series(&input, 70);

    let result = wavecmp(&[
        &"decompose",
        &"--input",
        &input,
        &"--output",
        &output,
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let text = std::fs::read_to_string(&output).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("date,observed,trend,seasonal,remainder"));
    assert_eq!(lines.count(), 70);

    // Components must rebuild the observations exactly.
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let observed: f64 = fields[1].parse().unwrap();
        let rebuilt: f64 = fields[2].parse::<f64>().unwrap()
            + fields[3].parse::<f64>().unwrap()
            + fields[4].parse::<f64>().unwrap();
        assert!((observed - rebuilt).abs() <= 1e-9, "{line}");
    }
}

#[test]
fn decompose_rejects_series_shorter_than_two_periods() {
    let scratch = Scratch::new("short");
    let input = scratch.path("series.csv");
    write_sample_series(&input, 10);

    let result = wavecmp(&[&"decompose", &"--input", &input]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = stderr_of(&result);
    assert!(
        stderr.contains("14") && stderr.contains("10"),
        "error must state required and actual lengths: {stderr}"
    );
}

#[test]
fn decompose_honours_stl_overrides() {
    let scratch = Scratch::new("overrides");
    let input = scratch.path("series.csv");
    write_sample_series(&input, 70);

    // An even trend span violates the documented parameter rules.
    let result = wavecmp(&[
        &"decompose",
        &"--input",
        &input,
        &"--stl-trend-span",
        &"4",
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr_of(&result).contains("trend_span"));
}
