//! End-to-end smoke tests of the installed binary: flag handling, error
//! surfaces, artifact round trips.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_streamlab"));
    cmd.env_remove("STREAMLAB_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> (Output, String, String) {
    let out = cmd.output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout.clone()).expect("utf8 stdout");
    let stderr = String::from_utf8(out.stderr.clone()).expect("utf8 stderr");
    (out, stdout, stderr)
}

fn run_ok(cmd: &mut Command) -> String {
    let (out, stdout, stderr) = run(cmd);
    assert!(out.status.success(), "stdout:\n{stdout}\nstderr:\n{stderr}");
    stdout
}

#[test]
fn threshold_prints_four_significant_digits() {
    let stdout = run_ok(bin().args([
        "threshold",
        "--bprime",
        "40",
        "--k",
        "1.25",
        "--beta",
        "0.2",
    ]));
    assert!(stdout.contains("threshold_s = 53.33\n"), "{stdout}");
}

#[test]
fn threshold_reports_when_no_length_interrupts() {
    let stdout = run_ok(bin().args(["threshold", "--bprime", "40", "--k", "2.0", "--beta", "0.6"]));
    assert!(stdout.contains("threshold_s = inf"), "{stdout}");
    assert!(stdout.contains("note = "), "{stdout}");
}

#[test]
fn invalid_scenario_exits_nonzero_with_the_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.toml");
    fs::write(
        &scenario,
        "arrival_rate = 0.5\nencoding_rate = 125000.0\nduration = 120.0\n\
         horizon = 100.0\nwarmup = 500.0\nseed = 1\n\n\
         [strategy]\npreset = \"youtube-flash\"\non_rate = 625000.0\n",
    )
    .unwrap();
    let (out, _, stderr) = run(bin()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["simulate", "--scenario"])
        .arg(&scenario));
    assert!(!out.status.success());
    assert!(stderr.contains("warmup"), "{stderr}");
}

#[test]
fn analyze_requires_the_flow_header() {
    let dir = tempfile::tempdir().unwrap();
    let flow = dir.path().join("flow.csv");
    fs::write(&flow, "time,bytes\n1.0,100\n").unwrap();
    let (out, _, stderr) = run(bin().args(["analyze", "--input"]).arg(&flow));
    assert!(!out.status.success());
    assert!(stderr.contains("timestamp_s,bytes"), "{stderr}");
}

#[test]
fn generate_then_analyze_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(bin().arg("--out-dir").arg(dir.path()).args([
        "generate",
        "--preset",
        "youtube-flash",
        "--encoding-rate",
        "125000",
        "--duration",
        "120",
        "--on-rate",
        "625000",
        "--flow-out",
        "flow.csv",
    ]));

    let from_flow = run_ok(
        bin()
            .args(["analyze", "--encoding-rate", "125000", "--input"])
            .arg(dir.path().join("flow.csv")),
    );
    assert!(
        from_flow.contains("classification = short-on-off"),
        "{from_flow}"
    );
    assert!(from_flow.contains("total_bytes = 15000000"), "{from_flow}");

    // The segment CSV converts to the same records, so the verdict matches.
    let from_segments = run_ok(
        bin()
            .args(["analyze", "--encoding-rate", "125000", "--segments"])
            .arg(dir.path().join("trace.csv")),
    );
    assert!(
        from_segments.contains("classification = short-on-off"),
        "{from_segments}"
    );
    assert!(
        from_segments.contains("total_bytes = 15000000"),
        "{from_segments}"
    );
}

#[test]
fn unknown_preset_lists_the_registry() {
    let (out, _, stderr) = run(bin().args([
        "generate",
        "--preset",
        "bogus",
        "--encoding-rate",
        "125000",
        "--duration",
        "120",
    ]));
    assert!(!out.status.success());
    assert!(stderr.contains("bogus"), "{stderr}");
    assert!(stderr.contains("youtube-flash"), "{stderr}");
}

#[test]
fn env_var_selects_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = bin();
    cmd.env("STREAMLAB_OUT_DIR", dir.path());
    run_ok(cmd.args([
        "generate",
        "--kind",
        "no-on-off",
        "--on-rate",
        "500000",
        "--encoding-rate",
        "100000",
        "--duration",
        "60",
    ]));
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn presets_lists_the_whole_registry() {
    let stdout = run_ok(bin().arg("presets"));
    for name in [
        "youtube-flash",
        "youtube-html5-ie",
        "youtube-html5-chrome",
        "youtube-android",
        "youtube-noonoff",
        "netflix-pc",
        "netflix-ipad",
        "netflix-android",
    ] {
        assert!(
            stdout.contains(&format!("name = {name}\n")),
            "{name} missing"
        );
    }
}

#[test]
fn conflicting_buffer_flags_are_a_usage_error() {
    let (out, _, stderr) = run(bin().args([
        "generate",
        "--preset",
        "youtube-flash",
        "--encoding-rate",
        "125000",
        "--duration",
        "120",
        "--buffer-bytes",
        "1000000",
        "--buffer-playback",
        "40",
    ]));
    assert!(!out.status.success());
    assert!(stderr.contains("--buffer-playback"), "{stderr}");
}

#[test]
fn committed_scenario_parses_and_runs_scaled_down() {
    // Keep the committed example healthy: single replication of the same
    // file the docs point at.
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/youtube-flash.toml");
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_ok(
        bin()
            .arg("--out-dir")
            .arg(dir.path())
            .args(["simulate", "--replications", "1"])
            .args(["--scenario"])
            .arg(&scenario),
    );
    assert!(stdout.contains("analytic_mean_Bps = 7500000"), "{stdout}");
    assert!(dir.path().join("series.csv").exists());
    assert!(dir.path().join("summary.json").exists());
}
