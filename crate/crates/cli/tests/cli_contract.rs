//! Exit-code and artifact contract of the command-line binary: 0 for normal
//! monitoring outcomes, 2 for detected faults, 1 for usage, I/O and
//! configuration errors; artifacts round-trip bit-exactly.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sentinel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentinel"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sentinel(dir.path(), &[])), 1);
    assert_eq!(code(&sentinel(dir.path(), &["no-such-command"])), 1);
}

#[test]
fn help_and_version_succeed() {
    let dir = TempDir::new().unwrap();
    let help = sentinel(dir.path(), &["--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout).into_owned();
    assert!(text.contains("monitor-immune"));
    assert!(text.contains("experiment"));
    assert_eq!(code(&sentinel(dir.path(), &["--version"])), 0);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&sentinel(
            dir.path(),
            &["gen", "sine", "--frequency", "2", "-o", "x.csv"]
        )),
        1
    );
    // range bounds must be given as a pair
    assert_eq!(
        code(&sentinel(
            dir.path(),
            &[
                "train-immune",
                "--self",
                "x.csv",
                "--seed",
                "1",
                "--min",
                "0",
                "-o",
                "d.json"
            ]
        )),
        1
    );
}

#[test]
fn gen_writes_the_requested_number_of_rows() {
    let dir = TempDir::new().unwrap();
    let out = sentinel(
        dir.path(),
        &[
            "gen", "sine", "--amp", "1", "--freq", "1", "--dt", "0.01", "--n", "1000", "-o",
            "self.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    let text = fs::read_to_string(dir.path().join("self.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,value"));
    assert_eq!(lines.count(), 1000);
}

#[test]
fn monitoring_trained_data_exits_zero_with_an_empty_event_list() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"])),
        0
    );
    let train = sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ],
    );
    assert_eq!(code(&train), 0, "{}", stderr_text(&train));
    let monitor = sentinel(
        dir.path(),
        &["monitor-immune", "--in", "self.csv", "--model", "det.json"],
    );
    assert_eq!(code(&monitor), 0, "{}", stderr_text(&monitor));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"normal\""));
    assert!(report.contains("\"engine\": \"immune\""));
    let events = fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert_eq!(events, "window_index,detector_id,distance\n");
}

#[test]
fn amplitude_jump_exits_two_and_lists_events() {
    let dir = TempDir::new().unwrap();
    sentinel(
        dir.path(),
        &["gen", "sine", "--amp", "0.3", "-o", "calm.csv"],
    );
    sentinel(
        dir.path(),
        &["gen", "sine", "--amp", "1.0", "-o", "loud.csv"],
    );
    // An explicit range keeps the loud tone inside the representable band;
    // a range fitted to the calm tone would fold the excursion onto its rim.
    let train = sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "calm.csv",
            "--detectors",
            "15",
            "--seed",
            "1",
            "--min",
            "-1.1",
            "--max",
            "1.1",
            "-o",
            "det.json",
        ],
    );
    assert_eq!(code(&train), 0, "{}", stderr_text(&train));
    let monitor = sentinel(
        dir.path(),
        &["monitor-immune", "--in", "loud.csv", "--model", "det.json"],
    );
    assert_eq!(code(&monitor), 2, "{}", stderr_text(&monitor));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"fault\""));
    let events = fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(events.lines().count() > 1, "no event rows:\n{events}");
    assert!(events.starts_with("window_index,detector_id,distance\n"));
}

#[test]
fn grammar_pipeline_discriminates_healthy_from_faulty() {
    let dir = TempDir::new().unwrap();
    sentinel(
        dir.path(),
        &["gen", "motor-dq", "--profile", "normal", "-o", "pair.csv"],
    );
    let train = sentinel(
        dir.path(),
        &[
            "train-grammar",
            "--pair",
            "pair.csv",
            "--min",
            "-0.05",
            "--max",
            "1.35",
            "-o",
            "g.json",
        ],
    );
    assert_eq!(code(&train), 0, "{}", stderr_text(&train));

    let healthy = sentinel(
        dir.path(),
        &["monitor-grammar", "--in", "pair.csv", "--model", "g.json"],
    );
    assert_eq!(code(&healthy), 0, "{}", stderr_text(&healthy));

    sentinel(
        dir.path(),
        &[
            "gen",
            "motor-dq",
            "--profile",
            "progression",
            "-o",
            "bad.csv",
        ],
    );
    let faulty = sentinel(
        dir.path(),
        &["monitor-grammar", "--in", "bad.csv", "--model", "g.json"],
    );
    assert_eq!(code(&faulty), 2, "{}", stderr_text(&faulty));
    let segments = fs::read_to_string(dir.path().join("segments.csv")).unwrap();
    assert!(segments.starts_with("segment_index,distance,fault\n"));
    assert!(
        segments.lines().any(|l| l.ends_with(",1")),
        "no fault rows:\n{segments}"
    );
}

#[test]
fn missing_files_and_corrupt_models_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = sentinel(
        dir.path(),
        &[
            "monitor-immune",
            "--in",
            "absent.csv",
            "--model",
            "absent.json",
        ],
    );
    assert_eq!(code(&missing), 1);
    assert!(stderr_text(&missing).contains("error"));

    fs::write(dir.path().join("det.json"), "{]").unwrap();
    sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"]);
    let corrupt = sentinel(
        dir.path(),
        &["monitor-immune", "--in", "self.csv", "--model", "det.json"],
    );
    assert_eq!(code(&corrupt), 1);

    let truncated = sentinel(
        dir.path(),
        &["train-grammar", "--pair", "self.csv", "-o", "g.json"],
    );
    // a single-value series is not an input/output pair
    assert_eq!(code(&truncated), 1);
}

#[test]
fn value_only_series_require_an_explicit_time_step() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..64)
        .map(|k| format!("{}\n", (k as f64 * 0.1).sin()))
        .collect();
    fs::write(dir.path().join("bare.csv"), rows).unwrap();
    let without = sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "bare.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ],
    );
    assert_eq!(code(&without), 1);
    let with = sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "bare.csv",
            "--seed",
            "1",
            "--dt",
            "0.1",
            "--detectors",
            "3",
            "-o",
            "det.json",
        ],
    );
    assert_eq!(code(&with), 0, "{}", stderr_text(&with));
}

#[test]
fn tampered_reports_are_rejected() {
    let dir = TempDir::new().unwrap();
    sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"]);
    sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ],
    );
    sentinel(
        dir.path(),
        &["monitor-immune", "--in", "self.csv", "--model", "det.json"],
    );
    let honest = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let render = sentinel(dir.path(), &["report", "--in", "report.json"]);
    assert_eq!(code(&render), 0, "{}", stderr_text(&render));

    let lying = honest.replace("\"verdict\": \"normal\"", "\"verdict\": \"fault\"");
    fs::write(dir.path().join("tampered.json"), lying).unwrap();
    let rejected = sentinel(dir.path(), &["report", "--in", "tampered.json"]);
    assert_eq!(code(&rejected), 1);
    assert!(stderr_text(&rejected).contains("error"));
}

#[test]
fn report_renders_text_and_a_plot_trace() {
    let dir = TempDir::new().unwrap();
    sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"]);
    sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ],
    );
    sentinel(
        dir.path(),
        &["monitor-immune", "--in", "self.csv", "--model", "det.json"],
    );
    let render = sentinel(
        dir.path(),
        &[
            "report",
            "--in",
            "report.json",
            "-o",
            "report.txt",
            "--csv",
            "trace.csv",
        ],
    );
    assert_eq!(code(&render), 0, "{}", stderr_text(&render));
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("verdict:    NORMAL"), "{text}");
    assert!(text.contains("input:      self.csv"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("window_index,activations\n"));
    assert_eq!(
        trace.lines().count(),
        995,
        "one trace row per window plus a header"
    );
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = TempDir::new().unwrap();
    sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"]);
    sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "4",
            "-o",
            "one.json",
        ],
    );
    sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "4",
            "-o",
            "two.json",
        ],
    );
    let one = fs::read(dir.path().join("one.json")).unwrap();
    assert_eq!(one, fs::read(dir.path().join("two.json")).unwrap());

    sentinel(
        dir.path(),
        &[
            "monitor-immune",
            "--in",
            "self.csv",
            "--model",
            "one.json",
            "-o",
            "r1.json",
        ],
    );
    sentinel(
        dir.path(),
        &[
            "monitor-immune",
            "--in",
            "self.csv",
            "--model",
            "one.json",
            "-o",
            "r2.json",
        ],
    );
    let r1 = fs::read_to_string(dir.path().join("r1.json")).unwrap();
    let r2 = fs::read_to_string(dir.path().join("r2.json")).unwrap();
    // identical content apart from the echoed report path
    assert_eq!(r1, r2);
}

#[test]
fn verbose_logging_is_opt_in_and_harmless() {
    let dir = TempDir::new().unwrap();
    sentinel(dir.path(), &["gen", "sine", "-o", "self.csv"]);
    let quiet = sentinel(
        dir.path(),
        &[
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ],
    );
    assert_eq!(code(&quiet), 0);
    assert!(
        stderr_text(&quiet).is_empty(),
        "unexpected chatter: {}",
        stderr_text(&quiet)
    );

    let noisy = Command::new(env!("CARGO_BIN_EXE_sentinel"))
        .current_dir(dir.path())
        .env("SENTINEL_LOG", "debug")
        .args([
            "train-immune",
            "--self",
            "self.csv",
            "--seed",
            "1",
            "-o",
            "det.json",
        ])
        .output()
        .unwrap();
    assert_eq!(noisy.status.code(), Some(0));
    assert!(
        !stderr_text(&noisy).is_empty(),
        "debug logging produced nothing"
    );
}
