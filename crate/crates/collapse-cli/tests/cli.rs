//! End-to-end tests driving the compiled binary through std::process.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde::Deserialize;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collapse-cli"))
}

/// Scratch directory removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "collapse-cli-{tag}-{}-{:x}",
            std::process::id(),
            std::ptr::from_ref(&tag) as usize
        ));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

const CONFIG: &str = r#"
schema-version = 1

[defaults]
hs-orders = [0, 1, 2]

[[job]]
name = "lattice-build"
kind = "build"
family = "lambda-p"
n = 1
r = 64.0
write-terms = true

[[job]]
name = "bad-build"
kind = "build"
family = "lambda-p"
n = 1
r = 2.0

[[job]]
name = "growth"
kind = "scan"
required = true
family = "lambda-p"
n = 1
resolutions = [64, 128, 256]
p = 1.0
q = 2.0

[[job]]
name = "flat"
kind = "scan"
family = "lambda-p"
n = 1
resolutions = [64, 128, 256]
p = 4.0
q = 2.0
"#;

fn write_config(scratch: &Scratch) -> PathBuf {
    let path = scratch.path("runs.toml");
    fs::write(&path, CONFIG).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
struct BuildRecord {
    schema_version: u32,
    job: String,
    family: String,
    n: usize,
    r: f64,
    c: f64,
    m: Option<u32>,
    seed: u64,
    term_count: usize,
    min_spacing: f64,
    l2_norm: f64,
    l2_norm_log10: f64,
    hs_norms: Vec<HsNorm>,
}

#[derive(Deserialize)]
struct HsNorm {
    s: u32,
    value: f64,
    log10: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
struct ReportFile {
    schema_version: u32,
    job: String,
    report: collapse_core::ScalingReport,
}

#[test]
fn build_writes_deterministic_record() {
    let scratch = Scratch::new("build");
    let config = write_config(&scratch);
    let out = scratch.path("out");

    let run = || {
        run_ok(
            bin()
                .args(["build", "--job", "lattice-build"])
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(&out),
        )
    };
    run();
    let first = fs::read(out.join("lattice-build.build.json")).unwrap();
    run();
    let second = fs::read(out.join("lattice-build.build.json")).unwrap();
    assert_eq!(first, second, "rebuild must be byte-identical");

    let record: BuildRecord = serde_json::from_slice(&first).unwrap();
    assert_eq!(record.schema_version, 1);
    assert_eq!(record.job, "lattice-build");
    assert_eq!(record.family, "lambda-p");
    assert_eq!((record.n, record.r, record.c), (1, 64.0, 8.0));
    assert_eq!(record.m, None);
    assert_eq!(record.seed, 0);
    assert!(
        (1..=8).contains(&record.term_count),
        "term count {} out of envelope",
        record.term_count
    );
    assert!(record.min_spacing >= 8.0 - 1e-9);
    assert!(record.l2_norm > 0.0);
    assert!((record.l2_norm_log10 - record.l2_norm.log10()).abs() < 1e-12);
    assert_eq!(record.hs_norms.len(), 3);
    for (entry, s) in record.hs_norms.iter().zip([0, 1, 2]) {
        assert_eq!(entry.s, s);
        assert!((entry.log10 - entry.value.log10()).abs() < 1e-12);
    }

    let csv = fs::read_to_string(out.join("lattice-build.terms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "center_1,center_2,modulation_1,modulation_2,width"
    );
    assert_eq!(lines.count(), record.term_count);
}

#[test]
fn build_rejects_out_of_range_scale() {
    let scratch = Scratch::new("badr");
    let config = write_config(&scratch);
    let out = bin()
        .args(["build", "--job", "bad-build"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(scratch.path("out"))
        .output()
        .unwrap();
    assert!(!out.status.success(), "R = 2 must be rejected");
    let err = stderr_of(&out);
    assert!(err.contains("R"), "diagnostic must name the field: {err}");
}

#[test]
fn scan_emits_csv_report_and_plot_data() {
    let scratch = Scratch::new("scan");
    let config = write_config(&scratch);
    let out = scratch.path("out");
    let run = run_ok(
        bin()
            .args(["scan", "--job", "growth"])
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("verdict blow-up-consistent"), "stdout: {stdout}");

    let csv = fs::read_to_string(out.join("growth.scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "R,lhs,rhs,ratio,lhs_converged,rhs_converged");
    assert_eq!(lines.len(), 1 + 3, "one row per resolution");
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 6);
    }

    let report: ReportFile =
        serde_json::from_str(&fs::read_to_string(out.join("growth.report.json")).unwrap())
            .unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.job, "growth");
    assert_eq!(report.report.records.len(), 3);
    assert!(report.report.all_converged);
    assert!((report.report.predicted_slope - 0.25).abs() < 1e-12);

    let plot = fs::read_to_string(out.join("growth.plot.dat")).unwrap();
    let rows: Vec<&str> = plot.lines().collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols.len(), 2);
        for col in cols {
            col.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn merge_builds_verdict_matrix_and_gates_exit() {
    let scratch = Scratch::new("merge");
    let config = write_config(&scratch);
    let out = scratch.path("out");
    run_ok(bin().arg("scan").arg("--config").arg(&config).arg("--out").arg(&out));

    let run = run_ok(
        bin()
            .arg("report-merge")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("suite status: pass"), "stdout: {stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema-version"], 1);
    assert_eq!(summary["summary"]["status"], "pass");
    assert_eq!(summary["summary"]["rows"].as_array().unwrap().len(), 2);

    // A required job downgraded to inconclusive must flip the exit code.
    let report_path = out.join("growth.report.json");
    let doctored = fs::read_to_string(&report_path)
        .unwrap()
        .replace("blow-up-consistent", "inconclusive");
    fs::write(&report_path, doctored).unwrap();
    let rerun = bin()
        .arg("report-merge")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!rerun.status.success(), "required inconclusive must fail");
    let stdout = String::from_utf8_lossy(&rerun.stdout);
    assert!(stdout.contains("suite status: partial"), "stdout: {stdout}");
}

#[test]
fn merge_requires_reports() {
    let scratch = Scratch::new("merge-missing");
    let config = write_config(&scratch);
    let out = bin()
        .arg("report-merge")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(scratch.path("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("run `scan` first"));
}

#[test]
fn check_suite_passes_clean_build() {
    let scratch = Scratch::new("check");
    let run = run_ok(bin().arg("check").arg("--out").arg(scratch.path("out")));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(!stdout.contains("FAIL"), "stdout: {stdout}");
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(scratch.path("out").join("check.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["total"], report["passed"]);
    assert!(report["total"].as_u64().unwrap() >= 12);
    assert_eq!(report["fault"], serde_json::Value::Null);
}

#[test]
fn check_fault_injection_fails_loudly() {
    let scratch = Scratch::new("fault");
    let out = bin()
        .args(["check", "--inject-fault", "branch-sign", "--only", "evolution-oracle"])
        .arg("--out")
        .arg(scratch.path("out"))
        .output()
        .unwrap();
    assert!(!out.status.success(), "corrupted branch sign must fail");
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(scratch.path("out").join("check.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["fault"], "branch-sign");
    let worst = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["residual"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!(worst > 1e-2, "fault must leave a visible residual, got {worst:.3e}");
}

#[test]
fn check_with_empty_selection_warns_and_passes() {
    let scratch = Scratch::new("empty");
    let run = run_ok(
        bin()
            .args(["check", "--only", "no-such-check"])
            .arg("--out")
            .arg(scratch.path("out")),
    );
    assert!(stderr_of(&run).contains("0 checks"));
}

#[test]
fn config_validation_diagnostics() {
    let scratch = Scratch::new("config");
    // Duplicate names.
    let dup = scratch.path("dup.toml");
    fs::write(
        &dup,
        "schema-version = 1\n\n[[job]]\nname = \"a\"\nkind = \"build\"\nfamily = \"lambda-p\"\nn = 1\nr = 8.0\n\n[[job]]\nname = \"a\"\nkind = \"build\"\nfamily = \"lambda-p\"\nn = 1\nr = 8.0\n",
    )
    .unwrap();
    let out = bin().arg("build").arg("--config").arg(&dup).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("duplicate job name"));

    // Unsupported schema revision.
    let vers = scratch.path("vers.toml");
    fs::write(&vers, "schema-version = 2\n").unwrap();
    let out = bin().arg("build").arg("--config").arg(&vers).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("schema-version 2"));

    // Unknown job names list the known ones.
    let config = write_config(&scratch);
    let out = bin()
        .args(["scan", "--job", "nope"])
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("unknown job \"nope\"") && err.contains("growth"), "{err}");
}
