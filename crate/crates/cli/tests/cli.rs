//! End-to-end tests of the `fogweave` binary: exit codes, artifacts,
//! and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fogweave"))
}

fn tiny_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tiny.toml")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_tiny_with_oracle_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.txt");
    let output = bin()
        .args(["solve"])
        .arg(tiny_config())
        .args(["--oracle", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("status: optimal"), "{report}");
    assert!(report.contains("objective: "), "{report}");
    let csv = std::fs::read_to_string(dir.path().join("result.placements.csv")).unwrap();
    assert!(csv.starts_with("request_id,leaf_index,vnf_type,instance_index,node_id\n"));
    assert_eq!(csv.lines().count(), 4, "header plus one row per leaf: {csv}");
    assert!(stdout_of(&output).contains("status: optimal"));
}

#[test]
fn alpha_outside_the_unit_interval_is_a_usage_error() {
    let output = bin()
        .args(["solve"])
        .arg(tiny_config())
        .args(["--alpha", "1.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("[0, 1]"));
}

#[test]
fn unknown_config_fields_exit_two_with_a_line_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(tiny_config())
        .unwrap()
        .replace("capacity_vcpu = 8", "capacity_vcpu = 8\nvcpus = 8");
    std::fs::write(&bad, text).unwrap();
    let output = bin().args(["solve"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = stderr_of(&output);
    assert!(err.contains("vcpus"), "{err}");
    assert!(err.contains("line"), "diagnostic must cite a line: {err}");
}

#[test]
fn missing_config_file_exits_two() {
    let output = bin().args(["solve", "/nonexistent/path.toml"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn over_capacity_fog_tier_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    // one stage needs more vCPU than the whole fog tier offers
    let text = std::fs::read_to_string(tiny_config())
        .unwrap()
        .replace("resource_vcpu = 2", "resource_vcpu = 4");
    std::fs::write(&cfg, text).unwrap();
    let output = bin()
        .args(["solve"])
        .arg(&cfg)
        .args(["--tier", "fog"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr_of(&output));
    assert!(stderr_of(&output).contains("no feasible placement"));
}

#[test]
fn lp_export_writes_a_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("model.lp");
    let output = bin()
        .args(["solve"])
        .arg(tiny_config())
        .args(["--out"])
        .arg(dir.path().join("r.txt"))
        .args(["--export-lp"])
        .arg(&lp)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("Minimize\n"), "{}", &text[..40.min(text.len())]);
    assert!(text.ends_with("End\n"));
}

#[test]
fn paper_runs_reproduce_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let outdir = dir.path().join(sub);
        let output = bin()
            .args([
                "paper",
                "--seed",
                "1",
                "--alpha-grid",
                "0.0,1.0",
                "--trials",
                "2",
                "--outdir",
            ])
            .arg(&outdir)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
        let text = stdout_of(&output);
        assert!(text.contains("PASS"), "{text}");
        assert!(!text.contains("FAIL "), "{text}");
        outdir
    };
    let a = run("a");
    let b = run("b");
    for name in [
        "tier_comparison.csv",
        "sharing.csv",
        "alpha_sweep.csv",
        "random_baseline.csv",
        "assertions.txt",
    ] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn paper_zero_trials_is_a_usage_error() {
    let output = bin().args(["paper", "--trials", "0"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn mc_with_few_samples_is_flagged_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["mc"])
        .arg(tiny_config())
        .args(["--samples", "10"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(
        text.contains("insufficient samples for assertions"),
        "{text}"
    );
    assert!(dir.path().join("mc_report.txt").exists());
}

#[test]
fn mc_on_a_deterministic_scenario_reports_zero_variance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.toml");
    let text = std::fs::read_to_string(tiny_config())
        .unwrap()
        .replace(
            "tree = \"seq(filter, loop(0.25; sel(0.5: detect, 0.5: filter)))\"",
            "tree = \"seq(filter, detect)\"",
        );
    std::fs::write(&cfg, text).unwrap();
    let output = bin()
        .args(["mc"])
        .arg(&cfg)
        .args(["--samples", "2000"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("cost_std_error: 0\n"), "{text}");
    assert!(text.contains("makespan_std_error: 0\n"), "{text}");
    assert!(text.contains("cost_agrees: true"), "{text}");
}

#[test]
fn gen_emits_a_loadable_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reference.toml");
    let output = bin()
        .args(["gen", "--seed", "3", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let loaded = fogweave_core::config::load_scenario(&path).unwrap();
    assert_eq!(loaded.infra.nodes.len(), 5);
    assert_eq!(loaded.requests.len(), 3);
    assert_eq!(loaded.alpha, 0.5);
}

#[test]
fn thread_cap_env_does_not_change_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("one.txt");
    let out2 = dir.path().join("two.txt");
    let run = |out: &Path, threads: &str| {
        let output = bin()
            .args(["solve"])
            .arg(tiny_config())
            .args(["--out"])
            .arg(out)
            .env("FOGWEAVE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    };
    run(&out1, "1");
    run(&out2, "4");
    let a = std::fs::read_to_string(&out1).unwrap();
    let b = std::fs::read_to_string(&out2).unwrap();
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("config:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}
