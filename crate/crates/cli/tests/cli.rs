use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpd_cli::Scenario;

fn cpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpd")).args(args).output().expect("cpd runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "name = \"small\"\n[grid]\nperiods = 3\n[users]\nr_users = 2\np_users = 4\n";

#[test]
fn default_scenario_file_matches_builtin_defaults() {
    let mut file = Scenario::load(&scenarios().join("default.toml")).unwrap();
    assert_eq!(file.name, "default");
    file.name = String::new();
    assert_eq!(file, Scenario::default());
}

#[test]
fn missing_scenario_is_an_io_error() {
    let out = cpd(&["run", "/nonexistent/scenario.toml", "--out", "/tmp"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_scenario_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "bad.toml", "[grid]\nperiods = \"many\"\n");
    let out = cpd(&["run", &s, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn inconsistent_grid_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "grid.toml", "[grid]\nperiods = 2\nsuperframe_minutes = 7\n");
    let out = cpd(&["run", &s, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn starved_strict_window_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "strict.toml",
        "[grid]\nperiods = 2\n[rcpd]\naccess_mode = \"strict\"\n[users]\nr_users = 1\np_users = 0\n",
    );
    let trace = scenarios().join("empty-trace.csv");
    let out = cpd(&[
        "plan-r",
        &s,
        "--visibility-trace",
        trace.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn no_visibility_run_reports_the_full_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let trace = scenarios().join("empty-trace.csv");
    let out = cpd(&[
        "run",
        scenarios().join("no-visibility.toml").to_str().unwrap(),
        "--visibility-trace",
        trace.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("no-visibility,rcpd,none,objective,-8000\n"), "{report}");
    assert!(report.contains("no-visibility,rcpd,none,ground_deficit,8\n"), "{report}");
}

#[test]
fn runs_are_byte_identical_and_trace_override_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "small.toml", SMALL);
    let outs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for o in &outs {
        let out = cpd(&["run", &s, "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let replay = dir.path().join("c");
    let trace = outs[0].join("trace.csv");
    let out = cpd(&[
        "run",
        &s,
        "--visibility-trace",
        trace.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = std::fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6, "{names:?}");
    for name in &names {
        let first = std::fs::read(outs[0].join(name)).unwrap();
        assert_eq!(first, std::fs::read(outs[1].join(name)).unwrap(), "{name:?}");
        assert_eq!(first, std::fs::read(replay.join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn staged_commands_agree_with_run() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "small.toml", SMALL);
    let d = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    std::fs::create_dir(d("run")).unwrap();
    assert!(cpd(&["visibility", &s, "--out", &d("trace.csv")]).status.success());
    let trace = d("trace.csv");
    assert!(cpd(&["run", &s, "--visibility-trace", &trace, "--out", &d("run")]).status.success());
    let stages = d("stages");
    std::fs::create_dir(&stages).unwrap();
    let out = cpd(&["plan-r", &s, "--visibility-trace", &trace, "--out", &stages]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rplan = format!("{stages}/reflector_rcpd.csv");
    let out = cpd(&["plan-p", &s, "--visibility-trace", &trace, "--reflector-plan", &rplan, "--out", &stages]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |p: String| std::fs::read(p).unwrap();
    assert_eq!(read(rplan.clone()), read(format!("{}/reflector_rcpd.csv", d("run"))));
    assert_eq!(
        read(format!("{stages}/phased_pcpd.csv")),
        read(format!("{}/phased_rcpd_pcpd.csv", d("run")))
    );
    let out = cpd(&[
        "evaluate",
        &s,
        "--visibility-trace",
        &trace,
        "--reflector-plan",
        &rplan,
        "--phased-plan",
        &format!("{stages}/phased_pcpd.csv"),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = String::from_utf8(out.stdout).unwrap();
    let report = std::fs::read_to_string(format!("{}/report.csv", d("run"))).unwrap();
    for line in metrics.lines().skip(1) {
        let (_, metric_value) = line.split_once(',').unwrap();
        assert!(
            report.contains(&format!("small,rcpd,pcpd,{metric_value}\n")),
            "{line} not in run report"
        );
    }
}

#[test]
fn sweep_writes_one_directory_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "small.toml", SMALL);
    let out_dir = dir.path().join("sweep");
    let out = cpd(&[
        "sweep",
        &s,
        "--p-users",
        "2,4",
        "--gs-links",
        "1,2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for cell in ["up2_ur2_lg1", "up2_ur2_lg2", "up4_ur2_lg1", "up4_ur2_lg2"] {
        assert!(out_dir.join(cell).join("report.csv").is_file(), "{cell}");
    }
    let report = std::fs::read_to_string(out_dir.join("sweep_report.csv")).unwrap();
    assert!(report.starts_with("p_users,r_users,gs_links,reflector,phased,metric,value\n"));
}

#[test]
fn propagate_prints_states() {
    let out = cpd(&["propagate", "--orbit", "DRO", "--samples", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(cpd(&["propagate", "--orbit", "nowhere"]).status.code() != Some(0));
}
