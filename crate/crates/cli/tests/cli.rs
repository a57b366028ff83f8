use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_delaywave"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs");
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn report_value(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_owned))
}

#[test]
fn solve_fisher_writes_profile_with_header() {
    let tmp = TempDir::new().unwrap();
    let (code, _) = run(tmp.path(), &["solve", "--preset", "fisher", "--seed", "11"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    let header: Vec<&str> = csv.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header.iter().any(|l| l.starts_with("# config_sha256: ") && l.len() == "# config_sha256: ".len() + 64));
    assert!(header.contains(&"# seed: 11"));
    assert_eq!(csv.lines().nth(header.len()), Some("xi,psi_1"));
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(report_value(&report, "converged").as_deref(), Some("true"));
}

#[test]
fn identical_runs_give_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(run(dir.path(), &["solve", "--preset", "fisher-d4", "--seed", "3"]).0, 0);
    }
    for name in ["profile.csv", "report.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn hash_depends_on_inputs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run(a.path(), &["solve", "--preset", "fisher", "--speed", "3"]);
    run(b.path(), &["solve", "--preset", "fisher", "--speed", "3.5"]);
    let hash = |d: &TempDir| {
        let text = fs::read_to_string(d.path().join("report.txt")).unwrap();
        text.lines().find(|l| l.starts_with("# config_sha256")).unwrap().to_string()
    };
    assert_ne!(hash(&a), hash(&b));
}

#[test]
fn competition_preset_reports_nonmonotone_species() {
    let tmp = TempDir::new().unwrap();
    let (code, _) = run(tmp.path(), &["solve", "--preset", "lv-5.4"]);
    assert_eq!(code, 0);
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(report_value(&report, "nonmonotone_species").as_deref(), Some("[2]"));
    assert_eq!(report_value(&report, "limit_verdict").as_deref(), Some("converges-to-target"));
}

#[test]
fn speed_below_threshold_exits_3() {
    let tmp = TempDir::new().unwrap();
    let (code, text) = run(tmp.path(), &["solve", "--preset", "fisher", "--speed", "1.0"]);
    assert_eq!(code, 3, "{text}");
}

#[test]
fn config_errors_exit_1_with_location() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[solve]\nsped = 1.0\n");
    let (code, text) = run(tmp.path(), &["solve", "--preset", "fisher", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(text.contains("line 2") && text.contains("sped"), "{text}");
    assert_eq!(run(tmp.path(), &["solve", "--preset", "no-such-model"]).0, 1);
    assert_eq!(run(tmp.path(), &["solve"]).0, 1);
}

#[test]
fn failed_coupling_check_exits_2() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(tmp.path(), &["verify", "--preset", "lv-strong"]).0, 2);
}

#[test]
fn verify_writes_contraction_report() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(tmp.path(), &["verify", "--preset", "nicholson"]).0, 0);
    let text = fs::read_to_string(tmp.path().join("contraction.txt")).unwrap();
    assert_eq!(report_value(&text, "status").as_deref(), Some("pass"));
}

#[test]
fn unstable_time_step_exits_4_with_hint() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sim.toml",
        "preset = \"fisher\"\n[simulate]\nx_min = 0.0\nx_max = 50.0\ndx = 0.2\ndt = 1.0\nt_end = 5.0\n",
    );
    let (code, text) = run(tmp.path(), &["simulate", "--config", &cfg]);
    assert_eq!(code, 4);
    assert!(text.contains("dt <="), "{text}");
}

#[test]
fn spreading_run_writes_snapshots_and_speed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sim.toml",
        "preset = \"fisher\"\n[simulate]\nmode = \"spreading\"\nx_min = 0.0\nx_max = 150.0\ndx = 0.25\n\
         t_end = 30.0\nsnapshots = 30\nstep_at = 10.0\nwindow = [15.0, 30.0]\n",
    );
    assert_eq!(run(tmp.path(), &["simulate", "--config", &cfg]).0, 0);
    let index = fs::read_to_string(tmp.path().join("snapshots/index.csv")).unwrap();
    let rows = index.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 32, "header plus 31 snapshots");
    let text = fs::read_to_string(tmp.path().join("spreading.txt")).unwrap();
    let speed: f64 = report_value(&text, "measured_speed").unwrap().parse().unwrap();
    assert!((speed - 2.0).abs() < 0.15, "{speed}");
}

#[test]
fn sweep_marks_unsolvable_speeds() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.toml", "preset = \"fisher\"\n[sweep]\nspeeds = [1.0, 2.0, 3.0]\n");
    assert_eq!(run(tmp.path(), &["sweep", "--config", &cfg]).0, 0);
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let status: Vec<&str> =
        csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(status, ["below-threshold", "degenerate", "converged"]);
}

#[test]
fn critical_continuation_writes_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "crit.toml",
        "[critical]\nd = 1.0\nr = 1.0\nspeed_tol = 0.1\n[critical.kernel]\natoms = [[0.0, 0.75], [-1.0, 0.25]]\ntau = 1.0\n",
    );
    assert_eq!(run(tmp.path(), &["critical", "--config", &cfg]).0, 0);
    let table = fs::read_to_string(tmp.path().join("continuation.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(tmp.path().join("profiles/profile_04.csv").exists());
}
