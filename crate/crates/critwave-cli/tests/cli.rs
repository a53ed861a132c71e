use std::path::Path;
use std::process::{Command, Output};

fn critwave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critwave")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn is_sci17(field: &str) -> bool {
    let (mant, exp) = field.split_once('e').unwrap_or(("", ""));
    let digits = mant.trim_start_matches('-').replace('.', "");
    digits.len() == 17 && digits.chars().all(|c| c.is_ascii_digit()) && exp.parse::<i32>().is_ok()
}

#[test]
fn tabulate_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(&["tabulate", "--rmax", "50", "--out", "tab.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("tab.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,Q,LambdaQ,Phi,V,W,Gamma"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 100);
    for f in rows[0].split(',').chain(rows[rows.len() - 1].split(',')) {
        assert!(is_sci17(f), "{f}");
    }
    let last_y: f64 = rows[rows.len() - 1].split(',').next().unwrap().parse().unwrap();
    assert!((last_y - 50.0).abs() < 1e-9);
}

#[test]
fn tabulate_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(&["tabulate", "--rmax", "20", "--nodes", "200"], dir.path());
    assert!(o.status.success());
    critwave(&["tabulate", "--rmax", "20", "--nodes", "200", "--out", "t.csv"], dir.path());
    assert_eq!(o.stdout, std::fs::read(dir.path().join("t.csv")).unwrap());
}

#[test]
fn out_of_range_b0_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(&["simulate", "--b0", "0.5", "--dplus", "0", "--out", "t.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("must lie in"), "{}", stderr(&o));
    assert!(!dir.path().join("t.csv").exists());
    let o = critwave(&["blowup", "--b0", "0.5", "--out", "b.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(critwave(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(critwave(&["profile", "--b", "x", "--out", "p.csv"], dir.path()).status.code(), Some(2));
    let o = critwave(&["simulate", "--set", "bogus=1", "--dplus", "0", "--out", "t.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_critwave"))
        .args(["tabulate", "--nodes", "50"])
        .env("CRITWAVE_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_critwave"))
        .args(["tabulate", "--nodes", "50"])
        .env("CRITWAVE_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let p = format!("{name}.csv");
        let j = format!("{name}.json");
        let o = critwave(&["profile", "--b", "0.01", "--out", &p, "--json", &j], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.json"), read("b.json"));
}

#[test]
fn writes_leave_no_temporary_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), "stale").unwrap();
    let o = critwave(&["spectrum", "--out", "s.csv", "--json", "s.json"], dir.path());
    assert!(o.status.success());
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["s.csv", "s.json"]);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("r,psi,psi_exp\n"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert!((v["zeta"].as_f64().unwrap() - 0.58608089224808).abs() < 1e-8);
}

#[test]
fn profile_blowup_dichotomy_and_coercivity_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(&["profile", "--b", "0.01", "--M", "10", "--out", "p.csv"], dir.path());
    assert!(o.status.success());
    let head: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["b", "big_b0", "big_b1", "c_b", "c", "fitted_t1", "fitted_psi", "fitted_dbp"] {
        assert!(head[k].is_number(), "{k}");
    }
    assert_eq!(head["big_b0"], 200.0);
    assert!((head["big_b1"].as_f64().unwrap() - 100.0 * 100f64.ln()).abs() < 1e-9);

    let o = critwave(&["blowup", "--b0", "0.01", "--mode", "j", "--out", "bl.csv"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bl.csv")).unwrap();
    assert!(csv.starts_with("s,t,b,lambda,remaining,j\n"));

    let o = critwave(&["dichotomy", "--b0", "0.01"], dir.path());
    assert!(o.status.success());
    let d: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(d["a_star"].is_number());
    assert!(d["perturbed"].as_array().unwrap().len() >= 2);

    let o = critwave(&["coercivity", "--out", "c.json", "--tables", "c.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let c: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(c["index_w"]["zero_count"], 2);
    let tables = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    for label in ["\nU,", "\nU_tilde,", "\nBinv_psi,", "\nBinv_phi,"] {
        assert!(tables.contains(label), "{label}");
    }
}

#[test]
fn simulate_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# trial\nb0 = 0.03\nnodes = 3000\ndplus = 1\n").unwrap();
    let o = critwave(
        &["simulate", "--config", "run.cfg", "--b0", "0.02", "--dplus", "5e-4", "--out", "tr.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["config"]["b0"], 0.02);
    assert_eq!(s["config"]["nodes"], 3000);
    assert_eq!(s["trajectory"]["dplus"], 5e-4);
    assert_eq!(s["trajectory"]["exit"]["sign"], 1);
    let csv = std::fs::read_to_string(dir.path().join("tr.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,s,lambda,b,b_s,kappa_plus,kappa_minus,calE,energy"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[3] - 0.02).abs() < 0.02 * 0.02);
}

#[test]
fn report_ledger_without_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let o = critwave(&["report", "--no-simulation", "--out", "ledger.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["pohozaev=32", "zeta=0.586", "det_B>0"] {
        assert!(text.contains(needle), "{needle}");
    }
    let ledger: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("ledger.json")).unwrap()).unwrap();
    let entries = ledger["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| !e["anchor"].as_str().unwrap().is_empty()));
    let all_pass = entries.iter().all(|e| e["pass"] == true);
    assert_eq!(ledger["status"], if all_pass { "pass" } else { "fail" });
    let mut criteria: Vec<u64> = entries.iter().map(|e| e["criterion"].as_u64().unwrap()).collect();
    criteria.dedup();
    assert_eq!(criteria, [1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12]);
}
