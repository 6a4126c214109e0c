use std::fs;
use std::path::Path;

use qarb_cli::config::{load_config, Command, ExperimentConfig};
use qarb_cli::report::{RunReport, REPORT_CSV_HEADER};
use qarb_cli::run;

fn cfg(command: Command, seed: u64, out: &Path, overrides: &[&str]) -> ExperimentConfig {
    let ov: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    load_config(command, None, Some(seed), Some(out), &ov).unwrap()
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn identical_config_gives_identical_artifacts() {
    for (command, ov) in [
        (Command::Attack, vec!["samples=5"]),
        (Command::Defend, vec!["samples=4"]),
        (Command::Concentration, vec!["samples=300"]),
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = run(&cfg(command, 11, a.path(), &ov)).unwrap();
        let rb = run(&cfg(command, 11, b.path(), &ov)).unwrap();
        assert_eq!(ra.artifacts, rb.artifacts);
        let mut files = ra.artifacts.clone();
        files.push("report.csv".into());
        for f in files {
            let (x, y) = (fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap());
            assert!(x == y, "{} differs for {:?}", f, command);
        }
        assert_eq!(ra.checks, rb.checks);
    }
}

#[test]
fn different_seeds_change_random_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg(Command::Encode, 1, a.path(), &[])).unwrap();
    run(&cfg(Command::Encode, 2, b.path(), &[])).unwrap();
    assert_ne!(fs::read(a.path().join("pixels.csv")).unwrap(), fs::read(b.path().join("pixels.csv")).unwrap());
}

#[test]
fn artifact_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cases: [(Command, &str, &[&str], usize); 5] = [
        (Command::Attack, "attack", &["samples=3"], 6),
        (Command::Defend, "defend", &["samples=3"], 7),
        (Command::Concentration, "conc", &["samples=200"], 5),
        (Command::Table1, "t1", &[], 5),
        (Command::Bounds, "bounds", &[], 9),
    ];
    for (command, sub, ov, _) in &cases {
        let r = run(&cfg(*command, 5, &p.join(sub), ov)).unwrap();
        assert!(r.all_pass(), "{:?}: {:?}", command, r.checks);
    }
    assert_eq!(header(&p.join("attack/batch.csv")), ["sample_id", "kind", "epsilon", "size", "success", "labels"]);
    assert_eq!(
        header(&p.join("defend/sandwich.csv")),
        ["sample_id", "eps_in_hat", "eps_unc_hat", "thm3_lower", "bool1", "bool2", "conclusive"]
    );
    assert_eq!(
        header(&p.join("conc/levy_n2.csv")),
        ["epsilon_or_tau", "value", "std_error", "bound_value", "bound_holds"]
    );
    assert_eq!(header(&p.join("t1/table1.csv")), ["row", "n", "d", "bound_value", "log_slope"]);
    assert_eq!(header(&p.join("bounds/report.csv")), REPORT_CSV_HEADER);
    for (_, sub, _, cols) in &cases {
        for entry in fs::read_dir(p.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_str().unwrap().to_string();
            if !name.ends_with(".csv") || name == "report.csv" || name == "pixels.csv" {
                continue;
            }
            // Every row of a table has as many cells as its header.
            let mut rdr = fs::read_to_string(&path).unwrap();
            rdr.retain(|c| c != '"');
            let widths: Vec<usize> = rdr.lines().map(|l| l.split(',').count()).collect();
            assert!(widths.iter().all(|&w| w == *cols), "{name}: {widths:?}");
        }
    }
}

#[test]
fn report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&cfg(Command::AuditAll, 9, dir.path(), &[])).unwrap();
    assert!(r.all_pass(), "{:?}", r.checks);
    let back: RunReport = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(back, r);
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(text.matches("PASS ").count(), r.checks.len());
}

#[test]
fn table1_haar_rows_halve_per_qubit() {
    let dir = tempfile::tempdir().unwrap();
    run(&cfg(Command::Table1, 0, dir.path(), &["d_values=[2]", "n_values=[4,5,6]"])).unwrap();
    let text = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let haar: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("haar_trace"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(haar.len(), 3);
    // The Haar trace-distance row scales as 1/N with N = 2^n.
    for w in haar.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 1e-12, "{haar:?}");
    }
}

#[test]
fn thm2_column_vanishes_at_critical_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let g = (std::f64::consts::PI / 2.0).sqrt();
    let r = run(&cfg(Command::Bounds, 0, dir.path(), &[&format!("gamma_grid=[{g},{g}]")])).unwrap();
    assert!(r.all_pass());
    let text = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let col = header(&dir.path().join("bounds.csv")).iter().position(|h| h == "thm2_bound").unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert_eq!(v, 0.0);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let e = load_config(Command::Risk, None, None, None, &[]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let missing = load_config(Command::Risk, Some(Path::new("/nonexistent/cfg.json")), Some(1), None, &[]).unwrap_err();
    assert_eq!(missing.exit_code(), 2);
}

#[test]
fn binary_exit_status_reflects_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    fs::write(&cfg_path, r#"{"seed": 4, "samples": 3}"#).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_qarb"))
        .args(["encode", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS closed_fidelity"));
    let bad = std::process::Command::new(env!("CARGO_BIN_EXE_qarb")).args(["encode"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
