use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use triplet_cli::SolveReport;

fn triplets(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triplets")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn solve_prints_table_for_demonstrated_configuration() {
    let o = triplets(&["solve", "--alpha-deg", "34.5", "--theta5-ext-deg", "-34.8", "--lambda1-nm", "632.8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("lambda2 446.4 nm"));
    assert!(text.contains("lambda3 778.2 nm"));
    let field2_rows = text.lines().filter(|l| l.split_whitespace().nth(1) == Some("2")).count();
    assert_eq!(field2_rows, 2, "{text}");
}

#[test]
fn solve_json_round_trips() {
    let o = triplets(&["solve", "--alpha-deg", "34.5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: SolveReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.solutions.len(), 2);
    assert!((report.lambda2_nm - 446.4).abs() < 0.1);
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(again.trim_end(), stdout(&o).trim_end());
}

#[test]
fn infeasible_solve_exits_three_with_diagnostic() {
    let o = triplets(&["solve", "--alpha-deg", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("diagnostic:"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no solution"));
    let o = triplets(&["solve", "--alpha-deg", "20", "--json"]);
    assert_eq!(o.status.code(), Some(3));
    let report: SolveReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report.solutions.is_empty() && report.diagnostic.is_some());
}

#[test]
fn fit_reports_closest_feasible_approach() {
    let o = triplets(&["solve", "--fit-theta1-ext-deg", "-3.5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: SolveReport = serde_json::from_slice(&o.stdout).unwrap();
    let fit = report.fit.unwrap();
    assert!(fit.exact, "{fit:?}");
    let f1 = &report.solutions[0].fields[0];
    assert!((f1.theta_ext_deg.unwrap() + 3.5).abs() < 1e-6);
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(triplets(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(triplets(&["solve", "--crystal", "KDP", "--alpha-deg", "34"]).status.code(), Some(2));
    assert_eq!(triplets(&["solve", "--alpha-deg", "34", "--lambda1-nm", "300"]).status.code(), Some(2));
    assert_eq!(triplets(&["sweep", "--lambda1-nm", "5:1:1", "--out", "x"]).status.code(), Some(2));
    assert_eq!(triplets(&["solve", "--alpha-deg", "34", "--screen-mm", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"lambda_one": 1}"#).unwrap();
    assert_eq!(triplets(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn every_command_documents_its_flags() {
    for (cmd, flags) in [
        (
            "solve",
            &[
                "--crystal-db",
                "--crystal",
                "--lambda1-nm",
                "--lambda4-nm",
                "--lambda5-nm",
                "--alpha-deg",
                "--theta5-ext-deg",
                "--screen-mm",
                "--json",
                "--config",
            ][..],
        ),
        ("cone", &["--alpha-deg", "--samples", "--out", "--json"][..]),
        ("sweep", &["--alpha-deg", "--lambda1-nm", "--out", "--serial", "--config"][..]),
        ("render", &["--csv", "--out", "--width", "--height", "--mm-per-px"][..]),
        ("simulate", &["--seed", "--shots", "--eta", "--background", "--statistics", "--out"][..]),
        ("correlate", &["--records", "--max-lag", "--out", "--json"][..]),
    ] {
        let o = triplets(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let help = stdout(&o);
        for f in flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn sweep_reproduces_goldens_and_is_idempotent() {
    let root = repo_root();
    let golden = root.join("crates/core/tests/golden");
    let dir = tempfile::tempdir().unwrap();
    let cfg = root.join("configs/example_sweep.json");
    for extra in [&[][..], &["--serial"][..]] {
        let mut args = vec!["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = triplets(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        for entry in std::fs::read_dir(&golden).unwrap() {
            let name = entry.unwrap().file_name();
            let got = std::fs::read(dir.path().join(&name)).unwrap();
            let want = std::fs::read(golden.join(&name)).unwrap();
            assert!(got == want, "{name:?} differs");
        }
    }
}

#[test]
fn render_of_empty_csv_is_blank() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    let out = dir.path().join("blank.ppm");
    let o = triplets(&[
        "render",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--width",
        "20",
        "--height",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let ppm = std::fs::read(&out).unwrap();
    let header_len = ppm.iter().enumerate().filter(|(_, &b)| b == b'\n').nth(2).unwrap().0 + 1;
    // plot area is all background
    assert!(ppm[header_len..header_len + 20 * 10 * 3].iter().all(|&b| b == 0));
}

#[test]
fn cone_output_and_infeasible_cone() {
    let o = triplets(&["cone", "--alpha-deg", "34.5", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("psi_deg,field,"));
    assert_eq!(text.lines().count(), 1 + 16);
    assert_eq!(triplets(&["cone", "--alpha-deg", "20"]).status.code(), Some(3));
}

#[test]
fn correlate_ideal_simulation_prints_unit_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.csv");
    let o = triplets(&[
        "simulate",
        "--eta",
        "1,1,1",
        "--statistics",
        "thermal",
        "--mean-pairs",
        "1e4",
        "--shots",
        "3000",
        "--seed",
        "11",
        "--out",
        rec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = triplets(&["correlate", "--records", rec.to_str().unwrap(), "--max-lag", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let eps: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(eps > 0.99 && (eps - 1.0).abs() < 1e-12, "{text}");
    // identical seed, identical bytes
    let again = dir.path().join("again.csv");
    triplets(&[
        "simulate",
        "--eta",
        "1,1,1",
        "--statistics",
        "thermal",
        "--mean-pairs",
        "1e4",
        "--shots",
        "3000",
        "--seed",
        "11",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&rec).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn correlate_on_constant_records_fails() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("flat.csv");
    std::fs::write(&rec, "shot,m1,m2,m3\n0,1,1,0\n1,1,1,0\n2,1,1,0\n").unwrap();
    let o = triplets(&["correlate", "--records", rec.to_str().unwrap(), "--max-lag", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
