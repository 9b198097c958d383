use std::path::Path;
use std::process::{Command, Output};

fn legnet(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_legnet"));
    cmd.args(args).env_remove("LEGNET_CONFIG");
    if let Some(c) = config {
        cmd.env("LEGNET_CONFIG", c);
    }
    cmd.output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

#[test]
fn net_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("net.json");
    let svg = dir.path().join("net.svg");
    let report = dir.path().join("report.txt");
    let out = legnet(
        &["net", "--epsilon", "0.5", "--out", json.to_str().unwrap(), "--svg", svg.to_str().unwrap(), "--report", report.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("max cell length") && stdout.trim_end().ends_with("PASS"));
    let line = stdout.lines().find(|l| l.contains("max cell length")).unwrap();
    let len: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(len < 0.5);
    assert_eq!(std::fs::read_to_string(&report).unwrap(), stdout);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["params"]["m"], 63);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn net_sampled_mode() {
    let out = legnet(&["net", "--epsilon", "0.1", "--mode", "sampled"], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("mode = sampled"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["net", "--epsilon", "2.0"][..],
        &["quadric", "--min", "0", "--max", "1", "--steps", "3"],
        &["sweep", "--min", "0.4", "--max", "0.1", "--steps", "5"],
        &["sweep", "--min", "0.1", "--max", "0.4", "--steps", "1"],
        &["selftest", "--filter", "nothing"],
        &["net", "--epsilon", "0.5", "--lift-tol", "-1"],
        &["net"],
    ] {
        assert_eq!(legnet(args, None).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_prints_table_and_slope() {
    let out = legnet(&["sweep", "--min", "0.1", "--max", "0.4", "--steps", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let csv = text(&out.stdout);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,m,n_m,card,lower_quadratic,lower_cubic"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[3] >= r[4] && r[3] >= r[5]);
    }
    let err = text(&out.stderr);
    let slope: f64 = err.trim().strip_prefix("slope = ").unwrap().parse().unwrap();
    assert!((2.5..=3.3).contains(&slope), "{slope}");
}

#[test]
fn quadric_reports_a_short_section() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("q.csv");
    let json = dir.path().join("q.json");
    let out = legnet(
        &["quadric", "--min", "0.2", "--max", "3", "--steps", "30", "--out", csv.to_str().unwrap(), "--json", json.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("< 4π"));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("a,total_length,eta_integral,component_count\n"));
    assert_eq!(body.lines().count(), 31);
    for l in body.lines().skip(1) {
        let eta: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!(eta >= std::f64::consts::TAU - 1e-6);
    }
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 30);
}

#[test]
fn selftest_is_deterministic() {
    let a = legnet(&["selftest", "--seed", "42"], None);
    let b = legnet(&["selftest", "--seed", "42", "--jobs", "1"], None);
    assert_eq!(a.status.code(), Some(0), "{}", text(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_filter() {
    let out = legnet(&["selftest", "--filter", "s3"], None);
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    let suites: Vec<&str> = s.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(suites.len(), 1);
    assert!(suites[0].starts_with("[s3]"));
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("legnet.toml");
    std::fs::write(
        &cfg,
        format!(
            "output_dir = {:?}\nmode = \"sampled\"\n[tolerances]\nlift = 1e-8\nclosure = 1e-6\nquadrature = 1e-7\n",
            dir.path().to_str().unwrap()
        ),
    )
    .unwrap();
    let out = legnet(&["net", "--epsilon", "0.5", "--out", "net.json"], Some(&cfg));
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("mode = sampled"));
    assert!(dir.path().join("net.json").exists());

    std::fs::write(&cfg, "[tolerances]\nlift = 1e-8\nbogus = 1\n").unwrap();
    let out = legnet(&["selftest", "--filter", "s3"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("bogus"));

    std::fs::write(&cfg, "[tolerances]\nclosure = 0\n").unwrap();
    assert_eq!(legnet(&["selftest", "--filter", "s3"], Some(&cfg)).status.code(), Some(2));
    assert_eq!(legnet(&["selftest"], Some(&dir.path().join("missing.toml"))).status.code(), Some(2));
}
