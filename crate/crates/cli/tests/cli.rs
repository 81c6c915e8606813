use std::f64::consts::PI;
use std::process::{Command, Output};

use pistonlab::piston::CATALAN;
use pistonlab::spectra::Spectrum;
use serde_json::Value;

fn pistonlab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pistonlab"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("PISTONLAB_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).envs(env.iter().copied()).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = pistonlab(&full, &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    (
        serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")),
        out.status.code().unwrap(),
    )
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn interval_dn_force() {
    let (r, code) = json(&["interval", "--bc", "DN", "--a", "1", "--force"]);
    assert_eq!(code, 0);
    assert_eq!(r["scenario"], "interval");
    let force = &r["results"]["force"];
    assert!((num(&force["force"]) - PI / 48.0).abs() < 1e-5 * PI / 48.0);
    assert_eq!(force["classification"], "repulsive");
    assert!((num(&force["force"]) - 0.06545).abs() < 5e-6);
}

#[test]
fn star_three_is_null() {
    let (r, code) = json(&["star", "--n", "3", "--a", "1", "--force"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["force"]["classification"], "null");
    assert!(num(&r["results"]["force"]["force"]).abs() < 1e-6);
}

#[test]
fn piston3d_is_repulsive() {
    let (r, code) = json(&["piston3d", "--a", "0.1", "--b", "1"]);
    assert_eq!(code, 0);
    let net = &r["results"]["net_force"];
    assert!(num(&net["force"]) > 0.0);
    assert_eq!(net["classification"], "repulsive");
    for key in ["scenario", "inputs", "results", "diagnostics"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn unequal_star_reports_partial_forces() {
    let (r, code) = json(&["star", "--lengths", "1,1.3,1.7", "--force"]);
    assert_eq!(code, 0);
    assert_eq!(r["diagnostics"]["partial_forces"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_deterministic() {
    for format in ["json", "csv", "table"] {
        let args = ["star", "--n", "5", "--a", "0.7", "--force", "--format", format];
        let first = pistonlab(&args, &[]);
        let second = pistonlab(&args, &[]);
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "{format}");
    }
}

#[test]
fn csv_has_header_and_one_row() {
    let out = pistonlab(&["interval", "--bc", "DD", "--format", "csv"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let col = header.iter().position(|h| h == "results.closed_form").unwrap();
    assert!((rows[0][col].parse::<f64>().unwrap() + PI / 24.0).abs() < 1e-11);
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "scenario = \"interval\"\nformat = \"json\"\n[geometry]\nbc = \"DD\"\na = 1.0\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let a_of = |out: Output| -> f64 {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        num(&r["inputs"]["geometry"]["a"])
    };
    assert_eq!(a_of(pistonlab(&["--config", p], &[])), 1.0);
    assert_eq!(
        a_of(pistonlab(&["--config", p, "interval"], &[("PISTONLAB_A", "2")])),
        2.0
    );
    assert_eq!(
        a_of(pistonlab(
            &["--config", p, "interval", "--a", "4"],
            &[("PISTONLAB_A", "2")]
        )),
        4.0
    );
    assert_eq!(a_of(pistonlab(&["interval"], &[("PISTONLAB_CONFIG", p)])), 1.0);
}

#[test]
fn env_values_for_other_scenarios_are_ignored() {
    let out = pistonlab(
        &["interval", "--format", "json"],
        &[("PISTONLAB_N", "4"), ("PISTONLAB_WALL", "permeable")],
    );
    assert!(out.status.success());
    let out = pistonlab(&["interval", "--n", "4"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "scenario = \"interval\"\n[geometry]\nbc = \"DN\"\nradius = 2.0\n",
    )
    .unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--config", path.to_str().unwrap()],
        vec!["interval", "--bc", "DX"],
        vec!["interval", "--a", "-1"],
        vec!["box", "--wall", "glass"],
        vec!["piston3d", "--a", "1", "--shaft-length", "0.5"],
        vec!["sweep", "--scenario", "star", "--param", "wall", "--grid", "1"],
        vec!["sweep", "--scenario", "star", "--param", "n", "--grid", "6..1"],
        vec!["piston3d", "--spectrum-out", "x.txt"],
        vec!["--rungs", "0", "interval"],
        vec![],
    ];
    for args in cases {
        let out = pistonlab(&args, &[]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unreliable_fit_is_a_failure_with_diagnostics() {
    let (r, code) = json(&[
        "interval",
        "--ladder",
        "0.2,0.1,0.05,0.025,0.0125,0.00625",
        "--max-residual",
        "1e-300",
    ]);
    assert_eq!(code, 1);
    assert_eq!(r["diagnostics"]["status"], "failed");
    assert!(r["diagnostics"]["error"].as_str().unwrap().contains("unreliable"));
}

#[test]
fn sweep_star_edges() {
    let (r, code) = json(&[
        "sweep",
        "--scenario",
        "star",
        "--param",
        "n",
        "--grid",
        "1..6",
        "--a",
        "1",
        "--force",
    ]);
    assert_eq!(code, 0);
    let rows = r["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        let n = (i + 1) as f64;
        assert_eq!(num(&row["n"]), n);
        let want = (n - 3.0) * PI / 48.0;
        assert!(
            (num(&row["results"]["force"]["force"]) - want).abs() <= 1e-5 * PI / 48.0,
            "n={n}"
        );
    }
}

#[test]
fn sweep_interval_lengths() {
    let out = pistonlab(
        &[
            "sweep",
            "--scenario",
            "interval",
            "--param",
            "a",
            "--grid",
            "1,2,4",
            "--bc",
            "DD",
            "--force",
            "--format",
            "csv",
        ],
        &[],
    );
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "results.force.force").unwrap();
    let forces: Vec<f64> = reader.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    for (f, want) in forces.iter().zip([-PI / 24.0, -PI / 96.0, -PI / 384.0]) {
        assert!((f - want).abs() <= 1e-5 * want.abs(), "{f} vs {want}");
    }
}

#[test]
fn sweep_continues_past_failed_rows() {
    let (r, code) = json(&["sweep", "--scenario", "interval", "--param", "a", "--grid", "1,-1,2"]);
    assert_eq!(code, 1);
    let status: Vec<&str> = r["results"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["status"].as_str().unwrap())
        .collect();
    assert_eq!(status, ["ok", "failed", "ok"]);
    assert_eq!(r["diagnostics"]["failed"], 1);
}

#[test]
fn sweep_box_aspect_crosses_regimes() {
    let (r, code) = json(&[
        "sweep",
        "--scenario",
        "box",
        "--param",
        "aspect",
        "--grid",
        "0.01..50:10:log",
        "--force",
    ]);
    assert_eq!(code, 0);
    let rows = r["results"]["rows"].as_array().unwrap();
    let pressure = |row: &Value| num(&row["results"]["pressure"]);
    let first = &rows[0];
    let slab = num(&first["results"]["reference_pressures"]["slab"]);
    assert!(pressure(first) < 0.0 && (pressure(first) - slab).abs() < 0.02 * slab.abs());
    let last = rows.last().unwrap();
    assert!((pressure(last) - CATALAN / 24.0).abs() < 0.02 * CATALAN / 24.0);
    let signs: Vec<bool> = rows.iter().map(|row| pressure(row) > 0.0).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1, "{signs:?}");
}

#[test]
fn spectrum_out_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("star.txt");
    let out = pistonlab(
        &[
            "star",
            "--lengths",
            "1,1.3,1.7",
            "--spectrum-ceiling",
            "20",
            "--spectrum-out",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let spectrum = Spectrum::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(spectrum.omega_max(), 20.0);
    assert!(spectrum.has_zero_mode());
}

#[test]
fn sign_table_fixture() {
    let (r, code) = json(&["sign-table"]);
    assert_eq!(code, 0);
    let rows = r["results"]["rows"].as_array().unwrap();
    assert!(rows
        .iter()
        .any(|row| row["parameters"] == "piston=N n=3" && row["expected"] == "null"));
}

#[test]
fn paper_suite_exit_code_tracks_checks() {
    let (r, code) = json(&["paper-suite"]);
    let checks = r["results"]["checks"].as_array().unwrap();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(code, if failed.is_empty() { 0 } else { 1 });
    assert_eq!(num(&r["results"]["failed"]) as usize, failed.len());
    let table = String::from_utf8(pistonlab(&["paper-suite"], &[]).stdout).unwrap();
    assert!(table.contains(&format!(
        "{}/{} checks passed",
        checks.len() - failed.len(),
        checks.len()
    )));
}
