use std::path::Path;
use std::process::{Command, Output};

fn jamming(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jamming"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .env_remove("RUST_LIB_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = jamming(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn fluid_c1_reports_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["fluid", "--c", "1", "--out", out]);
    let s = json(&dir.path().join("fluid_summary.json"));
    assert_eq!(format!("{:.6}", s["T_star"].as_f64().unwrap()), "0.693147");
    let (header, rows) = read_csv(&dir.path().join("fluid.csv"));
    assert_eq!(header, ["t", "z_er", "l", "u", "m"]);
    assert!(rows.len() > 100);
}

#[test]
fn fluid_c14_bounds_bracket_er_constant() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fluid", "--c", "1.4", "--out", dir.path().to_str().unwrap()]);
    let s = json(&dir.path().join("fluid_summary.json"));
    let (lo, hi) = (s["T_lower"].as_f64().unwrap(), s["T_upper"].as_f64().unwrap());
    assert!(lo <= 0.6253 && 0.6253 <= hi, "{lo} {hi}");
}

#[test]
fn fluid_rejects_zero_c() {
    let dir = tempfile::tempdir().unwrap();
    let out = jamming(&["fluid", "--c", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("c must be > 0"), "{err}");
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = jamming(&["fluid", "--out", blocker.join("sub").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn empty_er_chain_trace_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate", "--model", "er-chain", "--n", "100", "--c", "0", "--out", dir.path().to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&dir.path().join("trace.csv"));
    assert_eq!(header, ["step", "Z"]);
    assert_eq!(rows.len(), 101);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[1], i.to_string());
    }
}

#[test]
fn figure1_trace_is_sandwiched_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["figure1", "--seed", "17", "--out", d.path().to_str().unwrap()]);
    }
    let (header, rows) = read_csv(&a.path().join("trace.csv"));
    assert_eq!(header, ["step", "Z", "U", "L", "area_S", "r_tilde", "alpha"]);
    for row in &rows {
        let z: usize = row[1].parse().unwrap();
        let u: usize = row[2].parse().unwrap();
        let l: usize = row[3].parse().unwrap();
        assert!(l <= z && z <= u, "{row:?}");
    }
    for name in ["trace.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let s = json(&a.path().join("summary.json"));
    assert_eq!(s["n"], 2000);
    assert_eq!(s["sandwich_holds"], true);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"model": "er-chain", "n": 50, "c": 1.0, "reps": 3, "seed": 9}"#).unwrap();
    ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "80",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["n"], 80);
    assert_eq!(s["replications"], 3);
    assert_eq!(s["seed"], 9);
}

#[test]
fn figure2_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "figure2", "--grid", "0.05,1.0", "--n", "300", "--reps", "5", "--out", dir.path().to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&dir.path().join("figure2.csv"));
    assert_eq!(header, ["c", "T_lower", "T_upper", "T_er", "rsa_mean", "ci_low", "ci_high"]);
    assert_eq!(rows.len(), 2);
    let f = |r: &Vec<String>, i: usize| r[i].parse::<f64>().unwrap();
    for r in &rows {
        assert!(f(r, 5) <= f(r, 4) && f(r, 4) <= f(r, 6));
        assert!(f(r, 1) <= f(r, 3));
    }
    // smallest c: bounds agree to second order
    let c = f(&rows[0], 0);
    assert!(f(&rows[0], 2) - f(&rows[0], 1) <= 10.0 * c * c);
}

#[test]
fn clt_and_envelope_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["clt", "--n", "2000", "--reps", "50", "--out", out]);
    let s = json(&dir.path().join("clt.json"));
    assert_eq!(s["replications"], 50);
    assert!(s["ks"]["p_value"].is_f64());
    ok(&["envelope", "--n", "2000", "--reps", "20", "--out", out]);
    let e = json(&dir.path().join("envelope.json"));
    assert!(e["l2_mean"].as_f64().unwrap() <= e["omega_n"].as_f64().unwrap());
    let (_, rows) = read_csv(&dir.path().join("envelope.csv"));
    assert_eq!(rows.len(), 20);
}

#[test]
fn clt_rejects_spatial_model() {
    let out = jamming(&["clt", "--model", "rsa", "--n", "100", "--reps", "2"]);
    assert!(!out.status.success());
}
