use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vhj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vhj")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const BUMP: &str = r#"
[params]
p = "3"
[grid]
r = 1.0
nodes = 200
[stepping]
dt = 1e-4
[stop]
t_end = 0.01
[data]
kind = "bump"
amplitude = 0.2
[output]
every = 20
"#;

#[test]
fn spectrum_lists_shifted_integers() {
    let out = vhj(&["spectrum", "--p", "3", "--jmax", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    let lambdas: Vec<f64> = v["result"].as_array().unwrap().iter().map(|e| e["lambda"].as_f64().unwrap()).collect();
    assert_eq!(lambdas, vec![-0.25, 0.75, 1.75, 2.75]);
    let zeros = v["result"][2]["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 2);
    assert_eq!(v["manifest"]["params"]["k"].as_f64(), Some(0.25));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = vhj(&["spectrum", "--p", "10/3", "--jmax", "6"]);
    let b = vhj(&["spectrum", "--p", "10/3", "--jmax", "6"]);
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bump.toml");
    fs::write(&cfg, BUMP).unwrap();
    let cfg = cfg.to_str().unwrap();
    let o1 = dir.path().join("one");
    let o2 = dir.path().join("two");
    for o in [&o1, &o2] {
        let out = vhj(&["solve", "--config", cfg, "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["summary.json", "boundary.csv", "events.jsonl", "manifest.json"] {
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap(), "{f}");
    }
    let manifest: Value = serde_json::from_slice(&fs::read(o1.join("manifest.json")).unwrap()).unwrap();
    let id = manifest["id"].as_str().unwrap();
    let snap = fs::read_dir(o1.join("snapshots")).unwrap().next().unwrap().unwrap().path();
    let text = fs::read_to_string(snap).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# manifest={id} p=3 beta=0.5 k=0.25 alpha=1.5"));
    assert_eq!(lines.next().unwrap(), "x,u");
}

#[test]
fn floats_carry_at_most_twelve_digits() {
    let out = vhj(&["steady", "--p", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    // c_p = √2 for p = 3
    assert!(text.contains("\"c_p\": 1.41421356237,"), "{text}");
}

#[test]
fn exit_codes_and_error_detail() {
    let out = vhj(&["spectrum", "--p", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "domain");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, BUMP.replace("t_end = 0.01", "t_end = 0.01\nmax_steps = 3")).unwrap();
    let out = vhj(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "numerical");

    let out = vhj(&["braid", "equiv", "XZ", "X"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn braid_commands() {
    let out = vhj(&["braid", "verify", "--nmax", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["all_certified"], true);
    let names: Vec<&str> = v["result"]["nonreductions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| n["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 5);

    let v = json(&vhj(&["braid", "equiv", "XYX", "YXY"]));
    assert_eq!(v["result"]["equivalent"], true);
    let v = json(&vhj(&["braid", "reduce", "XYYXYY", "X2Y4XY4X"]));
    assert_eq!(v["result"]["reachable"], false);
    let v = json(&vhj(&["braid", "reduce", "XXYXY", "YXY"]));
    assert_eq!(v["result"]["reachable"], true);
}

#[test]
fn braid_encode_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.csv");
    // strand 2 dips through strand 1 and back: X X
    let mut text = String::from("x,c1,c2,c3\n");
    for i in 0..=30 {
        let x = i as f64 / 30.0;
        let dip = 1.0 - 2.0 * (std::f64::consts::PI * x).sin();
        text += &format!("{x},0,{dip},2\n");
    }
    fs::write(&path, text).unwrap();
    let v = json(&vhj(&["braid", "encode", path.to_str().unwrap()]));
    assert_eq!(v["result"]["word"], "XX");
    let v = json(&vhj(&["braid", "encode", path.to_str().unwrap(), "--order", "bottom-y"]));
    assert_eq!(v["result"]["word"], "YY");
}

#[test]
fn kernel_checks() {
    let v = json(&vhj(&["kernel", "--alpha", "1.5", "--check-normalization"]));
    assert!(v["result"]["max_normalization_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["result"]["normalization"].as_array().unwrap().len(), 25);
    let v = json(&vhj(&["kernel", "--p", "3", "--eigen-test", "2", "0.5"]));
    assert!(v["result"]["eigen_test"]["relative_error"].as_f64().unwrap() < 1e-6);
}

fn write_trace(path: &Path, f: impl Fn(f64) -> f64) {
    let mut text = String::from("# synthetic\nt,value\n");
    for i in 0..200 {
        let t = 1.0 - 10f64.powf(-1.0 - 3.0 * i as f64 / 199.0);
        text += &format!("{t},{}\n", f(t));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn rate_fit_recovers_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trace(&path, |t| 2.5 * (1.0 - t).powf(-1.0));
    let v = json(&vhj(&["rate-fit", "--trace", path.to_str().unwrap(), "--t-sing", "1"]));
    assert!((v["result"]["exponent"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((v["result"]["coefficient"].as_f64().unwrap() - 2.5).abs() < 1e-8);
    let v = json(&vhj(&["rate-fit", "--trace", path.to_str().unwrap()]));
    assert!((v["result"]["singular_time"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn solve_then_zeros_then_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rbc.toml");
    fs::write(
        &cfg,
        r#"
[params]
p = "3"
a = 1e-8
[grid]
r = 1.0
h0 = 2e-6
ratio = 0.97
h_max = 2e-3
[stepping]
dt0 = 1e-9
target = 0.01
[stop]
t_end = 0.0302
[data]
kind = "rbc"
ell = 1
s0 = 4.6
[output]
every = 20
"#,
    )
    .unwrap();
    let run = dir.path().join("run");
    let out = vhj(&["solve-singular", "--config", cfg.to_str().unwrap(), "--out", run.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&fs::read(run.join("summary.json")).unwrap()).unwrap();
    let tau = summary["result"]["rbc_time"].as_f64().expect("boundary crossing");
    assert!((tau / 5.4724e-3 - 1.0).abs() < 1e-2, "tau {tau}");

    let snaps = run.join("snapshots");
    let zdir = dir.path().join("zeros");
    let out = vhj(&[
        "zeros",
        "--snapshots",
        snaps.to_str().unwrap(),
        "--out",
        zdir.to_str().unwrap(),
        "--t-sing",
        &tau.to_string(),
        "--span",
        &(0.5 * tau).to_string(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ev: Value = serde_json::from_slice(&fs::read(zdir.join("events.json")).unwrap()).unwrap();
    assert_eq!(ev["result"]["reference"], "0");
    assert_eq!(ev["result"]["counts_nonincreasing"], true);
    assert_eq!(ev["result"]["vanishing"]["n"], 1);
    assert!(fs::read_to_string(zdir.join("tracks.csv")).unwrap().lines().nth(1) == Some("label,t,x"));

    let pdir = dir.path().join("profile");
    let out = vhj(&[
        "profile-check",
        "--snapshots",
        snaps.to_str().unwrap(),
        "--tau",
        &tau.to_string(),
        "--out",
        pdir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(pdir.join("misfit.csv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("t,gap,coefficient,misfit,nodes"));
}

#[test]
fn config_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bump.toml");
    fs::write(&cfg, BUMP).unwrap();
    let o = dir.path().join("o");
    let out = vhj(&["solve", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap(), "--p", "4", "--truncation", "50"]);
    assert!(out.status.success());
    let s: Value = serde_json::from_slice(&fs::read(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["manifest"]["params"]["p"].as_f64(), Some(4.0));
    assert_eq!(s["result"]["kind"]["Truncated"]["level"].as_f64(), Some(50.0));
    // a shift belongs to the singular solver
    let out = vhj(&["solve", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap(), "--a", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
}
