use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BER05: &str = r#"{"type":"markov","order":1,"block_dist":[0.5,0.5],"kernel":[[0.5,0.5],[0.5,0.5]]}"#;
const BER13: &str = r#"{"type":"markov","alphabet":["0","1"],"order":1,"kernel":[[0.6666666666666666,0.3333333333333334],[0.6666666666666666,0.3333333333333334]]}"#;
const STICKY: &str = r#"{"type":"markov","order":1,"kernel":[[0.9,0.1],[0.2,0.8]]}"#;

struct Scratch(tempfile::TempDir);

impl Scratch {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shiftmetrics"));
    cmd.args(args).env_remove("SHIFTMETRICS_CAPACITY");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.stderr.is_empty(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn real(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        v => v.as_f64().unwrap(),
    }
}

#[test]
fn projective_between_coins() {
    let s = Scratch::new();
    let (a, b) = (s.file("a.json", BER05), s.file("b.json", BER13));
    let out = run(&["dist", "--kind", "projective", "--a", p(&a), "--b", p(&b), "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let want = 1.5f64.ln();
    let (lo, hi) = (real(&v["enclosure"]["lo"]), real(&v["enclosure"]["hi"]));
    assert!(lo <= want + 1e-12 && want <= hi + 1e-12 && hi - lo <= 1e-9, "[{lo}, {hi}]");
}

#[test]
fn vague_self_distance_is_the_tail() {
    let s = Scratch::new();
    let m = s.file("m.json", STICKY);
    let out = run(&["dist", "--kind", "vague", "--a", p(&m), "--b", p(&m), "--depth", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,lo,hi,depth,runtime_ms"));
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cols[0], "vague");
    assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0);
    let hi: f64 = cols[2].parse().unwrap();
    assert!((hi - 2f64.powi(-9)).abs() <= 2f64.powi(-9) * 1e-12);
    assert_eq!(cols[3], "10");
    assert_eq!(cols[4], "0");
}

#[test]
fn coupling_bounds_pin_the_coins() {
    let s = Scratch::new();
    let (a, b) = (s.file("a.json", BER05), s.file("b.json", BER13));
    let up = json(&run(&["dist", "--kind", "dbar-upper", "--a", p(&a), "--b", p(&b)]));
    let lo = json(&run(&["dist", "--kind", "dbar-lower", "--a", p(&a), "--b", p(&b)]));
    assert!((real(&up["enclosure"]["hi"]) - 1.0 / 6.0).abs() < 1e-9);
    assert!((real(&lo["enclosure"]["lo"]) - 1.0 / 6.0).abs() < 1e-9);
}

#[test]
fn certificate_verdicts_and_exit_codes() {
    let out = run(&["certify", "--scheme", "long_range", "--beta", "0.2", "--lmax", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "CONVERGES");
    assert_eq!(v["rows"].as_array().unwrap().len(), 12);
    assert!(v["formulas"]["c_ell"].is_string());

    let out = run(&["certify", "--beta", "0.3", "--lmax", "12"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verdict"], "INCONCLUSIVE");

    let out = run(&["certify", "--beta", "0", "--lmax", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ell,eps_ell,svar_ell,c_ell,cauchy_bound,verdict"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[5], "CONVERGES");
    }
}

#[test]
fn table_scheme_certificate() {
    let s = Scratch::new();
    let g = s.file("g.json", r#"{"type":"table","range":2,"values":[0.3,0.6,0.7,0.4]}"#);
    let out = run(&["certify", "--scheme", "table", "--a", p(&g), "--lmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "CONVERGES");
}

#[test]
fn witnesses() {
    let v = json(&run(&["counterexample", "separability"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 200);
    assert!((real(&rows[199]["separation"]) - 0.5).abs() < 1e-2);
    assert!(real(&v["truncated_rho"]) >= 0.49);

    let v = json(&run(&["counterexample", "dbar-vs-rho", "--p", "4"]));
    let row = &v["rows"][0];
    assert_eq!(row["dbar_upper_exact"], "1/4");
    assert_eq!(real(&row["dbar_upper"]), 0.25);
    assert!(real(&row["rho_truncated"]) >= 0.49);

    let v = json(&run(&["counterexample", "rho-vs-dbar", "--lmax", "4"]));
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().skip(2).all(|r| real(&r["rho"]["hi"]) < 1e-9));
    assert!(rows.iter().all(|r| r["bound_holds"] == true));
    assert!(v["note"].is_string());
}

#[test]
fn approximation_table_for_a_range_three_g() {
    let s = Scratch::new();
    let g = s.file("g.json", r#"{"type":"table","range":3,"values":[0.2,0.45,0.6,0.7,0.8,0.55,0.4,0.3]}"#);
    let v = json(&run(&["approx", "--a", p(&g), "--lmax", "4"]));
    for r in v["rows"].as_array().unwrap() {
        let ell = r["ell"].as_u64().unwrap();
        let hi = real(&r["rho"]["hi"]);
        assert!(hi <= real(&r["var_ell"]) + 1e-9);
        if ell >= 3 {
            assert!(hi < 1e-9);
        }
    }
    let lr = s.file("lr.json", r#"{"type":"long_range","beta":0.2,"range":"inf"}"#);
    let v = json(&run(&["approx", "--a", p(&lr), "--lmax", "3"]));
    assert!(v["rows"][0]["rho"].is_null());
}

#[test]
fn entropy_and_spectral_reports() {
    let s = Scratch::new();
    let (a, b) = (s.file("a.json", BER05), s.file("b.json", BER13));
    let v = json(&run(&["entropy", "--a", p(&a), "--b", p(&b)]));
    assert!((real(&v["entropy"]) - 2f64.ln()).abs() < 1e-15);
    let want = 0.5 * 0.75f64.ln() + 0.5 * 1.5f64.ln();
    assert!((real(&v["relative_entropy"]) - want).abs() < 1e-12);

    let g = s.file("g.json", r#"{"type":"table","range":1,"values":[0.5,0.5]}"#);
    let v = json(&run(&["entropy", "--a", p(&a), "--b", p(&g)]));
    assert!(real(&v["defect"]["lo"]) <= 0.0 && real(&v["defect"]["hi"]) >= 0.0);

    let w = s.file("w.json", r#"{"type":"matrix","rows":[[2,1],[1,2]]}"#);
    let v = json(&run(&["spectral", "--a", p(&w)]));
    assert!((real(&v["tau"]) - 1.0 / 3.0).abs() < 1e-15);
    assert!(v.get("stationary").is_none());

    let m = s.file("m.json", STICKY);
    let v = json(&run(&["spectral", "--a", p(&m)]));
    let vec: Vec<f64> = v["stationary"]["vector"].as_array().unwrap().iter().map(real).collect();
    assert!((vec[0] - 2.0 / 3.0).abs() < 1e-12 && (vec[1] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn error_exit_codes() {
    let s = Scratch::new();
    let bad = s.file("bad.json", "{not json");
    let good = s.file("m.json", STICKY);
    let out = run(&["dist", "--kind", "vague", "--a", p(&bad), "--b", p(&good)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty() && !out.stderr.is_empty());

    let missing = s.path("nope.json");
    assert_eq!(run(&["dist", "--kind", "vague", "--a", p(&missing), "--b", p(&good)]).status.code(), Some(2));

    let unnormalized = s.file("u.json", r#"{"type":"markov","order":1,"kernel":[[0.5,0.6],[0.5,0.5]]}"#);
    assert_eq!(run(&["entropy", "--a", p(&unnormalized)]).status.code(), Some(2));

    let out = run_env(
        &["dist", "--kind", "vague", "--a", p(&good), "--b", p(&good), "--depth", "10"],
        &[("SHIFTMETRICS_CAPACITY", "100")],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(run_env(&["certify", "--beta", "0.2"], &[("SHIFTMETRICS_CAPACITY", "lots")]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let s = Scratch::new();
    let (a, b) = (s.file("a.json", STICKY), s.file("b.json", BER13));
    let (o1, o2) = (s.path("r1.json"), s.path("r2.json"));
    for (out, threads) in [(&o1, "1"), (&o2, "4")] {
        let r = run(&["dist", "--kind", "projective", "--a", p(&a), "--b", p(&b), "--threads", threads, "--out", p(out)]);
        assert_eq!(r.status.code(), Some(0));
        assert!(r.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&o1).unwrap(), std::fs::read(&o2).unwrap());
}
