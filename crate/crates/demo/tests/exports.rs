use serde_json::Value;
use shiftmetrics::measures::alpha_for_separation;
use shiftmetrics_demo::{chain_distances_json, long_range_certificate_json, separability_series_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn coins_as_degenerate_chains() {
    // staying probabilities p and 1 - p describe an i.i.d. coin with P(0) = p
    let v = parse(chain_distances_json(0.5, 0.5, 2.0 / 3.0, 1.0 / 3.0).unwrap());
    let (lo, hi) = (v["projective"]["lo"].as_f64().unwrap(), v["projective"]["hi"].as_f64().unwrap());
    let want = 1.5f64.ln();
    assert!(lo <= want + 1e-12 && want <= hi + 1e-12);
    assert!((v["dbar_upper"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);
    let kl = 0.5 * 0.75f64.ln() + 0.5 * 1.5f64.ln();
    assert!((v["relative_entropy"].as_f64().unwrap() - kl).abs() < 1e-12);
}

#[test]
fn rejects_degenerate_chains() {
    assert!(chain_distances_json(1.0, 0.5, 0.5, 0.5).is_err());
    assert!(chain_distances_json(0.5, f64::NAN, 0.5, 0.5).is_err());
}

#[test]
fn certificate_threshold() {
    let v = parse(long_range_certificate_json(0.2, 8).unwrap());
    assert_eq!(v["verdict"], "CONVERGES");
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    let v = parse(long_range_certificate_json(0.3, 4).unwrap());
    assert_eq!(v["verdict"], "INCONCLUSIVE");
    assert!(v["rows"][0]["cauchy_bound"].is_null());
    assert!(long_range_certificate_json(0.2, 40).is_err());
}

#[test]
fn separation_series_approaches_the_rate() {
    let alpha = alpha_for_separation(0.5).unwrap();
    let v = parse(separability_series_json(alpha, 200).unwrap());
    let s = v["series"].as_array().unwrap();
    assert_eq!(s.len(), 200);
    assert!((s[199].as_f64().unwrap() - 0.5).abs() < 1e-2);
    assert!((v["limit"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!(v["truncated_rho"].as_f64().unwrap() >= 0.49);
}
