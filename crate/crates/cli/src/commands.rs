use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Deserialize;

use shiftmetrics::certify::{certify_scheme, fmt_real, long_range_scheme, ConstantScheme, UniquenessCertificate, Verdict};
use shiftmetrics::distances::{
    dbar_lower_blocks, dbar_upper_markov, projective_markov, projective_markov_with, projective_truncated,
    vague_distance, ProjectiveOptions,
};
use shiftmetrics::entropy::entropy_report;
use shiftmetrics::files::{parse_g, parse_measure, GFunctionValue, Measure};
use shiftmetrics::gfun::{canonical_approximation, g_to_markov, long_range_g, markov_to_g, svar, transfer_matrix, variation};
use shiftmetrics::measures::{
    alpha_for_separation, flip_sequence, prefix_separation, tau_coupling_disagreement, truncated_projective_family,
    truncated_projective_induced, InducedMeasure, SeparabilityMeasure, SequenceRule,
};
use shiftmetrics::spectral::{birkhoff_tau, pf_stationary, ColumnStochasticMatrix, PfOptions, DENSE_LIMIT};
use shiftmetrics::{Alphabet, Enclosure, Error};

use crate::json::Json;
use crate::{Command, Common, DistKind, Failure, SchemeKind, Witness};

pub struct Report {
    pub json: Json,
    pub csv: String,
    pub exit: u8,
}

impl Report {
    fn ok(json: Json, csv: String) -> Self {
        Self { json, csv, exit: 0 }
    }
}

type Outcome = Result<Report, Failure>;

pub fn dispatch(cmd: &Command, common: &Common) -> Outcome {
    let start = Instant::now();
    let elapsed = || if common.timing { start.elapsed().as_millis() } else { 0 };
    match cmd {
        Command::Dist { kind, a, b, depth, tol } => dist(*kind, a, b, *depth, *tol, elapsed),
        Command::Approx { a, lmax, tol } => approx(a, *lmax, *tol),
        Command::Entropy { a, b, depth } => entropy(a, b.as_deref(), *depth),
        Command::Spectral { a, tol } => spectral(a, *tol),
        Command::Certify {
            scheme,
            beta,
            a,
            lmax,
            tol,
        } => certify(*scheme, *beta, a.as_deref(), *lmax, *tol),
        Command::Counterexample {
            which,
            depth,
            p,
            alpha,
            a,
            lmax,
            tol,
        } => match which {
            Witness::Separability => separability(*depth, *alpha),
            Witness::DbarVsRho => dbar_vs_rho(*depth, p, *alpha),
            Witness::RhoVsDbar => rho_vs_dbar(a.as_deref(), *lmax, *tol),
        },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// Any failure while building an input is an input error, whatever its kind.
fn in_file<T>(path: &Path, r: shiftmetrics::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Capacity { .. } => Failure::from(e),
        e => Failure::input(format!("{}: {e}", path.display())),
    })
}

fn load_measure(path: &Path) -> Result<Measure, Failure> {
    in_file(path, parse_measure(&read(path)?))
}

fn load_g(path: &Path) -> Result<GFunctionValue, Failure> {
    in_file(path, parse_g(&read(path)?))
}

fn spec_type(text: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(text).ok()?;
    v.get("type")?.as_str().map(str::to_string)
}

fn is_measure_type(t: Option<&str>) -> bool {
    matches!(t, Some("markov" | "separability" | "induced"))
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!("--tol must be positive, got {tol}")))
    }
}

fn check_depth(depth: Option<usize>) -> Result<(), Failure> {
    match depth {
        Some(0) => Err(Failure::input("--depth must be at least 1")),
        _ => Ok(()),
    }
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn dist(kind: DistKind, a: &Path, b: &Path, depth: Option<usize>, tol: f64, elapsed: impl Fn() -> u128) -> Outcome {
    check_tol(tol)?;
    check_depth(depth)?;
    let (ma, mb) = (load_measure(a)?, load_measure(b)?);
    let markov_pair = || match (ma.as_markov(), mb.as_markov()) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(Failure::input("this distance needs two Markov measures")),
    };
    let mut extra = Vec::new();
    let (label, enclosure) = match kind {
        DistKind::Projective => {
            let e = match (&ma, &mb) {
                (Measure::Markov(x), Measure::Markov(y)) => {
                    let opts = ProjectiveOptions { tol, max_depth: depth };
                    projective_markov_with(x, y, &opts)?.enclosure
                }
                (Measure::Separability(x), Measure::Separability(y)) => {
                    let d = depth.unwrap_or(200);
                    truncated(truncated_projective_family(x, y, d), d)
                }
                (Measure::Induced(x), Measure::Induced(y)) => {
                    let d = depth.unwrap_or(200);
                    truncated(truncated_projective_induced(x, y, d)?, d)
                }
                _ => {
                    let d = depth.unwrap_or(12);
                    truncated(projective_truncated(ma.oracle(), mb.oracle(), d)?, d)
                }
            };
            ("projective", e)
        }
        DistKind::Vague => ("vague", vague_distance(ma.oracle(), mb.oracle(), depth.unwrap_or(10))?),
        DistKind::DbarUpper => {
            let (x, y) = markov_pair()?;
            let c = dbar_upper_markov(x, y)?;
            extra.push(("markov_coupling_lower", Json::Real(c.markov_lower)));
            extra.push(("product_states", Json::Int(c.states as i128)));
            ("dbar-upper", c.enclosure())
        }
        DistKind::DbarLower => {
            let m = depth.unwrap_or(4);
            let mut lo = 0.0f64;
            for len in 1..=m {
                lo = lo.max(dbar_lower_blocks(ma.oracle(), mb.oracle(), len)?);
            }
            let mut e = Enclosure::new(lo, 1.0, "block-total-variation");
            e.depth = Some(m);
            ("dbar-lower", e)
        }
    };
    let runtime = elapsed();
    let mut fields = vec![("kind", Json::str(label)), ("enclosure", Json::from(&enclosure))];
    fields.extend(extra);
    fields.push(("runtime_ms", Json::Int(runtime as i128)));
    let csv = format!(
        "kind,lo,hi,depth,runtime_ms\n{label},{},{},{},{runtime}\n",
        fmt_real(enclosure.lo),
        fmt_real(enclosure.hi),
        enclosure.depth.map(|d| d.to_string()).unwrap_or_default()
    );
    Ok(Report::ok(Json::obj(fields), csv))
}

/// A truncated supremum bounds `rho` from below only.
fn truncated(value: f64, depth: usize) -> Enclosure {
    let mut e = Enclosure::new(value, f64::INFINITY, "truncated");
    e.depth = Some(depth);
    e.converged = false;
    e
}

struct ApproxRow {
    ell: usize,
    var: f64,
    var_exact: bool,
    svar: f64,
    rho: Option<Enclosure>,
}

fn approx_rows(g: &GFunctionValue, lmax: usize, tol: f64) -> Result<Vec<ApproxRow>, Failure> {
    check_tol(tol)?;
    if lmax == 0 {
        return Err(Failure::input("--lmax must be at least 1"));
    }
    let gf = g.as_gfunction();
    let mu = match gf.exact_range() {
        Some(_) => Some(g_to_markov(&g.to_table()?, 1e-14)?),
        None => None,
    };
    (1..=lmax)
        .map(|ell| {
            let v = variation(gf, ell)?;
            let rho = match &mu {
                Some(mu) => Some(projective_markov(&canonical_approximation(mu, ell)?, mu, tol)?),
                None => None,
            };
            Ok(ApproxRow {
                ell,
                var: v.value,
                var_exact: v.exact,
                svar: svar(gf, ell)?.value,
                rho,
            })
        })
        .collect::<shiftmetrics::Result<_>>()
        .map_err(Failure::from)
}

fn approx_report(rows: &[ApproxRow], note: Option<&str>) -> Report {
    let mut csv = String::from("ell,var_ell,svar_ell,rho_lo,rho_hi,bound_holds\n");
    let mut items = Vec::new();
    for r in rows {
        let holds = r.rho.as_ref().map(|e| e.hi <= r.var + 1e-9);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.ell,
            fmt_real(r.var),
            fmt_real(r.svar),
            csv_opt(r.rho.as_ref().map(|e| e.lo)),
            csv_opt(r.rho.as_ref().map(|e| e.hi)),
            holds.map(|h| h.to_string()).unwrap_or_default()
        ));
        items.push(Json::obj([
            ("ell", Json::Int(r.ell as i128)),
            ("var_ell", Json::Real(r.var)),
            ("var_exact", Json::Bool(r.var_exact)),
            ("svar_ell", Json::Real(r.svar)),
            ("rho", r.rho.as_ref().map_or(Json::Null, Json::from)),
            ("bound_holds", holds.map_or(Json::Null, Json::Bool)),
        ]));
    }
    let mut fields = vec![("rows", Json::Arr(items))];
    if let Some(n) = note {
        fields.push(("note", Json::str(n)));
    }
    Report::ok(Json::obj(fields), csv)
}

fn approx(a: &Path, lmax: usize, tol: f64) -> Outcome {
    let g = load_g(a)?;
    let rows = approx_rows(&g, lmax, tol)?;
    let note = g
        .as_gfunction()
        .exact_range()
        .is_none()
        .then_some("infinite range: the g-measure is not Markov, so only the variation columns are reported");
    Ok(approx_report(&rows, note))
}

fn entropy(a: &Path, b: Option<&Path>, depth: Option<usize>) -> Outcome {
    check_depth(depth)?;
    let m = load_measure(a)?;
    let m = m
        .as_markov()
        .ok_or_else(|| Failure::input("entropy needs a Markov measure"))?;
    let (mut reference, mut g) = (None, None);
    if let Some(b) = b {
        let text = read(b)?;
        if is_measure_type(spec_type(&text).as_deref()) {
            let r = in_file(b, parse_measure(&text))?;
            match r {
                Measure::Markov(r) => reference = Some(r),
                _ => return Err(Failure::input("the reference measure must be Markov")),
            }
        } else {
            g = Some(in_file(b, parse_g(&text))?);
        }
    }
    let with_depth = g.as_ref().map(|g| {
        let gf = g.as_gfunction();
        let d = depth.unwrap_or_else(|| gf.exact_range().unwrap_or(10).max(m.order()));
        (gf, d)
    });
    let rep = entropy_report(m, reference.as_ref(), with_depth)?;
    let enc = |e: &Option<Enclosure>| e.as_ref().map_or(Json::Null, Json::from);
    let json = Json::obj([
        ("entropy", Json::Real(rep.entropy)),
        ("relative_entropy", Json::opt_real(rep.relative_entropy)),
        ("integral_log_g", enc(&rep.integral_log_g)),
        ("defect", enc(&rep.defect)),
    ]);
    let csv = format!(
        "entropy,relative_entropy,integral_lo,integral_hi,defect_lo,defect_hi\n{},{},{},{},{},{}\n",
        fmt_real(rep.entropy),
        csv_opt(rep.relative_entropy),
        csv_opt(rep.integral_log_g.as_ref().map(|e| e.lo)),
        csv_opt(rep.integral_log_g.as_ref().map(|e| e.hi)),
        csv_opt(rep.defect.as_ref().map(|e| e.lo)),
        csv_opt(rep.defect.as_ref().map(|e| e.hi)),
    );
    Ok(Report::ok(json, csv))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixSpec {
    rows: Vec<Vec<f64>>,
}

fn load_matrix(path: &Path) -> Result<(DMatrix<f64>, &'static str), Failure> {
    let text = read(path)?;
    let kind = spec_type(&text);
    if kind.as_deref() == Some("matrix") {
        let mut v: serde_json::Value = serde_json::from_str(&text).expect("type was read from valid JSON");
        v.as_object_mut().expect("typed spec is an object").remove("type");
        let spec: MatrixSpec = serde_json::from_value(v).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let n = spec.rows.len();
        if n == 0 || spec.rows.iter().any(|r| r.len() != n) {
            return Err(Failure::input(format!("{}: matrix must be square and nonempty", path.display())));
        }
        return Ok((DMatrix::from_fn(n, n, |i, j| spec.rows[i][j]), "matrix"));
    }
    let table = if is_measure_type(kind.as_deref()) {
        let m = in_file(path, parse_measure(&text))?;
        let m = m
            .as_markov()
            .ok_or_else(|| Failure::input("spectral needs a matrix, a Markov measure or a g-function"))?;
        markov_to_g(m)?
    } else {
        in_file(path, parse_g(&text))?.to_table()?
    };
    let (m, _) = transfer_matrix(&table)?;
    if m.dim() > DENSE_LIMIT {
        return Err(Error::Capacity {
            what: "dense transfer matrix".into(),
            requested: m.dim() as u128,
            limit: DENSE_LIMIT as u64,
        }
        .into());
    }
    Ok((m.to_dense(), "transfer"))
}

fn spectral(a: &Path, tol: f64) -> Outcome {
    check_tol(tol)?;
    let (dense, source) = load_matrix(a)?;
    let b = birkhoff_tau(&dense)?;
    let mut fields = vec![
        ("source", Json::str(source)),
        ("dim", Json::Int(dense.nrows() as i128)),
        ("tau", Json::Real(b.tau)),
        ("primitivity_index", Json::Int(b.primitivity_index as i128)),
        ("min_cross_ratio", Json::Real(b.min_cross_ratio)),
    ];
    let mut csv_tail = ",,,".to_string();
    // Only column-stochastic matrices have a stationary vector to report.
    if let Ok(m) = ColumnStochasticMatrix::from_dense(&dense) {
        let opts = PfOptions {
            tol,
            primitivity_index: Some(b.primitivity_index),
            ..PfOptions::default()
        };
        let r = pf_stationary(&m, &opts)?;
        csv_tail = format!(
            "{},{},{}",
            fmt_real(r.residual),
            csv_opt(r.dp_error_bound),
            r.iterations
        );
        fields.push((
            "stationary",
            Json::obj([
                ("vector", Json::reals(&r.eigenvector)),
                ("residual", Json::Real(r.residual)),
                ("dp_error_bound", Json::opt_real(r.dp_error_bound)),
                ("iterations", Json::Int(r.iterations as i128)),
            ]),
        ));
    }
    let csv = format!(
        "dim,tau,primitivity_index,residual,dp_error_bound,iterations\n{},{},{},{csv_tail}\n",
        dense.nrows(),
        fmt_real(b.tau),
        b.primitivity_index
    );
    Ok(Report::ok(Json::obj(fields), csv))
}

fn certificate_json(c: &UniquenessCertificate) -> Json {
    let rows = c
        .rows
        .iter()
        .map(|r| {
            Json::obj([
                ("ell", Json::Int(r.ell as i128)),
                ("eps_ell", Json::Real(r.eps)),
                ("svar_ell", Json::Real(r.svar)),
                ("c_ell", Json::Real(r.c)),
                ("cauchy_bound", Json::Real(r.cauchy_bound)),
                ("limit_bound", Json::opt_real(r.limit_bound)),
                ("svar_computed", Json::Real(r.svar_computed)),
                ("eps_lower", Json::Real(r.eps_lower)),
            ])
        })
        .collect();
    Json::obj([
        ("scheme", Json::str(&c.scheme)),
        ("verdict", Json::str(c.verdict.label())),
        ("formulas", Json::obj(c.formulas.iter().map(|(k, v)| (k.clone(), Json::str(v))))),
        ("rows", Json::Arr(rows)),
    ])
}

fn certify(scheme: SchemeKind, beta: Option<f64>, a: Option<&Path>, lmax: usize, tol: f64) -> Outcome {
    if !(tol >= 0.0) {
        return Err(Failure::input("--tol must be nonnegative"));
    }
    let c = match scheme {
        SchemeKind::LongRange => {
            let beta = beta.ok_or_else(|| Failure::input("the long_range scheme needs --beta"))?;
            certify_scheme(&long_range_scheme(beta)?, lmax, tol)?
        }
        SchemeKind::Table => {
            let a = a.ok_or_else(|| Failure::input("the table scheme needs --a"))?;
            let g = load_g(a)?.to_table()?;
            certify_scheme(&ConstantScheme::new(g)?, lmax, tol)?
        }
    };
    Ok(Report {
        json: certificate_json(&c),
        csv: c.to_csv(),
        exit: if c.verdict == Verdict::Converges { 0 } else { 4 },
    })
}

fn default_alpha(alpha: Option<f64>) -> Result<f64, Failure> {
    Ok(match alpha {
        Some(a) => a,
        None => alpha_for_separation(0.5)?,
    })
}

fn separability(depth: Option<usize>, alpha: Option<f64>) -> Outcome {
    check_depth(depth)?;
    let n = depth.unwrap_or(200);
    let alpha = default_alpha(alpha)?;
    let x = SequenceRule::new(vec![1], vec![0, 1, 1])?;
    let y = SequenceRule::new(vec![0], vec![0, 1, 1])?;
    let (nx, ny) = (SeparabilityMeasure::new(x, alpha)?, SeparabilityMeasure::new(y, alpha)?);
    let series: Vec<f64> = (1..=n).map(|k| prefix_separation(&nx, &ny, k)).collect();
    let rho = truncated_projective_family(&nx, &ny, n);
    let mut csv = String::from("n,separation\n");
    for (k, s) in series.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, fmt_real(*s)));
    }
    let rows = series
        .iter()
        .enumerate()
        .map(|(k, &s)| Json::obj([("n", Json::Int(k as i128 + 1)), ("separation", Json::Real(s))]))
        .collect();
    let json = Json::obj([
        ("alpha", Json::Real(alpha)),
        ("x", Json::str("1(011)^inf")),
        ("y", Json::str("0(011)^inf")),
        ("truncated_rho", Json::Real(rho)),
        ("rows", Json::Arr(rows)),
    ]);
    Ok(Report::ok(json, csv))
}

fn dbar_vs_rho(depth: Option<usize>, p: &[usize], alpha: Option<f64>) -> Outcome {
    check_depth(depth)?;
    let depth = depth.unwrap_or(200);
    let periods = if p.is_empty() { vec![2, 4, 8, 16] } else { p.to_vec() };
    let alpha = default_alpha(alpha)?;
    let x = SequenceRule::new(vec![], vec![0, 1, 1, 0, 1])?;
    let abcd = Alphabet::new(["a", "b", "c", "d"])?;
    let mu_x = InducedMeasure::new(SeparabilityMeasure::new(x.clone(), alpha)?, abcd, vec![0, 1, 0, 1])?;
    let mut csv = String::from("p,dbar_upper,dbar_upper_exact,rho_truncated\n");
    let mut rows = Vec::new();
    for &p in &periods {
        if p < 2 {
            return Err(Failure::input("flip periods must be at least 2"));
        }
        // Any multiple of p gives the exact density; 240 p spans many flips.
        let density = tau_coupling_disagreement(p, 240 * p)?;
        let real = *density.numer() as f64 / *density.denom() as f64;
        let mu_xp = mu_x.with_sequence(flip_sequence(&x, p)?)?;
        let rho = truncated_projective_induced(&mu_x, &mu_xp, depth)?;
        csv.push_str(&format!("{p},{},{density},{}\n", fmt_real(real), fmt_real(rho)));
        rows.push(Json::obj([
            ("p", Json::Int(p as i128)),
            ("dbar_upper", Json::Real(real)),
            ("dbar_upper_exact", Json::str(density.to_string())),
            ("rho_truncated", Json::Real(rho)),
        ]));
    }
    let json = Json::obj([
        ("alpha", Json::Real(alpha)),
        ("depth", Json::Int(depth as i128)),
        ("rows", Json::Arr(rows)),
    ]);
    Ok(Report::ok(json, csv))
}

fn rho_vs_dbar(a: Option<&Path>, lmax: usize, tol: f64) -> Outcome {
    let g = match a {
        Some(a) => load_g(a)?,
        None => GFunctionValue::LongRange(long_range_g(0.2, Some(3))?),
    };
    if g.as_gfunction().exact_range().is_none() {
        return Err(Failure::input("rho-vs-dbar needs a finite-range g-function"));
    }
    let rows = approx_rows(&g, lmax, tol)?;
    Ok(approx_report(
        &rows,
        Some("rho to the canonical approximations vanishes from the range on; that d-bar need not converge along such schemes is a theoretical statement, not computed here"),
    ))
}
