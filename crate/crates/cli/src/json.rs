//! A small JSON tree whose reals print with seventeen significant digits.
//!
//! `serde_json` picks the shortest round-trip form for floats, which makes
//! column widths and diffs depend on the value; reports here use a fixed
//! exponent layout instead. Non-finite reals become the strings `"inf"`,
//! `"-inf"` and `"nan"`.

use shiftmetrics::certify::fmt_real;
use shiftmetrics::Enclosure;

#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Real(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj<K: Into<String>>(fields: impl IntoIterator<Item = (K, Json)>) -> Self {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Self {
        Json::Str(s.into())
    }

    pub fn reals(xs: &[f64]) -> Self {
        Json::Arr(xs.iter().map(|&x| Json::Real(x)).collect())
    }

    pub fn opt_real(x: Option<f64>) -> Self {
        x.map_or(Json::Null, Json::Real)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Real(x) if x.is_finite() => out.push_str(&fmt_real(*x)),
            Json::Real(x) => quote(out, &fmt_real(*x)),
            Json::Str(s) => quote(out, s),
            Json::Arr(items) if items.iter().all(Json::is_scalar) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(fields) if fields.is_empty() => out.push_str("{}"),
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n" } else { "\n" });
                    pad(out, indent + 1);
                    quote(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                pad(out, indent);
                out.push('}');
            }
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }
}

fn pad(out: &mut String, indent: usize) {
    out.extend(std::iter::repeat_n("  ", indent));
}

fn quote(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

impl From<&Enclosure> for Json {
    fn from(e: &Enclosure) -> Self {
        let mut fields = vec![
            ("lo", Json::Real(e.lo)),
            ("hi", Json::Real(e.hi)),
            ("method", Json::str(&e.method)),
        ];
        if let Some(d) = e.depth {
            fields.push(("depth", Json::Int(d as i128)));
        }
        if let Some(i) = e.iterations {
            fields.push(("iterations", Json::Int(i as i128)));
        }
        if let Some(l) = e.lambda_star {
            fields.push(("lambda_star", Json::Real(l)));
        }
        fields.push(("converged", Json::Bool(e.converged)));
        Json::obj(fields)
    }
}
