//! Uniqueness certificates for schemes of locally constant approximations.
//!
//! With `c_l = ||log(g / g_l)|| exp(svar_l log g_l)`, the unique Markov
//! measures `mu_l` of the `g_l` satisfy `rho(mu_m, mu_l) <= 2 (c_l + c_m)`,
//! so an envelope proving `c_l -> 0` certifies a projective limit that is the
//! unique g-measure of `g`. The verdict is two-valued on purpose: failure of
//! the criterion proves nothing.

use std::fmt::Write as _;

use serde::Serialize;

use crate::distances::{projective_markov, Enclosure};
use crate::error::{domain, Error, Result};
use crate::gfun::{g_to_markov, hulse_g, svar, GFunction, HulseG, LocallyConstantG, LongRangeIsingG};
use crate::numeric::inverse_square_tail_upper;

/// A sequence of locally constant `g_l` converging to a target `g`, with
/// certified envelopes.
pub trait ApproximationScheme {
    fn name(&self) -> String;

    fn g_at(&self, ell: usize) -> Result<LocallyConstantG>;

    /// Certified upper bound on `||log(g / g_l)||`.
    fn eps_envelope(&self, ell: usize) -> f64;

    /// Certified upper bound on `svar(log g_l)` at the Markov order of `g_l`.
    fn svar_envelope(&self, ell: usize) -> f64;

    /// `l -> eps_envelope(l) exp(svar_envelope(l))` is nonincreasing.
    fn monotone_tail(&self) -> bool;

    /// The same map tends to 0.
    fn envelope_vanishes(&self) -> bool;

    /// A certified lower bound on `||log(g / g_l)||` from direct evaluation,
    /// for consistency checks against the envelope.
    fn eps_lower(&self, ell: usize) -> Result<f64>;

    /// Human-readable envelope formulas, keyed by quantity.
    fn formulas(&self) -> Vec<(String, String)>;
}

/// Long-range family: `g_l` has range `l` (sum up to `k = l`), and the
/// limit is the infinite-range function.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRangeScheme {
    beta: f64,
    limit: LongRangeIsingG,
}

pub fn long_range_scheme(beta: f64) -> Result<LongRangeScheme> {
    Ok(LongRangeScheme {
        beta,
        limit: LongRangeIsingG::new(beta, None)?,
    })
}

/// Extra symbols used to probe the limit function when bounding `eps` from below.
const PROBE_TAIL: usize = 48;

impl ApproximationScheme for LongRangeScheme {
    fn name(&self) -> String {
        format!("long_range(beta={})", self.beta)
    }

    fn g_at(&self, ell: usize) -> Result<LocallyConstantG> {
        LongRangeIsingG::new(self.beta, Some(ell.max(1)))?.to_table()
    }

    fn eps_envelope(&self, ell: usize) -> f64 {
        2.0 * self.beta * inverse_square_tail_upper(ell.max(1))
    }

    fn svar_envelope(&self, ell: usize) -> f64 {
        // sum_{k=2}^{l} (k-1)/k^2 = H_l - 1 - (sum_{k=2}^{l} 1/k^2)
        let s: f64 = (2..=ell).map(|k| (k - 1) as f64 / (k * k) as f64).sum();
        4.0 * self.beta * s * (1.0 + 1e-14)
    }

    /// With `x = l / (l+1)^2`, `c(l+1) / c(l) <= (1 - x) e^{4 beta x}`,
    /// which is `< 1` for `beta <= 1/4` since `(1 - x) e^x < 1`.
    fn monotone_tail(&self) -> bool {
        self.beta <= 0.25
    }

    /// `c(l) ~ 2 beta l^{4 beta - 1} e^{4 beta (gamma - 1 + ...)}`.
    fn envelope_vanishes(&self) -> bool {
        self.beta < 0.25
    }

    fn eps_lower(&self, ell: usize) -> Result<f64> {
        let g = self.g_at(ell)?;
        let r = g.range();
        let mut best: f64 = 0.0;
        let mut w = vec![0usize; r + PROBE_TAIL];
        for code in 0..(1u64 << r) {
            crate::symbolic::digits_into(2, code, &mut w[..r]);
            let x = g.log_value(&w[..r]);
            for fill in [0, 1] {
                w[r..].iter_mut().for_each(|s| *s = fill);
                let iv = self.limit.log_interval(&w);
                best = best.max(iv.lo - x).max(x - iv.hi);
            }
        }
        Ok(best.max(0.0))
    }

    fn formulas(&self) -> Vec<(String, String)> {
        vec![
            ("eps_ell".into(), "2*beta*sum_{k>ell} k^-2".into()),
            ("svar_ell".into(), "4*beta*sum_{k=2}^{ell} (k-1)*k^-2".into()),
            ("c_ell".into(), "eps_ell*exp(svar_ell)".into()),
            ("cauchy_bound".into(), "4*c_ell when the tail is monotone, else inf".into()),
        ]
    }
}

/// `g_l = g` for every `l`: the trivial scheme around a locally constant `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantScheme {
    g: LocallyConstantG,
    svar: f64,
}

impl ConstantScheme {
    pub fn new(g: LocallyConstantG) -> Result<Self> {
        let depth = g.range().saturating_sub(1).max(1);
        let svar = svar(&g, depth)?.value;
        Ok(Self { g, svar })
    }
}

impl ApproximationScheme for ConstantScheme {
    fn name(&self) -> String {
        format!("constant(range={})", self.g.range())
    }

    fn g_at(&self, _ell: usize) -> Result<LocallyConstantG> {
        Ok(self.g.clone())
    }

    fn eps_envelope(&self, _ell: usize) -> f64 {
        0.0
    }

    fn svar_envelope(&self, _ell: usize) -> f64 {
        self.svar
    }

    fn monotone_tail(&self) -> bool {
        true
    }

    fn envelope_vanishes(&self) -> bool {
        true
    }

    fn eps_lower(&self, _ell: usize) -> Result<f64> {
        Ok(0.0)
    }

    fn formulas(&self) -> Vec<(String, String)> {
        vec![
            ("eps_ell".into(), "0".into()),
            ("svar_ell".into(), "svar(log g)".into()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Converges,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Converges => "CONVERGES",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRow {
    pub ell: usize,
    pub eps: f64,
    pub svar: f64,
    pub c: f64,
    /// `2 (c_l + sup_{m >= l} c_m)`; infinite without tail control.
    pub cauchy_bound: f64,
    /// Bound on `rho(mu, mu_l)` for the limit `mu`, present under CONVERGES.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_bound: Option<f64>,
    /// Exact `svar(log g_l)` from the table, never above `svar`.
    pub svar_computed: f64,
    /// Certified lower bound on `||log(g / g_l)||`, never above `eps`.
    pub eps_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub scheme: String,
    pub rows: Vec<CertificateRow>,
    pub verdict: Verdict,
    pub formulas: Vec<(String, String)>,
}

impl UniquenessCertificate {
    pub fn row(&self, ell: usize) -> Option<&CertificateRow> {
        self.rows.iter().find(|r| r.ell == ell)
    }

    /// Fixed columns: `ell, eps_ell, svar_ell, c_ell, cauchy_bound, verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,eps_ell,svar_ell,c_ell,cauchy_bound,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.ell,
                fmt_real(r.eps),
                fmt_real(r.svar),
                fmt_real(r.c),
                fmt_real(r.cauchy_bound),
                self.verdict.label()
            );
        }
        out
    }
}

/// Seventeen significant digits, round-trip exact; `inf` for infinities.
pub fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else {
        // `+ 0.0` maps a negative zero to zero.
        format!("{:.16e}", x + 0.0)
    }
}

/// Rows for `l = 1..=ell_max`; fails with [`Error::Envelope`] when a
/// directly computed value contradicts an envelope beyond `tol`.
pub fn certify_scheme(s: &dyn ApproximationScheme, ell_max: usize, tol: f64) -> Result<UniquenessCertificate> {
    if ell_max == 0 {
        return domain("ell_max must be at least 1");
    }
    if !(tol >= 0.0) {
        return domain("tolerance must be nonnegative");
    }
    let verdict = if s.monotone_tail() && s.envelope_vanishes() {
        Verdict::Converges
    } else {
        Verdict::Inconclusive
    };
    let mut rows = Vec::with_capacity(ell_max);
    for ell in 1..=ell_max {
        let g = s.g_at(ell)?;
        let order = g.range().saturating_sub(1).max(1);
        let svar_computed = svar(&g, order)?.value;
        let eps_lower = s.eps_lower(ell)?;
        let (eps, sv) = (s.eps_envelope(ell), s.svar_envelope(ell));
        if svar_computed > sv + tol {
            return Err(Error::Envelope(format!(
                "{}: svar at ell={ell} is {svar_computed}, above the envelope {sv}",
                s.name()
            )));
        }
        if eps_lower > eps + tol {
            return Err(Error::Envelope(format!(
                "{}: ||log(g/g_ell)|| at ell={ell} is at least {eps_lower}, above the envelope {eps}",
                s.name()
            )));
        }
        let c = eps * sv.exp();
        let cauchy_bound = if s.monotone_tail() { 4.0 * c } else { f64::INFINITY };
        rows.push(CertificateRow {
            ell,
            eps,
            svar: sv,
            c,
            cauchy_bound,
            limit_bound: (verdict == Verdict::Converges).then_some(4.0 * c),
            svar_computed,
            eps_lower,
        });
    }
    Ok(UniquenessCertificate {
        scheme: s.name(),
        rows,
        verdict,
        formulas: s.formulas(),
    })
}

/// Projective enclosure between the Markov measures of the two Hulse
/// branches (`h` and `h'`) at `level`.
pub fn hulse_distance_probe(params: &HulseG, level: usize, tol: f64) -> Result<Enclosure> {
    let at = HulseG { level, ..params.clone() };
    at.validate()?;
    let g = hulse_g(&at.branch(false))?;
    let g_prime = hulse_g(&at.branch(true))?;
    let m = g_to_markov(&g, 1e-14)?;
    let m_prime = g_to_markov(&g_prime, 1e-14)?;
    let mut e = projective_markov(&m, &m_prime, tol)?;
    e.method = "hulse-probe:karp+dp".into();
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Alphabet;

    #[test]
    fn envelope_arithmetic_at_ten() {
        let s = long_range_scheme(0.2).unwrap();
        assert!(s.eps_envelope(10) < 0.04);
        assert!(s.svar_envelope(10).exp() < 10f64.powf(0.8));
        assert!(s.eps_envelope(10) * s.svar_envelope(10).exp() < 0.2524);
    }

    #[test]
    fn verdicts_follow_the_threshold() {
        let c = certify_scheme(&long_range_scheme(0.2).unwrap(), 6, 1e-12).unwrap();
        assert_eq!(c.verdict, Verdict::Converges);
        let c = certify_scheme(&long_range_scheme(0.3).unwrap(), 6, 1e-12).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.rows.iter().all(|r| r.cauchy_bound.is_infinite()));
        let c = certify_scheme(&long_range_scheme(0.0).unwrap(), 4, 1e-12).unwrap();
        assert!(c.rows.iter().all(|r| r.c == 0.0));
    }

    #[test]
    fn constant_scheme_is_trivial() {
        let g = LocallyConstantG::new(Alphabet::numeric(2).unwrap(), 2, &[0.3, 0.6, 0.7, 0.4]).unwrap();
        let c = certify_scheme(&ConstantScheme::new(g).unwrap(), 5, 0.0).unwrap();
        assert_eq!(c.verdict, Verdict::Converges);
        assert!(c.rows.iter().all(|r| r.cauchy_bound == 0.0 && r.limit_bound == Some(0.0)));
    }

    #[test]
    fn inconsistent_envelope_is_reported() {
        struct Liar(LongRangeScheme);
        impl ApproximationScheme for Liar {
            fn name(&self) -> String {
                "liar".into()
            }
            fn g_at(&self, ell: usize) -> Result<LocallyConstantG> {
                self.0.g_at(ell)
            }
            fn eps_envelope(&self, ell: usize) -> f64 {
                self.0.eps_envelope(ell) * 0.1
            }
            fn svar_envelope(&self, ell: usize) -> f64 {
                self.0.svar_envelope(ell)
            }
            fn monotone_tail(&self) -> bool {
                true
            }
            fn envelope_vanishes(&self) -> bool {
                true
            }
            fn eps_lower(&self, ell: usize) -> Result<f64> {
                self.0.eps_lower(ell)
            }
            fn formulas(&self) -> Vec<(String, String)> {
                Vec::new()
            }
        }
        let err = certify_scheme(&Liar(long_range_scheme(0.2).unwrap()), 4, 0.0).unwrap_err();
        assert!(matches!(err, Error::Envelope(_)));
    }

    #[test]
    fn hulse_probe_examples() {
        let params = HulseG {
            alphabet: Alphabet::new(["-1", "1"]).unwrap(),
            projection: vec![-1, 1],
            beta: 1.0,
            j: vec![1.0],
            h: vec![0.1],
            h_prime: vec![-0.1],
            lambda: vec![2],
            level: 1,
            primed: false,
        };
        let e = hulse_distance_probe(&params, 1, 1e-10).unwrap();
        assert!(e.lo > 0.0 && e.hi - e.lo <= 1e-10);
        let same = HulseG { h_prime: vec![0.1], ..params.clone() };
        assert!(hulse_distance_probe(&same, 1, 1e-10).unwrap().hi <= 1e-10);
        let flat = HulseG { beta: 0.0, ..params };
        assert!(hulse_distance_probe(&flat, 1, 1e-10).unwrap().hi <= 1e-10);
    }
}
