//! Entropy rate, relative entropy rate and the variational identity for
//! g-measures, all in nats.

use serde::Serialize;

use crate::distances::Enclosure;
use crate::error::{domain, Result};
use crate::gfun::GFunction;
use crate::measures::{CylinderOracle, MarkovMeasure};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_log_g: Option<Enclosure>,
    /// Enclosure of `h(mu) + int log g d mu`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<Enclosure>,
}

fn require_stationary(m: &MarkovMeasure, what: &str) -> Result<()> {
    if m.is_stationary() {
        Ok(())
    } else {
        domain(format!("{what} needs a stationary measure"))
    }
}

/// `h(mu) = -sum_a mu[a] sum_b p(b|a) log p(b|a)` over blocks `a` of the
/// measure's order.
pub fn markov_entropy(m: &MarkovMeasure) -> Result<f64> {
    require_stationary(m, "the entropy rate")?;
    let k = m.alphabet().size();
    let total: CompensatedSum = m
        .block_log()
        .iter()
        .enumerate()
        .flat_map(|(c, &lc)| {
            m.kernel_log()[c * k..(c + 1) * k]
                .iter()
                .map(move |&lp| -(lc + lp).exp() * lp)
        })
        .collect();
    Ok(total.value().max(0.0))
}

/// `h(mu_p | mu_q) = sum_a mu_p[a] sum_b p(b|a) log(p(b|a) / q(b|a))` at the
/// common order.
pub fn relative_entropy_rate(p: &MarkovMeasure, q: &MarkovMeasure) -> Result<f64> {
    require_stationary(p, "the relative entropy rate")?;
    require_stationary(q, "the relative entropy rate")?;
    let (a, b) = MarkovMeasure::common_order(p, q)?;
    let k = a.alphabet().size();
    let total: CompensatedSum = a
        .block_log()
        .iter()
        .enumerate()
        .flat_map(|(c, &lc)| {
            let (ra, rb) = (&a.kernel_log()[c * k..(c + 1) * k], &b.kernel_log()[c * k..(c + 1) * k]);
            ra.iter().zip(rb).map(move |(x, y)| (lc + x).exp() * (x - y))
        })
        .collect();
    Ok(total.value())
}

/// `(1/n) sum_{|w| = n} mu[w] log(mu[w] / nu[w])`, whose limit is the
/// relative entropy rate.
pub fn relative_entropy_truncated(a: &dyn CylinderOracle, b: &dyn CylinderOracle, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("word length must be at least 1");
    }
    if a.alphabet_size() != b.alphabet_size() {
        return domain("measures live on alphabets of different sizes");
    }
    let (la, lb) = (a.log_masses(n)?, b.log_masses(n)?);
    let total: CompensatedSum = la.iter().zip(&lb).map(|(x, y)| x.exp() * (x - y)).collect();
    Ok(total.value() / n as f64)
}

/// Lower and upper sums of `int log g d mu` over words of length `depth`,
/// plus the total absolute mass-weighted magnitude for the rounding pad.
fn integral_sums(g: &dyn GFunction, m: &MarkovMeasure, depth: usize) -> Result<(f64, f64, f64)> {
    if g.alphabet() != m.alphabet() {
        return domain("g-function and measure live on different alphabets");
    }
    let need = g.exact_range().unwrap_or(1).max(m.order());
    if depth < need {
        return domain(format!("depth {depth} is below the required {need}"));
    }
    let k = m.alphabet().size();
    let masses = m.log_masses(depth)?;
    let mut w = vec![0usize; depth];
    let (mut lo, mut hi, mut size) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for (code, lm) in masses.iter().enumerate() {
        crate::symbolic::digits_into(k, code as u64, &mut w);
        let iv = g.log_interval(&w);
        let mass = lm.exp();
        lo.add(mass * iv.lo);
        hi.add(mass * iv.hi);
        size.add(mass * iv.lo.abs().max(iv.hi.abs()));
    }
    Ok((lo.value(), hi.value(), size.value()))
}

fn rounding_pad(magnitude: f64, depth: usize) -> f64 {
    8.0 * f64::EPSILON * (depth as f64 + 4.0) * (magnitude + 1.0)
}

/// Enclosure of `int log g d mu` from the cylinder intervals of `log g` at
/// `depth`. Degenerate (up to rounding) when `g` is locally constant with
/// range at most `depth`.
pub fn integral_log_g(g: &dyn GFunction, m: &MarkovMeasure, depth: usize) -> Result<Enclosure> {
    require_stationary(m, "the integral of log g")?;
    let (lo, hi, size) = integral_sums(g, m, depth)?;
    let pad = rounding_pad(size, depth);
    let mut e = Enclosure::new(lo - pad, hi + pad, "cylinder-sum");
    e.depth = Some(depth);
    Ok(e)
}

/// Enclosure of `h(mu) + int log g d mu`, which is `<= 0` and vanishes when
/// `mu` is a g-measure for `g`.
///
/// Besides rounding, the pad covers the residual non-invariance of the
/// measure's block table, which is what a numerically computed stationary
/// vector leaves behind.
pub fn variational_defect(g: &dyn GFunction, m: &MarkovMeasure, depth: usize) -> Result<Enclosure> {
    let h = markov_entropy(m)?;
    let (lo, hi, size) = integral_sums(g, m, depth)?;
    let blocks = m.block_log().len() as f64;
    let spread = m
        .block_log()
        .iter()
        .chain(m.kernel_log())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    let stationarity = 4.0 * blocks * m.stationarity_defect() * (spread + size + 1.0);
    let pad = rounding_pad(size + h, depth) + stationarity;
    let mut e = Enclosure::new(h + lo - pad, h + hi + pad, "entropy+cylinder-sum");
    e.depth = Some(depth);
    Ok(e)
}

/// Report for a stationary Markov measure, optionally against a reference
/// measure and a g-function evaluated at `depth`.
pub fn entropy_report(
    m: &MarkovMeasure,
    reference: Option<&MarkovMeasure>,
    g: Option<(&dyn GFunction, usize)>,
) -> Result<EntropyReport> {
    Ok(EntropyReport {
        entropy: markov_entropy(m)?,
        relative_entropy: reference.map(|r| relative_entropy_rate(m, r)).transpose()?,
        integral_log_g: g.map(|(g, d)| integral_log_g(g, m, d)).transpose()?,
        defect: g.map(|(g, d)| variational_defect(g, m, d)).transpose()?,
    })
}
