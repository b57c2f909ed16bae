//! g-functions: positive functions on `A^N` with `sum_a g(a x) = 1`, read as
//! the conditional probability of the first symbol given the rest.
//!
//! Evaluation is by cylinder: [`GFunction::log_interval`] returns a certified
//! enclosure of `log g` over every sequence starting with a given word.

mod families;
mod table;

pub use families::{hulse_g, long_range_g, HulseG, LongRangeIsingG};
pub use table::{
    canonical_approximation, g_to_markov, markov_to_g, transfer_matrix, LocallyConstantG,
    G_NORMALIZATION_TOL,
};

use serde::Serialize;

use crate::capacity;
use crate::error::{domain, Result};
use crate::numeric::compensated_sum;
use crate::symbolic::{digits_into, Alphabet};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn exp(&self) -> Self {
        Self {
            lo: self.lo.exp(),
            hi: self.hi.exp(),
        }
    }
}

pub trait GFunction {
    fn alphabet(&self) -> &Alphabet;

    /// Enclosure of `log g` over the cylinder `[w]`, `w` non-empty.
    fn log_interval(&self, w: &[usize]) -> Interval;

    /// `Some(r)` when `g` is locally constant of range `r`.
    fn exact_range(&self) -> Option<usize>;

    /// Enclosure of `g` itself over `[w]`.
    fn eval_interval(&self, w: &[usize]) -> Interval {
        self.log_interval(w).exp()
    }

    /// Exact `var_l log g` when cheaply available.
    fn exact_variation(&self, _depth: usize) -> Option<f64> {
        None
    }
}

impl<T: GFunction + ?Sized> GFunction for &T {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }
    fn log_interval(&self, w: &[usize]) -> Interval {
        (**self).log_interval(w)
    }
    fn exact_range(&self) -> Option<usize> {
        (**self).exact_range()
    }
    fn exact_variation(&self, depth: usize) -> Option<f64> {
        (**self).exact_variation(depth)
    }
}

/// Upper bound on a nonnegative quantity, flagged when it is the exact value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub exact: bool,
}

/// `var_l(log g)`: the largest oscillation of `log g` over a length-`l` cylinder.
pub fn variation(g: &dyn GFunction, depth: usize) -> Result<Bound> {
    if depth == 0 {
        return domain("variation depth must be at least 1");
    }
    if let Some(value) = g.exact_variation(depth) {
        return Ok(Bound { value, exact: true });
    }
    if g.exact_range().is_some_and(|r| depth >= r) {
        return Ok(Bound {
            value: 0.0,
            exact: true,
        });
    }
    let k = g.alphabet().size();
    let count = capacity::check_words("variation", k, depth)?;
    let mut w = vec![0; depth];
    let mut worst: f64 = 0.0;
    for code in 0..count as u64 {
        digits_into(k, code, &mut w);
        worst = worst.max(g.log_interval(&w).width());
    }
    Ok(Bound {
        value: worst,
        exact: false,
    })
}

/// `svar_l(log g) = sum_{k=1}^{l} var_k(log g)`.
pub fn svar(g: &dyn GFunction, depth: usize) -> Result<Bound> {
    if depth == 0 {
        return domain("svar depth must be at least 1");
    }
    let mut exact = true;
    let mut terms = Vec::with_capacity(depth);
    for k in 1..=depth {
        let b = variation(g, k)?;
        exact &= b.exact;
        terms.push(b.value);
    }
    Ok(Bound {
        value: compensated_sum(terms),
        exact,
    })
}

/// Largest `|sum_a mid g(a w) - 1|` over `w` in `A^depth`, plus the sum of
/// the half-widths of the intervals involved.
pub fn g_normalization_check(g: &dyn GFunction, depth: usize) -> Result<f64> {
    if depth == 0 {
        return domain("normalization depth must be at least 1");
    }
    let k = g.alphabet().size();
    let count = capacity::check_words("normalization check", k, depth)?;
    let mut w = vec![0; depth + 1];
    let mut worst: f64 = 0.0;
    for code in 0..count as u64 {
        digits_into(k, code, &mut w[1..]);
        let mut slack: f64 = 0.0;
        let total = compensated_sum((0..k).map(|a| {
            w[0] = a;
            let iv = g.eval_interval(&w);
            slack += 0.5 * iv.width();
            iv.mid()
        }));
        worst = worst.max((total - 1.0).abs() + slack);
    }
    Ok(worst)
}

/// `||log(g / h)||`, the sup norm of the log-ratio, for two locally constant
/// functions on the same alphabet.
pub fn log_ratio_norm(g: &LocallyConstantG, h: &LocallyConstantG) -> Result<f64> {
    if g.alphabet() != h.alphabet() {
        return domain("g-functions live on different alphabets");
    }
    let r = g.range().max(h.range());
    let (a, b) = (g.lift(r)?, h.lift(r)?);
    Ok(a
        .log_table()
        .iter()
        .zip(b.log_table())
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs())))
}
