use serde::{Deserialize, Serialize};

use crate::capacity;
use crate::error::{domain, Result};
use crate::gfun::{GFunction, Interval, LocallyConstantG};
use crate::numeric::{inverse_square_partial, inverse_square_tail_upper, log_psi, psi, CompensatedSum};
use crate::symbolic::{digits_into, Alphabet};

/// Long-range Ising-type g-function on `{-1, 1}`:
/// `g(x) = psi(beta x_1 sum_{k=2}^{R} x_k k^-2)`, with `R` the range (possibly
/// infinite) and `psi(t) = e^t / (e^t + e^-t)`.
///
/// Symbol index 0 is the spin `-1`, index 1 the spin `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRangeIsingG {
    alphabet: Alphabet,
    beta: f64,
    range: Option<usize>,
}

fn spin(s: usize) -> f64 {
    if s == 0 {
        -1.0
    } else {
        1.0
    }
}

impl LongRangeIsingG {
    /// `range = None` is the infinite-range limit.
    pub fn new(beta: f64, range: Option<usize>) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return domain("beta must be a nonnegative number");
        }
        if range == Some(0) {
            return domain("range must be at least 1");
        }
        Ok(Self {
            alphabet: Alphabet::new(["-1", "1"])?,
            beta,
            range,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn range(&self) -> Option<usize> {
        self.range
    }

    /// `sum_{k=2}^{min(n, R)} x_k k^-2` for the known prefix.
    fn field(&self, w: &[usize]) -> f64 {
        let upto = self.range.map_or(w.len(), |r| r.min(w.len()));
        let mut s = CompensatedSum::new();
        for (i, &x) in w.iter().enumerate().take(upto).skip(1) {
            let k = (i + 1) as f64;
            s.add(spin(x) / (k * k));
        }
        s.value()
    }

    /// Upper bound on the contribution of the unknown symbols beyond `n`.
    fn tail(&self, n: usize) -> f64 {
        match self.range {
            Some(r) if n >= r => 0.0,
            Some(r) => inverse_square_partial(n + 1, r) * (1.0 + 1e-14),
            None => inverse_square_tail_upper(n),
        }
    }

    /// Locally constant table of a finite-range member.
    pub fn to_table(&self) -> Result<LocallyConstantG> {
        let Some(r) = self.range else {
            return domain("the infinite-range function has no finite table");
        };
        let size = capacity::check_words("long-range table", 2, r)?;
        let mut w = vec![0; r];
        let values: Vec<f64> = (0..size as u64)
            .map(|code| {
                digits_into(2, code, &mut w);
                psi(self.beta * spin(w[0]) * self.field(&w))
            })
            .collect();
        LocallyConstantG::new(self.alphabet.clone(), r, &values)
    }
}

impl GFunction for LongRangeIsingG {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn log_interval(&self, w: &[usize]) -> Interval {
        let x1 = spin(w[0]);
        let s = self.field(w);
        let t = self.tail(w.len());
        if t == 0.0 {
            return Interval::point(log_psi(self.beta * x1 * s));
        }
        // psi is increasing, so the extreme fields give the extreme values;
        // the pad absorbs rounding in the field sum.
        let pad = 4.0 * f64::EPSILON * self.beta * (1.0 + s.abs() + t);
        let a = self.beta * x1 * (s - t);
        let b = self.beta * x1 * (s + t);
        Interval {
            lo: log_psi(a.min(b) - pad),
            hi: log_psi(a.max(b) + pad),
        }
    }

    fn exact_range(&self) -> Option<usize> {
        self.range
    }
}

/// Parameters of the Hulse-type family
/// `g_l(x) ~ psi(beta pi(x_1) (sum_{k=1}^{l} J_k <pi(x)>_{Lambda_k} + h_l))`.
///
/// Sequences are indexed from level 1: `j[k-1] = J_k`, `lambda[k-1] = Lambda_k`,
/// `h[l-1] = h_l`. The block average `<pi(x)>_Lambda = Lambda^-1 sum_{m=2}^{Lambda}
/// pi(x_m)` runs over the symbols after `x_1`, so the function has range
/// `Lambda_l`. Raw `psi` weights are divided by their sum over the first
/// symbol, which is the constant `#pi^-1(1) + #pi^-1(0) / 2`; for a two-letter
/// alphabet this is 1 and the formula is used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HulseG {
    #[serde(default = "spin_alphabet")]
    pub alphabet: Alphabet,
    #[serde(default = "spin_projection")]
    pub projection: Vec<i8>,
    pub beta: f64,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    pub h: Vec<f64>,
    pub h_prime: Vec<f64>,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<usize>,
    pub level: usize,
    #[serde(default)]
    pub primed: bool,
}

fn spin_alphabet() -> Alphabet {
    Alphabet::new(["-1", "1"]).expect("two distinct labels")
}

fn spin_projection() -> Vec<i8> {
    vec![-1, 1]
}

impl HulseG {
    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet.size();
        if self.projection.len() != k {
            return domain("projection must assign a value to every symbol");
        }
        if self.projection.iter().any(|p| !(-1..=1).contains(p)) {
            return domain("projection values must be -1, 0 or 1");
        }
        let count = |v: i8| self.projection.iter().filter(|&&p| p == v).count();
        if count(1) != k / 2 || count(-1) != k / 2 {
            return domain("projection must send floor(|A|/2) symbols to each of -1 and 1");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return domain("beta must be a nonnegative number");
        }
        let l = self.level;
        if l == 0 {
            return domain("level must be at least 1");
        }
        if self.j.len() < l || self.lambda.len() < l || self.h.len() < l || self.h_prime.len() < l {
            return domain(format!("parameter sequences must reach level {l}"));
        }
        if self.j[..l].iter().any(|j| !(j.is_finite() && *j > 0.0)) {
            return domain("J must be positive");
        }
        if self.h[..l].iter().chain(&self.h_prime[..l]).any(|h| !h.is_finite()) {
            return domain("h and h' must be finite");
        }
        if self.lambda[0] == 0 || self.lambda[..l].windows(2).any(|w| w[1] < w[0]) {
            return domain("Lambda must be positive and nondecreasing");
        }
        Ok(())
    }

    /// `Lambda_l`, the range of the level-`l` function.
    pub fn range(&self) -> usize {
        self.lambda[self.level - 1]
    }

    /// Copy selecting the primed (`h'`) or unprimed (`h`) branch.
    pub fn branch(&self, primed: bool) -> Self {
        Self {
            primed,
            ..self.clone()
        }
    }

    /// Field `sum_k J_k <pi(x)>_{Lambda_k} + h_l` for a word of length `>= range`.
    fn field(&self, w: &[usize]) -> f64 {
        let l = self.level;
        let mut total = CompensatedSum::new();
        for k in 0..l {
            let big = self.lambda[k];
            let s: i64 = w[1..big].iter().map(|&x| i64::from(self.projection[x])).sum();
            total.add(self.j[k] * s as f64 / big as f64);
        }
        total.add(if self.primed { self.h_prime[l - 1] } else { self.h[l - 1] });
        total.value()
    }

    pub fn to_table(&self) -> Result<LocallyConstantG> {
        self.validate()?;
        let k = self.alphabet.size();
        let r = self.range();
        let size = capacity::check_words("Hulse table", k, r)?;
        let ones = self.projection.iter().filter(|&&p| p == 1).count() as f64;
        let zeros = self.projection.iter().filter(|&&p| p == 0).count() as f64;
        let norm = ones + 0.5 * zeros;
        let mut w = vec![0; r];
        let values: Vec<f64> = (0..size as u64)
            .map(|code| {
                digits_into(k, code, &mut w);
                let t = self.beta * f64::from(self.projection[w[0]]) * self.field(&w);
                psi(t) / norm
            })
            .collect();
        LocallyConstantG::new(self.alphabet.clone(), r, &values)
    }
}

/// Member of the long-range family, `range = None` for the limit function.
pub fn long_range_g(beta: f64, range: Option<usize>) -> Result<LongRangeIsingG> {
    LongRangeIsingG::new(beta, range)
}

/// Table of the selected Hulse branch at the configured level.
pub fn hulse_g(params: &HulseG) -> Result<LocallyConstantG> {
    params.to_table()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfun::{g_normalization_check, g_to_markov, svar, variation};
    use crate::measures::CylinderOracle;

    #[test]
    fn beta_zero_is_constant_half() {
        let g = LongRangeIsingG::new(0.0, None).unwrap();
        let iv = g.eval_interval(&[1, 0, 1]);
        assert_eq!(iv.lo, 0.5);
        assert_eq!(iv.hi, 0.5);
    }

    #[test]
    fn interval_at_all_ones_contains_series_value() {
        let beta = 0.2;
        let g = LongRangeIsingG::new(beta, None).unwrap();
        // sum_{k>=2} k^-2 = pi^2/6 - 1
        let exact = psi(beta * (std::f64::consts::PI.powi(2) / 6.0 - 1.0));
        for n in [1, 2, 5, 40, 300] {
            let iv = g.eval_interval(&vec![1; n]);
            assert!(iv.contains(exact), "n = {n}: {iv:?} misses {exact}");
        }
    }

    #[test]
    fn interval_width_matches_tail_bound() {
        let beta = 0.3;
        let g = LongRangeIsingG::new(beta, None).unwrap();
        for n in 1..12 {
            let bound = 4.0 * beta * inverse_square_tail_upper(n);
            assert!(variation(&g, n).unwrap().value <= bound + 1e-14);
            assert!(bound <= 4.0 * beta / n as f64 + 1e-15);
        }
    }

    #[test]
    fn normalization_within_interval_widths() {
        let g = LongRangeIsingG::new(0.4, None).unwrap();
        let defect = g_normalization_check(&g, 6).unwrap();
        assert!(defect <= 4.0 * 0.4 * inverse_square_tail_upper(7) + 1e-14);
        let t = LongRangeIsingG::new(0.4, Some(5)).unwrap().to_table().unwrap();
        assert!(g_normalization_check(&t, 5).unwrap() < 1e-15);
    }

    #[test]
    fn finite_range_svar_below_power_law() {
        for beta in [0.1, 0.2, 0.3] {
            for l in 2..=9 {
                let g = LongRangeIsingG::new(beta, Some(l)).unwrap().to_table().unwrap();
                let s = svar(&g, l).unwrap();
                assert!(s.exact);
                assert!(s.value.exp() <= (l as f64).powf(4.0 * beta));
            }
        }
    }

    #[test]
    fn truncation_error_matches_example() {
        let beta = 0.25;
        for l in 1..8 {
            let gl = LongRangeIsingG::new(beta, Some(l)).unwrap();
            let g = LongRangeIsingG::new(beta, None).unwrap();
            // the limit differs from g_l only through the tail, at most 2 beta T(l)
            let bound = 2.0 * beta * inverse_square_tail_upper(l);
            let mut w = vec![0; l];
            for code in 0..1u64 << l {
                digits_into(2, code, &mut w);
                let a = gl.log_interval(&w);
                let b = g.log_interval(&w);
                assert_eq!(a.lo, a.hi);
                assert!((b.hi - a.lo).max(a.lo - b.lo) <= bound + 1e-14);
            }
            assert!(bound < 2.0 * beta / l as f64);
        }
    }

    fn example(h: f64, h_prime: f64, beta: f64) -> HulseG {
        HulseG {
            alphabet: spin_alphabet(),
            projection: spin_projection(),
            beta,
            j: vec![1.0],
            h: vec![h],
            h_prime: vec![h_prime],
            lambda: vec![2],
            level: 1,
            primed: false,
        }
    }

    #[test]
    fn hulse_hand_table() {
        // range 2, field = pi(x_2) / 2 + h, g = psi(pi(x_1) field)
        let g = hulse_g(&example(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(g.range(), 2);
        let v = g.values();
        let want = [psi(0.5), psi(-0.5), psi(-0.5), psi(0.5)];
        for (x, y) in v.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn hulse_beta_zero_is_uniform() {
        let g = hulse_g(&example(0.3, -0.2, 0.0)).unwrap();
        assert!(g.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
        let m = g_to_markov(&g, 1e-13).unwrap();
        assert!((m.log_mass(&[0, 1, 1]) - (0.125f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn hulse_equal_fields_give_equal_branches() {
        let p = example(0.4, 0.4, 0.7);
        assert_eq!(hulse_g(&p).unwrap(), hulse_g(&p.branch(true)).unwrap());
    }

    #[test]
    fn hulse_odd_alphabet_is_normalized() {
        let p = HulseG {
            alphabet: Alphabet::new(["a", "b", "c"]).unwrap(),
            projection: vec![-1, 0, 1],
            beta: 0.8,
            j: vec![1.0, 0.5],
            h: vec![0.1, 0.2],
            h_prime: vec![0.0, -0.2],
            lambda: vec![2, 3],
            level: 2,
            primed: false,
        };
        let g = hulse_g(&p).unwrap();
        assert_eq!(g.range(), 3);
        assert!(g_normalization_check(&g, 2).unwrap() < 1e-14);
        let mut bad = p.clone();
        bad.projection = vec![1, 0, 1];
        assert!(hulse_g(&bad).is_err());
    }
}
