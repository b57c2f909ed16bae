//! Small numerical helpers: compensated summation, log-sum-exp, the logistic
//! map `psi`, and a rigorous bound on tails of `sum 1/k^2`.

/// Neumaier compensated accumulator. Summation order is the call order, so
/// results are bit-stable for a fixed iteration order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `log(sum(exp(x)))` with the maximum factored out and a compensated inner
/// sum. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s = compensated_sum(xs.iter().map(|&x| (x - max).exp()));
    max + s.ln()
}

/// `psi(t) = e^t / (e^t + e^-t)`, evaluated stably for large `|t|`.
pub fn psi(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-2.0 * t).exp())
    } else {
        let e = (2.0 * t).exp();
        e / (1.0 + e)
    }
}

/// `log psi(t) = -log(1 + e^{-2t})`.
pub fn log_psi(t: f64) -> f64 {
    if t >= 0.0 {
        -(-2.0 * t).exp().ln_1p()
    } else {
        2.0 * t - (2.0 * t).exp().ln_1p()
    }
}

/// Certified upper bound on `sum_{k > n} k^-2` for `n >= 1`.
///
/// Uses the Euler-Maclaurin upper bound `1/n - 1/(2n^2) + 1/(6n^3)`, inflated
/// by a relative `1e-14` to absorb rounding.
pub fn inverse_square_tail_upper(n: usize) -> f64 {
    assert!(n >= 1, "tail starts after at least one term");
    let x = n as f64;
    let v = 1.0 / x - 0.5 / (x * x) + 1.0 / (6.0 * x * x * x);
    v * (1.0 + 1e-14)
}

/// Certified lower bound on `sum_{k > n} k^-2` for `n >= 1`.
pub fn inverse_square_tail_lower(n: usize) -> f64 {
    assert!(n >= 1, "tail starts after at least one term");
    let x = n as f64;
    let v = 1.0 / x - 0.5 / (x * x) + 1.0 / (6.0 * x * x * x) - 1.0 / (30.0 * x.powi(5));
    v * (1.0 - 1e-14)
}

/// `sum_{k = from}^{to} k^-2` in increasing `k`, compensated. Zero if `from > to`.
pub fn inverse_square_partial(from: usize, to: usize) -> f64 {
    if from > to {
        return 0.0;
    }
    compensated_sum((from..=to).map(|k| {
        let k = k as f64;
        1.0 / (k * k)
    }))
}
