use crate::capacity;
use crate::error::{domain, Result};
use crate::gfun::{svar, GFunction, Interval};
use crate::measures::{CylinderOracle, MarkovMeasure};
use crate::numeric::{compensated_sum, log_sum_exp};
use crate::spectral::{pf_stationary, ColumnStochasticMatrix, Contraction, PfOptions, DENSE_LIMIT};
use crate::symbolic::{code_of, Alphabet};

/// Accepted deviation of `sum_a g(a w)` from 1.
pub const G_NORMALIZATION_TOL: f64 = 1e-12;

/// g-function depending only on the first `range` symbols, stored as a table
/// of logarithms indexed by the big-endian code of `x_1 .. x_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantG {
    alphabet: Alphabet,
    range: usize,
    log_table: Vec<f64>,
}

impl LocallyConstantG {
    /// Validated table: every entry in `(0, 1)` and, for every suffix `s` of
    /// length `range - 1`, `sum_a g(a s) = 1`.
    pub fn new(alphabet: Alphabet, range: usize, values: &[f64]) -> Result<Self> {
        let g = Self::unnormalized(alphabet, range, values)?;
        let defect = g.normalization_defect();
        if defect > G_NORMALIZATION_TOL {
            return domain(format!("table is not normalized: sum_a g(a w) misses 1 by {defect:e}"));
        }
        Ok(g)
    }

    /// Shape and positivity checks only; the result may violate the
    /// normalization of a g-function.
    pub fn unnormalized(alphabet: Alphabet, range: usize, values: &[f64]) -> Result<Self> {
        if range == 0 {
            return domain("range must be at least 1");
        }
        let size = capacity::check_words("g table", alphabet.size(), range)?;
        if values.len() != size {
            return domain(format!("range-{range} table needs {size} values, got {}", values.len()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return domain(format!("g value {v} is outside (0, 1)"));
        }
        Ok(Self {
            alphabet,
            range,
            log_table: values.iter().map(|v| v.ln()).collect(),
        })
    }

    fn from_log_table(alphabet: Alphabet, range: usize, log_table: Vec<f64>) -> Self {
        Self {
            alphabet,
            range,
            log_table,
        }
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn log_table(&self) -> &[f64] {
        &self.log_table
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_table.iter().map(|l| l.exp()).collect()
    }

    /// `log g(x)` for any `x` starting with `w`, `w.len() >= range`.
    pub fn log_value(&self, w: &[usize]) -> f64 {
        self.log_table[code_of(self.alphabet.size(), &w[..self.range]) as usize]
    }

    /// Largest `|sum_a g(a s) - 1|` over suffixes `s`.
    pub fn normalization_defect(&self) -> f64 {
        let k = self.alphabet.size();
        let stride = self.log_table.len() / k;
        (0..stride)
            .map(|s| {
                let total = compensated_sum((0..k).map(|a| self.log_table[a * stride + s].exp()));
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// The same function presented with a longer range.
    pub fn lift(&self, range: usize) -> Result<Self> {
        if range < self.range {
            return domain(format!("cannot lift range {} down to {range}", self.range));
        }
        let k = self.alphabet.size();
        let size = capacity::check_words("g table", k, range)?;
        let span = size / self.log_table.len();
        let log_table = (0..size).map(|c| self.log_table[c / span]).collect();
        Ok(Self::from_log_table(self.alphabet.clone(), range, log_table))
    }

    /// Smallest range on which the table is constant up to `tol` in log,
    /// with the values of the first extension kept.
    pub fn reduced(&self, tol: f64) -> Self {
        let k = self.alphabet.size();
        let mut r = self.range;
        while r > 1 {
            let span = capacity::power(k, self.range - r + 1) as usize;
            let flat = self.log_table.chunks(span).all(|chunk| {
                let (lo, hi) = min_max(chunk);
                hi - lo <= tol
            });
            if !flat {
                break;
            }
            r -= 1;
        }
        let span = capacity::power(k, self.range - r) as usize;
        let log_table = self.log_table.iter().step_by(span).copied().collect();
        Self::from_log_table(self.alphabet.clone(), r, log_table)
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

impl GFunction for LocallyConstantG {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn log_interval(&self, w: &[usize]) -> Interval {
        if w.len() >= self.range {
            return Interval::point(self.log_value(w));
        }
        let span = capacity::power(self.alphabet.size(), self.range - w.len()) as usize;
        let lo = code_of(self.alphabet.size(), w) as usize * span;
        let (a, b) = min_max(&self.log_table[lo..lo + span]);
        Interval { lo: a, hi: b }
    }

    fn exact_range(&self) -> Option<usize> {
        Some(self.range)
    }

    fn exact_variation(&self, depth: usize) -> Option<f64> {
        if depth >= self.range {
            return Some(0.0);
        }
        let span = capacity::power(self.alphabet.size(), self.range - depth) as usize;
        Some(
            self.log_table
                .chunks(span)
                .map(|c| {
                    let (lo, hi) = min_max(c);
                    hi - lo
                })
                .fold(0.0, f64::max),
        )
    }
}

/// The block-transition matrix `M(a, b) = g(a b_l)` on `A^l` (nonzero only
/// when `a_2..a_l = b_1..b_{l-1}`), with `l = max(range - 1, 1)`. Column `b`
/// sums to 1 by the normalization of `g`. Returns the matrix and `l`.
pub fn transfer_matrix(g: &LocallyConstantG) -> Result<(ColumnStochasticMatrix, usize)> {
    let order = g.range().saturating_sub(1).max(1);
    let g = g.lift(order + 1)?;
    let k = g.alphabet().size();
    let states = capacity::check_words("transfer matrix", k, order)?;
    let lead = states / k;
    let mut triplets = Vec::with_capacity(states * k);
    for b in 0..states {
        for a1 in 0..k {
            let row = a1 * lead + b / k;
            triplets.push((row, b, g.log_table()[a1 * states + b].exp()));
        }
    }
    Ok((ColumnStochasticMatrix::from_triplets(states, triplets)?, order))
}

/// The unique stationary Markov measure compatible with a locally constant
/// `g` of range `r`, of order `max(r - 1, 1)`.
///
/// Its block distribution is the Perron vector of [`transfer_matrix`]; the
/// forward kernel follows from `mu[c b] = g(c b) mu[c_2 .. c_l b]`.
pub fn g_to_markov(g: &LocallyConstantG, tol: f64) -> Result<MarkovMeasure> {
    let (m, order) = transfer_matrix(g)?;
    let lifted = g.lift(order + 1)?;
    let k = g.alphabet().size();
    let states = m.dim();
    let contraction = if states > DENSE_LIMIT {
        // Cross-ratios of M^l are bounded below by exp(-2 svar_l), which caps
        // Birkhoff's coefficient at tanh(svar_l / 2).
        let s = svar(&lifted, order)?.value;
        Some(Contraction {
            tau: (0.5 * s).tanh(),
            block: order,
        })
    } else {
        None
    };
    let opts = PfOptions {
        tol,
        contraction,
        primitivity_index: Some(order),
        ..PfOptions::default()
    };
    let v = pf_stationary(&m, &opts)?.eigenvector;
    let block_log: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let mut kernel_log = Vec::with_capacity(states * k);
    let mut row = vec![0.0; k];
    for c in 0..states {
        for (b, slot) in row.iter_mut().enumerate() {
            let w = c * k + b;
            *slot = lifted.log_table()[w] + block_log[w % states];
        }
        let z = log_sum_exp(&row);
        kernel_log.extend(row.iter().map(|x| x - z));
    }
    MarkovMeasure::from_log_parts(g.alphabet().clone(), order, block_log, kernel_log)
}

/// `g_mu(x) = mu[x_1 .. x_{l+1}] / mu[x_2 .. x_{l+1}]` for a stationary
/// `l`-step Markov measure; range `l + 1`.
pub fn markov_to_g(m: &MarkovMeasure) -> Result<LocallyConstantG> {
    if !m.is_stationary() {
        return domain("markov_to_g needs a stationary measure");
    }
    let k = m.alphabet().size();
    let states = m.block_log().len();
    let joint: Vec<f64> = (0..states * k)
        .map(|w| m.block_log()[w / k] + m.kernel_log()[w])
        .collect();
    let mut log_table = vec![0.0; states * k];
    let mut column = vec![0.0; k];
    for s in 0..states {
        for (a, slot) in column.iter_mut().enumerate() {
            *slot = joint[a * states + s];
        }
        let z = log_sum_exp(&column);
        for a in 0..k {
            log_table[a * states + s] = column[a] - z;
        }
    }
    Ok(LocallyConstantG::from_log_table(
        m.alphabet().clone(),
        m.order() + 1,
        log_table,
    ))
}

/// Canonical `l`-step Markov approximation: same masses as `src` on words
/// of length `l + 1`, Markov beyond.
pub fn canonical_approximation(src: &dyn CylinderOracle, order: usize) -> Result<MarkovMeasure> {
    if order == 0 {
        return domain("approximation order must be at least 1");
    }
    let k = src.alphabet_size();
    let blocks = src.log_masses(order)?;
    let joint = src.log_masses(order + 1)?;
    let z = log_sum_exp(&blocks);
    let block_log = blocks.iter().map(|b| b - z).collect();
    let mut kernel_log = Vec::with_capacity(joint.len());
    for row in joint.chunks(k) {
        let z = log_sum_exp(row);
        kernel_log.extend(row.iter().map(|x| x - z));
    }
    MarkovMeasure::from_log_parts(src.symbols(), order, block_log, kernel_log)
}
