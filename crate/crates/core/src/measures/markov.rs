use crate::capacity;
use crate::error::{domain, Result};
use crate::measures::CylinderOracle;
use crate::numeric::{compensated_sum, log_sum_exp};
use crate::spectral::{pf_stationary, ColumnStochasticMatrix, PfOptions};
use crate::symbolic::{code_of, Alphabet};

/// Tolerance on probability sums accepted at construction.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance of the shift-invariance check behind [`MarkovMeasure::is_stationary`].
pub const STATIONARITY_TOL: f64 = 1e-10;

/// Fully supported `order`-step Markov measure on `A^N`.
///
/// The first `order` symbols are drawn from the block distribution; each
/// further symbol is drawn from the kernel given the preceding `order`
/// symbols. Block and kernel tables are indexed by big-endian cylinder code;
/// the kernel entry for block `c` and next symbol `b` lives at `c * k + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    alphabet: Alphabet,
    order: usize,
    block_log: Vec<f64>,
    kernel_log: Vec<f64>,
    stationary: bool,
}

impl MarkovMeasure {
    /// Builds a measure from probabilities. `kernel[c][b]` is the probability
    /// of `b` after the block with code `c`.
    pub fn new(
        alphabet: Alphabet,
        order: usize,
        block_dist: &[f64],
        kernel: &[Vec<f64>],
    ) -> Result<Self> {
        let k = alphabet.size();
        if kernel.iter().any(|row| row.len() != k) {
            return domain(format!("every kernel row must have {k} entries"));
        }
        let flat: Vec<f64> = kernel.iter().flatten().copied().collect();
        Self::from_probs(alphabet, order, block_dist, &flat)
    }

    fn from_probs(alphabet: Alphabet, order: usize, block: &[f64], kernel: &[f64]) -> Result<Self> {
        for (what, values) in [("block distribution", block), ("kernel", kernel)] {
            if let Some(bad) = values.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return domain(format!(
                    "{what} entry {bad} is not a positive probability (full support is required)"
                ));
            }
        }
        Self::from_log_parts(
            alphabet,
            order,
            block.iter().map(|p| p.ln()).collect(),
            kernel.iter().map(|p| p.ln()).collect(),
        )
    }

    /// Builds a measure from log-probability tables, validating shapes and
    /// normalization and computing the stationarity flag.
    pub fn from_log_parts(
        alphabet: Alphabet,
        order: usize,
        block_log: Vec<f64>,
        kernel_log: Vec<f64>,
    ) -> Result<Self> {
        if order == 0 {
            return domain("Markov order must be at least 1");
        }
        let k = alphabet.size();
        let blocks = capacity::check_words("Markov kernel", k, order + 1)? / k;
        if block_log.len() != blocks {
            return domain(format!(
                "block distribution has {} entries, expected {blocks}",
                block_log.len()
            ));
        }
        if kernel_log.len() != blocks * k {
            return domain(format!(
                "kernel has {} entries, expected {}",
                kernel_log.len(),
                blocks * k
            ));
        }
        if let Some(bad) = block_log.iter().chain(&kernel_log).find(|l| !l.is_finite()) {
            return domain(format!(
                "log-probability {bad} is not finite (full support is required)"
            ));
        }
        let total = compensated_sum(block_log.iter().map(|l| l.exp()));
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return domain(format!("block distribution sums to {total}, not 1"));
        }
        for (c, row) in kernel_log.chunks(k).enumerate() {
            let s = compensated_sum(row.iter().map(|l| l.exp()));
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return domain(format!("kernel row {c} sums to {s}, not 1"));
            }
        }
        let mut m = Self {
            alphabet,
            order,
            block_log,
            kernel_log,
            stationary: false,
        };
        m.stationary = m.stationarity_defect() <= STATIONARITY_TOL;
        Ok(m)
    }

    /// I.i.d. product measure, represented with order 1.
    pub fn iid(alphabet: Alphabet, probs: &[f64]) -> Result<Self> {
        let k = alphabet.size();
        if probs.len() != k {
            return domain(format!("expected {k} symbol probabilities"));
        }
        let kernel: Vec<f64> = (0..k).flat_map(|_| probs.iter().copied()).collect();
        Self::from_probs(alphabet, 1, probs, &kernel)
    }

    /// Bernoulli measure on `{0, 1}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::iid(Alphabet::numeric(2)?, &[1.0 - p, p])
    }

    /// Stationary measure of a kernel; the block distribution is the Perron
    /// vector of the block-transition matrix.
    pub fn stationary_from_kernel(alphabet: Alphabet, order: usize, kernel: &[Vec<f64>]) -> Result<Self> {
        let k = alphabet.size();
        if order == 0 {
            return domain("Markov order must be at least 1");
        }
        let blocks = capacity::check_words("Markov kernel", k, order + 1)? / k;
        if kernel.len() != blocks || kernel.iter().any(|r| r.len() != k) {
            return domain(format!("kernel must be {blocks} rows of {k} entries"));
        }
        let flat: Vec<f64> = kernel.iter().flatten().copied().collect();
        if let Some(bad) = flat.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return domain(format!("kernel entry {bad} is not a positive probability"));
        }
        let block = stationary_blocks(k, order, &flat)?;
        Self::from_probs(alphabet, order, &block, &flat)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn block_log(&self) -> &[f64] {
        &self.block_log
    }

    pub fn kernel_log(&self) -> &[f64] {
        &self.kernel_log
    }

    /// `log p(b | block)` where `block` is a code over `A^order`.
    pub fn kernel_log_at(&self, block: usize, b: usize) -> f64 {
        self.kernel_log[block * self.alphabet.size() + b]
    }

    pub fn block_probs(&self) -> Vec<f64> {
        self.block_log.iter().map(|l| l.exp()).collect()
    }

    pub fn kernel_rows(&self) -> Vec<Vec<f64>> {
        self.kernel_log
            .chunks(self.alphabet.size())
            .map(|r| r.iter().map(|l| l.exp()).collect())
            .collect()
    }

    /// Largest deviation of the block distribution from its image under one
    /// step of the chain.
    pub fn stationarity_defect(&self) -> f64 {
        let k = self.alphabet.size();
        let blocks = self.block_log.len();
        let stride = blocks / k;
        let mut worst: f64 = 0.0;
        for d in 0..blocks {
            let tail = d / k;
            let b = d % k;
            let pushed = compensated_sum((0..k).map(|c1| {
                let c = c1 * stride + tail;
                (self.block_log[c] + self.kernel_log[c * k + b]).exp()
            }));
            worst = worst.max((pushed - self.block_log[d].exp()).abs());
        }
        worst
    }

    /// Same measure presented as an `order`-step chain with `order >= self.order()`.
    pub fn lift_order(&self, order: usize) -> Result<Self> {
        if order < self.order {
            return domain(format!(
                "cannot lift an order-{} measure down to order {order}",
                self.order
            ));
        }
        if order == self.order {
            return Ok(self.clone());
        }
        let k = self.alphabet.size();
        let blocks = capacity::check_words("lifted Markov kernel", k, order + 1)? / k;
        let block_log = self.log_masses(order)?;
        let own_blocks = self.block_log.len();
        let mut kernel_log = Vec::with_capacity(blocks * k);
        for c in 0..blocks {
            let suffix = c % own_blocks;
            kernel_log.extend_from_slice(&self.kernel_log[suffix * k..(suffix + 1) * k]);
        }
        Ok(Self {
            alphabet: self.alphabet.clone(),
            order,
            block_log,
            kernel_log,
            stationary: self.stationary,
        })
    }

    /// Measures over the same alphabet lifted to their common order.
    pub fn common_order(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if a.alphabet != b.alphabet {
            return domain("measures live on different alphabets");
        }
        let order = a.order.max(b.order);
        Ok((a.lift_order(order)?, b.lift_order(order)?))
    }
}

impl CylinderOracle for MarkovMeasure {
    fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    fn symbols(&self) -> Alphabet {
        self.alphabet.clone()
    }

    fn log_mass(&self, w: &[usize]) -> f64 {
        let k = self.alphabet.size();
        let n = w.len();
        if n == 0 {
            return 0.0;
        }
        if n <= self.order {
            let span = capacity::power(k, self.order - n) as usize;
            let lo = code_of(k, w) as usize * span;
            return log_sum_exp(&self.block_log[lo..lo + span]);
        }
        let blocks = self.block_log.len();
        let mut state = code_of(k, &w[..self.order]) as usize;
        let mut acc = self.block_log[state];
        for &b in &w[self.order..] {
            acc += self.kernel_log[state * k + b];
            state = (state * k + b) % blocks;
        }
        acc
    }

    fn is_stationary(&self) -> bool {
        self.stationary
    }

    fn log_masses(&self, n: usize) -> Result<Vec<f64>> {
        let k = self.alphabet.size();
        let count = capacity::check_words("cylinder level", k, n)?;
        if n <= self.order {
            let span = self.block_log.len() / count;
            return Ok(self.block_log.chunks(span).map(log_sum_exp).collect());
        }
        let blocks = self.block_log.len();
        let mut level = self.block_log.clone();
        for _ in self.order..n {
            let mut next = Vec::with_capacity(level.len() * k);
            for (code, &lp) in level.iter().enumerate() {
                let state = code % blocks;
                for b in 0..k {
                    next.push(lp + self.kernel_log[state * k + b]);
                }
            }
            level = next;
        }
        Ok(level)
    }
}

/// Stationary block distribution for a flat kernel table.
fn stationary_blocks(k: usize, order: usize, kernel: &[f64]) -> Result<Vec<f64>> {
    let blocks = kernel.len() / k;
    // Column c of the block-transition matrix carries the k moves out of block c.
    let mut triplets = Vec::with_capacity(kernel.len());
    for c in 0..blocks {
        for b in 0..k {
            triplets.push(((c * k + b) % blocks, c, kernel[c * k + b]));
        }
    }
    let m = ColumnStochasticMatrix::from_triplets(blocks, triplets)?;
    let opts = PfOptions {
        primitivity_index: Some(order),
        ..PfOptions::default()
    };
    Ok(pf_stationary(&m, &opts)?.eigenvector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::enumerate_words;

    fn sticky(p_same: f64) -> MarkovMeasure {
        MarkovMeasure::new(
            Alphabet::numeric(2).unwrap(),
            1,
            &[0.5, 0.5],
            &[vec![p_same, 1.0 - p_same], vec![1.0 - p_same, p_same]],
        )
        .unwrap()
    }

    #[test]
    fn iid_uniform_mass() {
        let m = MarkovMeasure::bernoulli(0.5).unwrap();
        assert!((m.log_mass(&[1, 0, 1]) - (1.0f64 / 8.0).ln()).abs() < 1e-15);
        assert!(m.is_stationary());
    }

    #[test]
    fn sticky_chain_mass() {
        let m = sticky(0.9);
        assert!((m.log_mass(&[0, 0, 0]) - 0.405f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn order_two_marginal_matches_brute_force() {
        let a = Alphabet::numeric(2).unwrap();
        let block = [0.1, 0.2, 0.3, 0.4];
        let kernel = vec![
            vec![0.5, 0.5],
            vec![0.2, 0.8],
            vec![0.7, 0.3],
            vec![0.4, 0.6],
        ];
        let m = MarkovMeasure::new(a, 2, &block, &kernel).unwrap();
        // brute force: marginalize the second symbol by hand
        let p0 = block[0] + block[1];
        assert!((m.log_mass(&[0]).exp() - p0).abs() < 1e-15);
        assert!((m.log_mass(&[1]).exp() - (block[2] + block[3])).abs() < 1e-15);
        assert!(!m.is_stationary());
        let l3 = m.log_masses(3).unwrap();
        assert!((l3[0b011].exp() - 0.2 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_and_unnormalized() {
        let a = Alphabet::numeric(2).unwrap();
        assert!(MarkovMeasure::new(a.clone(), 1, &[1.0, 0.0], &[vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovMeasure::new(a.clone(), 1, &[0.5, 0.5], &[vec![0.6, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovMeasure::new(a, 0, &[0.5, 0.5], &[vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn lift_preserves_masses() {
        let ber = MarkovMeasure::bernoulli(0.3).unwrap();
        let lifted = ber.lift_order(2).unwrap();
        assert_eq!(lifted.order(), 2);
        for n in 1..=6 {
            for w in enumerate_words(ber.alphabet(), n).unwrap() {
                let d = ber.log_mass(w.symbols()) - lifted.log_mass(w.symbols());
                assert!(d.abs() < 1e-14, "{w}");
            }
        }
        assert_eq!(ber.lift_order(1).unwrap(), ber);
        assert!(lifted.lift_order(1).is_err());
    }

    #[test]
    fn stationary_from_kernel_solves_two_state_chain() {
        // pi_0 = q / (p + q) for P(0->1) = p, P(1->0) = q
        let (p, q) = (0.2, 0.6);
        let m = MarkovMeasure::stationary_from_kernel(
            Alphabet::numeric(2).unwrap(),
            1,
            &[vec![1.0 - p, p], vec![q, 1.0 - q]],
        )
        .unwrap();
        assert!(m.is_stationary());
        assert!((m.block_probs()[0] - q / (p + q)).abs() < 1e-13);
    }

    #[test]
    fn marginal_consistency_exhaustive() {
        let m = MarkovMeasure::stationary_from_kernel(
            Alphabet::numeric(3).unwrap(),
            2,
            &(0..9)
                .map(|c| {
                    let w = [1.0 + c as f64, 2.0, 0.5 + (c % 3) as f64];
                    let s: f64 = w.iter().sum();
                    w.iter().map(|x| x / s).collect()
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(crate::measures::marginal_defect(&m, 10).unwrap() < 1e-12);
    }
}
