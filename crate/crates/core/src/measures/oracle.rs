use crate::capacity;
use crate::error::Result;
use crate::symbolic::{digits_into, Alphabet};

/// Uniform read access to the cylinder masses of a fully supported measure.
///
/// Masses are exchanged in the log domain. `log_masses` returns the whole
/// level `A^n` indexed by cylinder code; implementors with structure (Markov
/// measures) override it with a forward recursion.
pub trait CylinderOracle {
    fn alphabet_size(&self) -> usize;

    /// Symbol labels; numeric by default.
    fn symbols(&self) -> Alphabet {
        Alphabet::numeric(self.alphabet_size()).expect("oracle alphabets have at least two symbols")
    }

    /// `log mu[w]` for a word given as symbol indices. `w` may be empty
    /// (mass 1).
    fn log_mass(&self, w: &[usize]) -> f64;

    /// Whether the measure is shift-invariant.
    fn is_stationary(&self) -> bool;

    /// All log-masses of words of length `n`, in code order.
    fn log_masses(&self, n: usize) -> Result<Vec<f64>> {
        let k = self.alphabet_size();
        let count = capacity::check_words("cylinder level", k, n)?;
        let mut buf = vec![0usize; n];
        Ok((0..count as u64)
            .map(|code| {
                digits_into(k, code, &mut buf);
                self.log_mass(&buf)
            })
            .collect())
    }
}

impl<T: CylinderOracle + ?Sized> CylinderOracle for &T {
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }
    fn symbols(&self) -> Alphabet {
        (**self).symbols()
    }
    fn log_mass(&self, w: &[usize]) -> f64 {
        (**self).log_mass(w)
    }
    fn is_stationary(&self) -> bool {
        (**self).is_stationary()
    }
    fn log_masses(&self, n: usize) -> Result<Vec<f64>> {
        (**self).log_masses(n)
    }
}

/// Largest `|sum_b mu[wb] - mu[w]|` over all words of length `< depth`.
pub fn marginal_defect(oracle: &dyn CylinderOracle, depth: usize) -> Result<f64> {
    let k = oracle.alphabet_size();
    let mut worst: f64 = 0.0;
    let mut parent = vec![0.0f64];
    for n in 1..=depth {
        let level = oracle.log_masses(n)?;
        for (code, lp) in parent.iter().enumerate() {
            let children: f64 = crate::numeric::compensated_sum(
                level[code * k..(code + 1) * k].iter().map(|l| l.exp()),
            );
            worst = worst.max((children - lp.exp()).abs());
        }
        parent = level;
    }
    Ok(worst)
}
