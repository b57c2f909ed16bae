//! The non-separability family `nu_x` on `{0,1}^N`, its lifts `mu_x` to larger
//! alphabets, and the flip/permutation coupling between family members.
//!
//! For a fixed binary sequence `x` and `alpha > 1`, `nu_x` gives the prefix
//! `x_1..x_n` mass `(alpha / (1 + alpha))^n`. Any other word `a` of length
//! `n` that agrees with `x` on exactly its first `q - 1` symbols gets mass
//! `alpha^(q-1) (1 + alpha)^(-q) 2^(q - n)`.

use num_rational::Ratio;

use crate::error::{domain, Result};
use crate::measures::CylinderOracle;
use crate::symbolic::Alphabet;

/// Eventually periodic binary sequence `x_1 x_2 ...`: an explicit prefix
/// followed by a repeated period.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequenceRule {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl SequenceRule {
    pub fn new(prefix: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return domain("sequence period must be non-empty");
        }
        if prefix.iter().chain(&period).any(|&s| s > 1) {
            return domain("sequence symbols must be 0 or 1");
        }
        Ok(Self { prefix, period })
    }

    pub fn constant(symbol: u8) -> Result<Self> {
        Self::new(Vec::new(), vec![symbol])
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// Symbol at 1-based position `k`.
    pub fn at(&self, k: usize) -> u8 {
        assert!(k >= 1, "positions are 1-based");
        let i = k - 1;
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<u8> {
        (1..=n).map(|k| self.at(k)).collect()
    }

    /// 1-based index of the first disagreement, or `None` if the sequences
    /// are equal.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let horizon = self.prefix.len().max(other.prefix.len())
            + lcm(self.period.len(), other.period.len());
        (1..=horizon).find(|&k| self.at(k) != other.at(k))
    }

    /// Length of the longest common prefix of the sequence with `w`.
    pub fn common_prefix_len(&self, w: &[usize]) -> usize {
        w.iter()
            .enumerate()
            .take_while(|(i, &s)| s == self.at(i + 1) as usize)
            .count()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Complements `x` at positions `1, p + 1, 2p + 1, ...`.
pub fn flip_sequence(x: &SequenceRule, p: usize) -> Result<SequenceRule> {
    if p == 0 {
        return domain("flip period p must be at least 1");
    }
    let flipped = |k: usize| {
        let s = x.at(k);
        if (k - 1).is_multiple_of(p) {
            1 - s
        } else {
            s
        }
    };
    let start = x.prefix.len();
    let period_len = lcm(x.period.len(), p);
    // Align the tail so that both the flip pattern and x's period restart together.
    let prefix: Vec<u8> = (1..=start).map(flipped).collect();
    let period: Vec<u8> = (start + 1..=start + period_len).map(flipped).collect();
    SequenceRule::new(prefix, period)
}

/// Density `#({1..n} ∩ (pN + 1)) / n` of coordinates where the flip coupling
/// disagrees, as an exact rational.
pub fn tau_coupling_disagreement(p: usize, n: usize) -> Result<Ratio<u64>> {
    if p == 0 || n == 0 {
        return domain("p and n must be positive");
    }
    let hits = (n - 1) / p + 1;
    Ok(Ratio::new(hits as u64, n as u64))
}

/// The binary measure `nu_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityMeasure {
    x: SequenceRule,
    alpha: f64,
}

impl SeparabilityMeasure {
    pub fn new(x: SequenceRule, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return domain(format!("alpha must exceed 1, got {alpha}"));
        }
        Ok(Self { x, alpha })
    }

    pub fn sequence(&self) -> &SequenceRule {
        &self.x
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Log-mass of a length-`n` word whose longest common prefix with `x` has
    /// length `agree` (`agree == n` means the word is `x_1..x_n`).
    pub fn log_mass_by_agreement(&self, n: usize, agree: usize) -> f64 {
        let a = self.alpha;
        let la = a.ln();
        let l1a = a.ln_1p();
        if agree >= n {
            n as f64 * (la - l1a)
        } else {
            let q = (agree + 1) as f64;
            (q - 1.0) * la - q * l1a + (q - n as f64) * std::f64::consts::LN_2
        }
    }
}

/// `alpha` for which two family members whose sequences differ at the first
/// position separate at per-symbol rate `rate` along the prefix of one of
/// them, i.e. `log(2 alpha / (1 + alpha)) = rate`. Requires `0 < rate < log 2`.
pub fn alpha_for_separation(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < std::f64::consts::LN_2) {
        return domain("separation rate must lie in (0, log 2)");
    }
    let e = rate.exp();
    Ok(e / (2.0 - e))
}

impl CylinderOracle for SeparabilityMeasure {
    fn alphabet_size(&self) -> usize {
        2
    }

    fn log_mass(&self, w: &[usize]) -> f64 {
        let agree = self.x.common_prefix_len(w);
        self.log_mass_by_agreement(w.len(), agree)
    }

    fn is_stationary(&self) -> bool {
        false
    }
}

/// `(1/n) |log(nu_x[x_1^n] / nu_y[x_1^n])|`, the per-symbol separation of two
/// family members along the prefix of `x`.
pub fn prefix_separation(x: &SeparabilityMeasure, y: &SeparabilityMeasure, n: usize) -> f64 {
    let prefix: Vec<usize> = x.x.take(n).into_iter().map(usize::from).collect();
    (x.log_mass(&prefix) - y.log_mass(&prefix)).abs() / n as f64
}

/// Exact truncated projective distance `max_{n <= depth} max_{a in {0,1}^n}
/// (1/n)|log(nu_x[a]/nu_y[a])|` between two family members.
///
/// Masses depend only on the common-prefix lengths of `a` with `x` and with
/// `y`, so the maximum runs over the realizable agreement pairs instead of all
/// `2^n` words.
pub fn truncated_projective_family(
    x: &SeparabilityMeasure,
    y: &SeparabilityMeasure,
    depth: usize,
) -> f64 {
    let split = x.x.first_difference(&y.x);
    let mut best: f64 = 0.0;
    for n in 1..=depth {
        let mut consider = |kx: usize, ky: usize| {
            let r = (x.log_mass_by_agreement(n, kx) - y.log_mass_by_agreement(n, ky)).abs();
            best = best.max(r / n as f64);
        };
        match split {
            Some(m) if m <= n => {
                let d = m - 1;
                for k in 0..d {
                    consider(k, k);
                }
                for k in d + 1..=n {
                    consider(k, d);
                    consider(d, k);
                }
            }
            _ => {
                for k in 0..=n {
                    consider(k, k);
                }
            }
        }
    }
    best
}

/// `mu_x[a] = nu_x[pi(a)] / prod_k #pi^-1(pi(a_k))` for a surjection
/// `pi: A -> {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMeasure {
    base: SeparabilityMeasure,
    alphabet: Alphabet,
    projection: Vec<u8>,
    class_log_size: [f64; 2],
}

impl InducedMeasure {
    pub fn new(base: SeparabilityMeasure, alphabet: Alphabet, projection: Vec<u8>) -> Result<Self> {
        if projection.len() != alphabet.size() {
            return domain("projection must assign a class to every symbol");
        }
        if projection.iter().any(|&c| c > 1) {
            return domain("projection classes must be 0 or 1");
        }
        let counts = [0u8, 1].map(|c| projection.iter().filter(|&&p| p == c).count());
        if counts.contains(&0) {
            return domain("projection must be surjective onto {0, 1}");
        }
        Ok(Self {
            base,
            alphabet,
            projection,
            class_log_size: counts.map(|c| (c as f64).ln()),
        })
    }

    pub fn base(&self) -> &SeparabilityMeasure {
        &self.base
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn projection(&self) -> &[u8] {
        &self.projection
    }

    pub fn project(&self, w: &[usize]) -> Vec<usize> {
        w.iter().map(|&s| self.projection[s] as usize).collect()
    }

    /// Same projection and alphabet, base sequence replaced.
    pub fn with_sequence(&self, x: SequenceRule) -> Result<Self> {
        Self::new(
            SeparabilityMeasure::new(x, self.base.alpha)?,
            self.alphabet.clone(),
            self.projection.clone(),
        )
    }

    /// A permutation `tau` of the alphabet with `pi(tau(a)) = 1 - pi(a)`.
    /// Exists only when both classes have the same size.
    pub fn class_swap(&self) -> Result<Vec<usize>> {
        let class = |c: u8| -> Vec<usize> {
            (0..self.projection.len())
                .filter(|&s| self.projection[s] == c)
                .collect()
        };
        let (zeros, ones) = (class(0), class(1));
        if zeros.len() != ones.len() {
            return domain("class swap needs #pi^-1(0) = #pi^-1(1)");
        }
        let mut tau = vec![0; self.projection.len()];
        for (&z, &o) in zeros.iter().zip(&ones) {
            tau[z] = o;
            tau[o] = z;
        }
        Ok(tau)
    }
}

/// Applies `tau` at positions `1, p + 1, 2p + 1, ...` of `w`.
pub fn tau_p_word(tau: &[usize], p: usize, w: &[usize]) -> Vec<usize> {
    w.iter()
        .enumerate()
        .map(|(i, &s)| if i % p == 0 { tau[s] } else { s })
        .collect()
}

impl CylinderOracle for InducedMeasure {
    fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    fn symbols(&self) -> Alphabet {
        self.alphabet.clone()
    }

    fn log_mass(&self, w: &[usize]) -> f64 {
        let projected = self.project(w);
        let correction: f64 = projected.iter().map(|&c| self.class_log_size[c]).sum();
        self.base.log_mass(&projected) - correction
    }

    fn is_stationary(&self) -> bool {
        false
    }
}

/// Exact truncated projective distance between two induced measures sharing
/// alphabet and projection; equals the distance between their bases.
pub fn truncated_projective_induced(x: &InducedMeasure, y: &InducedMeasure, depth: usize) -> Result<f64> {
    if x.alphabet != y.alphabet || x.projection != y.projection {
        return domain("induced measures must share alphabet and projection");
    }
    Ok(truncated_projective_family(&x.base, &y.base, depth))
}
