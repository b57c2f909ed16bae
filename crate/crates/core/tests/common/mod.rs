#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftmetrics::gfun::LocallyConstantG;
use shiftmetrics::{Alphabet, MarkovMeasure};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row with entries bounded away from 0, normalized.
pub fn random_row(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

pub fn random_kernel(k: usize, order: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..k.pow(order as u32)).map(|_| random_row(k, rng)).collect()
}

pub fn random_chain(k: usize, order: usize, rng: &mut ChaCha8Rng) -> MarkovMeasure {
    let kernel = random_kernel(k, order, rng);
    MarkovMeasure::stationary_from_kernel(Alphabet::numeric(k).unwrap(), order, &kernel).unwrap()
}

/// Stationary chain whose kernel entries differ from `m`'s by factors within `e^{+-delta}`
/// before renormalization.
pub fn perturbed(m: &MarkovMeasure, delta: f64, rng: &mut ChaCha8Rng) -> MarkovMeasure {
    let kernel: Vec<Vec<f64>> = m
        .kernel_rows()
        .into_iter()
        .map(|row| {
            let raw: Vec<f64> = row.iter().map(|p| p * rng.gen_range(-delta..=delta).exp()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        })
        .collect();
    MarkovMeasure::stationary_from_kernel(m.alphabet().clone(), m.order(), &kernel).unwrap()
}

/// Normalized g-table of the given range: `values[a k^{r-1} + s]` summed over
/// `a` is 1 for every `s`.
pub fn random_g(k: usize, range: usize, rng: &mut ChaCha8Rng) -> LocallyConstantG {
    let tail = k.pow(range as u32 - 1);
    let mut values = vec![0.0; k * tail];
    for s in 0..tail {
        let row = random_row(k, rng);
        for (a, p) in row.into_iter().enumerate() {
            values[a * tail + s] = p;
        }
    }
    LocallyConstantG::new(Alphabet::numeric(k).unwrap(), range, &values).unwrap()
}

/// `max_{n <= depth} max_{|w| = n} (1/n) |log(mu[w] / nu[w])|` for two
/// order-1 chains, by a max/min-plus recursion over the last symbol built
/// from the probability tables.
pub fn sup_oracle(a: &MarkovMeasure, b: &MarkovMeasure, depth: usize) -> f64 {
    assert_eq!(a.order(), 1);
    assert_eq!(b.order(), 1);
    let (pa, pb) = (a.block_probs(), b.block_probs());
    let (ka, kb) = (a.kernel_rows(), b.kernel_rows());
    let k = pa.len();
    let mut hi: Vec<f64> = (0..k).map(|s| (pa[s] / pb[s]).ln()).collect();
    let mut lo = hi.clone();
    let mut best = 0.0f64;
    for n in 1..=depth {
        for s in 0..k {
            best = best.max(hi[s] / n as f64).max(-lo[s] / n as f64);
        }
        let step = |t: usize, s: usize| (ka[s][t] / kb[s][t]).ln();
        let next_hi: Vec<f64> = (0..k).map(|t| (0..k).map(|s| hi[s] + step(t, s)).fold(f64::NEG_INFINITY, f64::max)).collect();
        let next_lo: Vec<f64> = (0..k).map(|t| (0..k).map(|s| lo[s] + step(t, s)).fold(f64::INFINITY, f64::min)).collect();
        hi = next_hi;
        lo = next_lo;
    }
    best
}
