//! Bounds on Ornstein's `d-bar` distance.
//!
//! Upper bounds come from explicit Markovian couplings. On the product of
//! two `L`-block state spaces a coupling is a policy choosing, in every state
//! `(c1, c2)`, a joint law of the next pair of symbols with marginals
//! `p1(.|c1)` and `p2(.|c2)`. Relative value iteration drives the bias `h`
//! towards the average-cost optimality equation; for the greedy policy of
//! any `h`, the long-run disagreement density from any starting state is at
//! most `max_s (Th - h)(s)`, which is what gets reported.

use serde::Serialize;

use crate::capacity;
use crate::distances::transport::transport_min;
use crate::distances::{same_alphabet, Enclosure};
use crate::error::{domain, Result};
use crate::measures::{CylinderOracle, MarkovMeasure};
use crate::numeric::CompensatedSum;

/// Product-state cap for the coupling optimizer.
pub const COUPLING_STATE_LIMIT: usize = 1 << 14;

const MAX_ITERATIONS: usize = 20_000;
const SPAN_TOL: f64 = 1e-13;
/// Weight of the new iterate; values below 1 break periodic oscillations.
const DAMPING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingBound {
    /// Disagreement density of an explicit coupling: an upper bound on `d-bar`.
    pub upper: f64,
    /// `min_s (Th - h)(s)`: a lower bound on the best Markovian coupling, not
    /// on `d-bar` itself.
    pub markov_lower: f64,
    pub iterations: usize,
    pub converged: bool,
    pub states: usize,
}

impl CouplingBound {
    pub fn enclosure(&self) -> Enclosure {
        let mut e = Enclosure::new(0.0, self.upper, "markov-coupling");
        e.iterations = Some(self.iterations);
        e.converged = self.converged;
        e
    }
}

/// Upper bound on `d-bar` between two stationary Markov measures from the
/// best Markovian coupling found by relative value iteration.
pub fn dbar_upper_markov(m1: &MarkovMeasure, m2: &MarkovMeasure) -> Result<CouplingBound> {
    if !(m1.is_stationary() && m2.is_stationary()) {
        return domain("the coupling bound needs stationary measures");
    }
    let (a, b) = MarkovMeasure::common_order(m1, m2)?;
    let k = a.alphabet().size();
    let blocks = a.block_log().len();
    let states = capacity::check("coupling product states", (blocks as u128) * (blocks as u128))?;
    if states > COUPLING_STATE_LIMIT {
        return Err(crate::error::Error::Capacity {
            what: "coupling product states".into(),
            requested: states as u128,
            limit: COUPLING_STATE_LIMIT as u64,
        });
    }
    let (p1, p2) = (a.kernel_rows(), b.kernel_rows());
    let mut h = vec![0.0; states];
    let mut th = vec![0.0; states];
    let mut cost = vec![0.0; k * k];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        bellman(&p1, &p2, k, blocks, &h, &mut cost, &mut th);
        let (lo, hi) = span(&th, &h);
        iterations += 1;
        if hi - lo <= SPAN_TOL || iterations >= MAX_ITERATIONS {
            converged = converged || hi - lo <= SPAN_TOL;
            return Ok(CouplingBound {
                upper: hi.max(0.0),
                markov_lower: lo.max(0.0),
                iterations,
                converged,
                states,
            });
        }
        let anchor = th[0];
        for (x, t) in h.iter_mut().zip(&th) {
            *x = (1.0 - DAMPING) * *x + DAMPING * (t - anchor);
        }
    }
}

/// `(Th)(c1, c2) = min over couplings of sum pi(b1, b2) (1[b1 != b2] + h(next))`.
fn bellman(p1: &[Vec<f64>], p2: &[Vec<f64>], k: usize, blocks: usize, h: &[f64], cost: &mut [f64], out: &mut [f64]) {
    for c1 in 0..blocks {
        for c2 in 0..blocks {
            for b1 in 0..k {
                let n1 = (c1 * k + b1) % blocks;
                for b2 in 0..k {
                    let n2 = (c2 * k + b2) % blocks;
                    cost[b1 * k + b2] = f64::from(u8::from(b1 != b2)) + h[n1 * blocks + n2];
                }
            }
            out[c1 * blocks + c2] = transport_min(&p1[c1], &p2[c2], cost).cost;
        }
    }
}

fn span(th: &[f64], h: &[f64]) -> (f64, f64) {
    th.iter()
        .zip(h)
        .map(|(t, x)| t - x)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)))
}

/// `TV_m / m` with `TV_m = (1/2) sum_{|w| = m} |mu[w] - nu[w]|`.
///
/// Any coupling disagrees somewhere in an `m`-block with probability at
/// least `TV_m`; for stationary inputs every block has the same marginals,
/// so the disagreement density is at least `TV_m / m`.
pub fn dbar_lower_blocks(a: &dyn CylinderOracle, b: &dyn CylinderOracle, m: usize) -> Result<f64> {
    if m == 0 {
        return domain("block length must be at least 1");
    }
    same_alphabet(a, b)?;
    if !(a.is_stationary() && b.is_stationary()) {
        return domain("the block lower bound needs stationary measures");
    }
    let (la, lb) = (a.log_masses(m)?, b.log_masses(m)?);
    let tv: CompensatedSum = la.iter().zip(&lb).map(|(x, y)| 0.5 * (x.exp() - y.exp()).abs()).collect();
    Ok(tv.value() / m as f64)
}
