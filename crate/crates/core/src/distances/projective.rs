//! Projective distance `rho(mu, nu) = sup_n max_{|a| = n} (1/n) |log(mu[a] / nu[a])|`.
//!
//! For two Markov measures of common order `L` the log-ratio of a word of
//! length `n >= L` is a boundary term on its first block plus a sum of edge
//! weights `w(c, b) = log(p(b|c) / q(b|c))` along a path in the de Bruijn
//! graph on `A^L`. Per orientation of the sign:
//!
//! * the maximum mean cycle `lambda*` (Karp) is the limit of the best
//!   per-symbol value, hence a lower bound for `rho`;
//! * the largest excess `h(c)` over `lambda*` collectable on any path from
//!   `c` bounds every continuation, so with `V_N` the best value of a length
//!   `N` word ending in each state, every `n >= N` obeys
//!   `F_n <= max_c(V_N(c) + h(c)) + (n - N) lambda*`.
//!
//! The dynamic program over `N` closes the enclosure once that bound falls
//! below the best value already seen, or below `lambda*` itself.

use serde::Serialize;

use crate::capacity;
use crate::distances::{same_alphabet, Enclosure};
use crate::error::{domain, Error, Result};
use crate::gfun::{log_ratio_norm, markov_to_g, svar};
use crate::measures::{CylinderOracle, MarkovMeasure};
use crate::numeric::CompensatedSum;

/// `max_{n <= depth} max_{a in A^n} (1/n) |log(mu[a] / nu[a])|`, a lower
/// bound for `rho` that is nondecreasing in `depth`.
pub fn projective_truncated<A, B>(a: &A, b: &B, depth: usize) -> Result<f64>
where
    A: CylinderOracle + ?Sized,
    B: CylinderOracle + ?Sized,
{
    if depth == 0 {
        return domain("depth must be at least 1");
    }
    if a.alphabet_size() != b.alphabet_size() {
        return domain("measures live on alphabets of different sizes");
    }
    let mut best: f64 = 0.0;
    for n in 1..=depth {
        let (la, lb) = (a.log_masses(n)?, b.log_masses(n)?);
        let level = la.iter().zip(&lb).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
        best = best.max(level / n as f64);
    }
    Ok(best)
}

/// Largest state count for the quadratic-memory mean-cycle computation.
pub const MEAN_CYCLE_STATE_LIMIT: usize = 2048;

/// Witness for the asymptotic rate of one sign orientation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCycleCertificate {
    /// `+1` for `log(mu/nu)`, `-1` for `log(nu/mu)`.
    pub sign: i8,
    pub lambda_star: f64,
    /// Mean weight of `cycle`, recomputed along the cycle.
    pub cycle_mean: f64,
    /// States (block codes) of a maximum mean cycle, rotated to start at its
    /// smallest state.
    pub cycle: Vec<usize>,
    /// Largest transient excess over `lambda*` collectable from any state.
    pub bias_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveReport {
    pub enclosure: Enclosure,
    pub certificates: Vec<MeanCycleCertificate>,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveOptions {
    pub tol: f64,
    /// Cap on the horizon of the dynamic program; `None` picks one from a
    /// work budget.
    pub max_depth: Option<usize>,
}

impl Default for ProjectiveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_depth: None,
        }
    }
}

const WORK_BUDGET: usize = 200_000_000;

/// Enclosure of `rho` between two Markov measures on the same alphabet.
pub fn projective_markov(m1: &MarkovMeasure, m2: &MarkovMeasure, tol: f64) -> Result<Enclosure> {
    Ok(projective_markov_with(m1, m2, &ProjectiveOptions { tol, ..ProjectiveOptions::default() })?.enclosure)
}

struct Orientation {
    sign: f64,
    weights: Vec<f64>,
    lambda_hat: f64,
    bias: Vec<f64>,
    value: Vec<f64>,
    cert: MeanCycleCertificate,
}

pub fn projective_markov_with(
    m1: &MarkovMeasure,
    m2: &MarkovMeasure,
    opts: &ProjectiveOptions,
) -> Result<ProjectiveReport> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let (a, b) = MarkovMeasure::common_order(m1, m2)?;
    let k = a.alphabet().size();
    let order = a.order();
    let states = a.block_log().len();
    if states > MEAN_CYCLE_STATE_LIMIT {
        return Err(Error::Capacity {
            what: "mean-cycle states".into(),
            requested: states as u128,
            limit: MEAN_CYCLE_STATE_LIMIT as u64,
        });
    }
    capacity::check("mean-cycle states", states as u128)?;

    // Words shorter than the common order are plain marginals.
    let mut best = [0.0f64; 2];
    for n in 1..order {
        let (la, lb) = (a.log_masses(n)?, b.log_masses(n)?);
        for (x, y) in la.iter().zip(&lb) {
            best[0] = best[0].max((x - y) / n as f64);
            best[1] = best[1].max((y - x) / n as f64);
        }
    }

    let diff: Vec<f64> = a.kernel_log().iter().zip(b.kernel_log()).map(|(x, y)| x - y).collect();
    let boundary: Vec<f64> = a.block_log().iter().zip(b.block_log()).map(|(x, y)| x - y).collect();
    let scale = diff.iter().chain(&boundary).fold(0.0f64, |m, x| m.max(x.abs()));
    let mut sides: Vec<Orientation> = [1.0, -1.0]
        .into_iter()
        .map(|sign| {
            let weights: Vec<f64> = diff.iter().map(|w| sign * w).collect();
            let (lambda, cycle) = karp(&weights, k, states);
            let cycle_mean = cycle_mean(&weights, k, states, &cycle);
            let (lambda_hat, bias) = excess(&weights, k, states, lambda);
            let value: Vec<f64> = boundary.iter().map(|s| sign * s).collect();
            Orientation {
                sign,
                cert: MeanCycleCertificate {
                    sign: sign as i8,
                    lambda_star: lambda,
                    cycle_mean,
                    cycle,
                    bias_max: bias.iter().copied().fold(0.0, f64::max),
                },
                weights,
                lambda_hat,
                bias,
                value,
            }
        })
        .collect();

    let max_depth = opts
        .max_depth
        .unwrap_or_else(|| order + 64 + WORK_BUDGET / (2 * states * k))
        .max(order);
    let mut depth = order;
    let mut next = vec![0.0; states];
    let enclosure = loop {
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 0.0;
        for (side, best) in sides.iter().zip(best.iter_mut()) {
            let level = side.value.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let before = *best;
            *best = best.max(level / depth as f64);
            let reach = side
                .value
                .iter()
                .zip(&side.bias)
                .map(|(v, h)| v + h)
                .fold(f64::NEG_INFINITY, f64::max);
            let tail = if reach <= depth as f64 * side.lambda_hat {
                side.lambda_hat
            } else {
                reach / depth as f64
            };
            lo = lo.max(*best).max(side.cert.cycle_mean);
            hi = hi.max(before).max(tail);
        }
        let hi = hi.max(lo);
        if hi - lo <= opts.tol || depth >= max_depth {
            // A length-n max-plus sum of terms bounded by `scale` is off by at
            // most n * EPS * scale per symbol after division by n.
            let cycle_len = sides.iter().map(|s| s.cert.cycle.len()).max().unwrap_or(0);
            let pad = 2.0 * f64::EPSILON * scale * (depth + cycle_len + 2) as f64;
            let mut e = Enclosure::new((lo - pad).max(0.0), hi + pad, "karp+dp");
            e.depth = Some(depth);
            e.iterations = Some(depth - order);
            e.lambda_star = Some(sides.iter().map(|s| s.cert.lambda_star).fold(f64::NEG_INFINITY, f64::max));
            e.converged = hi - lo <= opts.tol;
            break e;
        }
        for side in &mut sides {
            advance(&side.value, &side.weights, k, &mut next);
            std::mem::swap(&mut side.value, &mut next);
        }
        depth += 1;
    };
    debug_assert!(sides.iter().all(|s| s.sign.abs() == 1.0));
    Ok(ProjectiveReport {
        enclosure,
        certificates: sides.into_iter().map(|s| s.cert).collect(),
        order,
    })
}

/// One max-plus step along the de Bruijn graph.
fn advance(value: &[f64], weights: &[f64], k: usize, out: &mut [f64]) {
    let states = value.len();
    out.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
    for (c, &v) in value.iter().enumerate() {
        for b in 0..k {
            let e = c * k + b;
            let to = e % states;
            out[to] = out[to].max(v + weights[e]);
        }
    }
}

/// Karp's maximum mean cycle on the de Bruijn graph, with a witness cycle.
fn karp(weights: &[f64], k: usize, states: usize) -> (f64, Vec<usize>) {
    let n = states;
    let mut d = vec![f64::NEG_INFINITY; (n + 1) * n];
    let mut pred = vec![u32::MAX; (n + 1) * n];
    d[0] = 0.0;
    for t in 1..=n {
        let (prev, cur) = d.split_at_mut(t * n);
        let prev = &prev[(t - 1) * n..];
        let cur = &mut cur[..n];
        for (c, &v) in prev.iter().enumerate() {
            if v == f64::NEG_INFINITY {
                continue;
            }
            for b in 0..k {
                let e = c * k + b;
                let to = e % n;
                let cand = v + weights[e];
                if cand > cur[to] {
                    cur[to] = cand;
                    pred[t * n + to] = c as u32;
                }
            }
        }
    }
    let mut lambda = f64::NEG_INFINITY;
    let mut arg = 0;
    for v in 0..n {
        let dn = d[n * n + v];
        if dn == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for t in 0..n {
            let dt = d[t * n + v];
            if dt > f64::NEG_INFINITY {
                worst = worst.min((dn - dt) / (n - t) as f64);
            }
        }
        if worst > lambda {
            lambda = worst;
            arg = v;
        }
    }
    // Walk the optimal length-n path back from `arg`; any cycle on it is a
    // maximum mean cycle.
    let mut walk = Vec::with_capacity(n + 1);
    let mut v = arg;
    walk.push(v);
    for t in (1..=n).rev() {
        v = pred[t * n + v] as usize;
        walk.push(v);
    }
    let mut seen = vec![usize::MAX; n];
    let mut cycle = Vec::new();
    for (i, &s) in walk.iter().enumerate() {
        if seen[s] != usize::MAX {
            // walk is reversed: walk[i] -> walk[i-1] -> ... -> walk[seen[s]]
            cycle = walk[seen[s]..i].iter().rev().copied().collect();
            break;
        }
        seen[s] = i;
    }
    if let Some(pos) = cycle.iter().enumerate().min_by_key(|(_, s)| **s).map(|(i, _)| i) {
        cycle.rotate_left(pos);
    }
    (lambda, cycle)
}

fn cycle_mean(weights: &[f64], k: usize, states: usize, cycle: &[usize]) -> f64 {
    if cycle.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut total = CompensatedSum::new();
    for (i, &c) in cycle.iter().enumerate() {
        let to = cycle[(i + 1) % cycle.len()];
        let b = to % k;
        debug_assert_eq!((c * k + b) % states, to);
        total.add(weights[c * k + b]);
    }
    total.value() / cycle.len() as f64
}

/// Largest excess `h(c) = sup_paths sum (w - lambda_hat)` from each state,
/// with `lambda_hat` nudged above `lambda` until every cycle is strictly
/// negative after reduction.
fn excess(weights: &[f64], k: usize, states: usize, lambda: f64) -> (f64, Vec<f64>) {
    let mut eta = 1e-13 * (1.0 + lambda.abs());
    loop {
        let lambda_hat = lambda + eta;
        let mut h = vec![0.0f64; states];
        let mut settled = false;
        for _ in 0..=states + 1 {
            let mut changed = false;
            for c in 0..states {
                let mut best = 0.0f64;
                for b in 0..k {
                    let e = c * k + b;
                    best = best.max(weights[e] - lambda_hat + h[e % states]);
                }
                if best > h[c] {
                    h[c] = best;
                    changed = true;
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        if settled {
            return (lambda_hat, h);
        }
        eta *= 16.0;
    }
}

/// Upper bound on `rho` from the technical lemma, for measures of a common
/// order `L` with g-functions `g_mu`, `g_nu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TechnicalBound {
    /// `L * eps * (e^s + 1)`: certified for every order.
    pub value: f64,
    /// `2 eps e^s` as stated in the lemma; it coincides with a valid bound
    /// for `L = 1`.
    pub stated: f64,
    /// `||log(g_mu / g_nu)||`.
    pub eps: f64,
    /// `min(svar_L log g_mu, svar_L log g_nu)`.
    pub svar_min: f64,
    pub order: usize,
}

/// `rho <= max(eps, d_p(v_mu, v_nu))` and `d_p(v_mu, v_nu) <= 2 L eps / (1 - tau)`
/// with `tau <= tanh(s / 2)` the contraction of `L` block steps, which gives
/// `rho <= L eps (e^s + 1)`.
pub fn projective_upper_technical(m1: &MarkovMeasure, m2: &MarkovMeasure) -> Result<TechnicalBound> {
    if !(m1.is_stationary() && m2.is_stationary()) {
        return domain("the technical bound needs stationary measures");
    }
    same_alphabet(m1, m2)?;
    let (a, b) = MarkovMeasure::common_order(m1, m2)?;
    let order = a.order();
    let (ga, gb) = (markov_to_g(&a)?, markov_to_g(&b)?);
    let eps = log_ratio_norm(&ga, &gb)?;
    let s = svar(&ga, order)?.value.min(svar(&gb, order)?.value);
    Ok(TechnicalBound {
        value: order as f64 * eps * (s.exp() + 1.0),
        stated: 2.0 * eps * s.exp(),
        eps,
        svar_min: s,
        order,
    })
}
