use crate::distances::{same_alphabet, Enclosure};
use crate::error::{domain, Result};
use crate::measures::CylinderOracle;
use crate::numeric::CompensatedSum;

/// Relative allowance for rounding in a truncated sum of the given depth:
/// each mass carries `O(depth)` rounding steps and the sums are compensated.
fn rounding(depth: usize) -> f64 {
    16.0 * f64::EPSILON * (depth as f64 + 2.0)
}

fn truncated_sum(a: &dyn CylinderOracle, b: &dyn CylinderOracle, depth: usize) -> Result<f64> {
    if depth == 0 {
        return domain("depth must be at least 1");
    }
    same_alphabet(a, b)?;
    let mut total = CompensatedSum::new();
    let mut weight = 1.0;
    for n in 1..=depth {
        weight *= 0.5;
        let (la, lb) = (a.log_masses(n)?, b.log_masses(n)?);
        let level: CompensatedSum = la.iter().zip(&lb).map(|(x, y)| (x.exp() - y.exp()).abs()).collect();
        total.add(weight * level.value());
    }
    Ok(total.value())
}

/// `D(mu, nu) = sum_n 2^-n sum_{a in A^n} |mu[a] - nu[a]|`, truncated at
/// `depth`; each omitted level contributes at most `2 * 2^-n`.
pub fn vague_distance(a: &dyn CylinderOracle, b: &dyn CylinderOracle, depth: usize) -> Result<Enclosure> {
    vague_distance_with_rho(a, b, depth, None)
}

/// As [`vague_distance`], using a certified upper bound `rho_hi` on the
/// projective distance to tighten the tail: `|mu[a] - nu[a]| <=
/// (e^{n rho} - 1) nu[a]`, so level `n` contributes at most
/// `2^-n min(2, e^{n rho} - 1)`.
pub fn vague_distance_with_rho(
    a: &dyn CylinderOracle,
    b: &dyn CylinderOracle,
    depth: usize,
    rho_hi: Option<f64>,
) -> Result<Enclosure> {
    let sum = truncated_sum(a, b, depth)?;
    let plain = 2f64.powi(1 - depth as i32);
    let tail = match rho_hi {
        Some(r) if r.is_finite() && r >= 0.0 => plain.min(rho_tail(depth, r)),
        Some(r) => return domain(format!("rho bound {r} is not a nonnegative number")),
        None => plain,
    };
    let mut e = Enclosure::new(sum * (1.0 - rounding(depth)), (sum + tail) * (1.0 + rounding(depth)), "truncated-sum");
    e.depth = Some(depth);
    Ok(e)
}

/// `sum_{n > depth} 2^-n min(2, e^{n rho} - 1)`, rounded up.
fn rho_tail(depth: usize, rho: f64) -> f64 {
    let mut total = CompensatedSum::new();
    let mut n = depth + 1;
    let mut weight = 2f64.powi(-(n as i32));
    loop {
        let growth = (n as f64 * rho).exp_m1();
        if growth >= 2.0 || weight < 1e-290 {
            // every remaining level is capped at 2: sum_{m >= n} 2^{1-m} = 2^{2-n}
            total.add(4.0 * weight);
            break;
        }
        total.add(weight * growth);
        n += 1;
        weight *= 0.5;
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MarkovMeasure;

    #[test]
    fn identical_measures() {
        let m = MarkovMeasure::bernoulli(0.3).unwrap();
        let e = vague_distance(&m, &m, 10).unwrap();
        assert_eq!(e.lo, 0.0);
        assert!((e.hi - 2f64.powi(-9)).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_pair_matches_binomial_sum() {
        let (p, q) = (0.5, 1.0 / 3.0);
        let a = MarkovMeasure::bernoulli(p).unwrap();
        let b = MarkovMeasure::bernoulli(q).unwrap();
        let e = vague_distance(&a, &b, 20).unwrap();
        // level n groups the 2^n words by their number of ones
        let mut oracle = 0.0;
        for n in 1..=20i32 {
            let mut level = 0.0;
            let mut binom = 1.0;
            for j in 0..=n {
                let diff = p.powi(j) * (1.0 - p).powi(n - j) - q.powi(j) * (1.0 - q).powi(n - j);
                level += binom * diff.abs();
                binom = binom * f64::from(n - j) / f64::from(j + 1);
            }
            oracle += level * 2f64.powi(-n);
        }
        assert!((e.lo - oracle).abs() < 1e-12);
        assert!(e.width() <= 2f64.powi(-19) * (1.0 + 1e-7));
    }

    #[test]
    fn rho_tail_is_tighter_for_close_measures() {
        let t = rho_tail(10, 1e-3);
        assert!(t < 2f64.powi(-9));
        // first omitted level alone: 2^-11 (e^{11e-3} - 1)
        assert!(t > 2f64.powi(-11) * (11e-3f64).exp_m1());
        assert!((rho_tail(3, 10.0) - 2f64.powi(-2)).abs() < 1e-15);
    }
}
