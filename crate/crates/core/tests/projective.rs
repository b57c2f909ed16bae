mod common;

use proptest::prelude::*;
use rand::Rng;
use shiftmetrics::distances::{projective_markov, projective_markov_with, projective_truncated, projective_upper_technical, ProjectiveOptions};
use shiftmetrics::measures::CylinderOracle;
use shiftmetrics::{Alphabet, MarkovMeasure};

use common::{perturbed, random_chain, rng};

/// Brute force over every word, one `log_mass` call per word.
fn brute_force(a: &MarkovMeasure, b: &MarkovMeasure, depth: usize) -> f64 {
    let k = a.alphabet().size();
    let mut best = 0.0f64;
    for n in 1..=depth {
        let mut w = vec![0usize; n];
        loop {
            best = best.max((a.log_mass(&w) - b.log_mass(&w)).abs() / n as f64);
            // odometer increment
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                w[i] += 1;
                if w[i] < k {
                    break;
                }
                w[i] = 0;
            }
            if w.iter().all(|&s| s == 0) {
                break;
            }
        }
    }
    best
}

#[test]
fn product_closed_form() {
    for (p, q) in [(0.5f64, 1.0f64 / 3.0), (0.1, 0.2), (0.7, 0.65)] {
        let a = MarkovMeasure::bernoulli(p).unwrap();
        let b = MarkovMeasure::bernoulli(q).unwrap();
        let want = (p / q).ln().abs().max(((1.0 - p) / (1.0 - q)).ln().abs());
        assert!((projective_truncated(&a, &b, 1).unwrap() - want).abs() < 1e-15);
        let e = projective_markov(&a, &b, 1e-12).unwrap();
        assert!(e.contains(want), "{e:?} vs {want}");
    }
}

#[test]
fn coin_enclosures_need_no_slack() {
    let mut r = rng(17);
    for _ in 0..500 {
        let (p, q): (f64, f64) = (r.gen_range(0.01..0.99), r.gen_range(0.01..0.99));
        let a = MarkovMeasure::bernoulli(p).unwrap();
        let b = MarkovMeasure::bernoulli(q).unwrap();
        let want = (p.ln() - q.ln()).abs().max(((1.0 - p).ln() - (1.0 - q).ln()).abs());
        let e = projective_markov(&a, &b, 1e-12).unwrap();
        assert!(e.contains(want), "{e:?} vs {want}");
    }
}

#[test]
fn technical_bound_for_coins() {
    let a = MarkovMeasure::bernoulli(0.5).unwrap();
    let b = MarkovMeasure::bernoulli(1.0 / 3.0).unwrap();
    let t = projective_upper_technical(&a, &b).unwrap();
    assert!((t.stated - 2.0 * 1.5f64.ln()).abs() < 1e-14);
    assert_eq!(t.svar_min, 0.0);
    assert_eq!(t.order, 1);
}

#[test]
fn brute_force_agrees_with_truncation() {
    let mut r = rng(11);
    for _ in 0..10 {
        let a = random_chain(2, 2, &mut r);
        let b = random_chain(2, 1, &mut r);
        let brute = brute_force(&a, &b, 9);
        assert!((projective_truncated(&a, &b, 9).unwrap() - brute).abs() < 1e-13);
        let e = projective_markov(&a, &b, 1e-9).unwrap();
        assert!(brute <= e.hi + 1e-12);
    }
}

#[test]
fn mixed_orders_and_three_letters() {
    let mut r = rng(12);
    for _ in 0..10 {
        let a = random_chain(3, 2, &mut r);
        let b = random_chain(3, 1, &mut r);
        let e = projective_markov(&a, &b, 1e-9).unwrap();
        assert!(e.converged);
        assert!(projective_truncated(&a, &b, 8).unwrap() <= e.hi + 1e-12);
        let t = projective_upper_technical(&a, &b).unwrap();
        assert!(e.hi <= t.value + 1e-12, "{e:?} {t:?}");
    }
}

#[test]
fn depth_cap_returns_a_valid_wider_enclosure() {
    let mut r = rng(13);
    let a = random_chain(2, 1, &mut r);
    let b = random_chain(2, 1, &mut r);
    let exact = projective_markov(&a, &b, 1e-12).unwrap();
    let opts = ProjectiveOptions { tol: 1e-15, max_depth: Some(2) };
    let capped = projective_markov_with(&a, &b, &opts).unwrap();
    assert!(capped.enclosure.lo <= exact.hi + 1e-12 && exact.lo <= capped.enclosure.hi + 1e-12);
    for c in &capped.certificates {
        assert!((c.cycle_mean - c.lambda_star).abs() <= 1e-12);
    }
}

#[test]
fn capacity_is_enforced() {
    let k: usize = 4;
    let order = 6; // 4096 de Bruijn states
    let kernel: Vec<Vec<f64>> = (0..k.pow(order as u32)).map(|_| vec![0.25; 4]).collect();
    let m = MarkovMeasure::new(Alphabet::numeric(k).unwrap(), order, &vec![1.0 / 4096.0; 4096], &kernel).unwrap();
    let err = projective_markov(&m, &m, 1e-9).unwrap_err();
    assert!(matches!(err, shiftmetrics::Error::Capacity { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_and_zero_on_the_diagonal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_chain(2, 1, &mut r);
        let b = random_chain(2, 1, &mut r);
        let ab = projective_markov(&a, &b, 1e-10).unwrap();
        let ba = projective_markov(&b, &a, 1e-10).unwrap();
        prop_assert_eq!(ab.lo, ba.lo);
        prop_assert_eq!(ab.hi, ba.hi);
        prop_assert!(projective_markov(&a, &a.lift_order(2).unwrap(), 1e-10).unwrap().hi <= 1e-10);
        prop_assert!(ab.lo > 0.0);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_chain(2, 1, &mut r);
        let b = perturbed(&a, 0.5, &mut r);
        let c = random_chain(2, 2, &mut r);
        let ab = projective_markov(&a, &b, 1e-10).unwrap();
        let bc = projective_markov(&b, &c, 1e-10).unwrap();
        let ac = projective_markov(&a, &c, 1e-10).unwrap();
        prop_assert!(ac.lo <= ab.hi + bc.hi + 1e-12);
    }

    #[test]
    fn truncation_is_monotone_and_below_the_enclosure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_chain(3, 1, &mut r);
        let b = random_chain(3, 1, &mut r);
        let e = projective_markov(&a, &b, 1e-10).unwrap();
        let mut last = 0.0;
        for depth in 1..=7 {
            let t = projective_truncated(&a, &b, depth).unwrap();
            prop_assert!(t >= last);
            prop_assert!(t <= e.hi + 1e-12);
            last = t;
        }
    }
}
