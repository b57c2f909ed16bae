//! Process-wide cap on the number of states an operation may enumerate.
//!
//! Every operation that materializes a table over `A^n` (words, blocks,
//! de Bruijn states, product states) asks [`check`] first. The default cap is
//! `2^24`; front ends may raise or lower it with [`set_limit`].

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_LIMIT: u64 = 1 << 24;

static LIMIT: AtomicU64 = AtomicU64::new(DEFAULT_LIMIT);

pub fn limit() -> u64 {
    LIMIT.load(Ordering::Relaxed)
}

pub fn set_limit(states: u64) {
    LIMIT.store(states.max(1), Ordering::Relaxed);
}

/// `radix^len` as a `u128`, saturating.
pub fn power(radix: usize, len: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..len {
        acc = acc.saturating_mul(radix as u128);
    }
    acc
}

/// Fails with [`Error::Capacity`] if `requested` exceeds the current cap.
pub fn check(what: &str, requested: u128) -> Result<usize> {
    let limit = limit();
    if requested > limit as u128 {
        return Err(Error::Capacity {
            what: what.to_string(),
            requested,
            limit,
        });
    }
    Ok(requested as usize)
}

/// Checks `radix^len` against the cap and returns it as a `usize`.
pub fn check_words(what: &str, radix: usize, len: usize) -> Result<usize> {
    check(what, power(radix, len))
}
