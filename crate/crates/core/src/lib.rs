//! Distances between measures on one-sided shift spaces, Markov
//! approximation of g-measures, and uniqueness certificates.
//!
//! The library works with fully supported measures on `A^N` accessed through
//! their cylinder masses ([`measures::CylinderOracle`]). It provides
//!
//! * the projective distance `rho`, exactly (as a certified enclosure) for
//!   pairs of Markov measures and as truncated lower bounds in general;
//! * the vague distance and bounds on Ornstein's `d-bar`;
//! * g-functions, their variations, and the unique Markov measure of a
//!   locally constant g via a certified Perron-Frobenius computation;
//! * entropy rates and the variational identity for g-measures;
//! * uniqueness certificates for schemes of locally constant approximations.
//!
//! ```
//! use shiftmetrics::measures::MarkovMeasure;
//! use shiftmetrics::distances::projective_markov;
//!
//! let a = MarkovMeasure::bernoulli(0.5).unwrap();
//! let b = MarkovMeasure::bernoulli(1.0 / 3.0).unwrap();
//! let rho = projective_markov(&a, &b, 1e-12).unwrap();
//! assert!(rho.contains(1.5f64.ln()));
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod certify;
pub mod distances;
pub mod entropy;
pub mod error;
pub mod files;
pub mod gfun;
pub mod measures;
pub mod numeric;
pub mod spectral;
pub mod symbolic;

pub use distances::Enclosure;
pub use error::{Error, Result};
pub use measures::{CylinderOracle, MarkovMeasure};
pub use symbolic::{Alphabet, Word};
