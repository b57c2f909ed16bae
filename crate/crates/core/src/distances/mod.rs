//! Distances between fully supported measures: vague `D`, projective `rho`
//! and Ornstein's `d-bar`. Every routine reports a certified enclosure.

mod dbar;
mod projective;
mod transport;
mod vague;

pub use dbar::{dbar_lower_blocks, dbar_upper_markov, CouplingBound};
pub use projective::{
    projective_markov, projective_markov_with, projective_truncated, projective_upper_technical,
    MeanCycleCertificate, ProjectiveOptions, ProjectiveReport, TechnicalBound,
};
pub use transport::{transport_min, TransportPlan};
pub use vague::{vague_distance, vague_distance_with_rho};

use serde::Serialize;

/// `lo <= target <= hi`, with the method and resolution that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    pub converged: bool,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64, method: &str) -> Self {
        Self {
            lo,
            hi,
            method: method.to_string(),
            depth: None,
            iterations: None,
            lambda_star: None,
            converged: true,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn same_alphabet(a: &dyn crate::measures::CylinderOracle, b: &dyn crate::measures::CylinderOracle) -> crate::error::Result<usize> {
    let k = a.alphabet_size();
    if b.alphabet_size() != k {
        return crate::error::domain(format!(
            "measures live on alphabets of different sizes ({k} and {})",
            b.alphabet_size()
        ));
    }
    Ok(k)
}
