//! Concrete fully supported measures on `A^N`.

mod markov;
mod oracle;
mod separability;

pub use markov::{MarkovMeasure, NORMALIZATION_TOL, STATIONARITY_TOL};
pub use oracle::{marginal_defect, CylinderOracle};
pub use separability::{
    alpha_for_separation, flip_sequence, prefix_separation, tau_coupling_disagreement,
    tau_p_word, truncated_projective_family, truncated_projective_induced, InducedMeasure,
    SeparabilityMeasure, SequenceRule,
};

use crate::error::Result;

/// `log mu[w]` of a Markov measure. Thin alias kept for symmetry with the
/// family evaluators.
pub fn markov_cylinder_log_mass(m: &MarkovMeasure, w: &[usize]) -> f64 {
    m.log_mass(w)
}

pub fn lift_order(m: &MarkovMeasure, order: usize) -> Result<MarkovMeasure> {
    m.lift_order(order)
}

pub fn separability_log_mass(s: &SeparabilityMeasure, w: &[usize]) -> f64 {
    s.log_mass(w)
}

pub fn induced_log_mass(m: &InducedMeasure, w: &[usize]) -> f64 {
    m.log_mass(w)
}
