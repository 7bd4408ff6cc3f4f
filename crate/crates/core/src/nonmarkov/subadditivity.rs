use crate::channels::{dilate, MixtureSpec};
use crate::error::Result;

use super::{nm_measure_optimized, SearchConfig, TimeGrid};

/// Slack allowed in `𝒩(Λ) ≤ Σ q_i 𝒩(Φ^{(i)})`, covering quadrature and
/// optimizer error.
pub const SUBADDITIVITY_TOL: f64 = 1e-6;
/// A family whose optimized measure is at most this is treated as Markovian.
pub const MARKOV_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SubadditivityReport {
    pub weights: Vec<f64>,
    /// Optimized measure of the ancilla dilation `Λ`.
    pub dilated_value: f64,
    /// Optimized measure of each component.
    pub component_values: Vec<f64>,
    /// `Σ q_i 𝒩(Φ^{(i)})`
    pub bound: f64,
    pub holds: bool,
    pub components_markovian: bool,
    /// False only when every component is Markovian but `Λ` is not.
    pub markovian_preserved: bool,
}

impl SubadditivityReport {
    pub fn passed(&self) -> bool {
        self.holds && self.markovian_preserved
    }
}

/// Compares the optimized measure of the dilation with the weighted sum of
/// the component measures. Violations are reported, not raised.
pub fn verify_subadditivity(spec: &MixtureSpec, grid: &TimeGrid, search: &SearchConfig) -> Result<SubadditivityReport> {
    let dilated_value = nm_measure_optimized(&dilate(spec), grid, search)?.value;
    let component_values = spec
        .components()
        .iter()
        .map(|c| Ok(nm_measure_optimized(c, grid, search)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let bound: f64 = spec.weights().iter().zip(&component_values).map(|(q, v)| q * v).sum();
    let components_markovian = component_values.iter().all(|&v| v <= MARKOV_TOL);
    Ok(SubadditivityReport {
        weights: spec.weights().to_vec(),
        dilated_value,
        component_values,
        bound,
        holds: dilated_value <= bound + SUBADDITIVITY_TOL,
        components_markovian,
        markovian_preserved: !components_markovian || dilated_value <= MARKOV_TOL,
    })
}
