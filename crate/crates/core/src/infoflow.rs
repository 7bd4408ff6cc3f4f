//! Internal, external and total information for a mixture and its ancilla
//! dilation, the system–ancilla correlation bound, and flow-balance checks.

use rayon::prelude::*;

use crate::channels::{check_weights, dilate, mix, ChannelFamily, MixtureSpec};
use crate::distinguish::{trace_distance, HelstromEnsemble};
use crate::error::{dim_err, Error, Result};
use crate::nonmarkov::{distinguishability_series, finite_difference, TimeGrid};
use crate::qmath::{kron, trace_norm, CMatrix, QState};

/// Tolerance for the two-component equality case of the marginals lemma.
pub const LEMMA_TOL: f64 = 1e-12;
/// Largest accepted growth rate of the total information.
pub const RATE_TOL: f64 = 1e-8;
/// Largest accepted variation of the total information for unitary mixtures.
pub const CONSERVATION_TOL: f64 = 1e-10;
/// Increments of a component series above this break monotonicity.
const MONOTONE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct InfoFlowSeries {
    pub grid: TimeGrid,
    /// `‖Φ_t[Δ]‖`
    pub i_int: Vec<f64>,
    /// `i_tot - i_int`
    pub i_ext: Vec<f64>,
    /// `‖Λ_t[Δ]‖`
    pub i_tot: Vec<f64>,
    /// `2 p1 D(Λ_t[ρ¹], Φ_t[ρ¹] ⊗ ρ_A) + 2 p2 D(Λ_t[ρ²], Φ_t[ρ²] ⊗ ρ_A)`
    pub corr_bound: Vec<f64>,
}

impl InfoFlowSeries {
    /// Largest `i_ext - corr_bound` over the grid.
    pub fn max_bound_excess(&self) -> f64 {
        self.i_ext
            .iter()
            .zip(&self.corr_bound)
            .map(|(e, b)| e - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Equal-prior decomposition, `I_int = D(Φ_t ρ¹, Φ_t ρ²)`.
pub fn info_flow(spec: &MixtureSpec, pair: (&QState, &QState), grid: &TimeGrid) -> Result<InfoFlowSeries> {
    let ensemble = HelstromEnsemble::equal(pair.0.clone(), pair.1.clone())?;
    info_flow_helstrom(spec, &ensemble, grid)
}

/// Decomposition for a general Helstrom ensemble, based on `Δ = p1 ρ¹ - p2 ρ²`.
pub fn info_flow_helstrom(spec: &MixtureSpec, ensemble: &HelstromEnsemble, grid: &TimeGrid) -> Result<InfoFlowSeries> {
    if spec.system_dim() != ensemble.dim() {
        return dim_err(format!(
            "mixture acts on dimension {}, ensemble states have dimension {}",
            spec.system_dim(),
            ensemble.dim()
        ));
    }
    let i_int = distinguishability_series(&mix(spec), ensemble, grid)?;
    let i_tot = distinguishability_series(&dilate(spec), ensemble, grid)?;
    let i_ext = i_tot.iter().zip(&i_int).map(|(a, b)| a - b).collect();
    let (p1, p2) = (ensemble.p1(), ensemble.p2());
    let corr_bound = grid
        .points()
        .par_iter()
        .map(|&t| {
            Ok(2.0 * p1 * correlation_bound(spec, ensemble.rho1(), t)?
                + 2.0 * p2 * correlation_bound(spec, ensemble.rho2(), t)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(InfoFlowSeries {
        grid: grid.clone(),
        i_int,
        i_ext,
        i_tot,
        corr_bound,
    })
}

/// `D(Λ_t[ρ], Φ_t[ρ] ⊗ ρ_A)`: distance of the dilated state from the product
/// of its marginals.
pub fn correlation_bound(spec: &MixtureSpec, rho: &QState, t: f64) -> Result<f64> {
    let joint = dilate(spec).apply(rho, t)?;
    let system = mix(spec).apply(rho, t)?;
    let product = kron(system.matrix(), spec.ancilla_state().matrix());
    Ok(0.5 * trace_norm(&(joint.matrix() - &product))?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// `D(ρ_SA, ρ_S ⊗ ρ_A)`
    pub lhs: f64,
    /// `2 Σ_{i>j} q_i q_j D(ρ^i, ρ^j)`
    pub rhs: f64,
    pub holds: bool,
    /// For two components the bound is an equality; `None` otherwise.
    pub equality: Option<bool>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.holds && self.equality.unwrap_or(true)
    }
}

/// Builds `ρ_SA = Σ q_i ρ^i ⊗ Π_i` and compares its distance from the
/// product of marginals with the pairwise bound.
pub fn marginals_lemma_check(weights: &[f64], states: &[QState]) -> Result<LemmaReport> {
    check_weights(weights)?;
    if states.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return dim_err("all states must share one dimension");
    }
    let n = states.len();
    let ancilla = CMatrix::real_diag(weights);
    let mut joint = CMatrix::zeros(d * n, d * n);
    let mut marginal = CMatrix::zeros(d, d);
    for (i, (q, s)) in weights.iter().zip(states).enumerate() {
        joint += &kron(&s.matrix().scale_real(*q), &CMatrix::projector(n, i));
        marginal += &s.matrix().scale_real(*q);
    }
    let lhs = 0.5 * trace_norm(&(&joint - &kron(&marginal, &ancilla)))?;
    let mut rhs = 0.0;
    for i in 0..n {
        for j in 0..i {
            rhs += 2.0 * weights[i] * weights[j] * trace_distance(&states[i], &states[j])?;
        }
    }
    Ok(LemmaReport {
        lhs,
        rhs,
        holds: lhs <= rhs + LEMMA_TOL,
        equality: (n == 2).then(|| (lhs - rhs).abs() <= LEMMA_TOL),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowBalanceReport {
    /// Every component's distinguishability series is non-increasing.
    pub components_markovian: bool,
    /// Largest finite-difference rate of `i_int + i_ext` at interior points.
    pub max_total_rate: f64,
    pub all_unitary: bool,
    /// `max |i_tot(t) - i_tot(0)|`, checked for unitary mixtures.
    pub i_tot_variation: f64,
    /// `max |İ_int + İ_ext|` at interior points.
    pub max_abs_total_rate: f64,
    /// Interior times with `İ_int > 0`.
    pub backflow_times: Vec<f64>,
    /// Whether `İ_ext < 0` at every backflow time.
    pub backflow_from_ancilla: bool,
    pub passed: bool,
}

/// Checks that the total information cannot grow when every component is
/// Markovian, that it is conserved for unitary mixtures, and that internal
/// backflow is always paid for by the ancilla. A violated precondition is
/// reported through `components_markovian`.
pub fn flow_balance_check(spec: &MixtureSpec, pair: (&QState, &QState), grid: &TimeGrid) -> Result<FlowBalanceReport> {
    let ensemble = HelstromEnsemble::equal(pair.0.clone(), pair.1.clone())?;
    let mut components_markovian = true;
    for c in spec.components() {
        let d = distinguishability_series(c, &ensemble, grid)?;
        if d.windows(2).any(|w| w[1] - w[0] > MONOTONE_TOL) {
            components_markovian = false;
        }
    }
    let flow = info_flow_helstrom(spec, &ensemble, grid)?;
    let rate_int = finite_difference(grid, &flow.i_int)?;
    let rate_ext = finite_difference(grid, &flow.i_ext)?;
    let n = grid.len();

    let mut max_total_rate = f64::NEG_INFINITY;
    let mut max_abs_total_rate: f64 = 0.0;
    let mut backflow_times = Vec::new();
    let mut backflow_from_ancilla = true;
    for k in 1..n - 1 {
        let total = rate_int[k] + rate_ext[k];
        max_total_rate = max_total_rate.max(total);
        max_abs_total_rate = max_abs_total_rate.max(total.abs());
        if rate_int[k] > RATE_TOL {
            backflow_times.push(grid.points()[k]);
            if rate_ext[k] >= 0.0 {
                backflow_from_ancilla = false;
            }
        }
    }
    let all_unitary = spec.components().iter().all(ChannelFamily::is_unitary);
    let i_tot_variation = flow
        .i_tot
        .iter()
        .map(|v| (v - flow.i_tot[0]).abs())
        .fold(0.0, f64::max);

    let mut passed = components_markovian && max_total_rate <= RATE_TOL && backflow_from_ancilla;
    if all_unitary {
        passed &= i_tot_variation <= CONSERVATION_TOL && max_abs_total_rate <= RATE_TOL;
    }
    Ok(FlowBalanceReport {
        components_markovian,
        max_total_rate,
        all_unitary,
        i_tot_variation,
        max_abs_total_rate,
        backflow_times,
        backflow_from_ancilla,
        passed,
    })
}
