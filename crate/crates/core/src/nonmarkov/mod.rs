//! Distinguishability series, the information-flow rate `σ(t)` and the
//! increment-sum non-Markovianity measure, with state-pair optimization.

mod search;
mod subadditivity;

use rayon::prelude::*;

use crate::channels::{ChannelFamily, MixtureSpec, Representation};
use crate::distinguish::HelstromEnsemble;
use crate::error::{dim_err, Error, Result};
use crate::qmath::{diagonal_blocks, trace_norm, trace_norm_blocked, CMatrix, QState, C64, ONE, ZERO};

pub use search::{nm_measure_optimized, SearchConfig, SearchStrategy, SearchSummary};
pub use subadditivity::{verify_subadditivity, SubadditivityReport, MARKOV_TOL, SUBADDITIVITY_TOL};

/// Distinguishability increments at or below this size are treated as
/// round-off, both in the measure and in the reported intervals.
pub const INCREMENT_FLOOR: f64 = 1e-12;

/// Extra points closer than this to an existing grid point replace it.
const SNAP_TOL: f64 = 1e-9;

/// Strictly increasing sample times starting at `t ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a time grid needs at least two points".into()));
        }
        if points.iter().any(|t| !t.is_finite()) || points[0] < 0.0 {
            return Err(Error::InvalidArgument("grid points must be finite and start at t >= 0".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        Ok(TimeGrid { points })
    }

    /// `start, start + step, …` up to `end`; `end` itself is always included.
    pub fn uniform(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidArgument(format!("empty time range [{start}, {end}]")));
        }
        let n = ((end - start) / step).round() as usize;
        let mut points: Vec<f64> = (0..=n).map(|k| start + k as f64 * step).collect();
        if (points[n] - end).abs() <= SNAP_TOL {
            points[n] = end;
        } else if points[n] < end {
            points.push(end);
        } else {
            points[n] = end;
        }
        Self::new(points)
    }

    /// Inserts `extra` times that fall inside the grid range. An extra time
    /// within 1e-9 of an existing point replaces that point, so analytic kink
    /// locations are hit exactly.
    pub fn with_extra_points(&self, extra: &[f64]) -> Self {
        let mut points = self.points.clone();
        let (lo, hi) = (self.t_start(), self.t_end());
        for &t in extra {
            if !t.is_finite() || t < lo - SNAP_TOL || t > hi + SNAP_TOL {
                continue;
            }
            let pos = points.partition_point(|&p| p < t);
            let near = [pos.checked_sub(1), Some(pos)]
                .into_iter()
                .flatten()
                .filter(|&k| k < points.len())
                .find(|&k| (points[k] - t).abs() <= SNAP_TOL);
            match near {
                Some(k) => points[k] = t,
                None => points.insert(pos, t),
            }
        }
        TimeGrid { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.points[0]
    }

    pub fn t_end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Largest spacing between consecutive points.
    pub fn max_step(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// A family evaluated on the matrix units `|i⟩⟨j|` at every grid time.
/// By linearity, `Φ_t[X] = Σ_ij X_ij Φ_t[|i⟩⟨j|]`, so many inputs can be
/// propagated over the same grid at the cost of a linear combination.
#[derive(Clone, Debug)]
pub struct SampledFamily {
    input_dim: usize,
    output_dim: usize,
    grid: TimeGrid,
    images: Vec<Vec<CMatrix>>,
    /// Diagonal blocks shared by every image.
    blocks: Vec<Vec<usize>>,
}

impl SampledFamily {
    pub fn new(family: &ChannelFamily, grid: &TimeGrid) -> Result<Self> {
        let d = family.input_dim();
        let images = grid
            .points()
            .par_iter()
            .map(|&t| {
                let mut out = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        out.push(family.apply_operator(&CMatrix::unit(d, i, j), t)?);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = family.output_dim();
        let mut pattern = CMatrix::zeros(m, m);
        for img in images.iter().flatten() {
            for r in 0..m {
                for c in 0..m {
                    if img[(r, c)] != ZERO {
                        pattern[(r, c)] = ONE;
                    }
                }
            }
        }
        Ok(SampledFamily {
            input_dim: d,
            output_dim: m,
            grid: grid.clone(),
            images,
            blocks: diagonal_blocks(&pattern),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// `Φ_{t_k}[X]`
    pub fn evolve(&self, k: usize, x: &CMatrix) -> CMatrix {
        let m = self.output_dim;
        let mut out = CMatrix::zeros(m, m);
        self.evolve_into(k, x, &mut out);
        out
    }

    fn evolve_into(&self, k: usize, x: &CMatrix, out: &mut CMatrix) {
        let d = self.input_dim;
        let m = self.output_dim;
        for r in 0..m {
            for c in 0..m {
                out[(r, c)] = ZERO;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let coef: C64 = x[(i, j)];
                if coef == ZERO {
                    continue;
                }
                let img = &self.images[k][i * d + j];
                for r in 0..m {
                    for c in 0..m {
                        out[(r, c)] += coef * img[(r, c)];
                    }
                }
            }
        }
    }

    /// `‖Φ_t[X]‖` at every grid time.
    pub fn norm_series(&self, x: &CMatrix) -> Result<Vec<f64>> {
        if !x.is_square() || x.dim() != self.input_dim {
            return dim_err("operator does not match the sampled family");
        }
        let m = self.output_dim;
        let mut buf = CMatrix::zeros(m, m);
        Ok((0..self.grid.len())
            .map(|k| {
                self.evolve_into(k, x, &mut buf);
                trace_norm_blocked(&buf, &self.blocks)
            })
            .collect())
    }
}

/// Outcome of the measure for one preparation (or the best one found).
#[derive(Clone, Debug)]
pub struct NMEstimate {
    /// `Σ_k max(0, D_{k+1} - D_k)`
    pub value: f64,
    pub ensemble: HelstromEnsemble,
    /// Maximal runs of increasing distinguishability, `(t_lo, t_hi)`.
    pub positive_intervals: Vec<(f64, f64)>,
    pub grid: TimeGrid,
    /// `‖Φ_T[Δ]‖` at the horizon `T`. Backflow after `T` is not counted;
    /// a small value here indicates the truncation is harmless.
    pub horizon_distinguishability: f64,
    /// Present when the estimate comes from the optimizer.
    pub search: Option<SearchSummary>,
}

impl NMEstimate {
    pub fn optimal_pair(&self) -> (&QState, &QState) {
        (self.ensemble.rho1(), self.ensemble.rho2())
    }

    pub(crate) fn from_series(ensemble: HelstromEnsemble, grid: &TimeGrid, series: &[f64]) -> Self {
        let (value, positive_intervals) = increment_measure(grid, series);
        NMEstimate {
            value,
            ensemble,
            positive_intervals,
            grid: grid.clone(),
            horizon_distinguishability: series.last().copied().unwrap_or(0.0),
            search: None,
        }
    }
}

fn check_dims(family: &ChannelFamily, ensemble: &HelstromEnsemble) -> Result<()> {
    if family.input_dim() != ensemble.dim() {
        return dim_err(format!(
            "family acts on dimension {}, ensemble states have dimension {}",
            family.input_dim(),
            ensemble.dim()
        ));
    }
    Ok(())
}

/// `‖Φ_t[Δ]‖` on the grid, `Δ = p1 ρ¹ - p2 ρ²`. For equal priors this is the
/// trace distance of the evolved pair.
pub fn distinguishability_series(
    family: &ChannelFamily,
    ensemble: &HelstromEnsemble,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_dims(family, ensemble)?;
    let delta = ensemble.helstrom_matrix();
    grid.points()
        .par_iter()
        .map(|&t| trace_norm(&family.apply_operator(&delta, t)?))
        .collect()
}

/// Derivative of `values` sampled on `grid`: three-point central differences
/// (valid on non-uniform grids) inside, one-sided differences at both ends.
pub fn finite_difference(grid: &TimeGrid, values: &[f64]) -> Result<Vec<f64>> {
    let t = grid.points();
    let n = t.len();
    if values.len() != n {
        return dim_err(format!("{} values for {} grid points", values.len(), n));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("finite differences need at least three grid points".into()));
    }
    let mut out = Vec::with_capacity(n);
    out.push((values[1] - values[0]) / (t[1] - t[0]));
    for k in 1..n - 1 {
        let h1 = t[k] - t[k - 1];
        let h2 = t[k + 1] - t[k];
        let d = -h2 / (h1 * (h1 + h2)) * values[k - 1]
            + (h2 - h1) / (h1 * h2) * values[k]
            + h1 / (h2 * (h1 + h2)) * values[k + 1];
        out.push(d);
    }
    out.push((values[n - 1] - values[n - 2]) / (t[n - 1] - t[n - 2]));
    Ok(out)
}

/// `σ(t) = d/dt ‖Φ_t[Δ]‖` by finite differences.
pub fn sigma_series(family: &ChannelFamily, ensemble: &HelstromEnsemble, grid: &TimeGrid) -> Result<Vec<f64>> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument("σ needs at least three grid points".into()));
    }
    let d = distinguishability_series(family, ensemble, grid)?;
    finite_difference(grid, &d)
}

/// Sum of positive increments and the maximal runs where they occur.
pub fn increment_measure(grid: &TimeGrid, series: &[f64]) -> (f64, Vec<(f64, f64)>) {
    let t = grid.points();
    let mut value = 0.0;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    for k in 0..series.len().saturating_sub(1) {
        let inc = series[k + 1] - series[k];
        if inc > INCREMENT_FLOOR {
            value += inc;
            if open.is_none() {
                open = Some(t[k]);
            }
        } else if let Some(lo) = open.take() {
            intervals.push((lo, t[k]));
        }
    }
    if let Some(lo) = open {
        intervals.push((lo, t[series.len() - 1]));
    }
    (value, intervals)
}

/// The increment-sum measure for a fixed preparation.
pub fn nm_measure(family: &ChannelFamily, ensemble: &HelstromEnsemble, grid: &TimeGrid) -> Result<NMEstimate> {
    let series = distinguishability_series(family, ensemble, grid)?;
    Ok(NMEstimate::from_series(ensemble.clone(), grid, &series))
}

/// Exact zeros of the coherence factor `k(t) = Σ q_i e^{-(γ_i + iλ_i)t}` of a
/// two-component dephasing mixture up to `t_end`. Distinguishability of
/// equatorial pairs has `|cos|`-type kinks there.
pub fn dephasing_kink_times(spec: &MixtureSpec, t_end: f64) -> Vec<f64> {
    let params: Vec<(f64, f64)> = spec
        .components()
        .iter()
        .filter_map(|c| match c.representation() {
            Representation::Dephasing(d) => Some((d.gamma(), d.lambda())),
            _ => None,
        })
        .collect();
    if params.len() != 2 || spec.len() != 2 {
        return Vec::new();
    }
    let q = spec.weights();
    let ((g1, l1), (g2, l2)) = (params[0], params[1]);
    let dl = (l1 - l2).abs();
    if dl == 0.0 || !t_end.is_finite() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut m = 0u32;
    loop {
        let t = (2 * m + 1) as f64 * std::f64::consts::PI / dl;
        if t > t_end {
            break;
        }
        let gap = q[0] * (-g1 * t).exp() - q[1] * (-g2 * t).exp();
        if gap.abs() <= 1e-12 {
            out.push(t);
        }
        m += 1;
    }
    out
}

/// `grid` augmented with [`dephasing_kink_times`].
pub fn kink_aware_grid(spec: &MixtureSpec, grid: &TimeGrid) -> TimeGrid {
    grid.with_extra_points(&dephasing_kink_times(spec, grid.t_end()))
}
