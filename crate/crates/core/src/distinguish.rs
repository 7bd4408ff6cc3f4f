//! Trace distance, Helstrom ensembles and optimal two-state discrimination,
//! with a seeded Monte Carlo oracle for the guessing probability.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::ChannelFamily;
use crate::error::{dim_err, Error, Result};
use crate::qmath::{hermitian_eig, trace_norm, CMatrix, QState, HERMITIAN_TOL};

/// Born probabilities within this distance of 0 or 1 are snapped, so exactly
/// distinguishable preparations give exact success rates.
const BORN_SNAP: f64 = 1e-12;

/// Two preparations `ρ¹`, `ρ²` with prior probabilities `p1`, `p2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelstromEnsemble {
    p1: f64,
    p2: f64,
    rho1: QState,
    rho2: QState,
}

impl HelstromEnsemble {
    /// `p2 = 1 - p1`.
    pub fn new(p1: f64, rho1: QState, rho2: QState) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidArgument(format!("p1 = {p1} is not a probability")));
        }
        if rho1.dim() != rho2.dim() {
            return dim_err(format!(
                "ensemble states have dimensions {} and {}",
                rho1.dim(),
                rho2.dim()
            ));
        }
        Ok(HelstromEnsemble {
            p1,
            p2: 1.0 - p1,
            rho1,
            rho2,
        })
    }

    /// Equal priors, the setting of the plain trace distance.
    pub fn equal(rho1: QState, rho2: QState) -> Result<Self> {
        Self::new(0.5, rho1, rho2)
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn rho1(&self) -> &QState {
        &self.rho1
    }

    pub fn rho2(&self) -> &QState {
        &self.rho2
    }

    pub fn dim(&self) -> usize {
        self.rho1.dim()
    }

    /// `Δ = p1 ρ¹ - p2 ρ²`
    pub fn helstrom_matrix(&self) -> CMatrix {
        &self.rho1.matrix().scale_real(self.p1) - &self.rho2.matrix().scale_real(self.p2)
    }

    pub fn with_p1(&self, p1: f64) -> Result<Self> {
        Self::new(p1, self.rho1.clone(), self.rho2.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationResult {
    pub analytic_pmax: f64,
    pub empirical_rate: f64,
    pub successes: u64,
    pub trials: u64,
    /// `sqrt(rate (1 - rate) / trials)`
    pub std_error: f64,
}

impl DiscriminationResult {
    /// Deviation from the analytic value in units of the binomial standard
    /// error evaluated at the analytic probability.
    pub fn z_score(&self) -> f64 {
        let sd = (self.analytic_pmax * (1.0 - self.analytic_pmax) / self.trials as f64).sqrt();
        let diff = self.empirical_rate - self.analytic_pmax;
        if sd == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff.abs() / sd
        }
    }
}

/// `D(ρ¹, ρ²) = ½ ‖ρ¹ - ρ²‖`
pub fn trace_distance(rho1: &QState, rho2: &QState) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return dim_err("trace distance between states of different dimension");
    }
    Ok(0.5 * trace_norm(&(rho1.matrix() - rho2.matrix()))?)
}

/// `‖p1 ρ¹ - p2 ρ²‖`
pub fn helstrom_norm(ensemble: &HelstromEnsemble) -> f64 {
    trace_norm(&ensemble.helstrom_matrix()).expect("Helstrom matrix is square")
}

/// Optimal guessing probability after the family has acted for time `t`:
/// `½ (1 + ‖Φ_t[Δ]‖)`.
pub fn p_max(ensemble: &HelstromEnsemble, family: &ChannelFamily, t: f64) -> Result<f64> {
    let evolved = family.apply_operator(&ensemble.helstrom_matrix(), t)?;
    Ok(0.5 * (1.0 + trace_norm(&evolved)?))
}

/// Projector onto the strictly positive eigenspace of `Δ`. Outcome `P` means
/// "guess ρ¹"; the kernel of `Δ` is assigned to "guess ρ²".
pub fn optimal_measurement(delta: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(delta)?;
    let cutoff = HERMITIAN_TOL * delta.max_abs().clamp(f64::MIN_POSITIVE, 1.0);
    let n = delta.dim();
    let mut p = CMatrix::zeros(n, n);
    for (k, &l) in eig.values.iter().enumerate() {
        if l > cutoff {
            let v = eig.vectors.column(k);
            p += &CMatrix::outer(&v, &v);
        }
    }
    Ok(p)
}

/// Per-trial generator: stream `index` of the ChaCha8 generator seeded with
/// `seed`. Draws depend only on `(seed, index)`, never on scheduling.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn born(p: &CMatrix, rho: &CMatrix) -> f64 {
    let v = (p * rho).trace().re;
    if v < BORN_SNAP {
        0.0
    } else if v > 1.0 - BORN_SNAP {
        1.0
    } else {
        v
    }
}

/// Simulates `trials` rounds of prepare, evolve, measure, guess.
///
/// Each round draws the preparation label from `(p1, p2)` and a single
/// Bernoulli outcome of the Helstrom measurement for the evolved pair using
/// its exact Born probability.
pub fn monte_carlo_discriminate(
    ensemble: &HelstromEnsemble,
    family: &ChannelFamily,
    t: f64,
    trials: u64,
    seed: u64,
) -> Result<DiscriminationResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let r1 = family.apply(&ensemble.rho1, t)?;
    let r2 = family.apply(&ensemble.rho2, t)?;
    let delta = &r1.matrix().scale_real(ensemble.p1) - &r2.matrix().scale_real(ensemble.p2);
    let proj = optimal_measurement(&delta.hermitian_part())?;
    let guess1_given1 = born(&proj, r1.matrix());
    let guess1_given2 = born(&proj, r2.matrix());
    let p1 = ensemble.p1;

    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let prepared_first = rng.gen::<f64>() < p1;
            let q = if prepared_first { guess1_given1 } else { guess1_given2 };
            let guessed_first = rng.gen::<f64>() < q;
            u64::from(guessed_first == prepared_first)
        })
        .sum();

    let rate = successes as f64 / trials as f64;
    Ok(DiscriminationResult {
        analytic_pmax: 0.5 * (1.0 + trace_norm(&delta)?),
        empirical_rate: rate,
        successes,
        trials,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}
