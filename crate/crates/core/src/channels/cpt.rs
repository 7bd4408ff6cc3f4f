use crate::error::Result;
use crate::qmath::{eigvalsh, kron, CMatrix, C64};

use super::ChannelFamily;

/// Most negative Choi eigenvalue accepted as completely positive.
pub const CHOI_EIG_TOL: f64 = 1e-9;
/// Largest accepted deviation from trace preservation.
pub const TRACE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CptSample {
    pub t: f64,
    /// `max_{ij} |Tr Φ_t(|i⟩⟨j|) - δ_ij|`
    pub trace_residual: f64,
    pub min_choi_eigenvalue: f64,
}

impl CptSample {
    pub fn passed(&self) -> bool {
        self.trace_residual <= TRACE_RESIDUAL_TOL && self.min_choi_eigenvalue >= -CHOI_EIG_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CptReport {
    pub family: String,
    pub samples: Vec<CptSample>,
}

impl CptReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(CptSample::passed)
    }

    pub fn worst_trace_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.trace_residual).fold(0.0, f64::max)
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.min_choi_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `Σ_ij |i⟩⟨j| ⊗ Φ_t(|i⟩⟨j|)`, i.e. the family applied to the second half of
/// the unnormalized maximally entangled state.
pub fn choi_matrix(family: &ChannelFamily, t: f64) -> Result<CMatrix> {
    let d = family.input_dim();
    let dout = family.output_dim();
    let mut choi = CMatrix::zeros(d * dout, d * dout);
    for i in 0..d {
        for j in 0..d {
            let out = family.apply_operator(&CMatrix::unit(d, i, j), t)?;
            choi += &kron(&CMatrix::unit(d, i, j), &out);
        }
    }
    Ok(choi)
}

fn sample(family: &ChannelFamily, t: f64) -> Result<CptSample> {
    let d = family.input_dim();
    let mut trace_residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let out = family.apply_operator(&CMatrix::unit(d, i, j), t)?;
            let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            trace_residual = trace_residual.max((out.trace() - want).norm());
        }
    }
    let choi = choi_matrix(family, t)?.hermitian_part();
    let min_choi_eigenvalue = eigvalsh(&choi)?.last().copied().unwrap_or(0.0);
    Ok(CptSample {
        t,
        trace_residual,
        min_choi_eigenvalue,
    })
}

/// Checks trace preservation and Choi positivity at each requested time.
/// Evaluation failures (e.g. a negative time) propagate as errors; numerical
/// violations are carried in the report.
pub fn verify_cpt(family: &ChannelFamily, times: &[f64]) -> Result<CptReport> {
    let samples = times
        .iter()
        .map(|&t| sample(family, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(CptReport {
        family: family.kind().to_string(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dilate, mix, MixtureSpec};
    use crate::qmath::random::random_weights;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_choi_is_maximally_entangled_projector() {
        let f = ChannelFamily::identity(2);
        let choi = choi_matrix(&f, 0.0).unwrap();
        // |Ω⟩ = |00⟩ + |11⟩
        let omega = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        assert!(choi.max_abs_diff(&CMatrix::outer(&omega, &omega)) < 1e-15);
        let report = verify_cpt(&f, &[0.0, 1.0]).unwrap();
        assert!(report.passed());
        assert!(report.min_choi_eigenvalue().abs() < 1e-12);
    }

    #[test]
    fn dephasing_is_cpt_over_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let f = ChannelFamily::dephasing(rng.gen_range(0.0..2.0), rng.gen_range(-10.0..10.0)).unwrap();
            let times: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..20.0)).collect();
            assert!(verify_cpt(&f, &times).unwrap().passed());
        }
    }

    #[test]
    fn mixtures_and_dilations_of_cpt_families_are_cpt() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.gen_range(1..4);
            let comps: Vec<_> = (0..n)
                .map(|k| {
                    if k % 2 == 0 {
                        ChannelFamily::dephasing(rng.gen_range(0.0..1.0), rng.gen_range(-5.0..5.0)).unwrap()
                    } else {
                        ChannelFamily::amplitude_damping(rng.gen_range(0.0..1.0)).unwrap()
                    }
                })
                .collect();
            let spec = MixtureSpec::new(random_weights(&mut rng, n), comps).unwrap();
            let times = [0.0, 0.3, 1.0, 4.0];
            assert!(verify_cpt(&mix(&spec), &times).unwrap().passed());
            assert!(verify_cpt(&dilate(&spec), &times).unwrap().passed());
        }
    }

    #[test]
    fn transpose_map_is_flagged() {
        // the transpose is positive and trace preserving but not CP
        let ops = std::sync::Arc::new(|_t: f64| vec![CMatrix::identity(2)]);
        let id = ChannelFamily::kraus(2, "identity-kraus", ops);
        assert!(verify_cpt(&id, &[1.0]).unwrap().passed());
        let choi = choi_matrix(&ChannelFamily::identity(2), 0.0).unwrap();
        // partial transpose of the identity Choi matrix is the swap, eigenvalue -1
        let mut swap = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = choi[(i * 2 + i, j * 2 + j)];
            }
        }
        assert!(eigvalsh(&swap).unwrap()[3] < -0.5);
    }
}
