use crate::error::{dim_err, Error, Result};
use crate::qmath::{CMatrix, QState};

use super::{ChannelFamily, Representation};

/// Tolerance on `Σ q_i = 1`.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Probability weights `q_i` together with the families being mixed.
#[derive(Clone, Debug)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<ChannelFamily>,
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("empty weight list".into()));
    }
    if weights.iter().any(|q| !q.is_finite() || *q < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weights must be finite and non-negative: {weights:?}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidArgument(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, components: Vec<ChannelFamily>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("empty component list".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        check_weights(&weights)?;
        let din = components[0].input_dim();
        let dout = components[0].output_dim();
        if components
            .iter()
            .any(|c| c.input_dim() != din || c.output_dim() != dout)
        {
            return dim_err("all mixture components must share their dimensions");
        }
        Ok(MixtureSpec {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ChannelFamily] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn system_dim(&self) -> usize {
        self.components[0].input_dim()
    }

    fn component_dim(&self) -> usize {
        self.components[0].output_dim()
    }

    /// `ρ_A = Σ q_i Π_i`
    pub fn ancilla_state(&self) -> QState {
        QState::new_unchecked(CMatrix::real_diag(&self.weights))
    }

    /// Component outputs `Φ^{(i)}_t[X]`, unweighted.
    pub fn component_outputs(&self, x: &CMatrix, t: f64) -> Result<Vec<CMatrix>> {
        self.components
            .iter()
            .map(|c| c.apply_operator(x, t))
            .collect()
    }

    pub(crate) fn apply_mixture(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        let d = self.component_dim();
        let mut out = CMatrix::zeros(d, d);
        for (q, c) in self.weights.iter().zip(&self.components) {
            out += &c.apply_operator(x, t)?.scale_real(*q);
        }
        Ok(out)
    }

    pub(crate) fn apply_dilated(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        let outs = self.component_outputs(x, t)?;
        Ok(block_embed(&self.weights, &outs))
    }
}

/// `Σ q_i X_i ⊗ Π_i` on `S ⊗ A`, written directly into the ancilla-diagonal
/// blocks (index `s·n + i`).
pub(crate) fn block_embed(weights: &[f64], blocks: &[CMatrix]) -> CMatrix {
    let n = blocks.len();
    let d = blocks[0].dim();
    let mut out = CMatrix::zeros(d * n, d * n);
    for (i, (q, b)) in weights.iter().zip(blocks).enumerate() {
        for r in 0..d {
            for c in 0..d {
                out[(r * n + i, c * n + i)] = b[(r, c)] * *q;
            }
        }
    }
    out
}

/// Convex mixture `Φ_t = Σ q_i Φ^{(i)}_t`.
pub fn mix(spec: &MixtureSpec) -> ChannelFamily {
    ChannelFamily::from_parts(
        spec.system_dim(),
        spec.component_dim(),
        Representation::Mixture(spec.clone()),
    )
}

/// Ancilla dilation `Λ_t[ρ] = Σ q_i Φ^{(i)}_t[ρ] ⊗ Π_i` with output on
/// `S ⊗ A`, `dim A = n`.
pub fn dilate(spec: &MixtureSpec) -> ChannelFamily {
    ChannelFamily::from_parts(
        spec.system_dim(),
        spec.component_dim() * spec.len(),
        Representation::Dilated(spec.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::random::{random_state, random_traceless_hermitian, random_weights};
    use crate::qmath::{kron, partial_trace, trace_norm, TensorLayout, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_dephasing_spec(rng: &mut ChaCha8Rng, n: usize) -> MixtureSpec {
        let comps = (0..n)
            .map(|_| ChannelFamily::dephasing(rng.gen_range(0.0..1.0), rng.gen_range(-7.0..7.0)).unwrap())
            .collect();
        MixtureSpec::new(random_weights(rng, n), comps).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(MixtureSpec::new(vec![], vec![]).is_err());
        let d = ChannelFamily::dephasing(0.1, 0.0).unwrap();
        assert!(MixtureSpec::new(vec![0.5, 0.6], vec![d.clone(), d.clone()]).is_err());
        assert!(MixtureSpec::new(vec![1.2, -0.2], vec![d.clone(), d.clone()]).is_err());
        assert!(MixtureSpec::new(vec![1.0], vec![d.clone(), d.clone()]).is_err());
        let three = ChannelFamily::identity(3);
        assert!(MixtureSpec::new(vec![0.5, 0.5], vec![d, three]).is_err());
    }

    #[test]
    fn single_component_mixture_is_the_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = ChannelFamily::dephasing(0.3, 1.0).unwrap();
        let m = mix(&MixtureSpec::new(vec![1.0], vec![c.clone()]).unwrap());
        let rho = random_state(&mut rng, 2);
        for t in [0.0, 0.5, 3.0] {
            let a = m.apply(&rho, t).unwrap();
            let b = c.apply(&rho, t).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
        }
    }

    #[test]
    fn mixture_is_weighted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..5 {
            let spec = random_dephasing_spec(&mut rng, n);
            let fam = mix(&spec);
            let rho = random_state(&mut rng, 2);
            let t = rng.gen_range(0.0..5.0);
            let mut want = CMatrix::zeros(2, 2);
            for (q, c) in spec.weights().iter().zip(spec.components()) {
                want += &c.apply(&rho, t).unwrap().matrix().scale_real(*q);
            }
            assert!(fam.apply(&rho, t).unwrap().matrix().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn worked_mixture_coherence_vanishes_at_two() {
        let spec = MixtureSpec::new(
            vec![0.5, 0.5],
            vec![
                ChannelFamily::dephasing(1.0 / 3.0, PI / 2.0).unwrap(),
                ChannelFamily::dephasing(1.0 / 3.0, 0.0).unwrap(),
            ],
        )
        .unwrap();
        let rho = QState::from_bloch([1.0, 0.0, 0.0]).unwrap();
        let fam = mix(&spec);
        for t in [0.0, 0.7, 2.0, 3.1] {
            let out = fam.apply(&rho, t).unwrap();
            let kappa = out.matrix()[(1, 0)] / rho.matrix()[(1, 0)];
            let want = C64::from_polar((-t / 3.0f64).exp(), 0.0)
                * (C64::from_polar(1.0, -PI * t / 2.0) + 1.0)
                * 0.5;
            assert!((kappa - want).norm() < 1e-15);
        }
        let at2 = fam.apply(&rho, 2.0).unwrap();
        assert!(at2.matrix()[(1, 0)].norm() < 1e-16);
    }

    #[test]
    fn dilation_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..5 {
            let spec = random_dephasing_spec(&mut rng, n);
            let lam = dilate(&spec);
            let phi = mix(&spec);
            let layout = TensorLayout::new(vec![2, n]).unwrap();
            for _ in 0..10 {
                let rho = random_state(&mut rng, 2);
                let t = rng.gen_range(0.0..6.0);
                let out = lam.apply(&rho, t).unwrap();
                assert_eq!(out.dim(), 2 * n);
                let tr_a = partial_trace(out.matrix(), &layout, &[1]).unwrap();
                assert!(tr_a.max_abs_diff(phi.apply(&rho, t).unwrap().matrix()) < 1e-12);
                let tr_s = partial_trace(out.matrix(), &layout, &[0]).unwrap();
                assert!(tr_s.max_abs_diff(spec.ancilla_state().matrix()) < 1e-12);
                // no coupling between distinct ancilla blocks
                for r in 0..2 * n {
                    for c in 0..2 * n {
                        if r % n != c % n {
                            assert!(out.matrix()[(r, c)].norm() <= 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dilation_at_zero_is_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = random_dephasing_spec(&mut rng, 3);
        let rho = random_state(&mut rng, 2);
        let out = dilate(&spec).apply(&rho, 0.0).unwrap();
        let want = kron(rho.matrix(), spec.ancilla_state().matrix());
        assert!(out.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn degenerate_weights_keep_the_zero_block() {
        let c1 = ChannelFamily::dephasing(0.2, 1.0).unwrap();
        let c2 = ChannelFamily::dephasing(0.5, 0.0).unwrap();
        let spec = MixtureSpec::new(vec![1.0, 0.0], vec![c1.clone(), c2]).unwrap();
        let rho = QState::from_bloch([0.6, 0.0, 0.8]).unwrap();
        let out = dilate(&spec).apply(&rho, 1.5).unwrap();
        let want = kron(c1.apply(&rho, 1.5).unwrap().matrix(), &CMatrix::projector(2, 0));
        assert!(out.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn trace_norm_is_additive_under_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = rng.gen_range(1..5);
            let spec = random_dephasing_spec(&mut rng, n);
            let x = random_traceless_hermitian(&mut rng, 2);
            let t = rng.gen_range(0.0..8.0);
            let lhs = trace_norm(&dilate(&spec).apply_operator(&x, t).unwrap()).unwrap();
            let rhs: f64 = spec
                .weights()
                .iter()
                .zip(spec.component_outputs(&x, t).unwrap())
                .map(|(q, y)| q * trace_norm(&y).unwrap())
                .sum();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
