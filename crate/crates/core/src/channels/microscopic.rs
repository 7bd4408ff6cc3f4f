//! Four-party microscopic representation of a mixture: system `S`,
//! environments `E_1 … E_n` and an `n`-level ancilla `A`, evolved by
//! `H = Σ_i H_i ⊗ Π_i` with `H_i` acting on `S ⊗ E_i`.

use crate::error::{dim_err, Error, Result};
use crate::qmath::{embed, hermitian_eig, kron, kron_all, partial_trace, unitary_exp, CMatrix, HermitianEig, QState, TensorLayout};

use super::mixture::check_weights;
use super::{ChannelFamily, MixtureSpec, Representation};

/// Largest total Hilbert-space dimension built without an explicit cap.
pub const DEFAULT_DIMENSION_CAP: usize = 256;

#[derive(Clone, Debug)]
pub struct MicroscopicModel {
    system_dim: usize,
    hamiltonians: Vec<CMatrix>,
    env_states: Vec<QState>,
    ancilla_weights: Vec<f64>,
}

impl MicroscopicModel {
    pub fn new(
        system_dim: usize,
        hamiltonians: Vec<CMatrix>,
        env_states: Vec<QState>,
        ancilla_weights: Vec<f64>,
    ) -> Result<Self> {
        let n = hamiltonians.len();
        if n == 0 {
            return Err(Error::InvalidArgument("a microscopic model needs at least one component".into()));
        }
        if env_states.len() != n || ancilla_weights.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} Hamiltonians, {} environment states and {} weights",
                n,
                env_states.len(),
                ancilla_weights.len()
            )));
        }
        check_weights(&ancilla_weights)?;
        for (i, (h, env)) in hamiltonians.iter().zip(&env_states).enumerate() {
            let want = system_dim * env.dim();
            if !h.is_square() || h.dim() != want {
                return dim_err(format!(
                    "H_{} is {}x{}, expected {want}x{want}",
                    i + 1,
                    h.rows(),
                    h.cols()
                ));
            }
            if !h.is_hermitian(1e-10 * h.max_abs().max(1.0)) {
                return Err(Error::Domain(format!("H_{} is not Hermitian", i + 1)));
            }
        }
        Ok(MicroscopicModel {
            system_dim,
            hamiltonians,
            env_states,
            ancilla_weights,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn env_dims(&self) -> Vec<usize> {
        self.env_states.iter().map(QState::dim).collect()
    }

    pub fn hamiltonians(&self) -> &[CMatrix] {
        &self.hamiltonians
    }

    pub fn env_states(&self) -> &[QState] {
        &self.env_states
    }

    pub fn ancilla_weights(&self) -> &[f64] {
        &self.ancilla_weights
    }

    pub fn num_components(&self) -> usize {
        self.hamiltonians.len()
    }

    /// `S, E_1, …, E_n, A`
    pub fn layout(&self) -> TensorLayout {
        let mut dims = vec![self.system_dim];
        dims.extend(self.env_dims());
        dims.push(self.num_components());
        TensorLayout::new(dims).expect("positive dimensions")
    }

    pub fn total_dim(&self) -> usize {
        self.layout().total_dim()
    }

    /// `H_i ⊗ Π_i` padded with identities on the other environments.
    pub fn embedded_term(&self, i: usize) -> CMatrix {
        let n = self.num_components();
        let layout = self.layout();
        let term = kron(&self.hamiltonians[i], &CMatrix::projector(n, i));
        embed(&term, &layout, &[0, i + 1, n + 1]).expect("consistent layout")
    }

    /// `H = Σ_i H_i ⊗ Π_i` on the full space.
    pub fn total_hamiltonian(&self) -> CMatrix {
        let d = self.total_dim();
        (0..self.num_components()).fold(CMatrix::zeros(d, d), |mut acc, i| {
            acc += &self.embedded_term(i);
            acc
        })
    }

    /// `Π_i exp(-i H_i Π_i t)`, each factor exponentiated on its own.
    pub fn factorized_propagator(&self, t: f64) -> Result<CMatrix> {
        let d = self.total_dim();
        let mut u = CMatrix::identity(d);
        for i in 0..self.num_components() {
            u = &u * &unitary_exp(&self.embedded_term(i), t)?;
        }
        Ok(u)
    }

    /// The component families `Φ^{(i)}_t[ρ] = Tr_{E_i}[U^{(i)}_t ρ ⊗ ρ_{E_i} U^{(i)†}_t]`.
    pub fn component_families(&self) -> Result<Vec<ChannelFamily>> {
        self.hamiltonians
            .iter()
            .zip(&self.env_states)
            .map(|(h, env)| ChannelFamily::coupled(self.system_dim, h.clone(), env.clone()))
            .collect()
    }

    pub fn mixture_spec(&self) -> Result<MixtureSpec> {
        MixtureSpec::new(self.ancilla_weights.clone(), self.component_families()?)
    }

    pub fn ancilla_state(&self) -> QState {
        QState::new_unchecked(CMatrix::real_diag(&self.ancilla_weights))
    }
}

/// Evaluates `Λ_t[ρ] = Tr_{E_1…E_n}[U_t (ρ ⊗ ρ_{E_1} ⊗ … ⊗ ρ_A) U_t†]` by
/// exact diagonalization of the total Hamiltonian.
#[derive(Clone, Debug)]
pub struct MicroscopicFamily {
    model: MicroscopicModel,
    layout: TensorLayout,
    eig: HermitianEig,
}

impl MicroscopicFamily {
    pub fn new(model: MicroscopicModel, dimension_cap: usize) -> Result<Self> {
        let layout = model.layout();
        if layout.total_dim() > dimension_cap {
            return dim_err(format!(
                "total dimension {} exceeds the cap of {dimension_cap}",
                layout.total_dim()
            ));
        }
        let eig = hermitian_eig(&model.total_hamiltonian())?;
        Ok(MicroscopicFamily { model, layout, eig })
    }

    pub fn model(&self) -> &MicroscopicModel {
        &self.model
    }

    /// `U_t = exp(-iHt)` from the spectral decomposition of the full `H`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eig.propagator(t)
    }

    pub(crate) fn apply(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        let ancilla = self.model.ancilla_state();
        let mut factors: Vec<&CMatrix> = vec![x];
        factors.extend(self.model.env_states.iter().map(QState::matrix));
        factors.push(ancilla.matrix());
        let initial = kron_all(&factors);
        let evolved = initial.conjugate_by(&self.propagator(t));
        let envs: Vec<usize> = (1..=self.model.num_components()).collect();
        partial_trace(&evolved, &self.layout, &envs)
    }
}

/// Channel family on `S ⊗ A` built from the microscopic model.
pub fn microscopic_family(model: MicroscopicModel) -> Result<ChannelFamily> {
    microscopic_family_with_cap(model, DEFAULT_DIMENSION_CAP)
}

pub fn microscopic_family_with_cap(model: MicroscopicModel, cap: usize) -> Result<ChannelFamily> {
    let d = model.system_dim();
    let n = model.num_components();
    let fam = MicroscopicFamily::new(model, cap)?;
    Ok(ChannelFamily::from_parts(
        d,
        d * n,
        Representation::Microscopic(Box::new(fam)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dilate, mix};
    use crate::qmath::random::{random_hermitian, random_state, random_weights};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(rng: &mut ChaCha8Rng, n: usize) -> MicroscopicModel {
        let hs = (0..n).map(|_| random_hermitian(rng, 4)).collect();
        let envs = (0..n).map(|_| random_state(rng, 2)).collect();
        MicroscopicModel::new(2, hs, envs, random_weights(rng, n)).unwrap()
    }

    #[test]
    fn validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 4);
        let env = QState::basis(2, 0);
        assert!(MicroscopicModel::new(2, vec![], vec![], vec![]).is_err());
        assert!(MicroscopicModel::new(2, vec![h.clone()], vec![env.clone()], vec![0.5]).is_err());
        assert!(MicroscopicModel::new(2, vec![random_hermitian(&mut rng, 3)], vec![env.clone()], vec![1.0]).is_err());
        assert!(MicroscopicModel::new(2, vec![CMatrix::unit(4, 0, 1)], vec![env.clone()], vec![1.0]).is_err());
        let big = MicroscopicModel::new(
            2,
            vec![h.clone(); 3],
            vec![env.clone(); 3],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        assert_eq!(big.total_dim(), 2 * 8 * 3);
        assert!(microscopic_family_with_cap(big, 32).is_err());
    }

    #[test]
    fn zero_hamiltonians_give_product_state() {
        let model = MicroscopicModel::new(
            2,
            vec![CMatrix::zeros(4, 4), CMatrix::zeros(6, 6)],
            vec![QState::basis(2, 1), QState::maximally_mixed(3)],
            vec![0.3, 0.7],
        )
        .unwrap();
        let fam = microscopic_family(model.clone()).unwrap();
        let rho = QState::from_bloch([0.2, 0.3, -0.4]).unwrap();
        let want = kron(rho.matrix(), model.ancilla_state().matrix());
        for t in [0.0, 1.0, 4.5] {
            assert!(fam.apply(&rho, t).unwrap().matrix().max_abs_diff(&want) < 1e-13);
        }
    }

    #[test]
    fn matches_dilation_of_coupled_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 2, 3] {
            let model = random_model(&mut rng, n);
            let spec = model.mixture_spec().unwrap();
            let micro = microscopic_family(model).unwrap();
            let lam = dilate(&spec);
            let phi = mix(&spec);
            let layout = TensorLayout::new(vec![2, n]).unwrap();
            for _ in 0..5 {
                let rho = random_state(&mut rng, 2);
                let t = rng.gen_range(0.0..5.0);
                let a = micro.apply(&rho, t).unwrap();
                let b = lam.apply(&rho, t).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10);
                let tr_a = partial_trace(a.matrix(), &layout, &[1]).unwrap();
                assert!(tr_a.max_abs_diff(phi.apply(&rho, t).unwrap().matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn propagator_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = random_model(&mut rng, 2);
        let fam = MicroscopicFamily::new(model.clone(), DEFAULT_DIMENSION_CAP).unwrap();
        for t in [0.0, 0.4, 2.0, 5.0] {
            let full = fam.propagator(t);
            let split = model.factorized_propagator(t).unwrap();
            assert!(full.max_abs_diff(&split) < 1e-10);
        }
    }
}
