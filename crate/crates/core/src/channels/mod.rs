//! Time-parameterized CPT channel families.
//!
//! A [`ChannelFamily`] is an immutable description of `t ↦ Φ_t`; evaluation
//! happens lazily in [`ChannelFamily::apply`] / [`ChannelFamily::apply_operator`].
//! Every family is linear, so `apply_operator` accepts arbitrary operators
//! (state differences, Helstrom matrices, `|i⟩⟨j|` for the Choi matrix).

mod cpt;
mod dephasing;
mod microscopic;
mod mixture;

use std::fmt;
use std::sync::Arc;

use crate::error::{dim_err, Error, Result};
use crate::qmath::{expm, hermitian_eig, kron, partial_trace, CMatrix, HermitianEig, QState, TensorLayout, C64, I};

pub use cpt::{choi_matrix, verify_cpt, CptReport, CptSample, CHOI_EIG_TOL, TRACE_RESIDUAL_TOL};
pub use dephasing::DephasingSemigroup;
pub use microscopic::{microscopic_family, microscopic_family_with_cap, MicroscopicFamily, MicroscopicModel, DEFAULT_DIMENSION_CAP};
pub(crate) use mixture::check_weights;
pub use mixture::{dilate, mix, MixtureSpec, WEIGHT_TOL};

/// Closure producing the Kraus operators at time `t`.
pub type KrausFn = dyn Fn(f64) -> Vec<CMatrix> + Send + Sync;

/// Unitary family `ρ ↦ U_t ρ U_t†` with `U_t = exp(-iHt)`.
#[derive(Clone, Debug)]
pub struct UnitaryFamily {
    hamiltonian: CMatrix,
    eig: HermitianEig,
}

impl UnitaryFamily {
    pub fn new(hamiltonian: CMatrix) -> Result<Self> {
        let eig = hermitian_eig(&hamiltonian)?;
        Ok(UnitaryFamily { hamiltonian, eig })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eig.propagator(t)
    }
}

/// Kraus representation with time-dependent operators.
#[derive(Clone)]
pub struct KrausFamily {
    dim: usize,
    label: String,
    ops: Arc<KrausFn>,
}

impl KrausFamily {
    pub fn new(dim: usize, label: impl Into<String>, ops: Arc<KrausFn>) -> Self {
        KrausFamily {
            dim,
            label: label.into(),
            ops,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operators(&self, t: f64) -> Vec<CMatrix> {
        (self.ops)(t)
    }
}

impl fmt::Debug for KrausFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KrausFamily")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

/// Semigroup `exp(tL)` for a Lindblad generator `L`, stored as a
/// column-stacking superoperator.
#[derive(Clone, Debug)]
pub struct LiouvilleFamily {
    dim: usize,
    generator: CMatrix,
}

impl LiouvilleFamily {
    /// `L[ρ] = -i[H, ρ] + Σ_k r_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`
    pub fn lindblad(hamiltonian: &CMatrix, jumps: &[(f64, CMatrix)]) -> Result<Self> {
        if !hamiltonian.is_hermitian(1e-10) {
            return Err(Error::Domain("Lindblad Hamiltonian must be Hermitian".into()));
        }
        let d = hamiltonian.dim();
        let id = CMatrix::identity(d);
        let mut gen = &kron(&id, hamiltonian) - &kron(&hamiltonian.transpose(), &id);
        gen = gen.scale(-I);
        for (rate, l) in jumps {
            if !(rate.is_finite() && *rate >= 0.0) {
                return Err(Error::InvalidArgument(format!("jump rate {rate} must be non-negative")));
            }
            if !l.is_square() || l.dim() != d {
                return dim_err("jump operator dimension does not match the Hamiltonian");
            }
            let ldl = &l.adjoint() * l;
            let mut term = kron(&l.conj(), l);
            term -= &kron(&id, &ldl).scale_real(0.5);
            term -= &kron(&ldl.transpose(), &id).scale_real(0.5);
            gen += &term.scale_real(*rate);
        }
        Ok(LiouvilleFamily { dim: d, generator: gen })
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    fn apply(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        let d = self.dim;
        let prop = expm(&self.generator.scale_real(t))?;
        let mut v = CMatrix::zeros(d * d, 1);
        for j in 0..d {
            for i in 0..d {
                v[(i + j * d, 0)] = x[(i, j)];
            }
        }
        let w = &prop * &v;
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                out[(i, j)] = w[(i + j * d, 0)];
            }
        }
        Ok(out)
    }
}

/// One component of a microscopic model: `Φ_t[ρ] = Tr_E[U_t (ρ ⊗ ρ_E) U_t†]`
/// with `U_t = exp(-iHt)` on `S ⊗ E`.
#[derive(Clone, Debug)]
pub struct CoupledFamily {
    system_dim: usize,
    env_state: QState,
    hamiltonian: CMatrix,
    eig: HermitianEig,
}

impl CoupledFamily {
    pub fn new(system_dim: usize, hamiltonian: CMatrix, env_state: QState) -> Result<Self> {
        let env_dim = env_state.dim();
        if !hamiltonian.is_square() || hamiltonian.dim() != system_dim * env_dim {
            return dim_err(format!(
                "Hamiltonian of size {}x{} does not act on a {}x{} system-environment space",
                hamiltonian.rows(),
                hamiltonian.cols(),
                system_dim,
                env_dim
            ));
        }
        let eig = hermitian_eig(&hamiltonian)?;
        Ok(CoupledFamily {
            system_dim,
            env_state,
            hamiltonian,
            eig,
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn env_state(&self) -> &QState {
        &self.env_state
    }

    fn apply(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        let u = self.eig.propagator(t);
        let joint = kron(x, self.env_state.matrix()).conjugate_by(&u);
        let layout = TensorLayout::new(vec![self.system_dim, self.env_state.dim()])?;
        partial_trace(&joint, &layout, &[1])
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Identity,
    Dephasing(DephasingSemigroup),
    Unitary(UnitaryFamily),
    Kraus(KrausFamily),
    Liouville(LiouvilleFamily),
    Coupled(CoupledFamily),
    /// Convex mixture `Σ q_i Φ^{(i)}_t`.
    Mixture(MixtureSpec),
    /// Ancilla dilation `Σ q_i Φ^{(i)}_t ⊗ Π_i` on `S ⊗ A`.
    Dilated(MixtureSpec),
    Microscopic(Box<MicroscopicFamily>),
}

/// A time-parameterized CPT map `t ↦ Φ_t`.
#[derive(Clone, Debug)]
pub struct ChannelFamily {
    input_dim: usize,
    output_dim: usize,
    repr: Representation,
}

impl ChannelFamily {
    pub(crate) fn from_parts(input_dim: usize, output_dim: usize, repr: Representation) -> Self {
        ChannelFamily {
            input_dim,
            output_dim,
            repr,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(dim, dim, Representation::Identity)
    }

    pub fn dephasing(gamma: f64, lambda: f64) -> Result<Self> {
        let d = DephasingSemigroup::new(gamma, lambda)?;
        Ok(Self::from_parts(2, 2, Representation::Dephasing(d)))
    }

    pub fn unitary(hamiltonian: CMatrix) -> Result<Self> {
        let u = UnitaryFamily::new(hamiltonian)?;
        let d = u.hamiltonian.dim();
        Ok(Self::from_parts(d, d, Representation::Unitary(u)))
    }

    pub fn kraus(dim: usize, label: impl Into<String>, ops: Arc<KrausFn>) -> Self {
        Self::from_parts(dim, dim, Representation::Kraus(KrausFamily::new(dim, label, ops)))
    }

    /// Qubit amplitude damping with rate `gamma`, given by Kraus operators.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidArgument("damping rate must be non-negative".into()));
        }
        let ops: Arc<KrausFn> = Arc::new(move |t: f64| {
            let p = (-gamma * t).exp();
            let k0 = CMatrix::real_diag(&[1.0, p.sqrt()]);
            let mut k1 = CMatrix::zeros(2, 2);
            k1[(0, 1)] = C64::new((1.0 - p).max(0.0).sqrt(), 0.0);
            vec![k0, k1]
        });
        Ok(Self::kraus(2, "amplitude-damping", ops))
    }

    pub fn lindblad(hamiltonian: &CMatrix, jumps: &[(f64, CMatrix)]) -> Result<Self> {
        let l = LiouvilleFamily::lindblad(hamiltonian, jumps)?;
        let d = l.dim;
        Ok(Self::from_parts(d, d, Representation::Liouville(l)))
    }

    pub fn coupled(system_dim: usize, hamiltonian: CMatrix, env_state: QState) -> Result<Self> {
        let c = CoupledFamily::new(system_dim, hamiltonian, env_state)?;
        Ok(Self::from_parts(system_dim, system_dim, Representation::Coupled(c)))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn kind(&self) -> &'static str {
        match &self.repr {
            Representation::Identity => "identity",
            Representation::Dephasing(_) => "dephasing",
            Representation::Unitary(_) => "unitary",
            Representation::Kraus(_) => "kraus",
            Representation::Liouville(_) => "lindblad",
            Representation::Coupled(_) => "coupled",
            Representation::Mixture(_) => "mixture",
            Representation::Dilated(_) => "dilated",
            Representation::Microscopic(_) => "microscopic",
        }
    }

    /// True when every map of the family is unitary (identity, unitary
    /// families, dephasing without decay), so trace norms are conserved.
    pub fn is_unitary(&self) -> bool {
        match &self.repr {
            Representation::Identity | Representation::Unitary(_) => true,
            Representation::Dephasing(d) => d.gamma() == 0.0,
            _ => false,
        }
    }

    /// Applies `Φ_t` to an arbitrary operator on the input space.
    pub fn apply_operator(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
        }
        if !x.is_square() || x.dim() != self.input_dim {
            return dim_err(format!(
                "family acts on dimension {}, got a {}x{} operator",
                self.input_dim,
                x.rows(),
                x.cols()
            ));
        }
        match &self.repr {
            Representation::Identity => Ok(x.clone()),
            Representation::Dephasing(d) => Ok(d.apply(x, t)),
            Representation::Unitary(u) => Ok(x.conjugate_by(&u.propagator(t))),
            Representation::Kraus(k) => {
                let mut out = CMatrix::zeros(self.output_dim, self.output_dim);
                for op in k.operators(t) {
                    out += &x.conjugate_by(&op);
                }
                Ok(out)
            }
            Representation::Liouville(l) => l.apply(x, t),
            Representation::Coupled(c) => c.apply(x, t),
            Representation::Mixture(spec) => spec.apply_mixture(x, t),
            Representation::Dilated(spec) => spec.apply_dilated(x, t),
            Representation::Microscopic(m) => m.apply(x, t),
        }
    }

    /// Evolves a state. The output is trusted to be a state (the family is
    /// CPT by construction) and only scrubbed of rounding asymmetry.
    pub fn apply(&self, rho: &QState, t: f64) -> Result<QState> {
        let out = self.apply_operator(rho.matrix(), t)?;
        Ok(QState::new_unchecked(out.hermitian_part()))
    }
}
