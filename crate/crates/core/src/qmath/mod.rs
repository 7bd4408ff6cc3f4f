//! Dense complex linear algebra on small Hilbert spaces.

mod eig;
mod matrix;
pub mod random;
mod state;
mod tensor;

pub(crate) use eig::{diagonal_blocks, trace_norm_blocked};
pub use eig::{eigvalsh, expm, hermitian_eig, trace_norm, unitary_exp, HermitianEig, HERMITIAN_TOL};
pub use matrix::{CMatrix, C64, I, ONE, ZERO};
pub use state::{QState, PSD_TOL, STATE_TOL};
pub use tensor::{embed, kron, kron_all, partial_trace, TensorLayout};

