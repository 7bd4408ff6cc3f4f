use crate::error::{Error, Result};

use super::eig::eigvalsh;
use super::matrix::{CMatrix, C64};

/// Hermiticity and trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// A density matrix on a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    matrix: CMatrix,
}

impl QState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::validate(&matrix)?;
        Ok(QState { matrix })
    }

    /// Wraps a matrix known to be a state, e.g. the output of a CPT map.
    pub fn new_unchecked(matrix: CMatrix) -> Self {
        QState { matrix }
    }

    pub fn validate(m: &CMatrix) -> Result<()> {
        if !m.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = m.hermiticity_residual();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = eigvalsh(m)?.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Pure state from (not necessarily normalized) amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(QState {
            matrix: CMatrix::outer(&v, &v),
        })
    }

    /// `|i⟩⟨i|`
    pub fn basis(dim: usize, i: usize) -> Self {
        QState {
            matrix: CMatrix::projector(dim, i),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        QState {
            matrix: CMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Qubit state `(I + r·σ)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !norm.is_finite() || norm > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector norm {norm} exceeds 1")));
        }
        let m = CMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(0.5 * (1.0 + r[2]), 0.0),
                C64::new(0.5 * r[0], -0.5 * r[1]),
                C64::new(0.5 * r[0], 0.5 * r[1]),
                C64::new(0.5 * (1.0 - r[2]), 0.0),
            ],
        )?;
        Ok(QState { matrix: m })
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let m = &self.matrix;
        Some([
            2.0 * m[(1, 0)].re,
            2.0 * m[(1, 0)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}
