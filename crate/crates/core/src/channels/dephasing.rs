use crate::error::{Error, Result};
use crate::qmath::{CMatrix, C64};

/// Pure dephasing of a qubit in the `σ_z` eigenbasis.
///
/// Populations are untouched and the coherence `⟨1|ρ|0⟩` is multiplied by
/// `μ(t) = exp(-(γ + iλ) t)` (`⟨0|ρ|1⟩` by its conjugate). For `γ = 0` this
/// is the unitary family generated by `H = -(λ/2) σ_z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingSemigroup {
    gamma: f64,
    lambda: f64,
}

impl DephasingSemigroup {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !gamma.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidArgument("dephasing parameters must be finite".into()));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dephasing rate must be non-negative, got {gamma}"
            )));
        }
        Ok(DephasingSemigroup { gamma, lambda })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Coherence multiplier `μ(t)`.
    pub fn multiplier(&self, t: f64) -> C64 {
        C64::from_polar((-self.gamma * t).exp(), -self.lambda * t)
    }

    pub(crate) fn apply(&self, x: &CMatrix, t: f64) -> CMatrix {
        let mu = self.multiplier(t);
        let mut out = x.clone();
        out[(1, 0)] *= mu;
        out[(0, 1)] *= mu.conj();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::QState;

    #[test]
    fn rejects_negative_rate() {
        assert!(DephasingSemigroup::new(-0.1, 0.0).is_err());
        assert!(DephasingSemigroup::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn multiplier_is_contractive() {
        let d = DephasingSemigroup::new(0.2, 3.0).unwrap();
        for k in 0..100 {
            assert!(d.multiplier(0.1 * k as f64).norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn coherence_decay_example() {
        // ⟨1|ρ|0⟩ = 1/2, γ = 1/3, λ = 0, t = 3 → e^{-1}/2
        let rho = QState::from_bloch([1.0, 0.0, 0.0]).unwrap();
        let d = DephasingSemigroup::new(1.0 / 3.0, 0.0).unwrap();
        let out = d.apply(rho.matrix(), 3.0);
        assert!((out[(1, 0)] - C64::new((-1.0f64).exp() / 2.0, 0.0)).norm() < 1e-15);
        assert_eq!(out[(0, 0)], rho.matrix()[(0, 0)]);
        assert_eq!(out[(1, 1)], rho.matrix()[(1, 1)]);
    }
}
