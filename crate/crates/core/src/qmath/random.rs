//! Random matrices and states for property checks and randomized searches.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, C64};
use super::state::QState;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let data = (0..n * n).map(|_| gaussian(rng)).collect();
    CMatrix::from_vec(n, n, data).expect("finite gaussian entries")
}

/// Hermitian matrix with Gaussian entries (GUE up to scaling).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    ginibre(rng, n).hermitian_part()
}

/// Hermitian and traceless.
pub fn random_traceless_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let h = random_hermitian(rng, n);
    let shift = h.trace().re / n as f64;
    &h - &CMatrix::identity(n).scale_real(shift)
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = ginibre(rng, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for u in &cols {
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let mut u = CMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QState {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    QState::pure(&v).expect("nonzero gaussian vector")
}

/// Full-rank mixed state `G G† / Tr(G G†)` with Ginibre `G`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QState {
    let g = ginibre(rng, n);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    QState::new_unchecked(gg.scale_real(1.0 / tr).hermitian_part())
}

/// A pair of orthogonal pure states, the two first columns of a Haar unitary.
pub fn random_orthogonal_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (QState, QState) {
    assert!(n >= 2);
    let u = random_unitary(rng, n);
    let a = QState::pure(&u.column(0)).unwrap();
    let b = QState::pure(&u.column(1)).unwrap();
    (a, b)
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
