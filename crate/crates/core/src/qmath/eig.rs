//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! spectral quantities built on it (trace norm, `exp(-iHt)`).

use crate::error::{dim_err, Error, Result};

use super::matrix::{CMatrix, C64, ZERO};

/// Hermiticity tolerance applied to inputs of the spectral routines, relative
/// to `max(1, max |X_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 60;

#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `values`.
    pub vectors: CMatrix,
}

impl HermitianEig {
    /// `V diag(f(λ)) V†`
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(i, k)] * fl[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|l| C64::new(l, 0.0))
    }

    /// `exp(-iHt)` for the decomposed `H`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_fn(|l| C64::from_polar(1.0, -l * t))
    }
}

fn check_hermitian(x: &CMatrix) -> Result<()> {
    if !x.is_square() {
        return dim_err(format!("expected a square matrix, got {}x{}", x.rows(), x.cols()));
    }
    let scale = x.max_abs().max(1.0);
    let res = x.hermiticity_residual();
    if res > HERMITIAN_TOL * scale {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (residual {res:.3e})"
        )));
    }
    Ok(())
}

/// Diagonalizes `a` (row-major, `n`x`n`, assumed Hermitian) in place.
/// On return the diagonal of `a` holds the eigenvalues; when `vecs` is given
/// it is right-multiplied by the accumulated rotations.
fn jacobi(a: &mut [C64], n: usize, mut vecs: Option<&mut [C64]>) {
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let skip = 1e-18 * norm;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= skip {
                    continue;
                }
                rotated = true;
                let phase_c = (apq / mag).conj();
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase_c * s;
                let g_qq = phase_c * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * g_pp + akq * g_qp;
                    a[k * n + q] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if let Some(v) = vecs.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * g_pp + vkq * g_qp;
                        v[k * n + q] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eig(x: &CMatrix) -> Result<HermitianEig> {
    check_hermitian(x)?;
    let n = x.dim();
    let mut a = x.hermitian_part().as_slice().to_vec();
    let mut v = CMatrix::identity(n).as_slice().to_vec();
    jacobi(&mut a, n, Some(&mut v));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[r * n + src];
        }
    }
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues only (descending); skips the eigenvector accumulation.
pub fn eigvalsh(x: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(x)?;
    Ok(eigvalsh_unchecked(x))
}

fn eigvalsh_unchecked(x: &CMatrix) -> Vec<f64> {
    let n = x.dim();
    if n == 1 {
        return vec![x[(0, 0)].re];
    }
    if n == 2 {
        // closed form keeps the hot qubit path cheap
        let a = x[(0, 0)].re;
        let d = x[(1, 1)].re;
        let b = 0.5 * (x[(0, 1)] + x[(1, 0)].conj());
        let m = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![m + r, m - r];
    }
    let mut a = x.hermitian_part().as_slice().to_vec();
    jacobi(&mut a, n, None);
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Index sets of the connected components of the nonzero pattern of `x`.
/// Block-diagonal inputs (ancilla dilations) then decompose exactly.
pub(crate) fn diagonal_blocks(x: &CMatrix) -> Vec<Vec<usize>> {
    let n = x.dim();
    let mut label = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        label[root] = id;
        let mut members = vec![root];
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for j in 0..n {
                if label[j] == usize::MAX && (x[(i, j)] != ZERO || x[(j, i)] != ZERO) {
                    label[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

/// `|λ₁| + |λ₂|` of the Hermitian part of `[[a, b], [c, d]]`.
fn abs_sum_2x2(a: C64, b: C64, c: C64, d: C64) -> f64 {
    let b = 0.5 * (b + c.conj());
    let m = 0.5 * (a.re + d.re);
    let r = (0.25 * (a.re - d.re) * (a.re - d.re) + b.norm_sqr()).sqrt();
    2.0 * m.abs().max(r)
}

/// `Σ|λ_i|` of a Hermitian `x` that is block diagonal on `blocks`.
pub(crate) fn block_abs_sum(x: &CMatrix, blocks: &[Vec<usize>]) -> f64 {
    blocks
        .iter()
        .map(|idx| match idx[..] {
            [i] => x[(i, i)].re.abs(),
            [i, j] => abs_sum_2x2(x[(i, i)], x[(i, j)], x[(j, i)], x[(j, j)]),
            _ => {
                let m = idx.len();
                let mut data = Vec::with_capacity(m * m);
                for &i in idx {
                    for &j in idx {
                        data.push(x[(i, j)]);
                    }
                }
                let sub = CMatrix::from_vec(m, m, data).expect("finite block");
                eigvalsh_unchecked(&sub).iter().map(|l| l.abs()).sum::<f64>()
            }
        })
        .sum()
}

fn hermitian_abs_sum(x: &CMatrix) -> f64 {
    match x.dim() {
        1 => x[(0, 0)].re.abs(),
        2 => abs_sum_2x2(x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]),
        _ => block_abs_sum(x, &diagonal_blocks(x)),
    }
}

/// Trace norm of `x`, using a known block structure when `x` is Hermitian.
pub(crate) fn trace_norm_blocked(x: &CMatrix, blocks: &[Vec<usize>]) -> f64 {
    let scale = x.max_abs().max(1.0);
    if x.hermiticity_residual() <= HERMITIAN_TOL * scale {
        block_abs_sum(x, blocks)
    } else {
        trace_norm(x).expect("square matrix")
    }
}

/// Sum of singular values.
///
/// Hermitian input (within [`HERMITIAN_TOL`]) uses `Σ|λ_i|`; anything else
/// goes through the Hermitian dilation `[[0, X], [X†, 0]]`, whose spectrum is
/// `±σ_i`, which avoids squaring small singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    if !x.is_square() {
        return dim_err(format!("trace norm needs a square matrix, got {}x{}", x.rows(), x.cols()));
    }
    let scale = x.max_abs().max(1.0);
    if x.hermiticity_residual() <= HERMITIAN_TOL * scale {
        return Ok(hermitian_abs_sum(x));
    }
    let n = x.dim();
    let mut big = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            big[(i, n + j)] = x[(i, j)];
            big[(n + j, i)] = x[(i, j)].conj();
        }
    }
    let vals = eigvalsh_unchecked(&big);
    Ok(0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

/// `exp(-iHt)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(hermitian_eig(h)?.propagator(t))
}

/// General matrix exponential by scaling and squaring with a truncated Taylor
/// series. Intended for small superoperators.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return dim_err("matrix exponential needs a square matrix");
    }
    let n = a.dim();
    // induced 1-norm
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scaled = norm1;
    while scaled > 0.5 {
        scaled *= 0.5;
        squarings += 1;
    }
    let b = a.scale_real(0.5f64.powi(squarings as i32));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=20 {
        term = (&term * &b).scale_real(1.0 / k as f64);
        result += &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

#[cfg(test)]
pub(crate) fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    let n = u.dim();
    (&(u * &u.adjoint()) - &CMatrix::identity(n)).max_abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn block_diagonal_trace_norm_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        // interleave the blocks: rows {0, 2} and {1, 3, 4}
        let ia = [0, 2];
        let ib = [1, 3, 4];
        let mut x = CMatrix::zeros(5, 5);
        for (r, &i) in ia.iter().enumerate() {
            for (c, &j) in ia.iter().enumerate() {
                x[(i, j)] = a[(r, c)];
            }
        }
        for (r, &i) in ib.iter().enumerate() {
            for (c, &j) in ib.iter().enumerate() {
                x[(i, j)] = b[(r, c)];
            }
        }
        assert_eq!(diagonal_blocks(&x), vec![vec![0, 2], vec![1, 3, 4]]);
        let want = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
        assert!((trace_norm(&x).unwrap() - want).abs() < 1e-12);
        let dense: f64 = eigvalsh_unchecked(&x).iter().map(|l| l.abs()).sum();
        assert!((dense - want).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&CMatrix::identity(2)).unwrap() - 2.0).abs() < 1e-15);
        let d = CMatrix::real_diag(&[3.0, -4.0]);
        assert!((trace_norm(&d).unwrap() - 7.0).abs() < 1e-14);
        assert!((trace_norm(&CMatrix::sigma_z()).unwrap() - 2.0).abs() < 1e-15);
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(trace_norm(&rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn trace_norm_of_non_hermitian() {
        // |0><1| has a single singular value 1
        let m = CMatrix::unit(2, 0, 1);
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-14);
        // diag(i, -2) -> 1 + 2
        let m = CMatrix::diag(&[C64::new(0.0, 1.0), C64::new(-2.0, 0.0)]);
        assert!((trace_norm(&m).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_spectra() {
        let e = hermitian_eig(&CMatrix::sigma_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        let e = hermitian_eig(&CMatrix::sigma_y()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let e = hermitian_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(is_unitary(&e.vectors, 1e-14));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::unit(2, 0, 1);
        assert!(matches!(hermitian_eig(&m), Err(Error::Domain(_))));
        assert!(matches!(unitary_exp(&m, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 4, 8, 16] {
            for _ in 0..5 {
                let h = random_hermitian(&mut rng, n);
                let e = hermitian_eig(&h).unwrap();
                assert!(e.reconstruct().max_abs_diff(&h) < 1e-9, "n = {n}");
                assert!(is_unitary(&e.vectors, 1e-10));
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
                let fast = eigvalsh(&h).unwrap();
                for (a, b) in fast.iter().zip(&e.values) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn unitary_exp_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 3);
        assert!(unitary_exp(&h, 0.0).unwrap().max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        let u = unitary_exp(&CMatrix::sigma_z(), PI).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(2).scale_real(-1.0)) < 1e-14);
        for t in [0.3, 1.7, 12.0] {
            assert!(is_unitary(&unitary_exp(&h, t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn expm_matches_spectral_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 4);
        let gen = h.scale(C64::new(0.0, -2.5));
        let a = expm(&gen).unwrap();
        let b = unitary_exp(&h, 2.5).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-11);
    }
}
