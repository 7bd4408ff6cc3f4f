//! Tensor products, partial traces and identity padding.
//!
//! Multi-indices are laid out with the left-most factor varying slowest, the
//! same convention [`kron`] uses. Composite spaces in this crate are ordered
//! `S, E_1, …, E_n, A`.

use crate::error::{dim_err, Result};

use super::matrix::{CMatrix, ZERO};

/// Dimensions of the tensor factors of a composite Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorLayout {
    factor_dims: Vec<usize>,
}

impl TensorLayout {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return dim_err("a tensor layout needs at least one factor");
        }
        if factor_dims.contains(&0) {
            return dim_err("tensor factor dimensions must be positive");
        }
        Ok(TensorLayout { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.factor_dims.len();
        let mut s = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.factor_dims[k + 1];
        }
        s
    }

    /// Flat offsets of every multi-index over `factors` (in the given order,
    /// last one fastest).
    fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &f in factors {
            let d = self.factor_dims[f];
            let st = strides[f];
            out = out
                .iter()
                .flat_map(|&base| (0..d).map(move |i| base + i * st))
                .collect();
        }
        out
    }

    fn check_square(&self, x: &CMatrix) -> Result<()> {
        if !x.is_square() || x.dim() != self.total_dim() {
            return dim_err(format!(
                "layout {:?} (total {}) does not match a {}x{} matrix",
                self.factor_dims,
                self.total_dim(),
                x.rows(),
                x.cols()
            ));
        }
        Ok(())
    }

    fn check_factor_set(&self, factors: &[usize]) -> Result<()> {
        for (k, &f) in factors.iter().enumerate() {
            if f >= self.factor_dims.len() {
                return dim_err(format!("factor index {f} out of range"));
            }
            if factors[..k].contains(&f) {
                return dim_err(format!("factor index {f} listed twice"));
            }
        }
        Ok(())
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Left-to-right Kronecker product of all factors.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("kron_all needs at least one factor");
    it.fold((*first).clone(), |acc, m| kron(&acc, m))
}

/// Traces out `traced` factors; remaining factors keep their order.
pub fn partial_trace(x: &CMatrix, layout: &TensorLayout, traced: &[usize]) -> Result<CMatrix> {
    layout.check_square(x)?;
    layout.check_factor_set(traced)?;
    let kept: Vec<usize> = (0..layout.num_factors())
        .filter(|f| !traced.contains(f))
        .collect();
    let kept_off = layout.offsets(&kept);
    let traced_off = layout.offsets(traced);
    let n = kept_off.len();
    let mut out = CMatrix::zeros(n, n);
    for (r, &ro) in kept_off.iter().enumerate() {
        for (c, &co) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &m in &traced_off {
                acc += x[(ro + m, co + m)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Embeds `op`, acting on `factors` (tensor-ordered as listed), into the full
/// layout with identities on every other factor.
pub fn embed(op: &CMatrix, layout: &TensorLayout, factors: &[usize]) -> Result<CMatrix> {
    layout.check_factor_set(factors)?;
    let acted_dim: usize = factors.iter().map(|&f| layout.factor_dims[f]).product();
    if !op.is_square() || op.dim() != acted_dim {
        return dim_err(format!(
            "operator of size {}x{} cannot act on factors {:?} (dimension {})",
            op.rows(),
            op.cols(),
            factors,
            acted_dim
        ));
    }
    let rest: Vec<usize> = (0..layout.num_factors())
        .filter(|f| !factors.contains(f))
        .collect();
    let act_off = layout.offsets(factors);
    let rest_off = layout.offsets(&rest);
    let n = layout.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for &r in &rest_off {
        for (a, &ao) in act_off.iter().enumerate() {
            for (b, &bo) in act_off.iter().enumerate() {
                out[(r + ao, r + bo)] = op[(a, b)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::matrix::C64;
    use crate::qmath::random::{random_hermitian, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let p1 = CMatrix::projector(2, 0);
        assert_eq!(
            kron(&CMatrix::sigma_z(), &p1),
            CMatrix::real_diag(&[1.0, 0.0, -1.0, 0.0])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(&mut rng, 3);
        assert_eq!(kron(&a, &CMatrix::identity(1)), a);
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho_s = random_state(&mut rng, 2);
        let rho_a = random_state(&mut rng, 3);
        let layout = TensorLayout::new(vec![2, 3]).unwrap();
        let joint = kron(rho_s.matrix(), rho_a.matrix());
        let red = partial_trace(&joint, &layout, &[1]).unwrap();
        assert!(red.max_abs_diff(rho_s.matrix()) < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let bell = CMatrix::outer(&bell, &bell);
        let l2 = TensorLayout::new(vec![2, 2]).unwrap();
        let red = partial_trace(&bell, &l2, &[1]).unwrap();
        assert!(red.max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let all = partial_trace(&joint, &layout, &[0, 1]).unwrap();
        assert_eq!((all.rows(), all.cols()), (1, 1));
        assert!((all[(0, 0)] - joint.trace()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_layouts() {
        let layout = TensorLayout::new(vec![2, 2]).unwrap();
        assert!(partial_trace(&CMatrix::identity(3), &layout, &[0]).is_err());
        assert!(partial_trace(&CMatrix::identity(4), &layout, &[2]).is_err());
        assert!(partial_trace(&CMatrix::identity(4), &layout, &[0, 0]).is_err());
        assert!(TensorLayout::new(vec![]).is_err());
        assert!(TensorLayout::new(vec![2, 0]).is_err());
    }

    #[test]
    fn tracing_the_middle_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_state(&mut rng, 2);
        let b = random_state(&mut rng, 3);
        let c = random_state(&mut rng, 2);
        let layout = TensorLayout::new(vec![2, 3, 2]).unwrap();
        let joint = kron_all(&[a.matrix(), b.matrix(), c.matrix()]);
        let red = partial_trace(&joint, &layout, &[1]).unwrap();
        assert!(red.max_abs_diff(&kron(a.matrix(), c.matrix())) < 1e-14);
    }

    #[test]
    fn embed_pads_with_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 4);
        let layout = TensorLayout::new(vec![2, 2, 3]).unwrap();
        let full = embed(&h, &layout, &[0, 1]).unwrap();
        assert!(full.max_abs_diff(&kron(&h, &CMatrix::identity(3))) < 1e-15);

        // acting on factors (0, 2) of S ⊗ E ⊗ A: swap E to the back and compare
        let layout = TensorLayout::new(vec![2, 2, 2]).unwrap();
        let full = embed(&h, &layout, &[0, 2]).unwrap();
        let direct = kron(&h, &CMatrix::identity(2));
        // permutation |s e a> -> |s a e>
        for s in 0..2 {
            for e in 0..2 {
                for a in 0..2 {
                    for s2 in 0..2 {
                        for e2 in 0..2 {
                            for a2 in 0..2 {
                                let lhs = full[(s * 4 + e * 2 + a, s2 * 4 + e2 * 2 + a2)];
                                let rhs = direct[(s * 4 + a * 2 + e, s2 * 4 + a2 * 2 + e2)];
                                assert_eq!(lhs, rhs);
                            }
                        }
                    }
                }
            }
        }
    }
}
