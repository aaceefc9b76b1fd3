use std::ops::Deref;

use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::scalar::{cx, re, Cx, Real};

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    op: DenseOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(op: DenseOperator<T>) -> Result<Self> {
        let herm = op.hermitian_residual();
        if herm > T::exact_tol() {
            return Err(ShadowError::NotHermitian(herm.as_f64()));
        }
        let tr = op.trace();
        if (tr.re - T::one()).abs() > T::exact_tol() || tr.im.abs() > T::exact_tol() {
            return Err(ShadowError::BadTrace {
                expected: 1.0,
                found: tr.re.as_f64(),
            });
        }
        let min = op.min_eigenvalue();
        if min < -T::structural_tol() {
            return Err(ShadowError::NotPositive(min.as_f64()));
        }
        Ok(Self { op })
    }

    /// Pure state `|v><v|` (the vector is normalized first).
    pub fn pure(v: &[Cx<T>]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(ShadowError::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<Cx<T>> = v.iter().map(|z| *z / norm).collect();
        Ok(Self {
            op: DenseOperator::outer(&v)?,
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        Self {
            op: DenseOperator::basis_projector(n_qubits, index),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = T::of_usize(1 << n_qubits);
        Self {
            op: DenseOperator::identity(n_qubits).scale(T::one() / d),
        }
    }

    /// Product of single-qubit states given by characters:
    /// `0`, `1`, `+`, `-`, `r` (+i), `l` (-i), `m` (maximally mixed).
    pub fn product(spec: &str) -> Result<Self> {
        let mut op = DenseOperator::identity(0);
        for c in spec.trim().chars() {
            op = op.kron(&single_qubit_state::<T>(c)?);
        }
        if op.n_qubits() == 0 {
            return Err(ShadowError::Parse("empty product-state spec".into()));
        }
        Ok(Self { op })
    }

    /// Random state from the Hilbert-Schmidt measure, `G G^dagger / Tr`.
    pub fn random_hilbert_schmidt<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let g = DenseOperator::from_fn(n_qubits, |_, _| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            cx(T::of(a), T::of(b))
        });
        let w = &g * &g.adjoint();
        let tr = w.trace().re;
        Self {
            op: w.scale(T::one() / tr),
        }
    }

    pub fn as_operator(&self) -> &DenseOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> DenseOperator<T> {
        self.op
    }

    pub fn purity(&self) -> T {
        self.op.trace_product(&self.op).expect("same size").re
    }
}

impl<T: Real> Deref for DensityMatrix<T> {
    type Target = DenseOperator<T>;
    fn deref(&self) -> &DenseOperator<T> {
        &self.op
    }
}

fn single_qubit_state<T: Real>(c: char) -> Result<DenseOperator<T>> {
    let h = T::of(0.5);
    let (o, half) = (Cx::<T>::zero(), re(h));
    let ih = cx(T::zero(), h);
    let rows = match c {
        '0' => [[re(T::one()), o], [o, o]],
        '1' => [[o, o], [o, re(T::one())]],
        '+' => [[half, half], [half, half]],
        '-' => [[half, -half], [-half, half]],
        'r' | 'R' => [[half, -ih], [ih, half]],
        'l' | 'L' => [[half, ih], [-ih, half]],
        'm' | 'M' => [[half, o], [o, half]],
        other => {
            return Err(ShadowError::Parse(format!(
                "unknown single-qubit state '{other}'"
            )))
        }
    };
    DenseOperator::from_vec(1, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_states_are_valid() {
        for spec in ["0", "1", "+", "-", "r", "l", "m", "+m", "0r1"] {
            let rho = DensityMatrix::<f64>::product(spec).unwrap();
            DensityMatrix::new(rho.as_operator().clone()).unwrap();
        }
    }

    #[test]
    fn rejects_bad_trace_and_negativity() {
        let op = DenseOperator::<f64>::identity(1);
        assert!(matches!(
            DensityMatrix::new(op),
            Err(ShadowError::BadTrace { .. })
        ));
        let neg = DenseOperator::<f64>::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(ShadowError::NotPositive(_))
        ));
    }

    #[test]
    fn hilbert_schmidt_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let rho = DensityMatrix::<f64>::random_hilbert_schmidt(n, &mut rng);
            DensityMatrix::new(rho.into_operator()).unwrap();
        }
    }
}
