//! Kraus channels and their Choi matrices.

use std::ops::Deref;

use num_traits::Zero;

use crate::error::{Result, ShadowError};
use crate::operator::{DenseOperator, Register};
use crate::scalar::{Cx, Real};

/// Completely positive map stored as a Kraus set.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T: Real> {
    n_qubits: usize,
    kraus: Vec<DenseOperator<T>>,
}

impl<T: Real> Channel<T> {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<DenseOperator<T>>) -> Result<Self> {
        let ch = Self::new_unchecked(kraus)?;
        let residual = ch.trace_preservation_residual();
        if residual > T::structural_tol() {
            return Err(ShadowError::NotTracePreserving(residual.as_f64()));
        }
        Ok(ch)
    }

    /// Validates shapes only; the Kraus set may fail trace preservation.
    pub fn new_unchecked(kraus: Vec<DenseOperator<T>>) -> Result<Self> {
        let first = kraus.first().ok_or(ShadowError::NoKrausOperators)?;
        let n_qubits = first.n_qubits();
        if let Some(bad) = kraus.iter().find(|k| k.n_qubits() != n_qubits) {
            return Err(ShadowError::DimensionMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
        Ok(Self { n_qubits, kraus })
    }

    pub fn unitary(u: DenseOperator<T>) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            kraus: vec![DenseOperator::identity(n_qubits)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kraus(&self) -> &[DenseOperator<T>] {
        &self.kraus
    }

    /// Largest entry of `sum_j K_j^dagger K_j - I`.
    pub fn trace_preservation_residual(&self) -> T {
        let mut acc = DenseOperator::zeros(self.n_qubits);
        for k in &self.kraus {
            acc += &(&k.adjoint() * k);
        }
        acc.max_abs_diff(&DenseOperator::identity(self.n_qubits))
    }

    /// `sum_j K_j rho K_j^dagger`.
    pub fn apply(&self, rho: &DenseOperator<T>) -> Result<DenseOperator<T>> {
        if rho.n_qubits() != self.n_qubits {
            return Err(ShadowError::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: rho.dim(),
            });
        }
        let mut out = DenseOperator::zeros(self.n_qubits);
        for k in &self.kraus {
            out += &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }

    /// Unnormalized Choi matrix `sum_{mn} |m><n| (x) E(|m><n|)`.
    ///
    /// Assembled as `sum_j |v_j><v_j|` with `|v_j> = (I (x) K_j)|omega>`.
    pub fn choi(&self) -> ChoiMatrix<T> {
        let d = 1usize << self.n_qubits;
        let mut op = DenseOperator::zeros(2 * self.n_qubits);
        for k in &self.kraus {
            let v: Vec<Cx<T>> = (0..d * d).map(|idx| k.get(idx % d, idx / d)).collect();
            op += &DenseOperator::outer(&v).expect("power-of-two length");
        }
        ChoiMatrix {
            op,
            normalized: false,
        }
    }

    /// `after` applied to the output of `self`.
    pub fn then(&self, after: &Channel<T>) -> Result<Channel<T>> {
        if after.n_qubits != self.n_qubits {
            return Err(ShadowError::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: 1 << after.n_qubits,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Channel {
            n_qubits: self.n_qubits,
            kraus,
        })
    }
}

pub fn apply_channel<T: Real>(ch: &Channel<T>, rho: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    ch.apply(rho)
}

pub fn choi_of_channel<T: Real>(ch: &Channel<T>) -> ChoiMatrix<T> {
    ch.choi()
}

/// Choi matrix on `2n` qubits, input copy in register `A`.
///
/// Unnormalized matrices have trace `2^n`; normalized ones trace 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix<T: Real> {
    op: DenseOperator<T>,
    normalized: bool,
}

impl<T: Real> ChoiMatrix<T> {
    /// Wraps an operator without checking positivity; the trace must agree
    /// with the normalization flag.
    pub fn from_operator(op: DenseOperator<T>, normalized: bool) -> Result<Self> {
        if !op.n_qubits().is_multiple_of(2) {
            return Err(ShadowError::OddQubitCount(op.n_qubits()));
        }
        let expected = if normalized {
            T::one()
        } else {
            T::of_usize(1 << (op.n_qubits() / 2))
        };
        let tr = op.trace();
        if (tr.re - expected).abs() > T::structural_tol() * expected
            || tr.im.abs() > T::structural_tol()
        {
            return Err(ShadowError::NormalizationMismatch(tr.re.as_f64()));
        }
        Ok(Self { op, normalized })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Qubits per register.
    pub fn n_qubits(&self) -> usize {
        self.op.n_qubits() / 2
    }

    pub fn as_operator(&self) -> &DenseOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> DenseOperator<T> {
        self.op
    }

    pub fn normalize(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let d = T::of_usize(1 << self.n_qubits());
        Self {
            op: self.op.scale(T::one() / d),
            normalized: true,
        }
    }

    pub fn unnormalize(&self) -> Self {
        if !self.normalized {
            return self.clone();
        }
        let d = T::of_usize(1 << self.n_qubits());
        Self {
            op: self.op.scale(d),
            normalized: false,
        }
    }

    /// Checks Hermiticity, positivity and the marginal on `A`. Returns the
    /// largest violation found.
    pub fn validate(&self) -> Result<()> {
        let tol = T::structural_tol();
        let herm = self.op.hermitian_residual();
        if herm > tol {
            return Err(ShadowError::NotHermitian(herm.as_f64()));
        }
        let min = self.op.min_eigenvalue();
        if min < -tol {
            return Err(ShadowError::NotPositive(min.as_f64()));
        }
        let n = self.n_qubits();
        let marginal = self.op.partial_trace(Register::B)?;
        let target = if self.normalized {
            DenseOperator::identity(n).scale(T::one() / T::of_usize(1 << n))
        } else {
            DenseOperator::identity(n)
        };
        let dev = marginal.max_abs_diff(&target);
        if dev > tol {
            return Err(ShadowError::NotTracePreserving(dev.as_f64()));
        }
        Ok(())
    }

    /// Teleports `rho` through the channel: `Tr_A[(rho^T (x) I) eta]`, with the
    /// `2^n` factor restored for normalized matrices.
    pub fn apply(&self, rho: &DenseOperator<T>) -> Result<DenseOperator<T>> {
        let n = self.n_qubits();
        if rho.n_qubits() != n {
            return Err(ShadowError::DimensionMismatch {
                expected: 1 << n,
                found: rho.dim(),
            });
        }
        let d = 1usize << n;
        let scale = if self.normalized {
            T::of_usize(d)
        } else {
            T::one()
        };
        Ok(DenseOperator::from_fn(n, |i, j| {
            let mut acc = Cx::zero();
            for a in 0..d {
                for b in 0..d {
                    acc = acc + rho.get(b, a) * self.op.get(b * d + i, a * d + j);
                }
            }
            acc * scale
        }))
    }

    /// `Tr[eta^2]` of the matrix as stored.
    pub fn purity(&self) -> T {
        self.op.trace_product(&self.op).expect("same size").re
    }
}

impl<T: Real> Deref for ChoiMatrix<T> {
    type Target = DenseOperator<T>;
    fn deref(&self) -> &DenseOperator<T> {
        &self.op
    }
}

pub fn channel_of_choi<T: Real>(
    eta: &ChoiMatrix<T>,
    rho: &DenseOperator<T>,
) -> Result<DenseOperator<T>> {
    eta.apply(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use crate::state::DensityMatrix;

    type Op = DenseOperator<f64>;

    fn depolarizing() -> Channel<f64> {
        Channel::new(
            Pauli::ALL
                .iter()
                .map(|p| p.matrix::<f64>().scale(0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_channel_choi_is_omega() {
        let eta = Channel::<f64>::identity(1).choi();
        let omega = Op::from_real_rows(&[
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(eta.as_operator(), &omega);
        eta.validate().unwrap();
    }

    #[test]
    fn choi_matches_definition() {
        let ch = depolarizing();
        let d = 2;
        let mut by_def = Op::zeros(2);
        for m in 0..d {
            for n in 0..d {
                let mut e = Op::zeros(1);
                e.set(m, n, Cx::new(1.0, 0.0));
                by_def += &e.kron(&ch.apply(&e).unwrap());
            }
        }
        assert!(ch.choi().max_abs_diff(&by_def) < 1e-14);
    }

    #[test]
    fn depolarizing_choi_is_half_identity() {
        let eta = depolarizing().choi();
        assert!(eta.max_abs_diff(&Op::identity(2).scale(0.5)) < 1e-14);
    }

    #[test]
    fn depolarizing_maps_to_fixed_point() {
        let out = depolarizing().apply(&Op::basis_projector(1, 0)).unwrap();
        assert!(out.max_abs_diff(&Op::identity(1).scale(0.5)) < 1e-14);
    }

    #[test]
    fn unitary_choi_is_rank_one_and_idempotent_up_to_d() {
        let h = Op::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
            .unwrap()
            .scale(0.5f64.sqrt());
        let eta = Channel::unitary(h.kron(&Pauli::Y.matrix())).unwrap().choi();
        let sq = &*eta * &*eta;
        assert!(sq.max_abs_diff(&eta.scale(4.0)) < 1e-12);
        assert_eq!(eta.rank(1e-9), 1);
    }

    #[test]
    fn choi_teleports_states() {
        let plus = DensityMatrix::<f64>::product("+").unwrap();
        let id = Channel::identity(1).choi();
        assert!(id.apply(&plus).unwrap().max_abs_diff(&plus) < 1e-14);

        let x = Channel::unitary(Pauli::X.matrix::<f64>()).unwrap().choi();
        let out = x.apply(&Op::basis_projector(1, 0)).unwrap();
        assert!(out.max_abs_diff(&Op::basis_projector(1, 1)) < 1e-14);

        let normalized = x.normalize();
        let out = normalized.apply(&Op::basis_projector(1, 0)).unwrap();
        assert!(out.max_abs_diff(&Op::basis_projector(1, 1)) < 1e-14);
    }

    #[test]
    fn normalization_flag_must_match_trace() {
        let eta = Channel::<f64>::identity(1).choi().into_operator();
        assert!(matches!(
            ChoiMatrix::from_operator(eta.clone(), true),
            Err(ShadowError::NormalizationMismatch(_))
        ));
        ChoiMatrix::from_operator(eta, false).unwrap();
    }

    #[test]
    fn rejects_non_trace_preserving_sets() {
        let k = Op::identity(1).scale(0.9);
        assert!(matches!(
            Channel::new(vec![k.clone()]),
            Err(ShadowError::NotTracePreserving(_))
        ));
        Channel::new_unchecked(vec![k]).unwrap();
        assert_eq!(
            Channel::<f64>::new(vec![]),
            Err(ShadowError::NoKrausOperators)
        );
    }

    #[test]
    fn apply_checks_dimensions() {
        assert!(depolarizing().apply(&Op::identity(2)).is_err());
    }
}
