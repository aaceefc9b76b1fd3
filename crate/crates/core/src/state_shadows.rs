//! Classical shadows of density matrices.

use rand::Rng;

use crate::ensembles::{
    enumerate_cliffords, enumerate_symplectic, sample_frame, sample_outcome, Axis, Bits, Clifford,
    Ensemble, UnitarySpec,
};
use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::scalar::{Cx, Real};
use crate::state::DensityMatrix;
use crate::stats::median_of_means;

/// `tau_{b,mu} = 3 |b_mu><b_mu| - I`.
pub fn tau<T: Real>(axis: Axis, bit: bool) -> DenseOperator<T> {
    let e = axis.eigenvector::<T>(bit);
    let p = DenseOperator::outer(&e).expect("2-vector");
    inverse_map_pauli(&p)
}

/// Per-qubit label `2 * axis + bit` used by the factorized Pauli fast paths.
pub type Label = u8;

pub fn label(axis: Axis, bit: bool) -> Label {
    (axis.index() * 2 + bit as usize) as Label
}

pub fn label_parts(l: Label) -> (Axis, bool) {
    (Axis::ALL[(l / 2) as usize], l % 2 == 1)
}

/// Label of `tau^T`: transposition flips the outcome of a `Y` axis.
pub fn transpose_label(l: Label) -> Label {
    let (axis, bit) = label_parts(l);
    label(axis, bit ^ (axis == Axis::Y))
}

/// Base-6 code of a label vector, qubit 0 most significant.
pub fn encode_labels(labels: &[Label]) -> usize {
    labels.iter().fold(0, |acc, &l| acc * 6 + l as usize)
}

pub fn decode_labels(n_qubits: usize, mut code: usize) -> Vec<Label> {
    let mut out = vec![0; n_qubits];
    for q in (0..n_qubits).rev() {
        out[q] = (code % 6) as Label;
        code /= 6;
    }
    out
}

/// Tensor product of `tau` factors.
pub fn tau_product<T: Real>(labels: &[Label]) -> DenseOperator<T> {
    labels.iter().fold(DenseOperator::identity(0), |acc, &l| {
        let (a, b) = label_parts(l);
        acc.kron(&tau(a, b))
    })
}

/// `M^{-1} = (A -> 3A - Tr(A) I)` applied to every qubit, which on a single
/// qubit is the familiar formula and on product operators acts factor-wise.
pub fn inverse_map_pauli<T: Real>(a: &DenseOperator<T>) -> DenseOperator<T> {
    let n = a.n_qubits();
    let three = T::of(3.0);
    let mut cur = a.clone();
    for q in 0..n {
        let stride = 1usize << (n - 1 - q);
        let prev = cur.clone();
        cur = DenseOperator::from_fn(n, |i, j| {
            let mut v = prev.get(i, j) * three;
            if (i & stride) == (j & stride) {
                let (i0, j0) = (i & !stride, j & !stride);
                v = v - prev.get(i0, j0) - prev.get(i0 | stride, j0 | stride);
            }
            v
        });
    }
    cur
}

/// `M^{-1}(A) = (2^n + 1) A - Tr(A) I`.
pub fn inverse_map_clifford<T: Real>(a: &DenseOperator<T>) -> DenseOperator<T> {
    let d = a.dim();
    let tr = a.trace();
    let mut out = a.scale(T::of_usize(d + 1));
    for i in 0..d {
        out.set(i, i, out.get(i, i) - tr);
    }
    out
}

pub fn inverse_map<T: Real>(ensemble: Ensemble, a: &DenseOperator<T>) -> DenseOperator<T> {
    match ensemble {
        Ensemble::PauliProduct => inverse_map_pauli(a),
        Ensemble::Clifford => inverse_map_clifford(a),
    }
}

/// Every frame of an ensemble with equal weight: `3^n` Pauli frames, or one
/// representative per Clifford class (`n <= 2`). Outcome sums make the sign
/// bits of a Clifford tableau irrelevant, so classes suffice.
pub fn enumerate_frames<T: Real>(
    ensemble: Ensemble,
    n_qubits: usize,
) -> Result<Vec<UnitarySpec<T>>> {
    match ensemble {
        Ensemble::PauliProduct => {
            let count = 3usize.pow(n_qubits as u32);
            Ok((0..count)
                .map(|mut k| {
                    let mut axes = vec![Axis::Z; n_qubits];
                    for q in (0..n_qubits).rev() {
                        axes[q] = Axis::ALL[k % 3];
                        k /= 3;
                    }
                    UnitarySpec::PauliProduct(axes)
                })
                .collect())
        }
        Ensemble::Clifford => Ok(enumerate_symplectic(n_qubits)?
            .into_iter()
            .map(|rows| {
                UnitarySpec::Clifford(Clifford::from_rows(n_qubits, rows).expect("enumerated"))
            })
            .collect()),
    }
}

/// All signed Clifford elements, for checks that care about them.
pub fn enumerate_signed_frames<T: Real>(n_qubits: usize) -> Result<Vec<UnitarySpec<T>>> {
    Ok(enumerate_cliffords(n_qubits)?
        .into_iter()
        .map(UnitarySpec::Clifford)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot<T: Real> {
    frame: UnitarySpec<T>,
    outcome: Bits,
    ensemble: Ensemble,
}

impl<T: Real> StateSnapshot<T> {
    pub fn new(frame: UnitarySpec<T>, outcome: Bits, ensemble: Ensemble) -> Result<Self> {
        if frame.ensemble() != Some(ensemble) {
            return Err(ShadowError::EnsembleMismatch(
                "frame kind differs from ensemble tag",
            ));
        }
        if frame.n_qubits() != outcome.len() {
            return Err(ShadowError::DimensionMismatch {
                expected: frame.n_qubits(),
                found: outcome.len(),
            });
        }
        Ok(Self {
            frame,
            outcome,
            ensemble,
        })
    }

    pub fn frame(&self) -> &UnitarySpec<T> {
        &self.frame
    }

    pub fn outcome(&self) -> &Bits {
        &self.outcome
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn n_qubits(&self) -> usize {
        self.outcome.len()
    }

    /// Per-qubit labels for Pauli frames.
    pub fn labels(&self) -> Option<Vec<Label>> {
        self.frame.axes().map(|axes| {
            axes.iter()
                .enumerate()
                .map(|(q, &a)| label(a, self.outcome.get(q)))
                .collect()
        })
    }

    pub fn materialize(&self) -> DenseOperator<T> {
        materialize_snapshot(self)
    }

    /// `Tr(sigma_hat O)` without forming the snapshot for Clifford frames.
    pub fn expectation(&self, o: &DenseOperator<T>) -> Result<T> {
        if o.n_qubits() != self.n_qubits() {
            return Err(ShadowError::DimensionMismatch {
                expected: 1 << self.n_qubits(),
                found: o.dim(),
            });
        }
        Ok(snapshot_trace(self.ensemble, &self.frame, &self.outcome, o).re)
    }
}

/// `Tr[M^{-1}(U^dagger |b><b| U) X]`, complex in general.
pub(crate) fn snapshot_trace<T: Real>(
    ensemble: Ensemble,
    frame: &UnitarySpec<T>,
    b: &Bits,
    x: &DenseOperator<T>,
) -> Cx<T> {
    match frame {
        UnitarySpec::PauliProduct(axes) => {
            let labels: Vec<Label> = axes
                .iter()
                .enumerate()
                .map(|(q, &a)| label(a, b.get(q)))
                .collect();
            tau_product::<T>(&labels)
                .trace_product(x)
                .expect("matching size")
        }
        _ => {
            let e = frame.eigenvector(b);
            let xe = x.apply(&e).expect("matching size");
            let quad = e
                .iter()
                .zip(&xe)
                .fold(Cx::new(T::zero(), T::zero()), |acc, (u, v)| {
                    acc + u.conj() * v
                });
            let scale = match ensemble {
                Ensemble::Clifford => T::of_usize(x.dim() + 1),
                Ensemble::PauliProduct => unreachable!("Pauli ensemble with a non-Pauli frame"),
            };
            quad * scale - x.trace()
        }
    }
}

pub fn acquire_state_snapshot<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    ensemble: Ensemble,
    rng: &mut R,
) -> Result<StateSnapshot<T>> {
    let n = rho.n_qubits();
    let frame = sample_frame(ensemble, n, rng)?;
    let probs = frame.outcome_probabilities(rho);
    let outcome = sample_outcome(n, &probs, rng)?;
    Ok(StateSnapshot {
        frame,
        outcome,
        ensemble,
    })
}

/// `m` independent snapshots of `rho`.
pub fn acquire_state_shadow<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    ensemble: Ensemble,
    m: usize,
    rng: &mut R,
) -> Result<ShadowEstimate<T>> {
    let snapshots = (0..m)
        .map(|_| acquire_state_snapshot(rho, ensemble, rng))
        .collect::<Result<Vec<_>>>()?;
    ShadowEstimate::new(rho.n_qubits(), ensemble, snapshots)
}

/// `sigma_hat = M^{-1}(U^dagger |b><b| U)`.
pub fn materialize_snapshot<T: Real>(s: &StateSnapshot<T>) -> DenseOperator<T> {
    match s.labels() {
        Some(labels) => tau_product(&labels),
        None => inverse_map(s.ensemble, &s.frame.projector(&s.outcome)),
    }
}

/// A collection of snapshots sharing size and ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowEstimate<T: Real> {
    n_qubits: usize,
    ensemble: Ensemble,
    snapshots: Vec<StateSnapshot<T>>,
}

impl<T: Real> ShadowEstimate<T> {
    pub fn new(
        n_qubits: usize,
        ensemble: Ensemble,
        snapshots: Vec<StateSnapshot<T>>,
    ) -> Result<Self> {
        for s in &snapshots {
            if s.n_qubits() != n_qubits {
                return Err(ShadowError::DimensionMismatch {
                    expected: n_qubits,
                    found: s.n_qubits(),
                });
            }
            if s.ensemble != ensemble {
                return Err(ShadowError::EnsembleMismatch(
                    "snapshots from different ensembles",
                ));
            }
        }
        Ok(Self {
            n_qubits,
            ensemble,
            snapshots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn snapshots(&self) -> &[StateSnapshot<T>] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// The first `m` snapshots.
    pub fn prefix(&self, m: usize) -> Self {
        Self {
            n_qubits: self.n_qubits,
            ensemble: self.ensemble,
            snapshots: self.snapshots[..m.min(self.len())].to_vec(),
        }
    }

    /// `(1/m) sum_j sigma_hat_j`.
    pub fn reconstruct(&self) -> Result<DenseOperator<T>> {
        if self.is_empty() {
            return Err(ShadowError::Empty("shadow snapshots"));
        }
        let mut acc = DenseOperator::zeros(self.n_qubits);
        for s in &self.snapshots {
            acc += &materialize_snapshot(s);
        }
        Ok(acc.scale(T::one() / T::of_usize(self.len())))
    }

    /// Single-shot values `Tr(sigma_hat_j O)`.
    pub fn single_shot_values(&self, o: &DenseOperator<T>) -> Result<Vec<T>> {
        self.snapshots.iter().map(|s| s.expectation(o)).collect()
    }

    pub fn estimate_observable(&self, o: &DenseOperator<T>, k: usize) -> Result<T> {
        median_of_means(&self.single_shot_values(o)?, k)
    }
}

pub fn reconstruct<T: Real>(est: &ShadowEstimate<T>) -> Result<DenseOperator<T>> {
    est.reconstruct()
}

pub fn estimate_observable<T: Real>(
    est: &ShadowEstimate<T>,
    o: &DenseOperator<T>,
    k: usize,
) -> Result<T> {
    est.estimate_observable(o, k)
}

/// `E_U sum_b <b|U rho U^dagger|b> M^{-1}(U^dagger |b><b| U)` by exhaustive
/// enumeration; equals `rho` when the inverse map is right.
pub fn exhaustive_shadow_mean<T: Real>(
    rho: &DenseOperator<T>,
    ensemble: Ensemble,
) -> Result<DenseOperator<T>> {
    let n = rho.n_qubits();
    let frames = enumerate_frames::<T>(ensemble, n)?;
    let mut acc = DenseOperator::zeros(n);
    let w = T::one() / T::of_usize(frames.len());
    for frame in &frames {
        let probs = frame.outcome_probabilities(rho);
        for (idx, p) in probs.into_iter().enumerate() {
            let b = Bits::from_index(n, idx);
            acc.add_scaled(p * w, &inverse_map(ensemble, &frame.projector(&b)))?;
        }
    }
    Ok(acc)
}
