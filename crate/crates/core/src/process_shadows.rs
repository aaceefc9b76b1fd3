//! Process shadows: randomized acquisition through a channel and Choi-state
//! estimators built from the resulting records.

use std::collections::BTreeMap;

use rand::Rng;

use crate::channel::{Channel, ChoiMatrix};
use crate::ensembles::{sample_frame, sample_outcome, Bits, Ensemble, UnitarySpec};
use crate::error::{Result, ShadowError};
use crate::operator::{DenseOperator, Register};
use crate::pauli::PauliString;
use crate::scalar::{Cx, Real};
use crate::state_shadows::{
    decode_labels, encode_labels, enumerate_frames, inverse_map, label, snapshot_trace,
    tau_product, transpose_label, Label,
};
use crate::stats::median_of_means;

/// One acquisition outcome `z = {b_in, U_in, U_out, b_out}`.
///
/// The prepared input is `U_in^dagger |b_in>`, so the input half of
/// `|z> = U_in^T |b_in> (x) U_out^dagger |b_out>` is its complex conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowRecord<T: Real> {
    b_in: Bits,
    u_in: UnitarySpec<T>,
    u_out: UnitarySpec<T>,
    b_out: Bits,
    ensemble_in: Ensemble,
    ensemble_out: Ensemble,
}

impl<T: Real> ShadowRecord<T> {
    pub fn new(
        b_in: Bits,
        u_in: UnitarySpec<T>,
        u_out: UnitarySpec<T>,
        b_out: Bits,
        ensemble_in: Ensemble,
        ensemble_out: Ensemble,
    ) -> Result<Self> {
        let n = b_in.len();
        if n == 0 {
            return Err(ShadowError::Empty("b_in"));
        }
        for len in [u_in.n_qubits(), u_out.n_qubits(), b_out.len()] {
            if len != n {
                return Err(ShadowError::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if u_in.ensemble() != Some(ensemble_in) || u_out.ensemble() != Some(ensemble_out) {
            return Err(ShadowError::EnsembleMismatch(
                "frame kind differs from ensemble tag",
            ));
        }
        Ok(Self {
            b_in,
            u_in,
            u_out,
            b_out,
            ensemble_in,
            ensemble_out,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.b_in.len()
    }

    pub fn b_in(&self) -> &Bits {
        &self.b_in
    }

    pub fn b_out(&self) -> &Bits {
        &self.b_out
    }

    pub fn u_in(&self) -> &UnitarySpec<T> {
        &self.u_in
    }

    pub fn u_out(&self) -> &UnitarySpec<T> {
        &self.u_out
    }

    pub fn ensemble_in(&self) -> Ensemble {
        self.ensemble_in
    }

    pub fn ensemble_out(&self) -> Ensemble {
        self.ensemble_out
    }

    /// Labels of the input-register factor `tau^T` (Pauli input frames only).
    pub fn input_labels(&self) -> Option<Vec<Label>> {
        let axes = self.u_in.axes()?;
        Some(
            axes.iter()
                .enumerate()
                .map(|(q, &a)| transpose_label(label(a, self.b_in.get(q))))
                .collect(),
        )
    }

    /// Labels of the output-register factor (Pauli output frames only).
    pub fn output_labels(&self) -> Option<Vec<Label>> {
        let axes = self.u_out.axes()?;
        Some(
            axes.iter()
                .enumerate()
                .map(|(q, &a)| label(a, self.b_out.get(q)))
                .collect(),
        )
    }

    /// `M^{-1}(U_in^dagger |b_in><b_in| U_in)^T`.
    pub fn input_factor(&self) -> DenseOperator<T> {
        match self.input_labels() {
            Some(l) => tau_product(&l),
            None => inverse_map(self.ensemble_in, &self.u_in.projector(&self.b_in)).transpose(),
        }
    }

    /// `M^{-1}(U_out^dagger |b_out><b_out| U_out)`.
    pub fn output_factor(&self) -> DenseOperator<T> {
        match self.output_labels() {
            Some(l) => tau_product(&l),
            None => inverse_map(self.ensemble_out, &self.u_out.projector(&self.b_out)),
        }
    }

    /// Single-shot Choi shadow `input_factor (x) output_factor`, trace one.
    pub fn materialize(&self) -> DenseOperator<T> {
        self.input_factor().kron(&self.output_factor())
    }

    /// `2^n Tr[zeta_hat (rho^T (x) O)]`, factorized as
    /// `2^n Tr[M^{-1}(P_in) rho] Tr[M^{-1}(P_out) O]`.
    pub fn functional_value(&self, rho: &DenseOperator<T>, o: &DenseOperator<T>) -> Cx<T> {
        let d = T::of_usize(1 << self.n_qubits());
        let a = snapshot_trace(self.ensemble_in, &self.u_in, &self.b_in, rho);
        let b = snapshot_trace(self.ensemble_out, &self.u_out, &self.b_out, o);
        a * b * d
    }
}

/// Output distribution for the input `psi`: `p(b) = sum_j |<b|U_out K_j|psi>|^2`.
fn output_distribution<T: Real>(ch: &Channel<T>, psi: &[Cx<T>], u_out: &UnitarySpec<T>) -> Vec<T> {
    let dense = match u_out {
        UnitarySpec::PauliProduct(_) => None,
        other => Some(other.to_matrix()),
    };
    let mut p = vec![T::zero(); psi.len()];
    for k in ch.kraus() {
        let v = k.apply(psi).expect("channel dimension");
        let w = match &dense {
            Some(u) => u.apply(&v).expect("frame dimension"),
            None => u_out.apply(&v),
        };
        for (acc, z) in p.iter_mut().zip(&w) {
            *acc = *acc + z.norm_sqr();
        }
    }
    p
}

/// Steps 1-6 of the acquisition procedure for one record.
pub fn acquire_record<T: Real, R: Rng + ?Sized>(
    ch: &Channel<T>,
    ensemble_in: Ensemble,
    ensemble_out: Ensemble,
    rng: &mut R,
) -> Result<ShadowRecord<T>> {
    let n = ch.n_qubits();
    let b_in = Bits::from_index(n, rng.random_range(0..1usize << n));
    let u_in = sample_frame(ensemble_in, n, rng)?;
    let u_out = sample_frame(ensemble_out, n, rng)?;
    let psi = u_in.eigenvector(&b_in);
    let p = output_distribution(ch, &psi, &u_out);
    let b_out = sample_outcome(n, &p, rng)?;
    Ok(ShadowRecord {
        b_in,
        u_in,
        u_out,
        b_out,
        ensemble_in,
        ensemble_out,
    })
}

pub fn acquire_process_shadow<T: Real, R: Rng + ?Sized>(
    ch: &Channel<T>,
    ensemble_in: Ensemble,
    ensemble_out: Ensemble,
    m: usize,
    rng: &mut R,
) -> Result<ProcessShadow<T>> {
    let records = (0..m)
        .map(|_| acquire_record(ch, ensemble_in, ensemble_out, rng))
        .collect::<Result<Vec<_>>>()?;
    ProcessShadow::new(ch.n_qubits(), ensemble_in, ensemble_out, records)
}

/// Every possible record of a channel with its exact probability; feasible
/// only for tiny systems (`n <= 2` Pauli, `n = 1` Clifford).
pub fn exact_record_distribution<T: Real>(
    ch: &Channel<T>,
    ensemble_in: Ensemble,
    ensemble_out: Ensemble,
) -> Result<Vec<(T, ShadowRecord<T>)>> {
    let n = ch.n_qubits();
    let frames_in = enumerate_frames::<T>(ensemble_in, n)?;
    let frames_out = enumerate_frames::<T>(ensemble_out, n)?;
    let d = 1usize << n;
    let w = T::one() / T::of_usize(d * frames_in.len() * frames_out.len());
    let mut out = Vec::new();
    for b in 0..d {
        let b_in = Bits::from_index(n, b);
        for u_in in &frames_in {
            let psi = u_in.eigenvector(&b_in);
            for u_out in &frames_out {
                let p = output_distribution(ch, &psi, u_out);
                for (idx, pb) in p.into_iter().enumerate() {
                    if pb.is_zero() {
                        continue;
                    }
                    let r = ShadowRecord {
                        b_in: b_in.clone(),
                        u_in: u_in.clone(),
                        u_out: u_out.clone(),
                        b_out: Bits::from_index(n, idx),
                        ensemble_in,
                        ensemble_out,
                    };
                    out.push((w * pb, r));
                }
            }
        }
    }
    Ok(out)
}

/// A homogeneous set of records.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessShadow<T: Real> {
    n_qubits: usize,
    ensemble_in: Ensemble,
    ensemble_out: Ensemble,
    records: Vec<ShadowRecord<T>>,
}

impl<T: Real> ProcessShadow<T> {
    pub fn new(
        n_qubits: usize,
        ensemble_in: Ensemble,
        ensemble_out: Ensemble,
        records: Vec<ShadowRecord<T>>,
    ) -> Result<Self> {
        for r in &records {
            if r.n_qubits() != n_qubits {
                return Err(ShadowError::DimensionMismatch {
                    expected: n_qubits,
                    found: r.n_qubits(),
                });
            }
            if r.ensemble_in != ensemble_in || r.ensemble_out != ensemble_out {
                return Err(ShadowError::EnsembleMismatch(
                    "records from different ensembles",
                ));
            }
        }
        Ok(Self {
            n_qubits,
            ensemble_in,
            ensemble_out,
            records,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ensemble_in(&self) -> Ensemble {
        self.ensemble_in
    }

    pub fn ensemble_out(&self) -> Ensemble {
        self.ensemble_out
    }

    pub fn records(&self) -> &[ShadowRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_pauli(&self) -> bool {
        self.ensemble_in == Ensemble::PauliProduct && self.ensemble_out == Ensemble::PauliProduct
    }

    pub fn prefix(&self, m: usize) -> Self {
        Self {
            records: self.records[..m.min(self.len())].to_vec(),
            ..self.clone_header()
        }
    }

    /// Records `range` as a new shadow.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            records: self.records[range].to_vec(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            ensemble_in: self.ensemble_in,
            ensemble_out: self.ensemble_out,
            records: vec![],
        }
    }

    /// `(input code, output code)` for each record of a Pauli/Pauli shadow.
    pub fn label_codes(&self) -> Result<Vec<(usize, usize)>> {
        if !self.is_pauli() {
            return Err(ShadowError::EnsembleMismatch(
                "label codes need Pauli frames on both registers",
            ));
        }
        Ok(self
            .records
            .iter()
            .map(|r| {
                (
                    encode_labels(&r.input_labels().expect("pauli")),
                    encode_labels(&r.output_labels().expect("pauli")),
                )
            })
            .collect())
    }

    /// Sum of the materialized single-shot shadows (not divided by `m`).
    pub fn shadow_sum(&self) -> DenseOperator<T> {
        let n = self.n_qubits;
        let mut acc = DenseOperator::zeros(2 * n);
        if let Ok(codes) = self.label_codes() {
            let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for c in codes {
                *counts.entry(c).or_default() += 1;
            }
            for ((a, c), count) in counts {
                let term =
                    tau_product::<T>(&decode_labels(n, a)).kron(&tau_product(&decode_labels(n, c)));
                acc.add_scaled(T::of_usize(count), &term)
                    .expect("2n qubits");
            }
        } else {
            for r in &self.records {
                acc += &r.materialize();
            }
        }
        acc
    }

    /// `zeta = (1/m) sum_j zeta_hat_j`, a trace-one Choi estimate.
    pub fn reconstruct_choi(&self) -> Result<ChoiMatrix<T>> {
        if self.is_empty() {
            return Err(ShadowError::Empty("process shadow records"));
        }
        let mean = self.shadow_sum().scale(T::one() / T::of_usize(self.len()));
        ChoiMatrix::from_operator(mean, true)
    }

    fn check_operands(&self, rho: &DenseOperator<T>, o: &DenseOperator<T>) -> Result<()> {
        for op in [rho, o] {
            if op.n_qubits() != self.n_qubits {
                return Err(ShadowError::DimensionMismatch {
                    expected: 1 << self.n_qubits,
                    found: op.dim(),
                });
            }
        }
        Ok(())
    }

    /// Single-shot values `2^n Tr[zeta_hat_j (rho^T (x) O)]`.
    pub fn functional_values(
        &self,
        rho: &DenseOperator<T>,
        o: &DenseOperator<T>,
    ) -> Result<Vec<Cx<T>>> {
        self.check_operands(rho, o)?;
        Ok(self
            .records
            .iter()
            .map(|r| r.functional_value(rho, o))
            .collect())
    }

    /// Median-of-means estimate of `Tr[E(rho) O]` (real part).
    pub fn estimate_channel_functional(
        &self,
        rho: &DenseOperator<T>,
        o: &DenseOperator<T>,
        k: usize,
    ) -> Result<T> {
        let values: Vec<T> = self
            .functional_values(rho, o)?
            .into_iter()
            .map(|z| z.re)
            .collect();
        median_of_means(&values, k)
    }
}

pub fn reconstruct_choi<T: Real>(ps: &ProcessShadow<T>) -> Result<ChoiMatrix<T>> {
    ps.reconstruct_choi()
}

pub fn materialize_choi_shadow<T: Real>(r: &ShadowRecord<T>) -> DenseOperator<T> {
    r.materialize()
}

pub fn estimate_channel_functional<T: Real>(
    ps: &ProcessShadow<T>,
    rho: &DenseOperator<T>,
    o: &DenseOperator<T>,
    k: usize,
) -> Result<T> {
    ps.estimate_channel_functional(rho, o, k)
}

/// Outcome of the checks that uniform `b_in` sampling reproduces Choi-state
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BinIndependenceReport {
    pub samples: usize,
    /// Largest `|Tr[eta (U^T|b><b|U^*) (x) I] - 1|` over the sampled inputs.
    pub max_normalization_deviation: f64,
    /// Largest `|Tr[(P_A (x) I) eta]|` over nontrivial input Pauli strings.
    pub max_input_pauli_expectation: f64,
    pub normalization_ok: bool,
    pub traceless_ok: bool,
}

impl BinIndependenceReport {
    pub fn passed(&self) -> bool {
        self.normalization_ok && self.traceless_ok
    }
}

/// Dense checks on the unnormalized Choi matrix. Input frames alternate
/// between the Pauli and Clifford ensembles.
pub fn verify_bin_independence<T: Real, R: Rng + ?Sized>(
    ch: &Channel<T>,
    samples: usize,
    rng: &mut R,
) -> Result<BinIndependenceReport> {
    let n = ch.n_qubits();
    let eta = ch.choi();
    let marginal = eta.partial_trace(Register::B)?;
    let mut max_norm = 0.0f64;
    for s in 0..samples {
        let ensemble = if s % 2 == 0 {
            Ensemble::PauliProduct
        } else {
            Ensemble::Clifford
        };
        let u = sample_frame::<T, _>(ensemble, n, rng)?;
        let b = Bits::from_index(n, rng.random_range(0..1usize << n));
        let z: Vec<Cx<T>> = u.eigenvector(&b).into_iter().map(|x| x.conj()).collect();
        let proj = DenseOperator::outer(&z)?;
        let tr = marginal.trace_product(&proj)?;
        max_norm = max_norm.max((tr - Cx::new(T::one(), T::zero())).norm().as_f64());
    }
    let mut max_pauli = 0.0f64;
    for p in PauliString::all(n).filter(|p| !p.is_identity()) {
        let v = marginal.trace_product(&p.to_operator())?.norm().as_f64();
        max_pauli = max_pauli.max(v);
    }
    let tol = T::structural_tol().as_f64();
    Ok(BinIndependenceReport {
        samples,
        max_normalization_deviation: max_norm,
        max_input_pauli_expectation: max_pauli,
        normalization_ok: max_norm <= tol,
        traceless_ok: max_pauli <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_haar_unitary, Axis};
    use crate::pauli::Pauli;
    use crate::rng::stream;
    use crate::state::DensityMatrix;

    type Op = DenseOperator<f64>;

    fn x_channel() -> Channel<f64> {
        Channel::unitary(Pauli::X.matrix::<f64>()).unwrap()
    }

    fn z_frames(n: usize) -> UnitarySpec<f64> {
        UnitarySpec::PauliProduct(vec![Axis::Z; n])
    }

    #[test]
    fn identity_channel_with_z_frames_copies_input() {
        let ch = Channel::<f64>::identity(2);
        let mut rng = stream(1, 0);
        for _ in 0..500 {
            let r = acquire_record(
                &ch,
                Ensemble::PauliProduct,
                Ensemble::PauliProduct,
                &mut rng,
            )
            .unwrap();
            if *r.u_in() == z_frames(2) && *r.u_out() == z_frames(2) {
                assert_eq!(r.b_in(), r.b_out());
            }
        }
    }

    #[test]
    fn x_channel_with_z_frames_flips_qubit_zero() {
        let ch = Channel::unitary(Pauli::X.matrix::<f64>().kron(&Op::identity(1))).unwrap();
        let mut rng = stream(2, 0);
        for _ in 0..500 {
            let r = acquire_record(
                &ch,
                Ensemble::PauliProduct,
                Ensemble::PauliProduct,
                &mut rng,
            )
            .unwrap();
            if *r.u_in() == z_frames(2) && *r.u_out() == z_frames(2) {
                assert_eq!(*r.b_out(), r.b_in().flipped(0));
            }
        }
    }

    #[test]
    fn choi_shadow_examples() {
        let zz = ShadowRecord::new(
            Bits::zeros(1),
            z_frames(1),
            z_frames(1),
            Bits::zeros(1),
            Ensemble::PauliProduct,
            Ensemble::PauliProduct,
        )
        .unwrap();
        let d = Op::from_real_rows(&[&[2.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(zz.materialize().max_abs_diff(&d.kron(&d)) < 1e-15);

        let y = ShadowRecord::new(
            Bits::zeros(1),
            UnitarySpec::PauliProduct(vec![Axis::Y]),
            z_frames(1),
            Bits::zeros(1),
            Ensemble::PauliProduct,
            Ensemble::PauliProduct,
        )
        .unwrap();
        let flipped = crate::state_shadows::tau::<f64>(Axis::Y, true);
        assert!(y.input_factor().max_abs_diff(&flipped) < 1e-15);
        let dense = inverse_map(Ensemble::PauliProduct, &y.u_in().projector(y.b_in())).transpose();
        assert!(y.input_factor().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn exact_distribution_reproduces_normalized_choi() {
        let mut rng = stream(3, 0);
        let ch = Channel::unitary(sample_haar_unitary::<f64, _>(1, &mut rng).unwrap()).unwrap();
        let eta = ch.choi().normalize();
        for (ei, eo) in [
            (Ensemble::PauliProduct, Ensemble::PauliProduct),
            (Ensemble::PauliProduct, Ensemble::Clifford),
            (Ensemble::Clifford, Ensemble::PauliProduct),
            (Ensemble::Clifford, Ensemble::Clifford),
        ] {
            let dist = exact_record_distribution(&ch, ei, eo).unwrap();
            let total: f64 = dist.iter().map(|(p, _)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut acc = Op::zeros(2);
            for (p, r) in &dist {
                acc.add_scaled(*p, &r.materialize()).unwrap();
            }
            assert!(acc.max_abs_diff(&eta) < 1e-12, "{ei}/{eo}");
        }
    }

    #[test]
    fn every_shadow_has_unit_trace_and_is_hermitian() {
        let mut rng = stream(4, 0);
        let ch = Channel::unitary(sample_haar_unitary::<f64, _>(2, &mut rng).unwrap()).unwrap();
        for (ei, eo) in [
            (Ensemble::PauliProduct, Ensemble::Clifford),
            (Ensemble::Clifford, Ensemble::PauliProduct),
        ] {
            for _ in 0..20 {
                let z = acquire_record(&ch, ei, eo, &mut rng).unwrap().materialize();
                assert!((z.trace().re - 1.0).abs() < 1e-12);
                assert!(z.is_hermitian(1e-12));
            }
        }
    }

    #[test]
    fn aggregated_sum_matches_record_by_record() {
        let mut rng = stream(5, 0);
        let ps = acquire_process_shadow(
            &x_channel(),
            Ensemble::PauliProduct,
            Ensemble::PauliProduct,
            300,
            &mut rng,
        )
        .unwrap();
        let mut direct = Op::zeros(2);
        for r in ps.records() {
            direct += &r.materialize();
        }
        assert!(ps.shadow_sum().max_abs_diff(&direct) < 1e-10);
        let single = ps.prefix(1).reconstruct_choi().unwrap();
        assert!(single.max_abs_diff(&ps.records()[0].materialize()) < 1e-15);
    }

    #[test]
    fn factorized_functional_matches_dense_trace() {
        let mut rng = stream(6, 0);
        let ch = Channel::unitary(sample_haar_unitary::<f64, _>(2, &mut rng).unwrap()).unwrap();
        let rho = DensityMatrix::<f64>::random_hilbert_schmidt(2, &mut rng).into_operator();
        let o = PauliString::single(2, 0, Pauli::Z).to_operator::<f64>();
        let rt_o = rho.transpose().kron(&o);
        for (ei, eo) in [
            (Ensemble::Clifford, Ensemble::PauliProduct),
            (Ensemble::PauliProduct, Ensemble::Clifford),
        ] {
            let ps = acquire_process_shadow(&ch, ei, eo, 20, &mut rng).unwrap();
            for r in ps.records() {
                let dense = r.materialize().trace_product(&rt_o).unwrap() * 4.0;
                assert!((dense - r.functional_value(&rho, &o)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn empty_shadow_cannot_be_reconstructed() {
        let ps =
            ProcessShadow::<f64>::new(1, Ensemble::PauliProduct, Ensemble::PauliProduct, vec![])
                .unwrap();
        assert!(matches!(ps.reconstruct_choi(), Err(ShadowError::Empty(_))));
    }

    #[test]
    fn bin_independence_checks() {
        let mut rng = stream(7, 0);
        let report = verify_bin_independence(&Channel::<f64>::identity(1), 20, &mut rng).unwrap();
        assert!(report.passed());
        let leaky = Channel::new_unchecked(vec![Op::identity(2).scale(0.9)]).unwrap();
        let report = verify_bin_independence(&leaky, 20, &mut rng).unwrap();
        assert!(!report.normalization_ok);
    }
}
