//! Sample-complexity bounds and brute-force shadow-norm checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ensembles::{Bits, Ensemble};
use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::pauli::PauliString;
use crate::scalar::{cx, Real};
use crate::state_shadows::{enumerate_frames, inverse_map};

/// An observable or input operator for the budget calculator. Dense
/// operators carry an optional declared support size; it is never guessed.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable<T: Real> {
    Pauli(PauliString),
    Dense {
        op: DenseOperator<T>,
        support: Option<usize>,
    },
}

impl<T: Real> Observable<T> {
    pub fn dense(op: DenseOperator<T>) -> Self {
        Observable::Dense { op, support: None }
    }

    pub fn with_support(op: DenseOperator<T>, support: usize) -> Self {
        Observable::Dense {
            op,
            support: Some(support),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.n_qubits(),
            Observable::Dense { op, .. } => op.n_qubits(),
        }
    }

    pub fn to_operator(&self) -> DenseOperator<T> {
        match self {
            Observable::Pauli(p) => p.to_operator(),
            Observable::Dense { op, .. } => op.clone(),
        }
    }

    pub fn support(&self) -> Option<usize> {
        match self {
            Observable::Pauli(p) => Some(p.support()),
            Observable::Dense { support, .. } => *support,
        }
    }
}

impl<T: Real> From<PauliString> for Observable<T> {
    fn from(p: PauliString) -> Self {
        Observable::Pauli(p)
    }
}

/// `S(O) = 2{[2 Tr(O)^2 + Tr(O^2)] I + 2 Tr(O) O + 2 O^2}`.
pub fn s_operator<T: Real>(o: &DenseOperator<T>) -> DenseOperator<T> {
    let tr = o.trace();
    let o2 = o * o;
    let two = cx(T::of(2.0), T::zero());
    let c = two * tr * tr + o2.trace();
    let mut s = DenseOperator::identity(o.n_qubits()).scale_cx(c);
    s += &o.scale_cx(two * tr);
    s += &o2.scale(T::of(2.0));
    s.scale(T::of(2.0))
}

/// `4^supp ||O||^2` for Pauli frames, `||S(O)||` for Clifford frames.
pub fn f_value<T: Real>(o: &Observable<T>, ensemble: Ensemble) -> Result<T> {
    match ensemble {
        Ensemble::PauliProduct => {
            let supp = o.support().ok_or(ShadowError::UnknownSupport)?;
            let norm = match o {
                Observable::Pauli(_) => T::one(),
                Observable::Dense { op, .. } => op.operator_norm(),
            };
            Ok(T::of(4f64.powi(supp as i32)) * norm * norm)
        }
        Ensemble::Clifford => Ok(s_operator(&o.to_operator()).operator_norm()),
    }
}

/// `O - Tr(O)/d I`.
pub fn traceless_part<T: Real>(o: &DenseOperator<T>) -> DenseOperator<T> {
    let d = T::of_usize(o.dim());
    o - &DenseOperator::identity(o.n_qubits()).scale_cx(o.trace() / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityQuery<T: Real> {
    pub epsilon: f64,
    pub delta: f64,
    pub n_qubits: usize,
    pub observables: Vec<Observable<T>>,
    pub input_states: Vec<Observable<T>>,
    pub ensemble_in: Ensemble,
    pub ensemble_out: Ensemble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairValue {
    pub input: usize,
    pub observable: usize,
    pub f_in: f64,
    pub f_out: f64,
}

/// State-tomography budget, with both the plain and traceless-shifted
/// shadow-norm bounds. `n` uses the plain bound.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBudget {
    pub k: u64,
    pub n: u64,
    pub n_traceless: u64,
    pub norm_bound: f64,
    pub norm_bound_traceless: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityAnswer {
    pub k: u64,
    pub n: u64,
    pub m: u64,
    pub per_pair_f_values: Vec<PairValue>,
    pub state_budget: Option<StateBudget>,
}

/// Ceiling that forgives floating-point noise just above an integer.
fn snapped_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(1.0) as u64
    } else {
        x.ceil().max(1.0) as u64
    }
}

fn validate_query<T: Real>(q: &ComplexityQuery<T>) -> Result<()> {
    for (name, v) in [("epsilon", q.epsilon), ("delta", q.delta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(ShadowError::InvalidParameter(format!(
                "{name} must lie in (0, 1], got {v}"
            )));
        }
    }
    if q.observables.is_empty() {
        return Err(ShadowError::Empty("observables"));
    }
    for o in q.observables.iter().chain(&q.input_states) {
        if o.n_qubits() != q.n_qubits {
            return Err(ShadowError::DimensionMismatch {
                expected: q.n_qubits,
                found: o.n_qubits(),
            });
        }
    }
    Ok(())
}

fn state_norm_bounds<T: Real>(o: &Observable<T>, ensemble: Ensemble) -> Result<(f64, f64)> {
    let op = o.to_operator();
    let shifted = traceless_part(&op);
    match ensemble {
        Ensemble::PauliProduct => {
            let supp = T::of(4f64.powi(o.support().ok_or(ShadowError::UnknownSupport)? as i32));
            let plain = f_value(o, ensemble)?;
            let norm = shifted.operator_norm();
            Ok((plain.as_f64(), (supp * norm * norm).as_f64()))
        }
        Ensemble::Clifford => {
            let plain = T::of(2.0) * s_operator(&op).operator_norm();
            let shifted = T::of(3.0) * shifted.trace_product(&shifted)?.re;
            Ok((plain.as_f64(), shifted.as_f64()))
        }
    }
}

/// Median-of-means budget for estimating every `Tr[E(rho_l) O_j]` to
/// accuracy `epsilon` with failure probability `delta` (natural log).
/// Without inputs the state-tomography budget is returned instead.
pub fn sample_budget<T: Real>(q: &ComplexityQuery<T>) -> Result<ComplexityAnswer> {
    validate_query(q)?;
    let m_obs = q.observables.len() as f64;
    let scale = 34.0 / (q.epsilon * q.epsilon);
    if q.input_states.is_empty() {
        let k = snapped_ceil(2.0 * (2.0 * m_obs / q.delta).ln());
        let mut plain = 0f64;
        let mut shifted = 0f64;
        for o in &q.observables {
            let (a, b) = state_norm_bounds(o, q.ensemble_out)?;
            plain = plain.max(a);
            shifted = shifted.max(b);
        }
        let n = snapped_ceil(scale * plain);
        return Ok(ComplexityAnswer {
            k,
            n,
            m: n * k,
            per_pair_f_values: Vec::new(),
            state_budget: Some(StateBudget {
                k,
                n,
                n_traceless: snapped_ceil(scale * shifted),
                norm_bound: plain,
                norm_bound_traceless: shifted,
            }),
        });
    }
    let l_in = q.input_states.len() as f64;
    let k = snapped_ceil(2.0 * (2.0 * m_obs * l_in / q.delta).ln());
    let f_in: Vec<f64> = q
        .input_states
        .iter()
        .map(|r| f_value(r, q.ensemble_in).map(|x| x.as_f64()))
        .collect::<Result<_>>()?;
    let f_out: Vec<f64> = q
        .observables
        .iter()
        .map(|o| f_value(o, q.ensemble_out).map(|x| x.as_f64()))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::with_capacity(f_in.len() * f_out.len());
    let mut worst = 0f64;
    for (i, &fi) in f_in.iter().enumerate() {
        for (j, &fo) in f_out.iter().enumerate() {
            worst = worst.max(fi * fo);
            pairs.push(PairValue {
                input: i,
                observable: j,
                f_in: fi,
                f_out: fo,
            });
        }
    }
    let n = snapped_ceil(scale * 4f64.powi(q.n_qubits as i32) * worst);
    Ok(ComplexityAnswer {
        k,
        n,
        m: n * k,
        per_pair_f_values: pairs,
        state_budget: None,
    })
}

/// Single-shot variance bound `4^n f_in f_out` for a channel functional.
pub fn variance_proxy(n_qubits: usize, f_in: f64, f_out: f64) -> f64 {
    4f64.powi(n_qubits as i32) * f_in * f_out
}

/// `X = sum_b E_U U^dag|b><b|U <b|U M^-1(O) U^dag|b>^2` by enumeration.
pub fn shadow_norm_operator<T: Real>(
    o: &DenseOperator<T>,
    ensemble: Ensemble,
) -> Result<DenseOperator<T>> {
    let n = o.n_qubits();
    if !(1..=2).contains(&n) {
        return Err(ShadowError::UnsupportedSize {
            what: "shadow norm enumeration",
            range: "1..=2 qubits",
            found: n,
        });
    }
    let inv = inverse_map(ensemble, o);
    let frames = enumerate_frames::<T>(ensemble, n)?;
    let mut x = DenseOperator::zeros(n);
    for u in &frames {
        for b in 0..1usize << n {
            let proj = u.projector(&Bits::from_index(n, b));
            let v = proj.trace_product(&inv)?.re;
            x.add_scaled(v * v, &proj)?;
        }
    }
    Ok(x.scale(T::one() / T::of_usize(frames.len())))
}

/// Squared shadow norm maximized over all states (top eigenvalue).
pub fn shadow_norm_bruteforce<T: Real>(o: &DenseOperator<T>, ensemble: Ensemble) -> Result<T> {
    Ok(shadow_norm_operator(o, ensemble)?.max_eigenvalue())
}

/// `E_U sum_b U^dag|b><b|U <b|U B U^dag|b>^2` over the one-qubit Clifford
/// group, and its closed form for a unitary 3-design.
pub fn three_design_sides<T: Real>(
    b: &DenseOperator<T>,
) -> Result<(DenseOperator<T>, DenseOperator<T>)> {
    if b.n_qubits() != 1 {
        return Err(ShadowError::UnsupportedSize {
            what: "3-design check",
            range: "1 qubit",
            found: b.n_qubits(),
        });
    }
    let frames = enumerate_frames::<T>(Ensemble::Clifford, 1)?;
    let mut lhs = DenseOperator::zeros(1);
    for u in &frames {
        for bit in 0..2 {
            let proj = u.projector(&Bits::from_index(1, bit));
            let v = proj.trace_product(b)?.re;
            lhs.add_scaled(v * v, &proj)?;
        }
    }
    lhs = lhs.scale(T::one() / T::of_usize(frames.len()));
    let tr = b.trace();
    let b2 = b * b;
    let two = cx(T::of(2.0), T::zero());
    let mut rhs = DenseOperator::identity(1).scale_cx(tr * tr + b2.trace());
    rhs += &b.scale_cx(two * tr);
    rhs += &b2.scale(T::of(2.0));
    // summed over both outcomes, divided by d(d+1)(d+2)
    Ok((lhs, rhs.scale(T::of(2.0 / 24.0))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub trials: usize,
    pub max_identity_residual: f64,
    /// Smallest eigenvalue of `2 S(O) - L` over all trials.
    pub min_gap_eigenvalue: f64,
}

impl LemmaReport {
    pub fn passed(&self, identity_tol: f64, psd_tol: f64) -> bool {
        self.max_identity_residual < identity_tol && self.min_gap_eigenvalue >= -psd_tol
    }
}

/// Random Hermitian matrix `(G + G^dag)/2` with Gaussian entries.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> DenseOperator<T> {
    let g = DenseOperator::from_fn(n_qubits, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        cx(T::of(a), T::of(b))
    });
    (&g + &g.adjoint()).scale(T::of(0.5))
}

/// One-qubit check of `L <= 2 S(O)` and of the exact 3-design identity on
/// random Hermitian operators, with the Clifford group enumerated.
pub fn verify_lemma1<R: Rng + ?Sized>(trials: usize, rng: &mut R) -> Result<LemmaReport> {
    let mut max_identity_residual = 0f64;
    let mut min_gap_eigenvalue = f64::INFINITY;
    for _ in 0..trials {
        let b = random_hermitian::<f64, _>(1, rng);
        let (lhs, rhs) = three_design_sides(&b)?;
        max_identity_residual = max_identity_residual.max(lhs.max_abs_diff(&rhs));

        let o = random_hermitian::<f64, _>(1, rng);
        let l = shadow_norm_operator(&o, Ensemble::Clifford)?;
        let gap = &s_operator(&o).scale(2.0) - &l;
        min_gap_eigenvalue = min_gap_eigenvalue.min(gap.min_eigenvalue());
    }
    Ok(LemmaReport {
        trials,
        max_identity_residual,
        min_gap_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use crate::rng::stream;
    use crate::state::DensityMatrix;

    type Op = DenseOperator<f64>;

    fn z1() -> PauliString {
        PauliString::single(1, 0, Pauli::Z)
    }

    #[test]
    fn s_of_identity() {
        let s = s_operator(&Op::identity(1));
        assert!(s.max_abs_diff(&Op::identity(1).scale(32.0)) < 1e-12);
    }

    #[test]
    fn s_of_states_is_bounded() {
        let mut rng = stream(1, 0);
        for n in 1..=3 {
            for _ in 0..30 {
                let rho = DensityMatrix::<f64>::random_hilbert_schmidt(n, &mut rng);
                assert!(s_operator(rho.as_operator()).operator_norm() <= 14.0 + 1e-9);
            }
        }
    }

    #[test]
    fn pauli_f_values() {
        assert_eq!(
            f_value::<f64>(
                &PauliString::single(2, 0, Pauli::Z).into(),
                Ensemble::PauliProduct
            )
            .unwrap(),
            4.0
        );
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(
            f_value::<f64>(&zz.into(), Ensemble::PauliProduct).unwrap(),
            16.0
        );
        let dense = Observable::dense(Op::identity(1));
        assert!(matches!(
            f_value(&dense, Ensemble::PauliProduct),
            Err(ShadowError::UnknownSupport)
        ));
    }

    #[test]
    fn worked_budget() {
        let q = ComplexityQuery {
            epsilon: 0.1,
            delta: 0.1,
            n_qubits: 1,
            observables: vec![z1().into()],
            input_states: vec![Observable::with_support(Op::basis_projector(1, 0), 1)],
            ensemble_in: Ensemble::PauliProduct,
            ensemble_out: Ensemble::PauliProduct,
        };
        let a = sample_budget(&q).unwrap();
        assert_eq!((a.k, a.n, a.m), (6, 217_600, 6 * 217_600));
        let mut smaller = q.clone();
        smaller.delta = 0.01;
        assert!(sample_budget(&smaller).unwrap().k >= a.k);
        let mut clifford = q.clone();
        clifford.ensemble_in = Ensemble::Clifford;
        let c = sample_budget(&clifford).unwrap();
        assert!(c.per_pair_f_values[0].f_in <= 14.0 + 1e-9);
    }

    #[test]
    fn state_budget_without_inputs() {
        let q = ComplexityQuery::<f64> {
            epsilon: 0.1,
            delta: 0.1,
            n_qubits: 1,
            observables: vec![z1().into()],
            input_states: vec![],
            ensemble_in: Ensemble::PauliProduct,
            ensemble_out: Ensemble::PauliProduct,
        };
        let a = sample_budget(&q).unwrap();
        let s = a.state_budget.unwrap();
        assert_eq!(a.k, 6);
        assert_eq!(s.n, 13_600);
        assert_eq!(s.norm_bound_traceless, 4.0);
    }

    #[test]
    fn enumerated_norms_respect_closed_bounds() {
        let mut rng = stream(2, 0);
        for n in 1..=2 {
            for p in PauliString::all(n) {
                let v = shadow_norm_bruteforce(&p.to_operator::<f64>(), Ensemble::PauliProduct)
                    .unwrap();
                assert!(v <= 4f64.powi(p.support() as i32) + 1e-9);
            }
            for _ in 0..5 {
                let o = traceless_part(&random_hermitian::<f64, _>(n, &mut rng));
                let v = shadow_norm_bruteforce(&o, Ensemble::Clifford).unwrap();
                assert!(v <= 3.0 * o.trace_product(&o).unwrap().re + 1e-9);
            }
        }
        let z = shadow_norm_bruteforce(&z1().to_operator::<f64>(), Ensemble::PauliProduct).unwrap();
        assert!((z - 3.0).abs() < 1e-12);
        let id = traceless_part(&Op::identity(1));
        assert!(
            shadow_norm_bruteforce(&id, Ensemble::Clifford)
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn lemma_holds() {
        let report = verify_lemma1(100, &mut stream(3, 0)).unwrap();
        assert!(report.passed(1e-10, 1e-9), "{report:?}");
    }

    #[test]
    fn three_design_for_identity() {
        let (lhs, rhs) = three_design_sides(&Op::identity(1)).unwrap();
        assert!(lhs.max_abs_diff(&Op::identity(1)) < 1e-12);
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn snapping() {
        assert_eq!(snapped_ceil(217_600.000_000_01), 217_600);
        assert_eq!(snapped_ceil(5.99), 6);
        assert_eq!(snapped_ceil(6.2), 7);
    }
}
