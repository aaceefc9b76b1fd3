//! Measurement-frame ensembles and computational-basis measurement.

mod clifford;
mod haar;

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;

pub use clifford::{
    enumerate_clifford_group, enumerate_cliffords, enumerate_symplectic, Clifford,
    MAX_CLIFFORD_QUBITS,
};
pub use haar::{sample_haar_unitary, MAX_HAAR_QUBITS};

use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::pauli::Pauli;
use crate::rng::sample_index;
use crate::scalar::{cx, Cx, Real};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ensemble {
    PauliProduct,
    Clifford,
}

impl Ensemble {
    pub fn tag(self) -> &'static str {
        match self {
            Ensemble::PauliProduct => "pauli",
            Ensemble::Clifford => "clifford",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Ensemble {
    type Err = ShadowError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pauli" | "pauli-product" => Ok(Ensemble::PauliProduct),
            "clifford" => Ok(Ensemble::Clifford),
            other => Err(ShadowError::Parse(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// Single-qubit measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        self.pauli().as_char()
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(ShadowError::Parse(format!(
                "'{other}' is not a measurement axis"
            ))),
        }
    }

    /// Basis change `U` with `U^dagger |b>` the `(-1)^b` eigenvector of the
    /// axis: `Z -> I`, `X -> H`, `Y -> H S^dagger`.
    pub fn rotation<T: Real>(self) -> [[Cx<T>; 2]; 2] {
        let h = T::FRAC_1_SQRT_2();
        let (o, l) = (Cx::zero(), cx(T::one(), T::zero()));
        match self {
            Axis::Z => [[l, o], [o, l]],
            Axis::X => [
                [cx(h, T::zero()), cx(h, T::zero())],
                [cx(h, T::zero()), cx(-h, T::zero())],
            ],
            Axis::Y => [
                [cx(h, T::zero()), cx(T::zero(), -h)],
                [cx(h, T::zero()), cx(T::zero(), h)],
            ],
        }
    }

    /// `U^dagger |bit>`.
    pub fn eigenvector<T: Real>(self, bit: bool) -> [Cx<T>; 2] {
        let r = self.rotation::<T>()[bit as usize];
        [r[0].conj(), r[1].conj()]
    }
}

/// Computational-basis outcome, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

pub type MeasurementOutcome = Bits;

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    /// Bit `q` is the `(n - 1 - q)`-th binary digit of `index`.
    pub fn from_index(n: usize, index: usize) -> Self {
        Bits((0..n).map(|q| (index >> (n - 1 - q)) & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, q: usize) -> bool {
        self.0[q]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn flipped(&self, q: usize) -> Self {
        let mut b = self.0.clone();
        b[q] = !b[q];
        Bits(b)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = ShadowError;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ShadowError::Parse(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

/// A sampled measurement frame.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec<T: Real> {
    PauliProduct(Vec<Axis>),
    Clifford(Clifford),
    Explicit(DenseOperator<T>),
}

impl<T: Real> UnitarySpec<T> {
    pub fn n_qubits(&self) -> usize {
        match self {
            UnitarySpec::PauliProduct(axes) => axes.len(),
            UnitarySpec::Clifford(c) => c.n_qubits(),
            UnitarySpec::Explicit(u) => u.n_qubits(),
        }
    }

    pub fn ensemble(&self) -> Option<Ensemble> {
        match self {
            UnitarySpec::PauliProduct(_) => Some(Ensemble::PauliProduct),
            UnitarySpec::Clifford(_) => Some(Ensemble::Clifford),
            UnitarySpec::Explicit(_) => None,
        }
    }

    pub fn axes(&self) -> Option<&[Axis]> {
        match self {
            UnitarySpec::PauliProduct(axes) => Some(axes),
            _ => None,
        }
    }

    pub fn to_matrix(&self) -> DenseOperator<T> {
        match self {
            UnitarySpec::PauliProduct(axes) => {
                axes.iter().fold(DenseOperator::identity(0), |acc, a| {
                    acc.kron(&DenseOperator::from_vec(1, a.rotation::<T>().concat()).expect("2x2"))
                })
            }
            UnitarySpec::Clifford(c) => c.to_matrix(),
            UnitarySpec::Explicit(u) => u.clone(),
        }
    }

    /// `U v`.
    pub fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        match self {
            UnitarySpec::PauliProduct(axes) => {
                let n = axes.len();
                let mut v = v.to_vec();
                for (q, a) in axes.iter().enumerate() {
                    if *a != Axis::Z {
                        apply_single_qubit(&mut v, n, q, &a.rotation());
                    }
                }
                v
            }
            UnitarySpec::Clifford(c) => c.to_matrix().apply(v).expect("frame dimension"),
            UnitarySpec::Explicit(u) => u.apply(v).expect("frame dimension"),
        }
    }

    /// `U^dagger |b>`.
    pub fn eigenvector(&self, b: &Bits) -> Vec<Cx<T>> {
        match self {
            UnitarySpec::PauliProduct(axes) => {
                let mut v = vec![cx(T::one(), T::zero())];
                for (q, a) in axes.iter().enumerate() {
                    let e = a.eigenvector::<T>(b.get(q));
                    v = v.iter().flat_map(|&x| [x * e[0], x * e[1]]).collect();
                }
                v
            }
            _ => self
                .to_matrix()
                .row(b.index())
                .iter()
                .map(|z| z.conj())
                .collect(),
        }
    }

    /// `U^dagger |b><b| U`.
    pub fn projector(&self, b: &Bits) -> DenseOperator<T> {
        DenseOperator::outer(&self.eigenvector(b)).expect("power-of-two length")
    }

    /// Outcome distribution `<b| U rho U^dagger |b>` over all `b`.
    pub fn outcome_probabilities(&self, rho: &DenseOperator<T>) -> Vec<T> {
        let u = self.to_matrix();
        let rotated = &(&u * rho) * &u.adjoint();
        rotated.diag().into_iter().map(|z| z.re).collect()
    }
}

/// Applies a 2x2 gate to qubit `q` of an `n`-qubit state vector.
pub(crate) fn apply_single_qubit<T: Real>(
    v: &mut [Cx<T>],
    n: usize,
    q: usize,
    g: &[[Cx<T>; 2]; 2],
) {
    let stride = 1usize << (n - 1 - q);
    for base in 0..v.len() {
        if base & stride != 0 {
            continue;
        }
        let (a, b) = (v[base], v[base | stride]);
        v[base] = g[0][0] * a + g[0][1] * b;
        v[base | stride] = g[1][0] * a + g[1][1] * b;
    }
}

pub fn sample_pauli_frame<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> UnitarySpec<T> {
    UnitarySpec::PauliProduct(
        (0..n_qubits)
            .map(|_| Axis::ALL[rng.random_range(0..3)])
            .collect(),
    )
}

pub fn sample_clifford<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> Result<UnitarySpec<T>> {
    Clifford::sample(n_qubits, rng).map(UnitarySpec::Clifford)
}

pub fn sample_frame<T: Real, R: Rng + ?Sized>(
    ensemble: Ensemble,
    n_qubits: usize,
    rng: &mut R,
) -> Result<UnitarySpec<T>> {
    match ensemble {
        Ensemble::PauliProduct => Ok(sample_pauli_frame(n_qubits, rng)),
        Ensemble::Clifford => sample_clifford(n_qubits, rng),
    }
}

const CLAMP: f64 = 1e-9;
const MASS_TOL: f64 = 1e-6;

/// Turns a diagonal into a sampling distribution: tiny negatives are clamped
/// to zero and the result renormalized.
pub fn probabilities_from_diagonal<T: Real>(diag: &[T]) -> Result<Vec<f64>> {
    let mut p = Vec::with_capacity(diag.len());
    for &x in diag {
        let x = x.as_f64();
        if x < -CLAMP {
            return Err(ShadowError::NotPositive(x));
        }
        p.push(x.max(0.0));
    }
    let mass: f64 = p.iter().sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(ShadowError::ProbabilityMass(mass));
    }
    p.iter_mut().for_each(|x| *x /= mass);
    Ok(p)
}

/// Samples `b` with probability `<b|rho|b>`.
pub fn measure_computational<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    rng: &mut R,
) -> Result<Bits> {
    let diag: Vec<T> = rho.diag().into_iter().map(|z| z.re).collect();
    let p = probabilities_from_diagonal(&diag)?;
    Ok(Bits::from_index(rho.n_qubits(), sample_index(&p, rng)))
}

/// Samples from an explicit distribution over `n`-bit outcomes.
pub fn sample_outcome<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    probs: &[T],
    rng: &mut R,
) -> Result<Bits> {
    let p = probabilities_from_diagonal(probs)?;
    Ok(Bits::from_index(n_qubits, sample_index(&p, rng)))
}
