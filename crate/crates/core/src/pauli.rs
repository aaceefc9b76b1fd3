use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::scalar::{cx, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Real>(self) -> DenseOperator<T> {
        let (o, l) = (Cx::<T>::zero(), Cx::<T>::one());
        let i = cx(T::zero(), T::one());
        let rows = match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        };
        DenseOperator::from_vec(1, rows.concat()).expect("2x2")
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(ShadowError::Parse(format!(
                "'{other}' is not a Pauli letter"
            ))),
        }
    }

    /// Symplectic bits `(x, z)`, with `Y` as `(1, 1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Tensor product of Pauli letters, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n_qubits],
        }
    }

    /// `letter` on `site`, identity elsewhere.
    pub fn single(n_qubits: usize, site: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[site] = letter;
        Self { letters }
    }

    /// The `index`-th string in base-4 order (`I, X, Y, Z` per digit, qubit 0
    /// most significant).
    pub fn from_index(n_qubits: usize, mut index: usize) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        for q in (0..n_qubits).rev() {
            letters[q] = Pauli::ALL[index % 4];
            index /= 4;
        }
        Self { letters }
    }

    /// All `4^n` strings.
    pub fn all(n_qubits: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n_qubits)).map(move |i| Self::from_index(n_qubits, i))
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Number of non-identity letters.
    pub fn support(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support_sites(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn to_operator<T: Real>(&self) -> DenseOperator<T> {
        self.letters
            .iter()
            .fold(DenseOperator::identity(0), |acc, p| acc.kron(&p.matrix()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = ShadowError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(ShadowError::Parse("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_counts_non_identity_letters() {
        let p: PauliString = "XIZY".parse().unwrap();
        assert_eq!(p.support(), 3);
        assert_eq!(p.support_sites(), vec![0, 2, 3]);
        assert_eq!(p.to_string(), "XIZY");
    }

    #[test]
    fn every_nontrivial_string_is_hermitian_unitary_traceless() {
        for p in PauliString::all(2) {
            let m = p.to_operator::<f64>();
            assert!(m.is_hermitian(1e-14));
            assert!((&m * &m).max_abs_diff(&DenseOperator::identity(2)) < 1e-14);
            if !p.is_identity() {
                assert!(m.trace().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }
}
