//! Clifford group elements as signed symplectic tableaux.
//!
//! Row `i < n` holds the image of `X_i` (destabilizer), row `n + i` the image
//! of `Z_i` (stabilizer). Within a row, bit `q` is the X component on qubit
//! `q`, bit `n + q` the Z component, and bit `2n` the sign. `(x, z) = (1, 1)`
//! denotes the Hermitian `Y`.

use num_traits::Zero;
use rand::Rng;

use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::scalar::{cx, Cx, Real};

pub const MAX_CLIFFORD_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clifford {
    n_qubits: usize,
    rows: Vec<u64>,
}

impl Clifford {
    pub fn from_rows(n_qubits: usize, rows: Vec<u64>) -> Result<Self> {
        check_size(n_qubits)?;
        if rows.len() != 2 * n_qubits {
            return Err(ShadowError::DimensionMismatch {
                expected: 2 * n_qubits,
                found: rows.len(),
            });
        }
        if rows.iter().any(|&r| r >> (2 * n_qubits + 1) != 0) {
            return Err(ShadowError::Parse(
                "tableau row has bits beyond the sign bit".into(),
            ));
        }
        let c = Self { n_qubits, rows };
        if !c.is_symplectic() {
            return Err(ShadowError::NotSymplectic);
        }
        Ok(c)
    }

    pub fn identity(n_qubits: usize) -> Self {
        let rows = (0..2 * n_qubits).map(|i| 1u64 << i).collect();
        Self { n_qubits, rows }
    }

    /// Uniformly random element (up to global phase), following the
    /// Bravyi-Maslov canonical-form sampler.
    pub fn sample<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_size(n_qubits)?;
        let n = n_qubits;
        let (had, perm) = sample_qmallows(n, rng);

        let mut gamma1 = random_diagonal(n, rng);
        let mut gamma2 = random_diagonal(n, rng);
        let mut delta1 = Gf2::identity(n);
        let mut delta2 = Gf2::identity(n);
        fill_tril(&mut gamma1, rng, true);
        fill_tril(&mut gamma2, rng, true);
        fill_tril(&mut delta1, rng, false);
        fill_tril(&mut delta2, rng, false);

        let table1 = block(
            &delta1,
            &gamma1.mul(&delta1),
            &inverse_tril(&delta1).transpose(),
        );
        let table2 = block(
            &delta2,
            &gamma2.mul(&delta2),
            &inverse_tril(&delta2).transpose(),
        );

        let mut table = Gf2::zeros(2 * n);
        for (i, &p) in perm.iter().enumerate() {
            table.0[i] = table2.0[p].clone();
            table.0[n + i] = table2.0[n + p].clone();
        }
        for (i, &h) in had.iter().enumerate() {
            if h {
                table.0.swap(i, n + i);
            }
        }
        let product = table1.mul(&table);

        let rows = (0..2 * n)
            .map(|i| {
                let mut r = 0u64;
                for (j, &bit) in product.0[i].iter().enumerate() {
                    r |= (bit as u64) << j;
                }
                r | (rng.random_range(0..2u64) << (2 * n))
            })
            .collect();
        let c = Self { n_qubits: n, rows };
        debug_assert!(c.is_symplectic());
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Rows with the sign bits cleared; identifies the symplectic class.
    pub fn symplectic_rows(&self) -> Vec<u64> {
        let mask = (1u64 << (2 * self.n_qubits)) - 1;
        self.rows.iter().map(|r| r & mask).collect()
    }

    pub fn is_symplectic(&self) -> bool {
        let n = self.n_qubits;
        (0..2 * n).all(|i| {
            (0..2 * n).all(|j| {
                let expected = (i + n == j) || (j + n == i);
                symplectic_product(n, self.rows[i], self.rows[j]) == expected
            })
        })
    }

    /// Applies the signed Pauli of tableau row `row` to a state vector.
    fn apply_row<T: Real>(&self, row: u64, v: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.n_qubits;
        let (mut xm, mut zm) = (0usize, 0usize);
        for q in 0..n {
            let shift = n - 1 - q;
            xm |= (((row >> q) & 1) as usize) << shift;
            zm |= (((row >> (n + q)) & 1) as usize) << shift;
        }
        let negative = (row >> (2 * n)) & 1 == 1;
        apply_pauli_masks(xm, zm, negative, v)
    }

    /// Dense unitary, fixed up to a global phase: column `b` is
    /// `prod_i D_i^{b_i} |psi_0>` with `|psi_0>` the state stabilized by every
    /// stabilizer row.
    pub fn to_matrix<T: Real>(&self) -> DenseOperator<T> {
        let n = self.n_qubits;
        let d = 1usize << n;
        let half = T::of(0.5);

        let mut best: Option<(T, Vec<Cx<T>>)> = None;
        for k in 0..d {
            let mut v = vec![Cx::<T>::zero(); d];
            v[k] = Cx::new(T::one(), T::zero());
            for i in 0..n {
                let s = self.apply_row(self.rows[n + i], &v);
                v = v.iter().zip(&s).map(|(a, b)| (*a + *b) * half).collect();
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, psi0) = best.expect("nonempty basis");
        let inv = T::one() / norm.sqrt();
        let psi0: Vec<Cx<T>> = psi0.into_iter().map(|z| z * inv).collect();

        let mut u = DenseOperator::zeros(n);
        for b in 0..d {
            let mut col = psi0.clone();
            for q in 0..n {
                if (b >> (n - 1 - q)) & 1 == 1 {
                    col = self.apply_row(self.rows[q], &col);
                }
            }
            for (r, z) in col.into_iter().enumerate() {
                u.set(r, b, z);
            }
        }
        u
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CLIFFORD_QUBITS {
        return Err(ShadowError::UnsupportedSize {
            what: "Clifford sampling",
            range: "1..=6 qubits",
            found: n,
        });
    }
    Ok(())
}

fn symplectic_product(n: usize, a: u64, b: u64) -> bool {
    let mask = (1u64 << n) - 1;
    let (xa, za) = (a & mask, (a >> n) & mask);
    let (xb, zb) = (b & mask, (b >> n) & mask);
    ((xa & zb) ^ (za & xb)).count_ones() % 2 == 1
}

/// `(-1)^sign i^{|x & z|} X^x Z^z` on a vector, masks over basis-index bits.
pub(crate) fn apply_pauli_masks<T: Real>(
    xm: usize,
    zm: usize,
    negative: bool,
    v: &[Cx<T>],
) -> Vec<Cx<T>> {
    let ny = (xm & zm).count_ones() % 4;
    let phase = [
        cx(T::one(), T::zero()),
        cx(T::zero(), T::one()),
        cx(-T::one(), T::zero()),
        cx(T::zero(), -T::one()),
    ][ny as usize];
    let phase = if negative { -phase } else { phase };
    let mut out = vec![Cx::zero(); v.len()];
    for (k, &a) in v.iter().enumerate() {
        let s = if (zm & k).count_ones() % 2 == 1 {
            -phase
        } else {
            phase
        };
        out[k ^ xm] = a * s;
    }
    out
}

/// All 24 single-qubit elements (6 symplectic classes times 4 sign patterns).
pub fn enumerate_clifford_group(n_qubits: usize) -> Result<Vec<Clifford>> {
    if n_qubits != 1 {
        return Err(ShadowError::UnsupportedSize {
            what: "Clifford enumeration",
            range: "1 qubit",
            found: n_qubits,
        });
    }
    Ok(with_all_signs(1, enumerate_symplectic(1)?))
}

/// Every element of the group for `n <= 2`, signs included (11520 at n = 2).
pub fn enumerate_cliffords(n_qubits: usize) -> Result<Vec<Clifford>> {
    Ok(with_all_signs(n_qubits, enumerate_symplectic(n_qubits)?))
}

fn with_all_signs(n: usize, classes: Vec<Vec<u64>>) -> Vec<Clifford> {
    let mut out = Vec::with_capacity(classes.len() << (2 * n));
    for rows in classes {
        for signs in 0..1u64 << (2 * n) {
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| r | (((signs >> i) & 1) << (2 * n)))
                .collect();
            out.push(Clifford { n_qubits: n, rows });
        }
    }
    out
}

/// Every unsigned symplectic tableau for `n <= 2` by exhaustive search.
pub fn enumerate_symplectic(n_qubits: usize) -> Result<Vec<Vec<u64>>> {
    if n_qubits == 0 || n_qubits > 2 {
        return Err(ShadowError::UnsupportedSize {
            what: "symplectic enumeration",
            range: "1..=2 qubits",
            found: n_qubits,
        });
    }
    let n = n_qubits;
    let mut out = Vec::new();
    let mut rows = Vec::with_capacity(2 * n);
    search(n, &mut rows, &mut out);
    Ok(out)
}

fn search(n: usize, rows: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    let i = rows.len();
    if i == 2 * n {
        out.push(rows.clone());
        return;
    }
    for cand in 1..1u64 << (2 * n) {
        let ok = rows
            .iter()
            .enumerate()
            .all(|(j, &r)| symplectic_product(n, r, cand) == (j + n == i));
        if ok {
            rows.push(cand);
            search(n, rows, out);
            rows.pop();
        }
    }
}

fn sample_qmallows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0; n];
    let mut inds: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = n - i;
        let eps = 4f64.powi(-(m as i32));
        let r: f64 = rng.random();
        let index = -((r + (1.0 - r) * eps).log2().ceil()) as i64;
        let index = index as usize;
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 };
        perm[i] = inds.remove(k);
    }
    (had, perm)
}

/// Dense GF(2) matrix, one `Vec<u8>` per row.
#[derive(Clone)]
struct Gf2(Vec<Vec<u8>>);

impl Gf2 {
    fn zeros(n: usize) -> Self {
        Gf2(vec![vec![0; n]; n])
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.0[i][i] = 1;
        }
        m
    }

    fn mul(&self, other: &Gf2) -> Gf2 {
        let n = self.0.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                if self.0[i][k] == 1 {
                    for j in 0..n {
                        out.0[i][j] ^= other.0[k][j];
                    }
                }
            }
        }
        out
    }

    fn transpose(&self) -> Gf2 {
        let n = self.0.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.0[j][i] = self.0[i][j];
            }
        }
        out
    }
}

fn random_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Gf2 {
    let mut m = Gf2::zeros(n);
    for i in 0..n {
        m.0[i][i] = rng.random_range(0..2u8);
    }
    m
}

fn fill_tril<R: Rng + ?Sized>(m: &mut Gf2, rng: &mut R, symmetric: bool) {
    let n = m.0.len();
    for i in 1..n {
        for j in 0..i {
            let v = rng.random_range(0..2u8);
            m.0[i][j] = v;
            if symmetric {
                m.0[j][i] = v;
            }
        }
    }
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
fn inverse_tril(l: &Gf2) -> Gf2 {
    let n = l.0.len();
    let mut inv = Gf2::identity(n);
    for i in 0..n {
        for j in 0..i {
            if l.0[i][j] == 1 {
                let (head, tail) = inv.0.split_at_mut(i);
                for (t, s) in tail[0].iter_mut().zip(&head[j]) {
                    *t ^= s;
                }
            }
        }
    }
    inv
}

/// `[[a, 0], [c, d]]`.
fn block(a: &Gf2, c: &Gf2, d: &Gf2) -> Gf2 {
    let n = a.0.len();
    let mut out = Gf2::zeros(2 * n);
    for i in 0..n {
        out.0[i][..n].copy_from_slice(&a.0[i]);
        out.0[n + i][..n].copy_from_slice(&c.0[i]);
        out.0[n + i][n..].copy_from_slice(&d.0[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliString};
    use crate::rng::stream;
    use std::collections::HashMap;

    type Op = DenseOperator<f64>;

    fn row_operator(n: usize, row: u64) -> Op {
        let letters = (0..n)
            .map(|q| Pauli::from_bits((row >> q) & 1 == 1, (row >> (n + q)) & 1 == 1))
            .collect();
        let p = PauliString::new(letters).to_operator::<f64>();
        if (row >> (2 * n)) & 1 == 1 {
            p.scale(-1.0)
        } else {
            p
        }
    }

    fn check_conjugation(c: &Clifford) {
        let n = c.n_qubits();
        let u = c.to_matrix::<f64>();
        assert!((&u.adjoint() * &u).max_abs_diff(&Op::identity(n)) < 1e-12);
        for q in 0..n {
            let x = PauliString::single(n, q, Pauli::X).to_operator::<f64>();
            let z = PauliString::single(n, q, Pauli::Z).to_operator::<f64>();
            let ux = &(&u * &x) * &u.adjoint();
            let uz = &(&u * &z) * &u.adjoint();
            assert!(ux.max_abs_diff(&row_operator(n, c.rows()[q])) < 1e-12);
            assert!(uz.max_abs_diff(&row_operator(n, c.rows()[n + q])) < 1e-12);
        }
    }

    #[test]
    fn sampled_tableaux_are_symplectic_and_materialize_correctly() {
        let mut rng = stream(11, 0);
        for n in 1..=4 {
            for _ in 0..20 {
                let c = Clifford::sample(n, &mut rng).unwrap();
                assert!(c.is_symplectic());
                check_conjugation(&c);
            }
        }
    }

    #[test]
    fn six_qubit_sampling_is_supported_and_seven_is_not() {
        let mut rng = stream(1, 0);
        assert!(Clifford::sample(6, &mut rng).unwrap().is_symplectic());
        assert!(matches!(
            Clifford::sample(7, &mut rng),
            Err(ShadowError::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn group_orders() {
        assert_eq!(enumerate_clifford_group(1).unwrap().len(), 24);
        assert_eq!(enumerate_symplectic(2).unwrap().len(), 720);
        assert!(enumerate_clifford_group(2).is_err());
    }

    #[test]
    fn enumerated_elements_conjugate_correctly() {
        for c in enumerate_clifford_group(1).unwrap() {
            check_conjugation(&c);
        }
    }

    #[test]
    fn from_rows_rejects_non_symplectic() {
        assert_eq!(
            Clifford::from_rows(1, vec![0b01, 0b01]),
            Err(ShadowError::NotSymplectic)
        );
        assert!(Clifford::from_rows(1, vec![0b01, 0b10]).is_ok());
    }

    #[test]
    fn two_qubit_sampling_covers_symplectic_classes_uniformly() {
        let classes = enumerate_symplectic(2).unwrap();
        let index: HashMap<Vec<u64>, usize> = classes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let mut counts = vec![0usize; classes.len()];
        let mut rng = stream(5, 0);
        let draws = 72_000;
        for _ in 0..draws {
            let c = Clifford::sample(2, &mut rng).unwrap();
            counts[index[&c.symplectic_rows()]] += 1;
        }
        let expected = draws as f64 / 720.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 719 degrees of freedom: mean 719, sd ~38
        assert!(chi2 < 719.0 + 5.0 * 38.0, "chi2 = {chi2}");
    }
}
