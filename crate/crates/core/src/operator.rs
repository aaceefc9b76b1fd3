//! Dense complex operators on `n` qubits.
//!
//! Basis states are indexed with qubit 0 as the most significant bit, so the
//! bit string `b_0 b_1 ... b_{n-1}` maps to index `sum_q b_q 2^(n-1-q)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::error::{Result, ShadowError};
use crate::scalar::{re, Cx, Real};

/// Register of a bipartite `2n`-qubit operator. `A` occupies the more
/// significant half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    A,
    B,
}

#[derive(Clone, PartialEq)]
pub struct DenseOperator<T: Real> {
    n_qubits: usize,
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> fmt::Debug for DenseOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator({} qubits)", self.n_qubits)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: Real> DenseOperator<T> {
    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            dim,
            data: vec![Cx::zero(); dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut out = Self::zeros(n_qubits);
        for i in 0..out.dim {
            out.data[i * out.dim + i] = Cx::one();
        }
        out
    }

    /// Builds an operator from row-major entries.
    pub fn from_vec(n_qubits: usize, data: Vec<Cx<T>>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(ShadowError::BadShape { n_qubits });
        }
        Ok(Self {
            n_qubits,
            dim,
            data,
        })
    }

    /// Builds an operator from nested rows; the row count fixes `n_qubits`.
    pub fn from_rows(rows: &[Vec<Cx<T>>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(ShadowError::BadShape { n_qubits: 0 });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if rows.iter().any(|r| r.len() != dim) {
            return Err(ShadowError::BadShape { n_qubits });
        }
        Self::from_vec(n_qubits, rows.concat())
    }

    /// Real-valued convenience constructor, mostly for fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Cx<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| re(T::of(x))).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(n_qubits: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self {
            n_qubits,
            dim,
            data,
        }
    }

    pub fn diagonal(n_qubits: usize, diag: &[Cx<T>]) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if diag.len() != dim {
            return Err(ShadowError::DimensionMismatch {
                expected: dim,
                found: diag.len(),
            });
        }
        Ok(Self::from_fn(n_qubits, |i, j| {
            if i == j {
                diag[i]
            } else {
                Cx::zero()
            }
        }))
    }

    /// `|v><v|` for a state vector `v`.
    pub fn outer(v: &[Cx<T>]) -> Result<Self> {
        Self::outer_pair(v, v)
    }

    /// `|u><v|`.
    pub fn outer_pair(u: &[Cx<T>], v: &[Cx<T>]) -> Result<Self> {
        if u.len() != v.len() || !u.len().is_power_of_two() {
            return Err(ShadowError::DimensionMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        let n = u.len().trailing_zeros() as usize;
        Ok(Self::from_fn(n, |i, j| u[i] * v[j].conj()))
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis_projector(n_qubits: usize, index: usize) -> Self {
        let mut out = Self::zeros(n_qubits);
        out.data[index * out.dim + index] = Cx::one();
        out
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Cx<T>) {
        self.data[i * self.dim + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Cx<T>> {
        self.data
    }

    pub fn diag(&self) -> Vec<Cx<T>> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(Cx::zero(), |acc, z| acc + z)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n_qubits, |i, j| self.get(j, i).conj())
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_qubits, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_cx(&self, s: Cx<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Cx<T>) -> Cx<T>) -> Self {
        Self {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(ShadowError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.matmul_unchecked(other))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Cx<T>, Cx<T>) -> Cx<T>) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data,
        }
    }

    fn matmul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = vec![Cx::zero(); d * d];
        for i in 0..d {
            let out_row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o = *o + a * b;
                }
            }
        }
        Self {
            n_qubits: self.n_qubits,
            dim: d,
            data: out,
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: T, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b * s;
        }
        Ok(())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if v.len() != self.dim {
            return Err(ShadowError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Cx::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect())
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Cx<T>> {
        self.check_same(other)?;
        let d = self.dim;
        let mut acc = Cx::zero();
        for i in 0..d {
            for k in 0..d {
                acc = acc + self.data[i * d + k] * other.data[k * d + i];
            }
        }
        Ok(acc)
    }

    /// Kronecker product with `self` on the more significant qubits.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut data = vec![Cx::zero(); d * d];
        for ia in 0..da {
            for ja in 0..da {
                let a = self.data[ia * da + ja];
                if a.is_zero() {
                    continue;
                }
                for ib in 0..db {
                    let row = (ia * db + ib) * d + ja * db;
                    for jb in 0..db {
                        data[row + jb] = a * other.data[ib * db + jb];
                    }
                }
            }
        }
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            dim: d,
            data,
        }
    }

    /// Traces out one half of an operator on `2n` qubits.
    pub fn partial_trace(&self, register: Register) -> Result<Self> {
        if !self.n_qubits.is_multiple_of(2) {
            return Err(ShadowError::OddQubitCount(self.n_qubits));
        }
        let half = self.n_qubits / 2;
        let d = 1usize << half;
        let big = self.dim;
        Ok(match register {
            Register::A => Self::from_fn(half, |i, j| {
                (0..d).fold(Cx::zero(), |acc, k| {
                    acc + self.data[(k * d + i) * big + k * d + j]
                })
            }),
            Register::B => Self::from_fn(half, |i, j| {
                (0..d).fold(Cx::zero(), |acc, k| {
                    acc + self.data[(i * d + k) * big + j * d + k]
                })
            }),
        })
    }

    /// Largest absolute entry of `self - self^dagger`.
    pub fn hermitian_residual(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for i in 0..d {
            for j in i..d {
                let r = (self.get(i, j) - self.get(j, i).conj()).norm();
                if r > worst {
                    worst = r;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Eigenvalues of the Hermitian part `(A + A^dagger)/2`, ascending.
    pub fn eigvalsh(&self) -> Vec<T> {
        hermitian_eigenvalues(self)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigvalsh()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigvalsh().last().expect("operators are nonempty")
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> T {
        let gram = self.adjoint().matmul_unchecked(self);
        let top = gram.max_eigenvalue();
        if top > T::zero() {
            top.sqrt()
        } else {
            T::zero()
        }
    }

    /// Number of eigenvalues of the Hermitian part above `tol` in magnitude.
    pub fn rank(&self, tol: T) -> usize {
        self.eigvalsh()
            .into_iter()
            .filter(|l| l.abs() > tol)
            .count()
    }

    /// Maps the operator's entries to another scalar type.
    pub fn cast<U: Real>(&self) -> DenseOperator<U> {
        DenseOperator {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Cx::new(U::of(z.re.as_f64()), U::of(z.im.as_f64())))
                .collect(),
        }
    }
}

/// Operator norm as a free function.
pub fn operator_norm<T: Real>(a: &DenseOperator<T>) -> T {
    a.operator_norm()
}

/// Kronecker product, `a` on the more significant qubits.
pub fn tensor<T: Real>(a: &DenseOperator<T>, b: &DenseOperator<T>) -> DenseOperator<T> {
    a.kron(b)
}

/// Kronecker product of a sequence of factors, first factor most significant.
pub fn tensor_all<'a, T: Real>(
    factors: impl IntoIterator<Item = &'a DenseOperator<T>>,
) -> DenseOperator<T> {
    factors
        .into_iter()
        .fold(DenseOperator::identity(0), |acc, f| acc.kron(f))
}

pub fn partial_trace<T: Real>(
    a: &DenseOperator<T>,
    register: Register,
) -> Result<DenseOperator<T>> {
    a.partial_trace(register)
}

impl<'a, T: Real> Add<&'a DenseOperator<T>> for &'a DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn add(self, rhs: &'a DenseOperator<T>) -> DenseOperator<T> {
        self.try_add(rhs).expect("operator sizes must match")
    }
}

impl<'a, T: Real> Sub<&'a DenseOperator<T>> for &'a DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn sub(self, rhs: &'a DenseOperator<T>) -> DenseOperator<T> {
        self.try_sub(rhs).expect("operator sizes must match")
    }
}

impl<'a, T: Real> Mul<&'a DenseOperator<T>> for &'a DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn mul(self, rhs: &'a DenseOperator<T>) -> DenseOperator<T> {
        self.try_matmul(rhs).expect("operator sizes must match")
    }
}

impl<T: Real> Neg for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn neg(self) -> DenseOperator<T> {
        self.map(|z| -z)
    }
}

impl<'a, T: Real> AddAssign<&'a DenseOperator<T>> for DenseOperator<T> {
    fn add_assign(&mut self, rhs: &'a DenseOperator<T>) {
        self.check_same(rhs).expect("operator sizes must match");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a = *a + b;
        }
    }
}

impl<'a, T: Real> SubAssign<&'a DenseOperator<T>> for DenseOperator<T> {
    fn sub_assign(&mut self, rhs: &'a DenseOperator<T>) {
        self.check_same(rhs).expect("operator sizes must match");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a = *a - b;
        }
    }
}

/// Eigenvalues of a Hermitian matrix `H = A + iB` through the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled. Cyclic Jacobi on the embedding.
fn hermitian_eigenvalues<T: Real>(h: &DenseOperator<T>) -> Vec<T> {
    let d = h.dim;
    let n = 2 * d;
    let half = T::of(0.5);
    let mut m = vec![T::zero(); n * n];
    for i in 0..d {
        for j in 0..d {
            let z = (h.get(i, j) + h.get(j, i).conj()) * half;
            m[i * n + j] = z.re;
            m[(i + d) * n + j + d] = z.re;
            m[i * n + j + d] = -z.im;
            m[(i + d) * n + j] = z.im;
        }
    }
    let mut evals = symmetric_jacobi(&mut m, n);
    evals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    // Every eigenvalue of H appears twice in the embedding.
    evals.into_iter().step_by(2).collect()
}

fn symmetric_jacobi<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return vec![T::zero(); n];
    }
    let eps = T::epsilon() * scale * T::of_usize(n);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Orthonormalizes the columns of a square matrix with modified Gram-Schmidt
/// run twice. The implied `R` factor has a positive real diagonal.
pub(crate) fn orthonormalize_columns<T: Real>(m: &DenseOperator<T>) -> DenseOperator<T> {
    let d = m.dim;
    let mut cols: Vec<Vec<Cx<T>>> = (0..d).map(|j| m.column(j)).collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qk = &done[k];
                let proj = qk
                    .iter()
                    .zip(rest[0].iter())
                    .fold(Cx::zero(), |acc, (q, v)| acc + q.conj() * v);
                for (v, q) in rest[0].iter_mut().zip(qk) {
                    *v = *v - *q * proj;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for v in cols[j].iter_mut() {
            *v = *v / norm;
        }
    }
    DenseOperator::from_fn(m.n_qubits, |i, j| cols[j][i])
}
