//! Contractions between Pauli shadows: a process shadow applied to a state
//! shadow, and two process shadows composed into one.
//!
//! Both produce quasi-probability sums. With `m` records and `k` snapshots
//! the estimate of `E(rho)` is
//!
//! ```text
//! (1 / (m k)) sum_{j,l} 4^n prod_q w(s_lq, a_jq) tau(c_j)
//! ```
//!
//! where `a_j` labels the transposed input factor of record `j`, `c_j` its
//! output factor, `s_l` the snapshot, and `w` is [`pair_weight`]. One factor
//! `2^n` undoes the trace-one Choi normalization and one comes from
//! `Tr[tau^T tau'] = 2 w`. Composition contracts the output register of the
//! first shadow with the input register of the second in the same way.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_traits::Zero;
use rand::Rng;

use crate::ensembles::{Axis, Ensemble};
use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::process_shadows::ProcessShadow;
use crate::scalar::Real;
use crate::state_shadows::{decode_labels, label_parts, tau_product, Label, ShadowEstimate};

/// `1/2 Tr[tau^T_{b,mu} tau_{b',mu'}]`.
pub fn pair_weight(mu: Axis, b: bool, mu_p: Axis, b_p: bool) -> f64 {
    if mu != mu_p {
        return 0.25;
    }
    let same = (b == b_p) ^ (mu == Axis::Y);
    if same {
        2.5
    } else {
        -2.0
    }
}

/// [`pair_weight`] indexed by labels.
pub fn label_pair_weight(s: Label, a: Label) -> f64 {
    let (mu, b) = label_parts(s);
    let (mu_p, b_p) = label_parts(a);
    pair_weight(mu, b, mu_p, b_p)
}

fn pair_weight_table<T: Real>() -> [[T; 6]; 6] {
    let mut t = [[T::zero(); 6]; 6];
    for (s, row) in t.iter_mut().enumerate() {
        for (a, w) in row.iter_mut().enumerate() {
            *w = T::of(label_pair_weight(s as Label, a as Label));
        }
    }
    t
}

/// `F[a] = sum_s v[s] prod_q mats[q][s_q][a_q]` over base-6 label codes.
pub(crate) fn contract<S>(n: usize, v: &[S], mats: &[[[S; 6]; 6]]) -> Vec<S>
where
    S: Copy + Zero + Add<Output = S> + Mul<Output = S>,
{
    let mut cur = v.to_vec();
    for (q, m) in mats.iter().enumerate().take(n) {
        let stride = 6usize.pow((n - 1 - q) as u32);
        let mut next = vec![S::zero(); cur.len()];
        for base in 0..cur.len() {
            if !(base / stride).is_multiple_of(6) {
                continue;
            }
            for s in 0..6 {
                let x = cur[base + s * stride];
                if x.is_zero() {
                    continue;
                }
                for a in 0..6 {
                    let slot = &mut next[base + a * stride];
                    *slot = *slot + x * m[s][a];
                }
            }
        }
        cur = next;
    }
    cur
}

/// One term of a weighted sum: weight and the labels of its `tau` product.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub weight: T,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq)]
enum Pairing {
    Apply {
        records: Vec<(usize, usize)>,
        snapshots: Vec<usize>,
    },
    Compose {
        first: Vec<(usize, usize)>,
        second: Vec<(usize, usize)>,
    },
}

/// A lazily evaluated signed sum `(1/len) sum_t weight_t tau(labels_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSnapshotSum<T: Real> {
    register_qubits: usize,
    pairing: Pairing,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> WeightedSnapshotSum<T> {
    /// Qubits of the summed operator (`n` for application, `2n` for
    /// composition).
    pub fn n_qubits(&self) -> usize {
        match self.pairing {
            Pairing::Apply { .. } => self.register_qubits,
            Pairing::Compose { .. } => 2 * self.register_qubits,
        }
    }

    /// Number of terms, the product of the two sample counts.
    pub fn len(&self) -> usize {
        match &self.pairing {
            Pairing::Apply { records, snapshots } => records.len() * snapshots.len(),
            Pairing::Compose { first, second } => first.len() * second.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn prefactor(&self) -> T {
        T::of(4f64.powi(self.register_qubits as i32))
    }

    fn weight(&self, left: usize, right: usize) -> T {
        let n = self.register_qubits;
        let (l, r) = (decode_labels(n, left), decode_labels(n, right));
        l.iter().zip(&r).fold(self.prefactor(), |acc, (&x, &y)| {
            acc * T::of(label_pair_weight(x, y))
        })
    }

    /// Streams every term without materializing anything.
    pub fn terms(&self) -> Box<dyn Iterator<Item = Term<T>> + '_> {
        let n = self.register_qubits;
        match &self.pairing {
            Pairing::Apply { records, snapshots } => {
                Box::new(records.iter().flat_map(move |&(a, c)| {
                    snapshots.iter().map(move |&s| Term {
                        weight: self.weight(s, a),
                        labels: decode_labels(n, c),
                    })
                }))
            }
            Pairing::Compose { first, second } => {
                Box::new(first.iter().flat_map(move |&(a, c)| {
                    second.iter().map(move |&(a2, c2)| {
                        let mut labels = decode_labels(n, a);
                        labels.extend(decode_labels(n, c2));
                        Term {
                            weight: self.weight(c, a2),
                            labels,
                        }
                    })
                }))
            }
        }
    }

    /// Brute-force reducer over [`Self::terms`].
    pub fn materialize_bruteforce(&self) -> Result<DenseOperator<T>> {
        if self.is_empty() {
            return Err(ShadowError::Empty("weighted sum"));
        }
        let mut acc = DenseOperator::zeros(self.n_qubits());
        for t in self.terms() {
            acc.add_scaled(t.weight, &tau_product(&t.labels))?;
        }
        Ok(acc.scale(T::one() / T::of_usize(self.len())))
    }

    /// Exact sum, aggregated over label classes so the cost does not grow
    /// with the number of terms.
    pub fn materialize(&self) -> Result<DenseOperator<T>> {
        if self.is_empty() {
            return Err(ShadowError::Empty("weighted sum"));
        }
        let n = self.register_qubits;
        let classes = 6usize.pow(n as u32);
        let table = pair_weight_table::<T>();
        let mut acc = DenseOperator::zeros(self.n_qubits());
        match &self.pairing {
            Pairing::Apply { records, snapshots } => {
                let mut counts = vec![T::zero(); classes];
                for &s in snapshots {
                    counts[s] = counts[s] + T::one();
                }
                let f = contract(n, &counts, &vec![table; n]);
                let mut coef: BTreeMap<usize, T> = BTreeMap::new();
                for &(a, c) in records {
                    let e = coef.entry(c).or_insert_with(T::zero);
                    *e = *e + f[a];
                }
                for (c, w) in coef {
                    acc.add_scaled(w, &tau_product(&decode_labels(n, c)))?;
                }
            }
            Pairing::Compose { first, second } => {
                // G_{c'}[c] = sum over second-shadow records with output c' of
                // prod_q w(c_q, a'_q)
                let mut by_out: BTreeMap<usize, Vec<T>> = BTreeMap::new();
                for &(a2, c2) in second {
                    let v = by_out.entry(c2).or_insert_with(|| vec![T::zero(); classes]);
                    v[a2] = v[a2] + T::one();
                }
                let mut transposed = table;
                for (s, row) in transposed.iter_mut().enumerate() {
                    for (a, w) in row.iter_mut().enumerate() {
                        *w = table[a][s];
                    }
                }
                let g: BTreeMap<usize, Vec<T>> = by_out
                    .into_iter()
                    .map(|(c2, v)| (c2, contract(n, &v, &vec![transposed; n])))
                    .collect();
                let mut first_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
                for &key in first {
                    *first_counts.entry(key).or_default() += 1;
                }
                let mut coef: BTreeMap<(usize, usize), T> = BTreeMap::new();
                for (&(a, c), &count) in &first_counts {
                    for (&c2, gv) in &g {
                        let e = coef.entry((a, c2)).or_insert_with(T::zero);
                        *e = *e + gv[c] * T::of_usize(count);
                    }
                }
                let mut input_cache: BTreeMap<usize, DenseOperator<T>> = BTreeMap::new();
                for ((a, c2), w) in coef {
                    let left = input_cache
                        .entry(a)
                        .or_insert_with(|| tau_product(&decode_labels(n, a)));
                    acc.add_scaled(w, &left.kron(&tau_product(&decode_labels(n, c2))))?;
                }
            }
        }
        Ok(acc.scale(self.prefactor() / T::of_usize(self.len())))
    }
}

fn check_pauli_state(ss: &ShadowEstimate<impl Real>) -> Result<()> {
    if ss.ensemble() != Ensemble::PauliProduct {
        return Err(ShadowError::EnsembleMismatch(
            "state shadow must use Pauli frames",
        ));
    }
    Ok(())
}

/// Estimates `E(rho)` from a process shadow of `E` and a state shadow of
/// `rho` (Pauli frames on every register).
pub fn apply_process_to_state_shadow<T: Real>(
    ps: &ProcessShadow<T>,
    ss: &ShadowEstimate<T>,
) -> Result<WeightedSnapshotSum<T>> {
    check_pauli_state(ss)?;
    if ps.n_qubits() != ss.n_qubits() {
        return Err(ShadowError::DimensionMismatch {
            expected: ps.n_qubits(),
            found: ss.n_qubits(),
        });
    }
    let records = ps.label_codes()?;
    let snapshots = ss
        .snapshots()
        .iter()
        .map(|s| crate::state_shadows::encode_labels(&s.labels().expect("pauli frame")))
        .collect();
    Ok(WeightedSnapshotSum {
        register_qubits: ps.n_qubits(),
        pairing: Pairing::Apply { records, snapshots },
        _scalar: std::marker::PhantomData,
    })
}

/// Estimates the trace-one Choi matrix of `Y o X` (X acts first).
pub fn compose_process_shadows<T: Real>(
    ps_x: &ProcessShadow<T>,
    ps_y: &ProcessShadow<T>,
) -> Result<WeightedSnapshotSum<T>> {
    if ps_x.n_qubits() != ps_y.n_qubits() {
        return Err(ShadowError::DimensionMismatch {
            expected: ps_x.n_qubits(),
            found: ps_y.n_qubits(),
        });
    }
    Ok(WeightedSnapshotSum {
        register_qubits: ps_x.n_qubits(),
        pairing: Pairing::Compose {
            first: ps_x.label_codes()?,
            second: ps_y.label_codes()?,
        },
        _scalar: std::marker::PhantomData,
    })
}

/// Monte-Carlo statistics of products of `N` i.i.d. pair weights drawn
/// uniformly from `{5/2, 1/4, 1/4, 1/4, 1/4, -2}`, with closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct SignStatistics {
    pub n: usize,
    pub samples: usize,
    pub p_negative: f64,
    pub p_positive: f64,
    pub mean_log_abs: f64,
    pub std_log_abs: f64,
    /// Frequency of products with exactly `k` large factors (`|w| >= 2`).
    pub big_count_frequencies: Vec<f64>,
    pub p_negative_exact: f64,
    pub mean_log_abs_exact: f64,
    pub std_log_abs_exact: f64,
}

const WEIGHT_SET: [f64; 6] = [2.5, 0.25, 0.25, 0.25, 0.25, -2.0];

/// `1/2 (1 - (2/3)^N)`.
pub fn p_odd(n: usize) -> f64 {
    0.5 * (1.0 - (2.0f64 / 3.0).powi(n as i32))
}

/// `1/2 (1 + (2/3)^N)`.
pub fn p_even(n: usize) -> f64 {
    0.5 * (1.0 + (2.0f64 / 3.0).powi(n as i32))
}

/// `C(N,k) (1/3)^k (2/3)^(N-k)`.
pub fn p_big(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut binom = 1.0;
    for i in 0..k {
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    binom * (1.0f64 / 3.0).powi(k as i32) * (2.0f64 / 3.0).powi((n - k) as i32)
}

pub fn weight_sign_statistics<R: Rng + ?Sized>(
    n: usize,
    samples: usize,
    rng: &mut R,
) -> SignStatistics {
    let mut negative = 0usize;
    let mut logs = Vec::with_capacity(samples);
    let mut big = vec![0usize; n + 1];
    for _ in 0..samples {
        let mut sign_negative = false;
        let mut log_abs = 0.0;
        let mut bigs = 0;
        for _ in 0..n {
            let w = WEIGHT_SET[rng.random_range(0..6)];
            sign_negative ^= w < 0.0;
            log_abs += w.abs().ln();
            bigs += (w.abs() >= 2.0) as usize;
        }
        negative += sign_negative as usize;
        big[bigs] += 1;
        logs.push(log_abs);
    }
    let s = samples.max(1) as f64;
    let mean = logs.iter().sum::<f64>() / s;
    let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0).max(1.0);

    let per_mean = WEIGHT_SET.iter().map(|w| w.abs().ln()).sum::<f64>() / 6.0;
    let per_var = WEIGHT_SET
        .iter()
        .map(|w| (w.abs().ln() - per_mean).powi(2))
        .sum::<f64>()
        / 6.0;
    SignStatistics {
        n,
        samples,
        p_negative: negative as f64 / s,
        p_positive: 1.0 - negative as f64 / s,
        mean_log_abs: mean,
        std_log_abs: var.sqrt(),
        big_count_frequencies: big.iter().map(|&c| c as f64 / s).collect(),
        p_negative_exact: p_odd(n),
        mean_log_abs_exact: n as f64 * per_mean,
        std_log_abs_exact: (n as f64 * per_var).sqrt(),
    }
}
