//! Estimators built on process shadows: transition probabilities, multitime
//! correlators and unitarity verification through the Choi purity.

use num_traits::Zero;
use rand::Rng;

use crate::algebra::contract;
use crate::ensembles::{Axis, Bits, Ensemble};
use crate::error::{Result, ShadowError};
use crate::operator::DenseOperator;
use crate::pauli::{Pauli, PauliString};
use crate::process_shadows::ProcessShadow;
use crate::rng::stream;
use crate::scalar::{Cx, Real};
use crate::state_shadows::{encode_labels, label_parts, snapshot_trace, tau, ShadowEstimate};
use crate::stats::{group_means, median, median_of_means};

/// Raw median-of-means estimate and its projection onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEstimate<T> {
    pub raw: T,
    pub clipped: T,
}

/// `P(i -> f) = sum_a |<f|K_a|i>|^2`, estimated with `rho = |i><i|`,
/// `O = |f><f|`.
pub fn transition_probability<T: Real>(
    ps: &ProcessShadow<T>,
    i: &Bits,
    f: &Bits,
    k: usize,
) -> Result<TransitionEstimate<T>> {
    let n = ps.n_qubits();
    for b in [i, f] {
        if b.len() != n {
            return Err(ShadowError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
    }
    let rho = DenseOperator::basis_projector(n, i.index());
    let o = DenseOperator::basis_projector(n, f.index());
    let raw = ps.estimate_channel_functional(&rho, &o, k)?;
    Ok(TransitionEstimate {
        raw,
        clipped: raw.max(T::zero()).min(T::one()),
    })
}

/// `Tr[E(rho A) B]` with Pauli strings `A` (early) and `B` (late). `rho` need
/// not be a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorSpec<T: Real> {
    input_state: DenseOperator<T>,
    op_early: PauliString,
    op_late: PauliString,
}

impl<T: Real> CorrelatorSpec<T> {
    pub fn new(
        input_state: DenseOperator<T>,
        op_early: PauliString,
        op_late: PauliString,
    ) -> Result<Self> {
        let n = input_state.n_qubits();
        for p in [&op_early, &op_late] {
            if p.n_qubits() != n {
                return Err(ShadowError::DimensionMismatch {
                    expected: n,
                    found: p.n_qubits(),
                });
            }
        }
        Ok(Self {
            input_state,
            op_early,
            op_late,
        })
    }

    pub fn input_state(&self) -> &DenseOperator<T> {
        &self.input_state
    }

    pub fn op_early(&self) -> &PauliString {
        &self.op_early
    }

    pub fn op_late(&self) -> &PauliString {
        &self.op_late
    }

    /// `rho A`.
    pub fn inserted_input(&self) -> DenseOperator<T> {
        &self.input_state * &self.op_early.to_operator()
    }

    /// Exact value for a channel, by dense evaluation.
    pub fn exact(&self, ch: &crate::channel::Channel<T>) -> Result<Cx<T>> {
        ch.apply(&self.inserted_input())?
            .trace_product(&self.op_late.to_operator())
    }
}

/// How per-record correlator values are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorPath {
    /// Dense `2^n Tr[zeta_hat ((rho A)^T (x) B)]`.
    Generic,
    /// Pauli output frames and a single-site `B`: only records measuring
    /// the site along `B` contribute, with weight `3 (+-1)`.
    SingleSite,
}

fn single_site(p: &PauliString) -> Option<(usize, Axis)> {
    let sites = p.support_sites();
    if sites.len() != 1 {
        return None;
    }
    let axis = match p.letters()[sites[0]] {
        Pauli::X => Axis::X,
        Pauli::Y => Axis::Y,
        Pauli::Z => Axis::Z,
        Pauli::I => return None,
    };
    Some((sites[0], axis))
}

/// Per-record correlator values along the requested path.
pub fn correlator_values<T: Real>(
    ps: &ProcessShadow<T>,
    spec: &CorrelatorSpec<T>,
    path: CorrelatorPath,
) -> Result<Vec<Cx<T>>> {
    let n = ps.n_qubits();
    if spec.input_state.n_qubits() != n {
        return Err(ShadowError::DimensionMismatch {
            expected: n,
            found: spec.input_state.n_qubits(),
        });
    }
    let x = spec.inserted_input();
    let d = T::of_usize(1 << n);
    match path {
        CorrelatorPath::Generic => {
            let op = x.transpose().kron(&spec.op_late.to_operator());
            Ok(ps
                .records()
                .iter()
                .map(|r| r.materialize().trace_product(&op).expect("2n qubits") * d)
                .collect())
        }
        CorrelatorPath::SingleSite => {
            let (site, axis) = single_site(&spec.op_late).ok_or_else(|| {
                ShadowError::InvalidParameter("late operator must act on exactly one site".into())
            })?;
            if ps.ensemble_out() != Ensemble::PauliProduct {
                return Err(ShadowError::EnsembleMismatch(
                    "single-site path needs Pauli output frames",
                ));
            }
            let three = T::of(3.0);
            Ok(ps
                .records()
                .iter()
                .map(|r| {
                    if r.u_out().axes().expect("pauli")[site] != axis {
                        return Cx::zero();
                    }
                    let sign = if r.b_out().get(site) { -three } else { three };
                    snapshot_trace(r.ensemble_in(), r.u_in(), r.b_in(), &x) * d * sign
                })
                .collect())
        }
    }
}

fn complex_median_of_means<T: Real>(values: &[Cx<T>], k: usize) -> Result<Cx<T>> {
    let re: Vec<T> = values.iter().map(|z| z.re).collect();
    let im: Vec<T> = values.iter().map(|z| z.im).collect();
    Ok(Cx::new(median_of_means(&re, k)?, median_of_means(&im, k)?))
}

/// Median-of-means estimate of `Tr[E(rho A) B]`; real and imaginary parts
/// are aggregated separately. Uses the single-site path when it applies.
pub fn multitime_correlator_exact_input<T: Real>(
    ps: &ProcessShadow<T>,
    spec: &CorrelatorSpec<T>,
    k: usize,
) -> Result<Cx<T>> {
    let path =
        if ps.ensemble_out() == Ensemble::PauliProduct && single_site(&spec.op_late).is_some() {
            CorrelatorPath::SingleSite
        } else {
            CorrelatorPath::Generic
        };
    complex_median_of_means(&correlator_values(ps, spec, path)?, k)
}

/// `Tr[E(sigma A) B]` with `sigma` known only through its own shadow.
///
/// Both shadows are cut into `k` groups; group `g` of one is paired with
/// group `g` of the other, each pairing gives the full signed double sum
/// (computed exactly by label aggregation), and the median is taken.
pub fn multitime_correlator_shadow_input<T: Real>(
    ps: &ProcessShadow<T>,
    ss: &ShadowEstimate<T>,
    a: &PauliString,
    b: &PauliString,
    k: usize,
) -> Result<Cx<T>> {
    let n = ps.n_qubits();
    if ss.ensemble() != Ensemble::PauliProduct {
        return Err(ShadowError::EnsembleMismatch(
            "state shadow must use Pauli frames",
        ));
    }
    if ss.n_qubits() != n || a.n_qubits() != n || b.n_qubits() != n {
        return Err(ShadowError::DimensionMismatch {
            expected: n,
            found: ss.n_qubits(),
        });
    }
    let records = ps.label_codes()?;
    let snapshots: Vec<usize> = ss
        .snapshots()
        .iter()
        .map(|s| encode_labels(&s.labels().expect("pauli")))
        .collect();
    let size = records.len().min(snapshots.len());
    if k == 0 || k > size {
        return Err(ShadowError::InvalidGroupCount { k, len: size });
    }

    // G_q[s][a] = 1/2 Tr[(tau_s P_q)^T tau_a]
    let half = T::of(0.5);
    let mats: Vec<[[Cx<T>; 6]; 6]> = a
        .letters()
        .iter()
        .map(|p| {
            let pm = p.matrix::<T>();
            let mut g = [[Cx::zero(); 6]; 6];
            for (s, row) in g.iter_mut().enumerate() {
                let (ms, bs) = label_parts(s as u8);
                let left = (&tau::<T>(ms, bs) * &pm).transpose();
                for (l, w) in row.iter_mut().enumerate() {
                    let (ml, bl) = label_parts(l as u8);
                    *w = left.trace_product(&tau(ml, bl)).expect("2x2") * half;
                }
            }
            g
        })
        .collect();
    // t[c] = Tr[tau(c) B], factorized per qubit
    let late: Vec<[Cx<T>; 6]> = b
        .letters()
        .iter()
        .map(|p| {
            let pm = p.matrix::<T>();
            let mut t = [Cx::zero(); 6];
            for (l, w) in t.iter_mut().enumerate() {
                let (ml, bl) = label_parts(l as u8);
                *w = tau::<T>(ml, bl).trace_product(&pm).expect("2x2");
            }
            t
        })
        .collect();
    let late_trace = |code: usize| {
        let labels = crate::state_shadows::decode_labels(n, code);
        labels
            .iter()
            .zip(&late)
            .fold(Cx::new(T::one(), T::zero()), |acc, (&l, t)| {
                acc * t[l as usize]
            })
    };

    let classes = 6usize.pow(n as u32);
    let prefactor = T::of(4f64.powi(n as i32));
    let (gr, gs) = (records.len() / k, snapshots.len() / k);
    let mut re = Vec::with_capacity(k);
    let mut im = Vec::with_capacity(k);
    for g in 0..k {
        let mut counts = vec![Cx::<T>::zero(); classes];
        for &s in &snapshots[g * gs..(g + 1) * gs] {
            counts[s] = counts[s] + Cx::new(T::one(), T::zero());
        }
        let f = contract(n, &counts, &mats);
        let mut acc = Cx::zero();
        for &(ac, cc) in &records[g * gr..(g + 1) * gr] {
            acc = acc + f[ac] * late_trace(cc);
        }
        let v = acc * (prefactor / T::of_usize(gr * gs));
        re.push(v.re);
        im.push(v.im);
    }
    Ok(Cx::new(median(&re)?, median(&im)?))
}

pub const DEFAULT_MAX_PURITY_QUBITS: usize = 3;

/// Per-group U-statistic estimates of `Tr eta^2` (unnormalized Choi, so a
/// unitary channel gives `d^2`).
///
/// Within a group of `N` records the distinct-pair mean is
/// `(Tr[S^2] - sum_j Tr[zeta_j^2]) / (N (N - 1))` with `S = sum_j zeta_j`,
/// which is exact and costs `O(N d^4)` rather than `O(N^2)`.
pub fn purity_group_estimates<T: Real>(
    ps: &ProcessShadow<T>,
    k: usize,
    allow_large: bool,
) -> Result<Vec<T>> {
    let n = ps.n_qubits();
    if n > DEFAULT_MAX_PURITY_QUBITS && !allow_large {
        return Err(ShadowError::UnsupportedSize {
            what: "purity estimation (override to allow)",
            range: "1..=3 qubits",
            found: n,
        });
    }
    if ps.len() < 2 {
        return Err(ShadowError::Empty("purity needs at least two records"));
    }
    if k == 0 || ps.len() / k < 2 {
        return Err(ShadowError::InvalidGroupCount { k, len: ps.len() });
    }
    let size = ps.len() / k;
    let d2 = T::of_usize(1 << (2 * n));
    (0..k)
        .map(|g| {
            let group = ps.slice(g * size..(g + 1) * size);
            let s = group.shadow_sum();
            let total = s.entries().iter().map(|z| z.norm_sqr()).sum::<T>();
            let diag: T = group
                .records()
                .iter()
                .map(|r| {
                    let (a, b) = (r.input_factor(), r.output_factor());
                    a.trace_product(&a).expect("n qubits").re
                        * b.trace_product(&b).expect("n qubits").re
                })
                .sum();
            let pairs = T::of_usize(size * (size - 1));
            Ok((total - diag) / pairs * d2)
        })
        .collect()
}

/// Median-of-means purity `Tr eta^2`, gated to `n <= 3`.
pub fn purity_estimate<T: Real>(ps: &ProcessShadow<T>, k: usize) -> Result<T> {
    median(&purity_group_estimates(ps, k, false)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unitary,
    NonUnitary,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Unitary => "unitary",
            Verdict::NonUnitary => "nonunitary",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictOptions {
    pub groups: usize,
    /// Decision threshold is `d^2 (1 - threshold_fraction)`.
    pub threshold_fraction: f64,
    pub confidence: f64,
    pub resamples: usize,
    pub seed: u64,
    pub allow_large: bool,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            groups: 10,
            threshold_fraction: 0.05,
            confidence: 0.95,
            resamples: 2000,
            seed: 0,
            allow_large: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityReport {
    pub verdict: Verdict,
    pub purity: f64,
    pub interval: (f64, f64),
    pub threshold: f64,
    pub max_purity: f64,
    pub confidence: f64,
}

/// Compares the purity against `d^2` with a bootstrap interval over group
/// estimates. Groups shrink to keep at least two records each.
pub fn unitarity_verdict<T: Real>(
    ps: &ProcessShadow<T>,
    opts: &VerdictOptions,
) -> Result<UnitarityReport> {
    let k = opts.groups.min(ps.len() / 2).max(1);
    let groups: Vec<f64> = purity_group_estimates(ps, k, opts.allow_large)?
        .into_iter()
        .map(|x| x.as_f64())
        .collect();
    let purity = median(&groups)?;
    let mut rng = stream(opts.seed, 0);
    let mut boot: Vec<f64> = (0..opts.resamples.max(1))
        .map(|_| {
            let resample: Vec<f64> = (0..groups.len())
                .map(|_| groups[rng.random_range(0..groups.len())])
                .collect();
            median(&resample).expect("nonempty")
        })
        .collect();
    boot.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let tail = (1.0 - opts.confidence) / 2.0;
    let at = |q: f64| boot[((q * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    let interval = (at(tail), at(1.0 - tail));
    let max_purity = (1usize << (2 * ps.n_qubits())) as f64;
    let threshold = max_purity * (1.0 - opts.threshold_fraction);
    let verdict = if interval.0 > threshold {
        Verdict::Unitary
    } else if interval.1 < threshold {
        Verdict::NonUnitary
    } else {
        Verdict::Inconclusive
    };
    Ok(UnitarityReport {
        verdict,
        purity,
        interval,
        threshold,
        max_purity,
        confidence: opts.confidence,
    })
}

/// Groups used for correlator error bars in the harness.
pub fn correlator_group_means<T: Real>(values: &[Cx<T>], k: usize) -> Result<Vec<T>> {
    let re: Vec<T> = values.iter().map(|z| z.re).collect();
    group_means(&re, k)
}
