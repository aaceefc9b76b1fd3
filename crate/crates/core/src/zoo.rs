//! Named test channels and random channels from Haar unitaries.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::Channel;
use crate::ensembles::sample_haar_unitary;
use crate::error::{Result, ShadowError};
use crate::operator::{tensor_all, DenseOperator};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::{cx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedChannel {
    Identity,
    PauliX,
    Hadamard,
    Depolarizing(f64),
    Dephasing(f64),
    AmplitudeDamping(f64),
}

impl NamedChannel {
    pub fn build<T: Real>(self, n_qubits: usize) -> Result<Channel<T>> {
        named_channel(self, n_qubits)
    }
}

impl fmt::Display for NamedChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedChannel::Identity => f.write_str("identity"),
            NamedChannel::PauliX => f.write_str("pauli-x"),
            NamedChannel::Hadamard => f.write_str("hadamard"),
            NamedChannel::Depolarizing(p) => write!(f, "depolarizing({p})"),
            NamedChannel::Dephasing(p) => write!(f, "dephasing({p})"),
            NamedChannel::AmplitudeDamping(g) => write!(f, "amplitude-damping({g})"),
        }
    }
}

impl FromStr for NamedChannel {
    type Err = ShadowError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| ShadowError::Parse(format!("missing ')' in {s:?}")))?;
                let value: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| ShadowError::Parse(format!("bad parameter in {s:?}")))?;
                (&s[..open], Some(value))
            }
            None => (s, None),
        };
        let param = |ctor: fn(f64) -> NamedChannel| {
            arg.map(ctor)
                .ok_or_else(|| ShadowError::Parse(format!("{name} needs a parameter")))
        };
        let plain = |c: NamedChannel| match arg {
            None => Ok(c),
            Some(_) => Err(ShadowError::Parse(format!("{name} takes no parameter"))),
        };
        match name.trim() {
            "identity" => plain(NamedChannel::Identity),
            "pauli-x" => plain(NamedChannel::PauliX),
            "hadamard" => plain(NamedChannel::Hadamard),
            "depolarizing" => param(NamedChannel::Depolarizing),
            "dephasing" => param(NamedChannel::Dephasing),
            "amplitude-damping" => param(NamedChannel::AmplitudeDamping),
            other => Err(ShadowError::Parse(format!("unknown channel {other:?}"))),
        }
    }
}

fn check_unit(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ShadowError::InvalidParameter(format!(
            "{name} parameter {p} outside [0, 1]"
        )))
    }
}

/// Per-qubit Kraus sets combined into all tensor products.
fn product_channel<T: Real>(single: &[DenseOperator<T>], n_qubits: usize) -> Result<Channel<T>> {
    let mut kraus = vec![DenseOperator::identity(0)];
    for _ in 0..n_qubits {
        kraus = kraus
            .iter()
            .flat_map(|k| single.iter().map(move |s| k.kron(s)))
            .collect();
    }
    Channel::new(kraus)
}

/// Standard Kraus sets. `pauli-x` flips qubit 0 only; `depolarizing(p)` is
/// `(1 - p) rho + p I/d` on all `n` qubits; the others act qubit-wise.
pub fn named_channel<T: Real>(name: NamedChannel, n_qubits: usize) -> Result<Channel<T>> {
    if n_qubits == 0 {
        return Err(ShadowError::UnsupportedSize {
            what: "channel",
            range: ">= 1 qubit",
            found: 0,
        });
    }
    match name {
        NamedChannel::Identity => Ok(Channel::identity(n_qubits)),
        NamedChannel::PauliX => {
            Channel::unitary(PauliString::single(n_qubits, 0, Pauli::X).to_operator())
        }
        NamedChannel::Hadamard => {
            let s = T::FRAC_1_SQRT_2();
            let h = DenseOperator::from_rows(&[
                vec![cx(s, T::zero()), cx(s, T::zero())],
                vec![cx(s, T::zero()), cx(-s, T::zero())],
            ])?;
            Channel::unitary(tensor_all(std::iter::repeat_n(&h, n_qubits)))
        }
        NamedChannel::Depolarizing(p) => {
            check_unit("depolarizing", p)?;
            let d = (1usize << n_qubits) as f64;
            let mut kraus = Vec::with_capacity(1 << (2 * n_qubits));
            for (i, pauli) in PauliString::all(n_qubits).enumerate() {
                let w = if i == 0 {
                    (1.0 - p + p / (d * d)).sqrt()
                } else {
                    p.sqrt() / d
                };
                if w > 0.0 {
                    kraus.push(pauli.to_operator::<T>().scale(T::of(w)));
                }
            }
            Channel::new(kraus)
        }
        NamedChannel::Dephasing(p) => {
            check_unit("dephasing", p)?;
            let single = [
                DenseOperator::identity(1).scale(T::of((1.0 - p / 2.0).sqrt())),
                Pauli::Z.matrix::<T>().scale(T::of((p / 2.0).sqrt())),
            ];
            product_channel(&single, n_qubits)
        }
        NamedChannel::AmplitudeDamping(g) => {
            check_unit("amplitude-damping", g)?;
            let single = [
                DenseOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - g).sqrt()]])?,
                DenseOperator::from_real_rows(&[&[0.0, g.sqrt()], &[0.0, 0.0]])?,
            ];
            product_channel(&single, n_qubits)
        }
    }
}

pub const MAX_RANDOM_UNITARY_QUBITS: usize = 4;
pub const MAX_DILATED_SYSTEM_QUBITS: usize = 2;

/// Single Haar-random Kraus operator.
pub fn random_unitary_channel<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> Result<Channel<T>> {
    if !(1..=MAX_RANDOM_UNITARY_QUBITS).contains(&n_qubits) {
        return Err(ShadowError::UnsupportedSize {
            what: "random unitary channel",
            range: "1..=4 qubits",
            found: n_qubits,
        });
    }
    Channel::unitary(sample_haar_unitary(n_qubits, rng)?)
}

/// Kraus operators `K_j = (<j|_anc (x) I) U (|0>_anc (x) I)` of a dilation
/// `U` on ancilla (more significant) times system.
pub fn stinespring_kraus<T: Real>(
    u: &DenseOperator<T>,
    n_anc: usize,
) -> Result<Vec<DenseOperator<T>>> {
    let total = u.n_qubits();
    if n_anc >= total {
        return Err(ShadowError::BadShape { n_qubits: total });
    }
    let n_sys = total - n_anc;
    let ds = 1usize << n_sys;
    Ok((0..1usize << n_anc)
        .map(|j| DenseOperator::from_fn(n_sys, |r, c| u.get(j * ds + r, c)))
        .collect())
}

/// `Tr_anc[U (|0><0|_anc (x) rho) U^dag]`, the dilation applied directly.
pub fn apply_dilation<T: Real>(
    u: &DenseOperator<T>,
    n_anc: usize,
    rho: &DenseOperator<T>,
) -> Result<DenseOperator<T>> {
    let n_sys = rho.n_qubits();
    if n_sys + n_anc != u.n_qubits() {
        return Err(ShadowError::DimensionMismatch {
            expected: u.n_qubits(),
            found: n_sys + n_anc,
        });
    }
    let big = DenseOperator::basis_projector(n_anc, 0).kron(rho);
    let out = &(u * &big) * &u.adjoint();
    let ds = 1usize << n_sys;
    Ok(DenseOperator::from_fn(n_sys, |r, c| {
        (0..1usize << n_anc)
            .map(|a| out.get(a * ds + r, a * ds + c))
            .sum()
    }))
}

/// Dilation unitary and its channel, with `n_anc = 2 n_sys`.
pub fn random_dilation<T: Real, R: Rng + ?Sized>(
    n_sys: usize,
    rng: &mut R,
) -> Result<(DenseOperator<T>, Channel<T>)> {
    if !(1..=MAX_DILATED_SYSTEM_QUBITS).contains(&n_sys) {
        return Err(ShadowError::UnsupportedSize {
            what: "random full-rank channel",
            range: "1..=2 system qubits",
            found: n_sys,
        });
    }
    let u = sample_haar_unitary::<T, _>(3 * n_sys, rng)?;
    let ch = Channel::new(stinespring_kraus(&u, 2 * n_sys)?)?;
    Ok((u, ch))
}

/// `4^n_sys` Kraus operators from a Haar unitary on `3 n_sys` qubits.
pub fn random_full_rank_channel<T: Real, R: Rng + ?Sized>(
    n_sys: usize,
    rng: &mut R,
) -> Result<Channel<T>> {
    Ok(random_dilation(n_sys, rng)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::state::DensityMatrix;

    type Op = DenseOperator<f64>;

    #[test]
    fn parse_round_trip() {
        for s in [
            "identity",
            "pauli-x",
            "hadamard",
            "depolarizing(0.3)",
            "dephasing(1)",
            "amplitude-damping(0.25)",
        ] {
            let c: NamedChannel = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<NamedChannel>().unwrap(), c);
        }
        assert!("depolarizing".parse::<NamedChannel>().is_err());
        assert!("swap".parse::<NamedChannel>().is_err());
        assert!("identity(1)".parse::<NamedChannel>().is_err());
    }

    #[test]
    fn all_named_channels_are_trace_preserving() {
        for n in 1..=2 {
            for c in [
                NamedChannel::Identity,
                NamedChannel::PauliX,
                NamedChannel::Hadamard,
                NamedChannel::Depolarizing(0.3),
                NamedChannel::Dephasing(0.7),
                NamedChannel::AmplitudeDamping(0.4),
            ] {
                let ch = named_channel::<f64>(c, n).unwrap();
                assert!(ch.trace_preservation_residual() < 1e-12);
                ch.choi().normalize().validate().unwrap();
            }
        }
        assert!(named_channel::<f64>(NamedChannel::Depolarizing(1.5), 1).is_err());
    }

    #[test]
    fn full_depolarizing_choi_is_maximally_mixed() {
        let eta = named_channel::<f64>(NamedChannel::Depolarizing(1.0), 1)
            .unwrap()
            .choi()
            .normalize();
        assert!(eta.as_operator().max_abs_diff(&Op::identity(2).scale(0.25)) < 1e-12);
        // unnormalized: I_4 / 2
        let raw = named_channel::<f64>(NamedChannel::Depolarizing(1.0), 1)
            .unwrap()
            .choi();
        assert!(raw.as_operator().max_abs_diff(&Op::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn zero_damping_is_identity() {
        let ch = named_channel::<f64>(NamedChannel::AmplitudeDamping(0.0), 1).unwrap();
        let id = Channel::<f64>::identity(1);
        assert!(
            ch.choi()
                .as_operator()
                .max_abs_diff(id.choi().as_operator())
                < 1e-12
        );
    }

    #[test]
    fn random_unitary_purity() {
        let mut rng = stream(1, 0);
        for n in 1..=3 {
            let ch = random_unitary_channel::<f64, _>(n, &mut rng).unwrap();
            let eta = ch.choi();
            let purity = eta
                .as_operator()
                .trace_product(eta.as_operator())
                .unwrap()
                .re;
            assert!((purity - 4f64.powi(n as i32)).abs() < 1e-9);
        }
        let a = random_unitary_channel::<f64, _>(2, &mut stream(9, 0)).unwrap();
        let b = random_unitary_channel::<f64, _>(2, &mut stream(9, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_rank_channels() {
        let mut rng = stream(2, 0);
        for _ in 0..100 {
            let ch = random_full_rank_channel::<f64, _>(1, &mut rng).unwrap();
            assert_eq!(ch.kraus().len(), 4);
            assert_eq!(ch.kraus()[0].dim(), 2);
            assert!(ch.trace_preservation_residual() < 1e-9);
        }
        let ch = random_full_rank_channel::<f64, _>(2, &mut rng).unwrap();
        assert_eq!(ch.choi().rank(1e-8), 16);
    }

    #[test]
    fn dilation_consistency() {
        let mut rng = stream(3, 0);
        for n in 1..=2 {
            let (u, ch) = random_dilation::<f64, _>(n, &mut rng).unwrap();
            let rho = DensityMatrix::<f64>::random_hilbert_schmidt(n, &mut rng);
            let direct = apply_dilation(&u, 2 * n, rho.as_operator()).unwrap();
            assert!(direct.max_abs_diff(&ch.apply(rho.as_operator()).unwrap()) < 1e-9);
        }
    }
}
