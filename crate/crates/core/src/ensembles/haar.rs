use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, ShadowError};
use crate::operator::{orthonormalize_columns, DenseOperator};
use crate::scalar::{cx, Real};

pub const MAX_HAAR_QUBITS: usize = 8;

/// Haar-random unitary: QR of a complex Ginibre matrix with the `R` diagonal
/// made positive, which Gram-Schmidt does by construction.
pub fn sample_haar_unitary<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> Result<DenseOperator<T>> {
    if n_qubits > MAX_HAAR_QUBITS {
        return Err(ShadowError::UnsupportedSize {
            what: "Haar sampling",
            range: "0..=8 qubits",
            found: n_qubits,
        });
    }
    let g = DenseOperator::from_fn(n_qubits, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        cx(T::of(a), T::of(b))
    });
    Ok(orthonormalize_columns(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn samples_are_unitary() {
        let mut rng = stream(2, 0);
        for n in 0..=4 {
            let u = sample_haar_unitary::<f64, _>(n, &mut rng).unwrap();
            assert!((&u.adjoint() * &u).max_abs_diff(&DenseOperator::identity(n)) < 1e-10);
        }
    }

    #[test]
    fn first_moment_matches_haar() {
        let mut rng = stream(3, 0);
        let draws = 10_000;
        for n in [1usize, 2] {
            let d = (1usize << n) as f64;
            let xs: Vec<f64> = (0..draws)
                .map(|_| {
                    sample_haar_unitary::<f64, _>(n, &mut rng)
                        .unwrap()
                        .get(0, 0)
                        .norm_sqr()
                })
                .collect();
            let mean = xs.iter().sum::<f64>() / draws as f64;
            // |U_00|^2 ~ Beta(1, d - 1)
            let var = (d - 1.0) / (d * d * (d + 1.0));
            assert!(
                (mean - 1.0 / d).abs() < 3.0 * (var / draws as f64).sqrt(),
                "n={n} mean={mean}"
            );
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = sample_haar_unitary::<f64, _>(2, &mut stream(9, 4)).unwrap();
        let b = sample_haar_unitary::<f64, _>(2, &mut stream(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_oversized_requests() {
        assert!(sample_haar_unitary::<f64, _>(9, &mut stream(0, 0)).is_err());
    }
}
