//! Median-of-means and small summary helpers.

use crate::error::{Result, ShadowError};
use crate::scalar::Real;

/// Means of `k` consecutive equal-size groups; the trailing `len % k` values
/// are dropped.
pub fn group_means<T: Real>(values: &[T], k: usize) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(ShadowError::Empty("values"));
    }
    if k == 0 || k > values.len() {
        return Err(ShadowError::InvalidGroupCount {
            k,
            len: values.len(),
        });
    }
    let size = values.len() / k;
    let inv = T::one() / T::of_usize(size);
    Ok(values
        .chunks_exact(size)
        .take(k)
        .map(|c| c.iter().copied().sum::<T>() * inv)
        .collect())
}

/// Median of a list (mean of the two middle values for even lengths).
pub fn median<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(ShadowError::Empty("values"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) * T::of(0.5)
    })
}

pub fn median_of_means<T: Real>(values: &[T], k: usize) -> Result<T> {
    median(&group_means(values, k)?)
}

pub fn mean<T: Real>(values: &[T]) -> T {
    values.iter().copied().sum::<T>() / T::of_usize(values.len().max(1))
}

/// Unbiased sample variance.
pub fn variance<T: Real>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = mean(values);
    values.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::of_usize(values.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        assert_eq!(
            median_of_means(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3).unwrap(),
            3.5
        );
    }

    #[test]
    fn single_group_is_the_mean() {
        let v = [1.0, 2.0, 4.0, 9.0];
        assert_eq!(median_of_means(&v, 1).unwrap(), 4.0);
    }

    #[test]
    fn remainder_is_dropped() {
        assert_eq!(
            group_means(&[1.0, 3.0, 5.0, 7.0, 100.0], 2).unwrap(),
            vec![2.0, 6.0]
        );
    }

    #[test]
    fn robust_to_one_outlier() {
        let mut v = vec![1.0; 50];
        v[7] = 1e9;
        let est = median_of_means(&v, 5).unwrap();
        assert_eq!(est, 1.0);
    }

    #[test]
    fn rejects_bad_group_counts() {
        assert!(matches!(
            median_of_means(&[1.0, 2.0], 3),
            Err(ShadowError::InvalidGroupCount { .. })
        ));
        assert!(median_of_means::<f64>(&[], 1).is_err());
        assert!(median_of_means(&[1.0], 0).is_err());
    }
}
