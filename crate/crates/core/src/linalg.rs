//! Small dense helpers: a relative-threshold Jacobi eigensolver.
//!
//! The spiked model produces symmetric blocks whose diagonal spans many
//! orders of magnitude (entries of size sigma^2 d^alpha next to tau^2).
//! Tridiagonalization-based eigensolvers compute the small eigenvalues of
//! such graded matrices with absolute error ~eps * lambda_max, which wipes
//! them out entirely once d^alpha exceeds 1e16. Cyclic Jacobi with a
//! per-entry relative threshold keeps all eigenvalues to high relative
//! accuracy (Demmel-Veselic), which the sampling path depends on.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors in the matching columns. Rotation
/// stops once every off-diagonal entry is below
/// `tol * sqrt(|a_ii| * |a_jj|)`.
pub fn jacobi_symmetric_eigen<T: Real>(
    matrix: &DMatrix<T>,
    tol: T,
) -> (DVector<T>, DMatrix<T>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let mut a = matrix.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let max_sweeps = 30 + 2 * n;

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let scale = (a[(p, p)].abs() * a[(q, q)].abs()).sqrt();
                let apq = a[(p, q)];
                if apq == T::zero() || apq.abs() <= tol * scale {
                    continue;
                }
                rotated = true;

                let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    let sign = if theta > T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Sorts `(values, vectors)` pairs in place by descending eigenvalue.
pub fn sort_eigen_desc<T: Real>(values: &mut DVector<T>, vectors: &mut DMatrix<T>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted_vals = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let sorted_vecs = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    *values = sorted_vals;
    *vectors = sorted_vecs;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (vals, vecs) = jacobi_symmetric_eigen(&m, 1e-15);
        assert_relative_eq!(vals[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-14);
        assert_relative_eq!(vals[2], 1.0, epsilon = 1e-14);
        let recomposed = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert_relative_eq!(recomposed, m, epsilon = 1e-12);
    }

    #[test]
    fn graded_matrix_keeps_small_eigenvalues() {
        // One huge diagonal entry next to unit-scale ones; the small
        // eigenvalues must come out with relative accuracy.
        let big = 1e21;
        let mut m = DMatrix::<f64>::zeros(3, 3);
        m[(0, 0)] = big;
        m[(1, 1)] = 1.0;
        m[(2, 2)] = 2.0;
        m[(0, 1)] = 0.5;
        m[(1, 0)] = 0.5;
        let (vals, vecs) = jacobi_symmetric_eigen(&m, 1e-15);
        assert_relative_eq!(vals[0], big, max_relative = 1e-12);
        assert_relative_eq!(vals[1], 2.0, max_relative = 1e-10);
        assert_relative_eq!(vals[2], 1.0 - 0.25 / big, max_relative = 1e-10);
        let recomposed = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        for i in 0..3 {
            for j in 0..3 {
                let scale = (m[(i, i)] * m[(j, j)]).sqrt();
                assert!((recomposed[(i, j)] - m[(i, j)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn random_symmetric_matches_nalgebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 5;
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let sym = (&raw + raw.transpose()) * 0.5;
            let (vals, _) = jacobi_symmetric_eigen(&sym, 1e-15);
            let mut reference: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (got, want) in vals.iter().zip(reference) {
                assert_relative_eq!(*got, want, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }
}
