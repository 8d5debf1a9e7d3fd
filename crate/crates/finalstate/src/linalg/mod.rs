//! Self-contained dense complex linear algebra: multiplication, adjoint,
//! QR, SVD and polar decomposition. The numerical substrate for everything
//! else in the crate.
//!
//! All operations are pure functions of their inputs; matrices are immutable
//! after construction and safe to share across workers.
//!
//! Tolerances are absolute for matrices pre-normalized to unit Frobenius
//! norm: QR reproduces the input within 1e-10 with ‖Q†Q−I‖_F ≤ 1e-12, the
//! SVD reconstructs within 1e-10, and the polar unitary is unitary within
//! 1e-10 for inputs with smallest singular value above 1e-12 times the
//! largest.

mod matrix;
mod qr;
mod svd;

pub use matrix::ComplexMatrix;
pub use qr::qr_decompose;
pub use svd::{polar_unitary, singular_values, svd, SvdResult, POLAR_RANK_TOL};

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::test_oracles::hermitian_eigenvalues_desc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic pseudo-arbitrary matrix for oracle tests (not a
    /// statistical ensemble, just fixed awkward numbers).
    fn scramble(rows: usize, cols: usize, mut x: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            x = (x * 997.0 + 0.1234567).fract();
            let re = x - 0.5;
            x = (x * 997.0 + 0.1234567).fract();
            c(re, x - 0.5)
        })
    }

    #[test]
    fn matmul_identity() {
        let a = scramble(3, 3, 0.2);
        let i = ComplexMatrix::identity(3);
        let prod = i.mul(&a).unwrap();
        assert!(prod.sub(&a).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn matmul_diagonal() {
        let a = ComplexMatrix::diagonal(&[2.0, 3.0]);
        let b = ComplexMatrix::diagonal(&[5.0, 7.0]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.at(0, 0), c(10.0, 0.0));
        assert_eq!(p.at(1, 1), c(21.0, 0.0));
        assert_eq!(p.at(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_sum_of_products_oracle() {
        let a = scramble(3, 3, 0.31);
        let b = scramble(3, 3, 0.71);
        let p = a.mul(&b).unwrap();
        // Independent entrywise oracle: explicit sum over the inner index
        // in the opposite accumulation order.
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = c(0.0, 0.0);
                for k in (0..3).rev() {
                    acc += a.at(i, k) * b.at(k, j);
                }
                assert!((p.at(i, j) - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn adjoint_conjugates() {
        let a = ComplexMatrix::from_vec(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(a.adjoint().at(0, 0), c(0.0, -1.0));
    }

    #[test]
    fn adjoint_of_real_symmetric_is_itself() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)])
            .unwrap();
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn adjoint_shape_and_involution() {
        let a = scramble(2, 3, 0.4);
        let ad = a.adjoint();
        assert_eq!((ad.rows(), ad.cols()), (3, 2));
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(ad.at(j, i), a.at(i, j).conj());
            }
        }
        assert_eq!(ad.adjoint(), a);
    }

    #[test]
    fn svd_scaled_identity() {
        let a = ComplexMatrix::identity(2).scale(c(1.0 / 2f64.sqrt(), 0.0));
        let r = svd(&a).unwrap();
        for s in &r.singular_values {
            assert!((s - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_rank_one() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let r = svd(&a).unwrap();
        assert!((r.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(r.singular_values[1].abs() < 1e-12);
        // Left factor must still be orthonormal despite the zero column.
        assert!(r.left.unitarity_defect() < 1e-10);
        let recon = r
            .left
            .mul(&ComplexMatrix::diagonal(&r.singular_values))
            .unwrap()
            .mul(&r.right_adjoint)
            .unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn svd_matches_gram_eigenvalue_oracle() {
        let a = scramble(5, 5, 0.55);
        let r = svd(&a).unwrap();
        let gram = a.adjoint().mul(&a).unwrap();
        let eigs = hermitian_eigenvalues_desc(&gram);
        for (s, e) in r.singular_values.iter().zip(eigs.iter()) {
            assert!((s * s - e).abs() < 1e-8, "sigma^2 {} vs eig {}", s * s, e);
        }
    }

    #[test]
    fn svd_reconstruction_and_ordering() {
        let a = scramble(4, 6, 0.81);
        let norm = a.frobenius_norm();
        let a = a.scale(c(1.0 / norm, 0.0));
        let r = svd(&a).unwrap();
        for w in r.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(r.singular_values.iter().all(|s| *s >= 0.0));
        let recon = r
            .left
            .mul(&ComplexMatrix::diagonal(&r.singular_values))
            .unwrap()
            .mul(&r.right_adjoint)
            .unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn singular_values_agree_with_full_svd() {
        let a = scramble(6, 6, 0.13);
        let full = svd(&a).unwrap().singular_values;
        let fast = singular_values(&a).unwrap();
        for (x, y) in full.iter().zip(fast.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn polar_of_unitary_is_identity_map() {
        let (q, _) = qr_decompose(&scramble(4, 4, 0.61)).unwrap();
        let p = polar_unitary(&q).unwrap();
        assert!(p.sub(&q).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn polar_of_positive_diagonal_is_identity() {
        let a = ComplexMatrix::diagonal(&[2.0, 3.0]);
        let p = polar_unitary(&a).unwrap();
        assert!(p.sub(&ComplexMatrix::identity(2)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn polar_scaling_invariance() {
        let (u, _) = qr_decompose(&scramble(3, 3, 0.27)).unwrap();
        let p = polar_unitary(&u.scale(c(0.5, 0.0))).unwrap();
        assert!(p.sub(&u).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn polar_rank_deficient_errors() {
        let a = ComplexMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            polar_unitary(&a),
            Err(crate::error::LinalgError::RankDeficient { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn qr_invariants_on_random_matrices(seed in 0.0f64..1.0) {
            let a = scramble(4, 4, seed);
            let norm = a.frobenius_norm();
            prop_assume!(norm > 1e-6);
            let a = a.scale(c(1.0 / norm, 0.0));
            let (q, r) = qr_decompose(&a).unwrap();
            prop_assert!(q.unitarity_defect() <= 1e-12);
            prop_assert!(q.mul(&r).unwrap().sub(&a).unwrap().frobenius_norm() <= 1e-10);
        }

        #[test]
        fn singular_value_trace_identity(seed in 0.0f64..1.0) {
            // Sum of squared singular values equals the squared Frobenius norm.
            let a = scramble(5, 5, seed);
            let vals = singular_values(&a).unwrap();
            let sum_sq: f64 = vals.iter().map(|s| s * s).sum();
            let fro_sq = a.frobenius_norm().powi(2);
            prop_assert!((sum_sq - fro_sq).abs() <= 1e-10 * fro_sq.max(1.0));
        }

        #[test]
        fn unitary_has_unit_singular_values(seed in 0.0f64..1.0) {
            let (q, _) = qr_decompose(&scramble(4, 4, seed)).unwrap();
            for s in singular_values(&q).unwrap() {
                prop_assert!((s - 1.0).abs() <= 1e-10);
            }
        }
    }
}
