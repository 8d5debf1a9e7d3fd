//! Test-only numerical oracles, deliberately independent of the production
//! decomposition paths: a brute-force complex Hermitian eigensolver built
//! from full-matrix similarity rotations.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

/// Eigenvalues of a Hermitian matrix, descending, via cyclic two-sided
/// Jacobi with explicitly materialized rotation matrices. Slow and simple.
pub fn hermitian_eigenvalues_desc(h: &ComplexMatrix) -> Vec<f64> {
    assert!(h.is_square());
    let n = h.rows();
    let mut a = h.clone();
    for _ in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.at(p, q).norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                let g = apq.norm();
                if g < 1e-300 {
                    continue;
                }
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                let phase = apq / g;
                let zeta = (aqq - app) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Full rotation matrix; wasteful on purpose (oracle code).
                let mut rot = ComplexMatrix::identity(n);
                rot.set(p, p, Complex64::new(c, 0.0));
                rot.set(p, q, Complex64::new(s, 0.0));
                rot.set(q, p, Complex64::new(-s, 0.0) * phase.conj());
                rot.set(q, q, Complex64::new(c, 0.0) * phase.conj());
                a = rot.adjoint().mul(&a).unwrap().mul(&rot).unwrap();
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let h = ComplexMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eigenvalues_desc(&h);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let h = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let e = hermitian_eigenvalues_desc(&h);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }
}
