use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::LinalgError;

/// QR decomposition of a square matrix via complex Householder reflections.
///
/// Returns (q, r) with q unitary and r upper triangular, q·r = a.
/// No pivoting; the Haar-sampling phase fix is done by the caller.
pub fn qr_decompose(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "qr_decompose needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n {
        // Householder vector for column k, rows k..n.
        let mut v: Vec<Complex64> = (k..n).map(|i| r.at(i, k)).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = v[0];
        // alpha = -e^{i arg(x0)} ||x||; real x0 = 0 falls back to phase 1.
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // R <- H R on columns k..n (H = I - tau v v†).
        for j in k..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * r.at(k + i, j))
                .sum();
            let scale = dot * tau;
            for (i, vi) in v.iter().enumerate() {
                let cur = r.at(k + i, j);
                r.set(k + i, j, cur - scale * vi);
            }
        }
        // Q <- Q H (accumulate the product of reflectors).
        for row in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| q.at(row, k + i) * vi)
                .sum();
            let scale = dot * tau;
            for (i, vi) in v.iter().enumerate() {
                let cur = q.at(row, k + i);
                q.set(row, k + i, cur - scale * vi.conj());
            }
        }
    }

    // Eliminate round-off below the diagonal.
    for i in 0..n {
        for j in 0..i {
            r.set(i, j, Complex64::new(0.0, 0.0));
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_decomposes_to_identity() {
        // The alpha = -sign(x0)||x|| convention reflects every column, so
        // Q and R pick up -1 diagonal phases; Q R = I must still hold.
        let a = ComplexMatrix::identity(3);
        let (q, r) = qr_decompose(&a).unwrap();
        assert!(q.unitarity_defect() < 1e-14);
        assert!(q.mul(&r).unwrap().sub(&a).unwrap().frobenius_norm() < 1e-14);
        for i in 0..3 {
            assert!((r.at(i, i).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_case() {
        let a = ComplexMatrix::diagonal(&[2.0, 3.0]);
        let (q, r) = qr_decompose(&a).unwrap();
        assert!(q.unitarity_defect() < 1e-12);
        assert!((r.at(0, 0).norm() - 2.0).abs() < 1e-12);
        assert!((r.at(1, 1).norm() - 3.0).abs() < 1e-12);
        assert_eq!(r.at(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn random_reconstruction() {
        // Fixed pseudo-arbitrary 4x4 complex matrix.
        let mut vals = Vec::new();
        let mut x = 0.37f64;
        for _ in 0..32 {
            x = (x * 997.0 + 0.123).fract();
            vals.push(x - 0.5);
        }
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c(vals[2 * (4 * i + j)], vals[2 * (4 * i + j) + 1]));
        let (q, r) = qr_decompose(&a).unwrap();
        assert!(q.unitarity_defect() < 1e-12);
        let recon = q.mul(&r).unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(r.at(i, j), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn nan_input_is_an_error() {
        let mut a = ComplexMatrix::identity(2);
        a.set(0, 1, c(f64::NAN, 0.0));
        assert!(matches!(qr_decompose(&a), Err(LinalgError::NonFinite)));
    }
}
