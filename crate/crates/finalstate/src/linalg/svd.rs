use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::LinalgError;

/// Thin SVD: a = left · diag(singular_values) · right_adjoint.
///
/// `left` is rows×k with orthonormal columns, `right_adjoint` is k×cols with
/// orthonormal rows, k = min(rows, cols). Singular values are sorted
/// descending and nonnegative.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right_adjoint: ComplexMatrix,
}

const MAX_SWEEPS: usize = 60;
// Rotation threshold, relative per column pair.
const JACOBI_EPS: f64 = 1e-12;

struct JacobiOutcome {
    cols: Vec<Vec<Complex64>>,
    v_cols: Option<Vec<Vec<Complex64>>>,
}

/// One-sided Jacobi on the columns of `a` (rows >= cols assumed by caller).
/// Right-multiplies 2x2 unitaries until all column pairs are orthogonal.
fn jacobi_orthogonalize(
    a: &ComplexMatrix,
    accumulate_v: bool,
) -> Result<JacobiOutcome, LinalgError> {
    let m = a.rows();
    let n = a.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v_cols: Option<Vec<Vec<Complex64>>> = if accumulate_v {
        Some(
            (0..n)
                .map(|j| {
                    let mut e = vec![Complex64::new(0.0, 0.0); n];
                    e[j] = Complex64::new(1.0, 0.0);
                    e
                })
                .collect(),
        )
    } else {
        None
    };

    let fro_sq: f64 = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    if fro_sq == 0.0 {
        return Ok(JacobiOutcome { cols, v_cols });
    }

    let mut residual = 0.0f64;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        residual = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let (head, tail) = cols.split_at_mut(q);
                let cp = &mut head[p];
                let cq = &mut tail[0];

                let mut hpp = 0.0f64;
                let mut hqq = 0.0f64;
                let mut hpq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = cp[i];
                    let aq = cq[i];
                    hpp += ap.norm_sqr();
                    hqq += aq.norm_sqr();
                    hpq += ap.conj() * aq;
                }
                let g = hpq.norm();
                residual = residual.max(g / fro_sq);
                if hpp == 0.0 || hqq == 0.0 || g <= JACOBI_EPS * (hpp * hqq).sqrt() {
                    continue;
                }
                rotated = true;

                // Phase so the off-diagonal Gram entry becomes real, then a
                // real Jacobi rotation annihilates it.
                let phase = hpq / g; // e^{i phi}
                let zeta = (hqq - hpp) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ephc = phase.conj(); // e^{-i phi}

                for i in 0..m {
                    let ap = cp[i];
                    let aq = ephc * cq[i];
                    cp[i] = c * ap - s * aq;
                    cq[i] = s * ap + c * aq;
                }
                if let Some(v) = v_cols.as_mut() {
                    let (vh, vt) = v.split_at_mut(q);
                    let vp = &mut vh[p];
                    let vq = &mut vt[0];
                    for i in 0..n {
                        let ap = vp[i];
                        let aq = ephc * vq[i];
                        vp[i] = c * ap - s * aq;
                        vq[i] = s * ap + c * aq;
                    }
                }
            }
        }
        if !rotated {
            return Ok(JacobiOutcome { cols, v_cols });
        }
    }
    Err(LinalgError::NoConvergence {
        sweeps: MAX_SWEEPS,
        residual,
    })
}

/// Fill zero-norm columns of `u_cols` with vectors orthonormal to the rest.
fn complete_orthonormal(u_cols: &mut [Vec<Complex64>], zero_slots: &[usize], m: usize) {
    for &slot in zero_slots {
        let mut filled = false;
        for k in 0..m {
            let mut cand = vec![Complex64::new(0.0, 0.0); m];
            cand[k] = Complex64::new(1.0, 0.0);
            // Project against every column already at unit norm; unfilled
            // slots are all-zero and drop out via the norm check.
            for col in u_cols.iter() {
                let nrm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
                if nrm < 0.5 {
                    continue;
                }
                let dot: Complex64 = col.iter().zip(cand.iter()).map(|(u, x)| u.conj() * x).sum();
                for (ci, ui) in cand.iter_mut().zip(col.iter()) {
                    *ci -= dot * ui;
                }
            }
            let nrm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if nrm > 0.25 {
                let inv = 1.0 / nrm.sqrt();
                for ci in cand.iter_mut() {
                    *ci *= inv;
                }
                u_cols[slot] = cand;
                filled = true;
                break;
            }
        }
        debug_assert!(filled, "orthonormal completion must succeed");
    }
}

/// Singular value decomposition via one-sided Jacobi.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if a.rows() < a.cols() {
        // a = (a†)† : compute on the adjoint and swap factors.
        let r = svd(&a.adjoint())?;
        return Ok(SvdResult {
            left: r.right_adjoint.adjoint(),
            singular_values: r.singular_values,
            right_adjoint: r.left.adjoint(),
        });
    }
    let m = a.rows();
    let n = a.cols();
    let out = jacobi_orthogonalize(a, true)?;
    let cols = out.cols;
    let v_cols = out.v_cols.expect("v accumulated");

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut singular_values = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut zero_slots = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        singular_values.push(sigma);
        if sigma > 0.0 {
            let inv = 1.0 / sigma;
            u_cols.push(cols[j].iter().map(|z| z * inv).collect());
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); m]);
            zero_slots.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &zero_slots, m);

    let left = ComplexMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let right_adjoint = ComplexMatrix::from_fn(n, n, |i, j| v_cols[order[i]][j].conj());
    Ok(SvdResult {
        left,
        singular_values,
        right_adjoint,
    })
}

/// Singular values only (descending). Skips accumulating the singular bases;
/// noticeably cheaper for large Monte Carlo campaigns.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if a.rows() < a.cols() {
        return singular_values(&a.adjoint());
    }
    let out = jacobi_orthogonalize(a, false)?;
    let mut vals: Vec<f64> = out
        .cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(vals)
}

/// Relative rank tolerance for the polar decomposition.
pub const POLAR_RANK_TOL: f64 = 1e-12;

/// Unitary factor of the polar decomposition: left·right_adjoint of the SVD.
///
/// Errors if the smallest singular value is below POLAR_RANK_TOL times the
/// largest (the unitary factor is not well defined there).
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "polar_unitary needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let r = svd(a)?;
    let s_max = r.singular_values.first().copied().unwrap_or(0.0);
    let s_min = r.singular_values.last().copied().unwrap_or(0.0);
    let rank_tol = POLAR_RANK_TOL * s_max;
    if s_max == 0.0 || s_min <= rank_tol {
        return Err(LinalgError::RankDeficient {
            smallest: s_min,
            rank_tol,
        });
    }
    r.left.mul(&r.right_adjoint)
}
