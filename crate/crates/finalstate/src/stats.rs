//! Schmidt spectra, entanglement measures and the closed-form ensemble
//! oracles (Page, Lubkin, Banaszek, large-N asymptotics) that Monte Carlo
//! results are judged against.
//!
//! Entropies are reported in bits. The Page formula, natural in nats, is
//! converted by 1/ln 2.

use crate::channel::BipartitePureState;
use crate::error::LinalgError;
use crate::linalg::{singular_values, svd, ComplexMatrix};

/// Schmidt coefficients below this are treated as exact zeros for entropy.
const LAMBDA_FLOOR: f64 = 1e-14;

/// Schmidt decomposition of a bipartite pure state: descending nonnegative
/// coefficients with the paired orthonormal bases (columns).
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    pub lambdas: Vec<f64>,
    pub basis_a: ComplexMatrix,
    pub basis_b: ComplexMatrix,
}

impl SchmidtSpectrum {
    /// Hand-built spectrum with canonical bases; for constructed test cases.
    pub fn from_lambdas(lambdas: Vec<f64>) -> Self {
        let k = lambdas.len();
        Self {
            lambdas,
            basis_a: ComplexMatrix::identity(k),
            basis_b: ComplexMatrix::identity(k),
        }
    }

    pub fn entanglement_entropy_bits(&self) -> f64 {
        entropy_bits_of(&self.lambdas)
    }

    pub fn trace_norm_sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Ensemble purity statistic: sum of squared Schmidt probabilities.
    pub fn purity(&self) -> f64 {
        self.lambdas.iter().map(|l| l.powi(4)).sum()
    }
}

/// -sum p log2 p over p = lambda^2, with 0 log 0 = 0.
pub fn entropy_bits_of(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .filter(|&&l| l > LAMBDA_FLOOR)
        .map(|&l| {
            let p = l * l;
            -p * p.log2()
        })
        .sum()
}

/// Schmidt decomposition via SVD of the coefficient matrix.
pub fn schmidt_spectrum(state: &BipartitePureState) -> Result<SchmidtSpectrum, LinalgError> {
    let r = svd(state.coeffs())?;
    Ok(SchmidtSpectrum {
        lambdas: r.singular_values,
        basis_a: r.left,
        basis_b: r.right_adjoint.adjoint(),
    })
}

/// Schmidt coefficients only; cheaper when the bases are not needed.
pub fn schmidt_values(state: &BipartitePureState) -> Result<Vec<f64>, LinalgError> {
    singular_values(state.coeffs())
}

/// Maximum mean teleportation fidelity attainable with an imperfectly
/// entangled resource of the given Schmidt coefficients:
/// (1 + (sum lambda)^2) / (N + 1).
pub fn banaszek_fidelity(spectrum: &SchmidtSpectrum, n: usize) -> f64 {
    banaszek_fidelity_of(&spectrum.lambdas, n)
}

pub fn banaszek_fidelity_of(lambdas: &[f64], n: usize) -> f64 {
    let s: f64 = lambdas.iter().sum();
    (1.0 + s * s) / (n as f64 + 1.0)
}

/// Exact ensemble-average entanglement entropy of a random pure state on an
/// m x n bipartition, in bits: (sum_{k=n+1}^{mn} 1/k - (m-1)/(2n)) / ln 2.
/// Symmetric in (m, n).
pub fn page_entropy_exact(m: usize, n: usize) -> f64 {
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    if m <= 1 {
        return 0.0;
    }
    // Kahan summation; mn can reach ~10^6 terms.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in (n + 1)..=(m * n) {
        let term = 1.0 / k as f64;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    (sum - (m as f64 - 1.0) / (2.0 * n as f64)) / std::f64::consts::LN_2
}

/// Exact ensemble mean of the purity sum_l (lambda_l^2)^2 for a random pure
/// state on an m x n bipartition: (m + n) / (mn + 1).
pub fn lubkin_purity_exact(m: usize, n: usize) -> f64 {
    (m as f64 + n as f64) / ((m * n) as f64 + 1.0)
}

/// Large-N ensemble mean of the trace-norm sum: (8 / 3pi) sqrt(N).
/// The Gamma-ratio Gamma(2)/(Gamma(3/2) Gamma(5/2)) evaluates to 8/(3pi).
pub fn asymptotic_mean_trace_norm(n: usize) -> f64 {
    8.0 / (3.0 * std::f64::consts::PI) * (n as f64).sqrt()
}

/// Large-N mean escape fidelity (8/(3pi))^2 = 64/(9 pi^2) = 0.72051...
pub fn asymptotic_fidelity() -> f64 {
    let c = 8.0 / (3.0 * std::f64::consts::PI);
    c * c
}
