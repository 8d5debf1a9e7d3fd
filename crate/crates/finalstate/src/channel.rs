//! Final states and the projection-induced matter-to-out transformation.
//!
//! Basis convention: a bipartite state on H_A ⊗ H_B is a dimA×dimB
//! coefficient matrix with entry (a, b) the amplitude on |a⟩⊗|b⟩. The
//! Horowitz-Maldacena final state built from a unitary S stores
//! coeffs(m, k) = S_{mk}/√N, so the no-interaction channel realizes the
//! adjoint image of S after renormalization: √N·T̃ = S†. All invariants are
//! stated against T̃ = √N·T_raw, which has unit Frobenius norm.
//!
//! The channel is nonlinear: applying it renormalizes the projected output,
//! so the output ray is invariant under global phase and scaling of the
//! input but the map is not linear in the input amplitudes.

use num_complex::Complex64;

use crate::error::ChannelError;
use crate::linalg::{ComplexMatrix, POLAR_RANK_TOL};
use crate::stats::{schmidt_spectrum, SchmidtSpectrum};

const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
/// Outputs with pre-normalization norm below this count as annihilated.
pub const ANNIHILATION_TOL: f64 = 1e-14;

/// Normalized pure state on H_A ⊗ H_B stored as a dimA×dimB coefficient
/// matrix.
#[derive(Debug, Clone)]
pub struct BipartitePureState {
    coeffs: ComplexMatrix,
}

impl BipartitePureState {
    pub fn new(coeffs: ComplexMatrix) -> Result<Self, ChannelError> {
        if coeffs.rows() == 0 || coeffs.cols() == 0 {
            return Err(ChannelError::ZeroDimension);
        }
        let norm = coeffs.frobenius_norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ChannelError::NotNormalized { norm });
        }
        Ok(Self { coeffs })
    }

    pub fn dim_a(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn dim_b(&self) -> usize {
        self.coeffs.cols()
    }

    pub fn coeffs(&self) -> &ComplexMatrix {
        &self.coeffs
    }

    /// Flatten to a state vector, index a·dimB + b.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.coeffs.data().to_vec()
    }

    pub fn from_state_vector(
        dim_a: usize,
        dim_b: usize,
        v: Vec<Complex64>,
    ) -> Result<Self, ChannelError> {
        let m = ComplexMatrix::from_vec(dim_a, dim_b, v).map_err(ChannelError::Linalg)?;
        Self::new(m)
    }
}

/// The maximally entangled state (1/√N) Σ_j |j⟩⊗|j⟩: coefficient matrix
/// I_N/√N.
pub fn maximally_entangled(n: usize) -> Result<BipartitePureState, ChannelError> {
    if n == 0 {
        return Err(ChannelError::ZeroDimension);
    }
    let scale = 1.0 / (n as f64).sqrt();
    BipartitePureState::new(ComplexMatrix::identity(n).scale(Complex64::new(scale, 0.0)))
}

/// Horowitz-Maldacena final state (1/√N) Σ_k (S|k⟩)⊗|k⟩ for unitary S.
pub fn hm_final_state(s: &ComplexMatrix) -> Result<BipartitePureState, ChannelError> {
    if !s.is_square() {
        return Err(ChannelError::DimensionMismatch(format!(
            "S must be square, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let defect = s.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(ChannelError::NotUnitary { defect });
    }
    let n = s.rows();
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    BipartitePureState::new(s.scale(scale))
}

/// Rank-1 product final state a ⊗ b.
pub fn product_final_state(
    a_vec: &[Complex64],
    b_vec: &[Complex64],
) -> Result<BipartitePureState, ChannelError> {
    let na: f64 = a_vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b_vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na <= 1e-150 || nb <= 1e-150 {
        return Err(ChannelError::ZeroVector);
    }
    if (na - 1.0).abs() > NORM_TOL || (nb - 1.0).abs() > NORM_TOL {
        return Err(ChannelError::NotNormalized { norm: na * nb });
    }
    let m = ComplexMatrix::from_fn(a_vec.len(), b_vec.len(), |i, j| a_vec[i] * b_vec[j]);
    BipartitePureState::new(m)
}

/// Apply an interaction unitary on matter⊗in to a bipartite state
/// (vectorize, one matrix-vector product, reshape). The N³-dimensional
/// tripartite state is never materialized.
pub fn apply_interaction(
    u: &ComplexMatrix,
    state: &BipartitePureState,
) -> Result<BipartitePureState, ChannelError> {
    let d = state.dim_a() * state.dim_b();
    if u.rows() != d || u.cols() != d {
        return Err(ChannelError::DimensionMismatch(format!(
            "interaction is {}x{}, state needs {}x{}",
            u.rows(),
            u.cols(),
            d,
            d
        )));
    }
    let v = u.mul_vec(&state.to_vec()).map_err(ChannelError::Linalg)?;
    // Renormalize away matvec round-off; a unitary preserves the norm.
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-150 {
        return Err(ChannelError::ZeroVector);
    }
    let v = v.into_iter().map(|z| z / norm).collect();
    BipartitePureState::from_state_vector(state.dim_a(), state.dim_b(), v)
}

/// Input state for the channel, expressed in the channel's matter Schmidt
/// basis {|ℓ⟩'_matter}.
#[derive(Debug, Clone)]
pub struct InputState {
    amplitudes: Vec<Complex64>,
}

impl InputState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, ChannelError> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() {
            return Err(ChannelError::ZeroDimension);
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ChannelError::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// The ℓ-th matter Schmidt basis vector.
    pub fn basis(dim: usize, l: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[l] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// The projection-induced matter→out transformation.
///
/// T_raw carries the paper contraction including the 1/√N factor; the
/// normalized form T̃ = √N·T_raw has unit Frobenius norm and its singular
/// values are the Schmidt coefficients of the post-interaction state.
/// T' is the polar unitary of T̃, defined when T̃ is numerically full rank.
#[derive(Debug, Clone)]
pub struct ProjectionChannel {
    dim: usize,
    t_raw: ComplexMatrix,
    t_tilde: ComplexMatrix,
    spectrum: SchmidtSpectrum,
    t_prime: Option<ComplexMatrix>,
}

impl ProjectionChannel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_raw(&self) -> &ComplexMatrix {
        &self.t_raw
    }

    pub fn t_tilde(&self) -> &ComplexMatrix {
        &self.t_tilde
    }

    pub fn spectrum(&self) -> &SchmidtSpectrum {
        &self.spectrum
    }

    pub fn t_prime(&self) -> Option<&ComplexMatrix> {
        self.t_prime.as_ref()
    }

    /// √N · T̃, the renormalized channel action; unitary in the HM
    /// no-interaction case.
    pub fn normalized_action(&self) -> ComplexMatrix {
        self.t_tilde.scale(Complex64::new((self.dim as f64).sqrt(), 0.0))
    }

    /// Apply the nonlinear channel. Returns the normalized outgoing state
    /// (computational out basis) and the pre-normalization norm.
    pub fn apply(&self, mu: &InputState) -> Result<(Vec<Complex64>, f64), ChannelError> {
        if mu.dim() != self.dim {
            return Err(ChannelError::DimensionMismatch(format!(
                "input dim {} vs channel dim {}",
                mu.dim(),
                self.dim
            )));
        }
        // Input amplitudes live in the matter Schmidt basis.
        let matter = self
            .spectrum
            .basis_a
            .mul_vec(mu.amplitudes())
            .map_err(ChannelError::Linalg)?;
        let out = self.t_raw.mul_vec(&matter).map_err(ChannelError::Linalg)?;
        let pre_norm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if pre_norm < ANNIHILATION_TOL {
            return Err(ChannelError::Annihilated);
        }
        let normalized = out.into_iter().map(|z| z / pre_norm).collect();
        Ok((normalized, pre_norm))
    }

    /// Exact escape fidelity of an input:
    /// f(μ) = (Σ λ_ℓ |μ_ℓ|²)² / (Σ λ_ℓ² |μ_ℓ|²),
    /// the squared overlap of the renormalized output with T'·μ.
    pub fn escape_fidelity(&self, mu: &InputState) -> Result<f64, ChannelError> {
        escape_fidelity_of(&self.spectrum.lambdas, mu.amplitudes(), self.dim)
    }

    /// The paper's typical-state fidelity approximation
    /// ((1/√N) Σ_ℓ λ_ℓ)², labeled as such: exact only when |μ_ℓ|² ≈ 1/N.
    pub fn typical_fidelity_estimate(&self) -> f64 {
        let s = self.spectrum.trace_norm_sum();
        s * s / self.dim as f64
    }
}

/// Exact escape fidelity from Schmidt coefficients and input amplitudes in
/// the matter Schmidt basis; the fidelity depends on nothing else.
pub fn escape_fidelity_of(
    lambdas: &[f64],
    amplitudes: &[Complex64],
    dim: usize,
) -> Result<f64, ChannelError> {
    if amplitudes.len() != dim || lambdas.len() != dim {
        return Err(ChannelError::DimensionMismatch(format!(
            "input dim {} / spectrum len {} vs channel dim {}",
            amplitudes.len(),
            lambdas.len(),
            dim
        )));
    }
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    for (l, m) in lambdas.iter().zip(amplitudes) {
        let w = m.norm_sqr();
        s1 += l * w;
        s2 += l * l * w;
    }
    let pre_norm = (s2 / dim as f64).sqrt();
    if pre_norm < ANNIHILATION_TOL {
        return Err(ChannelError::Annihilated);
    }
    Ok(s1 * s1 / s2)
}

/// Channel from a post-interaction random state on matter⊗in.
///
/// Contracting against the maximally entangled in/out pair gives
/// T_raw[j, m] = conj(ψ[m, j])/√N, i.e. T̃ is the adjoint of the
/// coefficient matrix.
pub fn channel_from_random_state(
    psi: &BipartitePureState,
) -> Result<ProjectionChannel, ChannelError> {
    if psi.dim_a() != psi.dim_b() {
        return Err(ChannelError::DimensionMismatch(format!(
            "matter and in dimensions must match, got {}x{}",
            psi.dim_a(),
            psi.dim_b()
        )));
    }
    let n = psi.dim_a();
    let t_tilde = psi.coeffs().adjoint();
    let t_raw = t_tilde.scale(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
    let spectrum = schmidt_spectrum(psi).map_err(ChannelError::Linalg)?;
    // T' = basis_out · basis_matter† directly from the Schmidt pair; only
    // defined at numerically full rank.
    let l_max = spectrum.lambdas.first().copied().unwrap_or(0.0);
    let l_min = spectrum.lambdas.last().copied().unwrap_or(0.0);
    let t_prime = if l_max > 0.0 && l_min > POLAR_RANK_TOL * l_max {
        Some(
            spectrum
                .basis_b
                .mul(&spectrum.basis_a.adjoint())
                .map_err(ChannelError::Linalg)?,
        )
    } else {
        None
    };
    Ok(ProjectionChannel {
        dim: n,
        t_raw,
        t_tilde,
        spectrum,
        t_prime,
    })
}

/// Channel from an explicit final state and interaction unitary on
/// matter⊗in (Ν²×N²). Applies the interaction to the final-state vector and
/// reshapes; identical to the random-state path on the post-interaction
/// state.
pub fn channel_from_final_state(
    final_state: &BipartitePureState,
    u: &ComplexMatrix,
) -> Result<ProjectionChannel, ChannelError> {
    if final_state.dim_a() != final_state.dim_b() {
        return Err(ChannelError::DimensionMismatch(format!(
            "final state must be N x N, got {}x{}",
            final_state.dim_a(),
            final_state.dim_b()
        )));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(ChannelError::NotUnitary { defect });
    }
    let psi = apply_interaction(u, final_state)?;
    channel_from_random_state(&psi)
}

/// Process fidelity |Tr(target† action)|²/N² between two N×N matrices;
/// equals 1 iff the channel action matches the target unitary up to phase.
pub fn process_fidelity(target: &ComplexMatrix, action: &ComplexMatrix) -> Result<f64, ChannelError> {
    if target.rows() != action.rows() || target.cols() != action.cols() {
        return Err(ChannelError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            target.rows(),
            target.cols(),
            action.rows(),
            action.cols()
        )));
    }
    let n = target.rows() as f64;
    let tr = target.adjoint().mul(action).map_err(ChannelError::Linalg)?.trace();
    Ok(tr.norm_sqr() / (n * n))
}
