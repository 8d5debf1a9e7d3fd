//! Pseudorandom states from shallow two-qubit-gate circuits, plus the
//! Kolmogorov-Smirnov machinery for comparing their Schmidt statistics
//! against the Haar ensemble.
//!
//! Gate ensemble: Haar-random 4x4 unitaries. Pairing rule: brickwork on a
//! line ordering the A qubits then the B qubits, with odd layers wrapping
//! periodically, so every layer applies floor(2n/2) gates and entanglement
//! grows through the middle bond.

use num_complex::Complex64;

use crate::channel::BipartitePureState;
use crate::error::CircuitError;
use crate::randsrc::{haar_unitary, RngStream};
use crate::stats::SchmidtSpectrum;

/// Memory cap: dense statevector on 2n qubits, 2n <= 20 (~16 MiB).
pub const MAX_TOTAL_QUBITS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct CircuitSpec {
    /// Qubits per side; the bipartition is 2^n x 2^n down the middle.
    pub qubits_per_side: usize,
    /// Number of two-qubit-gate layers.
    pub depth: usize,
}

impl CircuitSpec {
    pub fn total_qubits(&self) -> usize {
        2 * self.qubits_per_side
    }

    /// Total gates applied in one run: depth x floor(2n/2).
    pub fn gate_count(&self) -> usize {
        self.depth * (self.total_qubits() / 2)
    }

    fn layer_pairs(&self, layer: usize) -> Vec<(usize, usize)> {
        let nq = self.total_qubits();
        if nq < 2 {
            return Vec::new();
        }
        if layer % 2 == 0 {
            (0..nq / 2).map(|k| (2 * k, 2 * k + 1)).collect()
        } else {
            // Odd layers shift by one and wrap around the line.
            (0..nq / 2).map(|k| ((2 * k + 1) % nq, (2 * k + 2) % nq)).collect()
        }
    }
}

/// Apply a 4x4 gate to qubits (q1, q2) of a dense statevector.
/// Qubit 0 is the most significant bit of the basis index.
fn apply_two_qubit_gate(state: &mut [Complex64], gate: &crate::linalg::ComplexMatrix, q1: usize, q2: usize, nq: usize) {
    debug_assert!(q1 != q2);
    let m1 = 1usize << (nq - 1 - q1);
    let m2 = 1usize << (nq - 1 - q2);
    let dim = state.len();
    for idx in 0..dim {
        if idx & m1 != 0 || idx & m2 != 0 {
            continue;
        }
        let i00 = idx;
        let i01 = idx | m2;
        let i10 = idx | m1;
        let i11 = idx | m1 | m2;
        let a = [state[i00], state[i01], state[i10], state[i11]];
        for (row, &target) in [i00, i01, i10, i11].iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, &amp) in a.iter().enumerate() {
                acc += gate.at(row, col) * amp;
            }
            state[target] = acc;
        }
    }
}

/// Run `depth` layers of independent Haar-random two-qubit gates on
/// |0...0⟩ and return the state with the A/B bipartition down the middle.
pub fn pseudorandom_state(
    spec: &CircuitSpec,
    rng: &mut RngStream,
) -> Result<BipartitePureState, CircuitError> {
    let nq = spec.total_qubits();
    if nq > MAX_TOTAL_QUBITS {
        return Err(CircuitError::CapExceeded { total_qubits: nq });
    }
    if spec.qubits_per_side == 0 {
        return Err(CircuitError::Channel(crate::error::ChannelError::ZeroDimension));
    }
    let dim = 1usize << nq;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    state[0] = Complex64::new(1.0, 0.0);
    for layer in 0..spec.depth {
        for (q1, q2) in spec.layer_pairs(layer) {
            let gate = haar_unitary(4, rng)?;
            apply_two_qubit_gate(&mut state, &gate, q1, q2, nq);
        }
    }
    // Round-off from many gate applications; renormalize before the strict
    // state constructor.
    let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in state.iter_mut() {
        *z /= norm;
    }
    let side = 1usize << spec.qubits_per_side;
    Ok(BipartitePureState::from_state_vector(side, side, state)?)
}

/// Two-sample Kolmogorov-Smirnov statistic: max gap between the empirical
/// CDFs of xs and ys.
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut xs: Vec<f64> = xs.to_vec();
    let mut ys: Vec<f64> = ys.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at the 1% level:
/// c(0.01) sqrt((n1+n2)/(n1 n2)) with c(0.01) = 1.628.
pub fn ks_critical_1pct(n1: usize, n2: usize) -> f64 {
    1.628 * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

/// KS distance between the pooled empirical distributions of squared
/// Schmidt coefficients of two sample sets.
pub fn ensemble_distance(
    circuit_samples: &[SchmidtSpectrum],
    haar_samples: &[SchmidtSpectrum],
) -> Result<f64, CircuitError> {
    if circuit_samples.is_empty() || haar_samples.is_empty() {
        return Err(CircuitError::EmptySamples);
    }
    let da = circuit_samples[0].lambdas.len();
    let db = haar_samples[0].lambdas.len();
    if da != db {
        return Err(CircuitError::DimensionMismatch(da, db));
    }
    let pool = |set: &[SchmidtSpectrum]| -> Vec<f64> {
        set.iter()
            .flat_map(|s| s.lambdas.iter().map(|l| l * l))
            .collect()
    };
    Ok(ks_statistic(&pool(circuit_samples), &pool(haar_samples)))
}
