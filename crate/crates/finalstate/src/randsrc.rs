//! Deterministic, seedable random sources: Ginibre matrices, Haar-measure
//! unitaries and Hilbert-Schmidt-random bipartite pure states.
//!
//! Streams are built from a (master seed, stream id) pair on a counter-based
//! generator, so trial i can use stream id i with no sequential dependence:
//! serial and parallel campaigns draw identical numbers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channel::BipartitePureState;
use crate::error::ChannelError;
use crate::linalg::{qr_decompose, ComplexMatrix};

/// A single-owner random stream. Identical (seed, stream_id) reproduces an
/// identical draw sequence on any platform; distinct stream ids are
/// statistically independent.
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Standard complex normal: Re and Im independent N(0, 1/2), E|z|^2 = 1.
    /// Box-Muller in polar form on the raw uniform stream.
    pub fn complex_normal(&mut self) -> Complex64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }

    /// Unit vector uniform on the complex sphere in `dim` dimensions.
    pub fn haar_state_vector(&mut self, dim: usize) -> Vec<Complex64> {
        loop {
            let v: Vec<Complex64> = (0..dim).map(|_| self.complex_normal()).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-150 {
                return v.iter().map(|z| z / norm).collect();
            }
        }
    }
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RngStream) -> Result<ComplexMatrix, ChannelError> {
    if rows == 0 || cols == 0 {
        return Err(ChannelError::ZeroDimension);
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_normal()))
}

/// Haar-measure random unitary: QR of a Ginibre draw with the R-diagonal
/// phase correction. The phase fix is mandatory for measure exactness;
/// without it the QR output is not Haar distributed.
pub fn haar_unitary(dim: usize, rng: &mut RngStream) -> Result<ComplexMatrix, ChannelError> {
    let g = ginibre(dim, dim, rng)?;
    let (q, r) = qr_decompose(&g).map_err(ChannelError::Linalg)?;
    let mut u = q;
    for k in 0..dim {
        let mut d = r.at(k, k);
        if d.norm() == 0.0 {
            // Probability-zero degenerate diagonal; nudge before dividing.
            d = Complex64::new(1e-300, 0.0);
        }
        let phase = d.conj() / d.norm();
        for i in 0..dim {
            let cur = u.at(i, k);
            u.set(i, k, cur * phase);
        }
    }
    Ok(u)
}

/// Hilbert-Schmidt-random bipartite pure state: normalized Ginibre
/// coefficient matrix.
pub fn random_pure_state(
    dim_a: usize,
    dim_b: usize,
    rng: &mut RngStream,
) -> Result<BipartitePureState, ChannelError> {
    let g = ginibre(dim_a, dim_b, rng)?;
    let norm = g.frobenius_norm();
    if norm <= 1e-150 {
        return Err(ChannelError::ZeroVector);
    }
    BipartitePureState::new(g.scale(Complex64::new(1.0 / norm, 0.0)))
}
