//! Numerical simulator and statistics library for black-hole evaporation
//! modeled as a final-state projection channel.
//!
//! Layering, bottom up:
//! - [`linalg`]: self-contained dense complex linear algebra (matmul, QR,
//!   one-sided Jacobi SVD, polar decomposition);
//! - [`randsrc`]: seeded, stream-splittable random matrices and states
//!   (Ginibre, Haar unitaries, Hilbert-Schmidt random pure states);
//! - [`stats`]: Schmidt spectra, entanglement measures and the closed-form
//!   ensemble oracles (Page, Lubkin, Banaszek, large-N asymptotics);
//! - [`channel`]: final states and the projection-induced matter-to-out
//!   transformation, including the exact escape fidelity;
//! - [`circuits`]: pseudorandom states from shallow two-qubit circuits and
//!   the Kolmogorov-Smirnov comparison against the Haar ensemble;
//! - [`experiments`]: reproducible Monte Carlo campaigns with oracle-based
//!   pass/fail summaries;
//! - [`output`]: JSON/CSV result documents.

pub mod channel;
pub mod circuits;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod output;
pub mod randsrc;
pub mod stats;

#[cfg(test)]
pub(crate) mod test_oracles;
