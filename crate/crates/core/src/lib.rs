//! Numerical state algebra for truncated bosonic modes and finite lattices.
//!
//! The crate provides four layers, each usable on its own:
//!
//! - [`fock`] / [`density`]: truncated Fock-space vectors, two-mode grids,
//!   density matrices with validated invariants, tensor products, partial
//!   traces, fidelity and expectation values.
//! - [`prior`] / [`phase`]: circular prior distributions on `[0, 2π)` and the
//!   phase-averaging channel `ρ ↦ Σ_k w_k e^{-iφ_k n̂} ρ e^{iφ_k n̂}`, together
//!   with prior-independence diagnostics for number-commuting observables.
//! - [`lattice`]: two particles on the ring `Z_d` (`d` odd) with conserved
//!   total momentum: global displacement averaging, the relative/center
//!   coordinate relabeling, factorization checks and the SUM gate.
//! - [`relphase`]: two-mode coherent states decomposed into total-photon-number
//!   blocks, SU(2) coherent block structure, contraction of large blocks onto
//!   oscillator coherent states, and the resulting relative-phase density
//!   matrix with its factorization quality report.
//!
//! All values are immutable after construction and all operations are pure
//! functions of their inputs, so everything here is safe to share across
//! threads. The crate is `no_std` (it allocates, but performs no IO); the
//! companion CLI crate carries file formats and the batch runner.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod density;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod phase;
pub mod prior;
pub mod relphase;

pub use density::{BasisLabel, DensityMatrix};
pub use error::{Error, Result};
pub use fock::{FockVector, TwoModeState};
pub use linalg::{CMat, C64};
pub use prior::CircularPrior;

/// Numeric configuration shared by all validating constructors and operations.
///
/// The defaults leave double-precision headroom over dense eigendecompositions
/// at desk scales; they are what every test and the CLI run with unless a
/// caller overrides them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of `Σ |amplitude|²` from 1 for normalized states.
    pub norm: f64,
    /// Allowed max-norm of `ρ - ρ†`.
    pub herm: f64,
    /// Eigenvalues of a density matrix may undershoot 0 by this much;
    /// anything in `[-psd, 0)` is clipped before matrix functions, anything
    /// below is a hard error.
    pub psd: f64,
    /// Allowed deviation of `Tr ρ` from 1.
    pub trace: f64,
    /// Allowed truncation tail mass (probability lost to a finite cutoff).
    pub tail: f64,
    /// Tensor products refuse to build joint spaces larger than this.
    pub max_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: 1e-10,
            herm: 1e-10,
            psd: 1e-8,
            trace: 1e-10,
            tail: 1e-9,
            max_dim: 1 << 21,
        }
    }
}

impl Tolerances {
    /// The field names and values as displayed pairs, for embedding the full
    /// tolerance set into report metadata.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("norm_tol", self.norm),
            ("herm_tol", self.herm),
            ("psd_tol", self.psd),
            ("trace_tol", self.trace),
            ("tail_tol", self.tail),
        ]
    }
}

/// Default photon-number cutoff for a distribution with the given mean
/// occupation: `⌈mean + 8·√mean + 10⌉`.
///
/// Keeps the Poisson tail below ~1e-12 for desk-scale amplitudes.
pub fn default_cutoff(mean: f64) -> usize {
    let m = mean.max(0.0);
    libm::ceil(m + 8.0 * libm::sqrt(m) + 10.0) as usize
}
