//! Truncated single- and two-mode Fock-space states and number-basis
//! operators.
//!
//! A mode truncated at photon number `cutoff` is the (cutoff+1)-dimensional
//! space spanned by `|0⟩ … |cutoff⟩`. Truncation is always explicit: coherent
//! amplitudes are *not* renormalized, and the missing probability is reported
//! as a tail mass so callers can reject inadequate cutoffs instead of
//! silently absorbing them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::Tolerances;

/// Complex amplitude vector over the photon-number basis `0..=cutoff` of one
/// bosonic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl FockVector {
    /// Wrap raw amplitudes; the length must be `cutoff + 1`.
    pub fn new(cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != cutoff + 1 {
            return Err(Error::DimensionMismatch {
                expected: cutoff + 1,
                actual: amplitudes.len(),
            });
        }
        Ok(Self { cutoff, amplitudes })
    }

    /// `|0⟩` on a mode truncated at `cutoff`.
    pub fn vacuum(cutoff: usize) -> Self {
        let mut amplitudes = vec![C64::ZERO; cutoff + 1];
        amplitudes[0] = C64::ONE;
        Self { cutoff, amplitudes }
    }

    /// Number state `|n⟩`.
    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::IndexOutOfRange {
                index: n,
                dim: cutoff + 1,
            });
        }
        let mut amplitudes = vec![C64::ZERO; cutoff + 1];
        amplitudes[n] = C64::ONE;
        Ok(Self { cutoff, amplitudes })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    /// Probability mass lost to the truncation: `1 - Σ|a_n|²`, floored at 0.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn is_normalized(&self, norm_tol: f64) -> bool {
        libm::fabs(self.norm_sqr() - 1.0) <= norm_tol
    }

    /// Kronecker composition of two mode vectors. The joint index is
    /// row-major in the first factor: `n₁·(c₂+1) + n₂`; the returned
    /// `cutoff` is just `joint dimension - 1`, not a photon number.
    pub fn tensor(&self, other: &FockVector, tol: &Tolerances) -> Result<FockVector> {
        let dim = self.dim() * other.dim();
        if dim > tol.max_dim {
            return Err(Error::DimensionOverflow {
                dim,
                max: tol.max_dim,
            });
        }
        Ok(FockVector {
            cutoff: dim - 1,
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }
}

/// Coherent-state amplitudes `e^{-|α|²/2} α^n/√n!` for `n = 0..=cutoff`.
///
/// No renormalization is applied; the truncated Poisson tail is checked
/// against `tol.tail` and reported via [`FockVector::tail_mass`].
pub fn coherent_amplitudes(alpha: C64, cutoff: usize, tol: &Tolerances) -> Result<FockVector> {
    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    let mut a = C64::new(libm::exp(-0.5 * alpha.norm_sqr()), 0.0);
    amplitudes.push(a);
    for n in 0..cutoff {
        a = a * alpha / libm::sqrt((n + 1) as f64);
        amplitudes.push(a);
    }
    let state = FockVector { cutoff, amplitudes };
    let tail = state.tail_mass();
    if tail > tol.tail {
        return Err(Error::TruncationTail {
            tail,
            tol: tol.tail,
        });
    }
    Ok(state)
}

/// The photon-number operator `n̂ = diag(0, 1, …, dim-1)`.
pub fn number_operator(dim: usize) -> CMat {
    let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    CMat::diag_real(&diag)
}

/// The position quadrature `(a + a†)/√2`, truncated to `dim` levels.
pub fn quadrature_x(dim: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        let v = C64::new(libm::sqrt((n + 1) as f64 / 2.0), 0.0);
        m.set(n, n + 1, v);
        m.set(n + 1, n, v);
    }
    m
}

/// Complex amplitude grid `c[n1][n2]` for two modes sharing one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    cutoff: usize,
    amplitudes: Vec<C64>, // row-major: index n1·(cutoff+1) + n2
}

impl TwoModeState {
    pub fn new(cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = cutoff + 1;
        if amplitudes.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: amplitudes.len(),
            });
        }
        Ok(Self { cutoff, amplitudes })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim_per_mode(&self) -> usize {
        self.cutoff + 1
    }

    #[inline]
    pub fn get(&self, n1: usize, n2: usize) -> C64 {
        self.amplitudes[n1 * (self.cutoff + 1) + n2]
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    /// Mass sitting on the truncation boundary (`n1 = cutoff` or
    /// `n2 = cutoff`); a cheap witness for whether the cutoff was adequate.
    pub fn boundary_mass(&self) -> f64 {
        let d = self.cutoff + 1;
        let mut m = 0.0;
        for n2 in 0..d {
            m += self.get(self.cutoff, n2).norm_sqr();
        }
        for n1 in 0..d.saturating_sub(1) {
            m += self.get(n1, self.cutoff).norm_sqr();
        }
        m
    }
}
