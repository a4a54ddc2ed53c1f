//! Relative-phase construction for a two-mode coherent state.
//!
//! Pipeline: build the two-mode amplitude grid `c[n₁][n₂]`, regroup it by
//! total photon number into blocks (the antidiagonals `n₁ + n₂ = N`), and
//! recognize each block as a scaled SU(2) coherent state over the
//! photon-number difference. With `ξ = α/β`, block `N` equals
//!
//! ```text
//! e^{-⟨N̂⟩/2}·(√⟨N̂⟩·β/|β|)^N/√N!  ×  √C(N,k)·(1+|ξ|²)^{-N/2}·ξ^k
//! ```
//!
//! exactly (not asymptotically) — [`verify_block_identity`] measures the
//! elementwise deviation, which stays at rounding level wherever the
//! truncated grid populates a block.
//!
//! For `|β| ≫ |α|` each block concentrates on small `k` and converges, as the
//! spin size grows, to an oscillator coherent state with amplitude
//! `η = ξ·√N` ([`contract_block`] embeds a block into that relative Fock
//! space). Discarding the coherences between different-`N` blocks — exactly
//! the flat average over the overall phase — and summing the contracted
//! blocks yields [`relative_phase_state`]: an effective single-mode state
//! carrying only the relative phase `φ_r`, whose distance from the pure
//! coherent target `|α|e^{-iφ_r}` is what [`factorization_fidelity`]
//! reports.

use alloc::vec;
use alloc::vec::Vec;

use crate::density::{fidelity, BasisLabel, DensityMatrix};
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, FockVector, TwoModeState};
use crate::linalg::{self, CMat, C64};
use crate::{default_cutoff, Tolerances};

/// Default per-mode cutoff for a two-mode coherent state:
/// `⌈m + 8√m + 10⌉` with `m = |α|² + |β|²`.
pub fn default_two_mode_cutoff(alpha: C64, beta: C64) -> usize {
    default_cutoff(alpha.norm_sqr() + beta.norm_sqr())
}

/// Default dimension-1 of the relative Fock space: `⌈|α|² + 8|α| + 10⌉`.
/// The contracted blocks carry amplitudes of magnitude ~`|α|`, so the tail
/// budget only depends on `α`.
pub fn default_rel_cutoff(alpha: C64) -> usize {
    let a = alpha.norm();
    libm::ceil(a * a + 8.0 * a + 10.0) as usize
}

/// Product amplitude grid of `|α⟩ ⊗ |β⟩`, both modes truncated at `cutoff`.
///
/// Matches `fock::coherent_amplitudes(α) ⊗ coherent_amplitudes(β)`
/// elementwise by construction; errors if either mode's Poisson tail exceeds
/// `tol.tail`.
pub fn two_mode_coherent(
    alpha: C64,
    beta: C64,
    cutoff: usize,
    tol: &Tolerances,
) -> Result<TwoModeState> {
    let a = coherent_amplitudes(alpha, cutoff, tol)?;
    let b = coherent_amplitudes(beta, cutoff, tol)?;
    let amps = linalg::kron_vec(a.amplitudes(), b.amplitudes());
    TwoModeState::new(cutoff, amps)
}

/// Coefficients of a two-mode state regrouped by total photon number
/// `N = n₁ + n₂`, with `k = n₁ = N/2 + M` indexing each block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBlockDecomposition {
    max_n: usize,
    blocks: Vec<Vec<C64>>,
    block_weights: Vec<f64>,
}

impl SpinBlockDecomposition {
    /// Largest total photon number present: `2·cutoff`.
    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Block `N` has exactly `N + 1` entries; entries the truncated grid
    /// cannot populate (`n₁ > cutoff` or `n₂ > cutoff`) are zero.
    pub fn block(&self, n: usize) -> &[C64] {
        &self.blocks[n]
    }

    /// Squared norm of each block (`p_N`).
    pub fn block_weights(&self) -> &[f64] {
        &self.block_weights
    }

    pub fn total_weight(&self) -> f64 {
        self.block_weights.iter().sum()
    }
}

/// Regroup `c[n₁][n₂]` into total-photon-number blocks:
/// `block[N][k] = c[k][N-k]`. A pure relabeling — every stored amplitude is
/// moved, none is altered.
pub fn to_spin_blocks(state: &TwoModeState) -> SpinBlockDecomposition {
    let cutoff = state.cutoff();
    let max_n = 2 * cutoff;
    let mut blocks = Vec::with_capacity(max_n + 1);
    let mut block_weights = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut block = vec![C64::ZERO; n + 1];
        let k_lo = n.saturating_sub(cutoff);
        let k_hi = n.min(cutoff);
        for (k, slot) in block.iter_mut().enumerate().take(k_hi + 1).skip(k_lo) {
            *slot = state.get(k, n - k);
        }
        block_weights.push(linalg::norm_sqr(&block));
        blocks.push(block);
    }
    SpinBlockDecomposition {
        max_n,
        blocks,
        block_weights,
    }
}

/// Range of block indices the truncated grid actually populates for block
/// `n`: `max(0, n - cutoff) ..= min(n, cutoff)`.
pub fn populated_range(n: usize, cutoff: usize) -> (usize, usize) {
    (n.saturating_sub(cutoff), n.min(cutoff))
}

/// Normalized spin-`N/2` coherent state over `k = 0..=N`:
/// `entry_k = √C(N,k)·(1+|ξ|²)^{-N/2}·ξ^k`.
///
/// Entries come from a multiplicative recurrence on the binomial ratios, run
/// upward from `k = 0` for `|ξ| ≤ 1` and downward from `k = N` otherwise, so
/// no factorial or binomial is ever formed and no intermediate can overflow
/// at any `N`.
pub fn spin_coherent_block(n: usize, xi: C64) -> Vec<C64> {
    let t2 = xi.norm_sqr();
    let mut block = vec![C64::ZERO; n + 1];
    if t2 <= 1.0 {
        let mut s = C64::new(libm::exp(-0.5 * n as f64 * libm::log1p(t2)), 0.0);
        block[0] = s;
        for k in 0..n {
            s = s * xi * libm::sqrt((n - k) as f64 / (k + 1) as f64);
            block[k + 1] = s;
        }
    } else {
        let inv = xi.inv();
        let mag = libm::exp(-0.5 * n as f64 * libm::log1p(1.0 / t2));
        let mut s = C64::from_polar(mag, n as f64 * xi.arg());
        block[n] = s;
        for k in (1..=n).rev() {
            s = s * inv * libm::sqrt(k as f64 / (n - k + 1) as f64);
            block[k - 1] = s;
        }
    }
    block
}

/// Parameters of the spin coherent structure hiding in a two-mode coherent
/// state: the canonical `ξ = α/β` together with the angular views derived
/// from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoherentParams {
    /// `α/β`.
    pub xi: C64,
    /// Polar angle with `sin(θ/2) = -|α|/√⟨N̂⟩` (negative branch).
    pub theta: f64,
    /// Relative phase `φ_α - φ_β` of the `|m|e^{-iφ}` parameterization,
    /// reduced mod 2π; equals `-arg ξ`.
    pub phi_r: f64,
    /// `⟨N̂⟩ = |α|² + |β|²`.
    pub mean_n: f64,
}

impl SpinCoherentParams {
    pub fn from_amplitudes(alpha: C64, beta: C64) -> Result<Self> {
        if beta.norm_sqr() == 0.0 {
            return Err(Error::ZeroReferenceAmplitude);
        }
        let xi = alpha / beta;
        Ok(Self {
            xi,
            theta: -2.0 * libm::atan2(alpha.norm(), beta.norm()),
            phi_r: crate::prior::reduce(-xi.arg()),
            mean_n: alpha.norm_sqr() + beta.norm_sqr(),
        })
    }
}

/// Max elementwise deviation between the spin-block expansion of
/// `|α⟩ ⊗ |β⟩` and the closed form
/// `prefactor(N) · spin_coherent_block(N, α/β)`, over every entry the
/// truncated grid populates.
///
/// The identity is exact; the returned deviation is pure rounding (the tests
/// hold it below 1e-10).
pub fn verify_block_identity(
    alpha: C64,
    beta: C64,
    cutoff: usize,
    tol: &Tolerances,
) -> Result<f64> {
    if beta.norm_sqr() == 0.0 {
        return Err(Error::ZeroReferenceAmplitude);
    }
    let state = two_mode_coherent(alpha, beta, cutoff, tol)?;
    let decomp = to_spin_blocks(&state);
    let xi = alpha / beta;
    let mean_n = alpha.norm_sqr() + beta.norm_sqr();
    let growth = beta / beta.norm() * libm::sqrt(mean_n); // √⟨N̂⟩·e^{-iφ_β}
    let mut prefactor = C64::new(libm::exp(-0.5 * mean_n), 0.0);

    let mut deviation = 0.0f64;
    for n in 0..=decomp.max_n() {
        if n > 0 {
            prefactor = prefactor * growth / libm::sqrt(n as f64);
        }
        let spin = spin_coherent_block(n, xi);
        let (k_lo, k_hi) = populated_range(n, cutoff);
        let block = decomp.block(n);
        for k in k_lo..=k_hi {
            let d = (block[k] - prefactor * spin[k]).norm();
            if d > deviation {
                deviation = d;
            }
        }
    }
    Ok(deviation)
}

/// Embed a total-photon-number block into the relative Fock space: entry `k`
/// goes to Fock index `k`, truncated at `rel_cutoff` with the clipped mass
/// returned alongside. This is the finite-`N` pre-image of the large-spin
/// contraction — no approximation is applied here.
pub fn contract_block(block: &[C64], rel_cutoff: usize) -> (FockVector, f64) {
    let dim = rel_cutoff + 1;
    let mut amplitudes = vec![C64::ZERO; dim];
    let mut loss = 0.0;
    for (k, &amp) in block.iter().enumerate() {
        if k < dim {
            amplitudes[k] = amp;
        } else {
            loss += amp.norm_sqr();
        }
    }
    (
        FockVector::new(rel_cutoff, amplitudes).expect("length matches by construction"),
        loss,
    )
}

/// The relative-phase density matrix: drop all coherences between different
/// total photon numbers (equivalently, flat-average the overall phase),
/// contract each block into the relative Fock space, and mix with the block
/// weights.
///
/// Returns the state and the total lost mass (two-mode truncation tail plus
/// embedding loss); the loss is an error when it exceeds `tol.tail`.
pub fn relative_phase_state(
    alpha: C64,
    beta: C64,
    cutoff: usize,
    rel_cutoff: usize,
    tol: &Tolerances,
) -> Result<(DensityMatrix, f64)> {
    if beta.norm_sqr() == 0.0 {
        return Err(Error::ZeroReferenceAmplitude);
    }
    let state = two_mode_coherent(alpha, beta, cutoff, tol)?;
    let decomp = to_spin_blocks(&state);
    let dim = rel_cutoff + 1;
    let mut mat = CMat::zeros(dim, dim);
    for n in 0..=decomp.max_n() {
        let (embedded, _) = contract_block(decomp.block(n), rel_cutoff);
        mat.outer_accumulate(1.0, embedded.amplitudes());
    }
    let trace = mat.trace().re;
    let loss = (1.0 - trace).max(0.0);
    if loss > tol.tail {
        return Err(Error::EmbeddingLoss {
            loss,
            tol: tol.tail,
        });
    }
    let mat = mat.scale(C64::new(1.0 / trace, 0.0));
    let rho = DensityMatrix::new(mat, BasisLabel::RelativeFock, tol)?;
    Ok((rho, loss))
}

/// Quality report for the approximate factorization of `|α, β⟩⟨α, β|` into
/// a pure relative-phase coherent state times a total-photon-number factor.
#[derive(Debug, Clone, Copy)]
pub struct FactorizationReport {
    pub alpha: C64,
    pub beta: C64,
    /// Fidelity of the relative-phase state against the pure coherent target.
    pub fidelity_to_target: f64,
    /// `Tr[ρ_rel²]`.
    pub rel_state_purity: f64,
    /// `η = (α/β)·|β| = |α|e^{-iφ_r}`.
    pub target_amplitude: C64,
    /// `|β|²/|α|²` (infinite when `α = 0`): the regime knob — factorization
    /// sharpens as this grows.
    pub condition_ratio: f64,
    pub cutoff: usize,
    pub rel_cutoff: usize,
    /// Mass lost to truncation and embedding.
    pub loss: f64,
}

/// Build [`relative_phase_state`] and measure it against the coherent target
/// with amplitude `η = (α/β)·|β|`.
pub fn factorization_fidelity(
    alpha: C64,
    beta: C64,
    cutoff: usize,
    rel_cutoff: usize,
    tol: &Tolerances,
) -> Result<FactorizationReport> {
    let (rho, loss) = relative_phase_state(alpha, beta, cutoff, rel_cutoff, tol)?;
    let eta = alpha / beta * beta.norm();
    let target = coherent_amplitudes(eta, rel_cutoff, tol)?;
    let target = linalg::normalized(target.amplitudes())?;
    let target_dm = DensityMatrix::from_pure(&target, BasisLabel::RelativeFock, tol)?;
    let fidelity_to_target = fidelity(&rho, &target_dm, tol)?;
    let rel_state_purity = rho.purity();
    if !(0.0..=1.0 + 1e-10).contains(&fidelity_to_target)
        || !(0.0..=1.0 + 1e-10).contains(&rel_state_purity)
    {
        return Err(Error::NotPositive {
            witness: fidelity_to_target.min(rel_state_purity),
            tol: 1e-10,
        });
    }
    Ok(FactorizationReport {
        alpha,
        beta,
        fidelity_to_target,
        rel_state_purity,
        target_amplitude: eta,
        condition_ratio: beta.norm_sqr() / alpha.norm_sqr(),
        cutoff,
        rel_cutoff,
        loss,
    })
}
