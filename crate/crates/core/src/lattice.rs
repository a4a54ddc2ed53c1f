//! Two particles on the ring `Z_d` with conserved total momentum.
//!
//! This is the finite, exactly unitary stand-in for two particles on a line:
//! global displacement is a cyclic shift of both positions, the generator
//! (total momentum) is diagonal in the joint Fourier basis with eigenvalues
//! `2πk/d`, and averaging over an unknown displacement with any prior leaves
//! every relative-coordinate observable untouched.
//!
//! `d` must be odd so that doubling is invertible mod `d`, which makes the
//! relabeling `(x₁, x₂) ↦ (x_r, x_a) = (x₁-x₂, x₁+x₂)` a bijection — the
//! relative/center split is then an exact permutation of basis labels, not an
//! approximation.
//!
//! Position observables use centered labels `{-(d-1)/2, …, (d-1)/2}` so that
//! "the mean shifts by X" is literal for states supported away from the
//! wrap-around cut.

use alloc::vec;
use alloc::vec::Vec;

use crate::density::{expectation, BasisLabel, DensityMatrix, Keep};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::Tolerances;

const TAU: f64 = 2.0 * core::f64::consts::PI;

/// Residual below which a relative/center state counts as factorized.
pub const FACTORIZATION_RESIDUAL_TOL: f64 = 1e-8;

/// The ring `Z_d` for one particle coordinate; the two-particle space is its
/// square with joint index `x₁·d + x₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpace {
    d: usize,
}

impl LatticeSpace {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d.is_multiple_of(2) {
            return Err(Error::EvenLatticeSize { d });
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn joint_dim(&self) -> usize {
        self.d * self.d
    }

    /// Multiplicative inverse of 2 mod d (d odd).
    fn inv2(&self) -> usize {
        self.d.div_ceil(2)
    }

    #[inline]
    pub fn index(&self, x1: usize, x2: usize) -> usize {
        x1 * self.d + x2
    }

    /// Centered label of a site: `0..=(d-1)/2` map to themselves, the rest to
    /// negative values, giving the range `-(d-1)/2 ..= (d-1)/2`.
    pub fn centered(&self, x: usize) -> f64 {
        if x <= (self.d - 1) / 2 {
            x as f64
        } else {
            x as f64 - self.d as f64
        }
    }

    #[inline]
    fn wrap(&self, x: i64) -> usize {
        x.rem_euclid(self.d as i64) as usize
    }
}

/// Normalized two-particle state over `|x₁, x₂⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    space: LatticeSpace,
    amplitudes: Vec<C64>,
}

impl LatticeState {
    pub fn new(space: LatticeSpace, amplitudes: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.len() != space.joint_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.joint_dim(),
                actual: amplitudes.len(),
            });
        }
        let n2 = linalg::norm_sqr(&amplitudes);
        if libm::fabs(n2 - 1.0) > tol.norm {
            return Err(Error::NotNormalized {
                norm_sqr: n2,
                tol: tol.norm,
            });
        }
        Ok(Self { space, amplitudes })
    }

    /// Position eigenstate `|x₁, x₂⟩`.
    pub fn position(space: LatticeSpace, x1: usize, x2: usize) -> Result<Self> {
        if x1 >= space.d || x2 >= space.d {
            return Err(Error::IndexOutOfRange {
                index: x1.max(x2),
                dim: space.d,
            });
        }
        let mut amplitudes = vec![C64::ZERO; space.joint_dim()];
        amplitudes[space.index(x1, x2)] = C64::ONE;
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> LatticeSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Global translation: both particles move by `X` sites (cyclically).
    pub fn displaced(&self, shift: i64) -> LatticeState {
        let d = self.space.d;
        let mut out = vec![C64::ZERO; self.amplitudes.len()];
        for x1 in 0..d {
            let y1 = self.space.wrap(x1 as i64 + shift);
            for x2 in 0..d {
                let y2 = self.space.wrap(x2 as i64 + shift);
                out[self.space.index(y1, y2)] = self.amplitudes[self.space.index(x1, x2)];
            }
        }
        LatticeState {
            space: self.space,
            amplitudes: out,
        }
    }

    /// Relabel into the relative/center basis (an exact permutation).
    pub fn to_rel_center(&self) -> RelCenterState {
        let d = self.space.d;
        let mut out = vec![C64::ZERO; self.amplitudes.len()];
        for x1 in 0..d {
            for x2 in 0..d {
                let r = self.space.wrap(x1 as i64 - x2 as i64);
                let a = self.space.wrap(x1 as i64 + x2 as i64);
                out[r * d + a] = self.amplitudes[self.space.index(x1, x2)];
            }
        }
        RelCenterState {
            space: self.space,
            amplitudes: out,
        }
    }
}

/// The same state expanded over `|x_r, x_a⟩`, `x_r = x₁-x₂`, `x_a = x₁+x₂`
/// (both mod d), joint index `x_r·d + x_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelCenterState {
    space: LatticeSpace,
    amplitudes: Vec<C64>,
}

impl RelCenterState {
    /// Product state `ψ_r ⊗ ψ_a` in the relative/center labels.
    pub fn product(
        space: LatticeSpace,
        psi_r: &[C64],
        psi_a: &[C64],
        tol: &Tolerances,
    ) -> Result<Self> {
        if psi_r.len() != space.d || psi_a.len() != space.d {
            return Err(Error::DimensionMismatch {
                expected: space.d,
                actual: psi_r.len().max(psi_a.len()),
            });
        }
        let amplitudes = linalg::kron_vec(psi_r, psi_a);
        let n2 = linalg::norm_sqr(&amplitudes);
        if libm::fabs(n2 - 1.0) > tol.norm {
            return Err(Error::NotNormalized {
                norm_sqr: n2,
                tol: tol.norm,
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn new(space: LatticeSpace, amplitudes: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.len() != space.joint_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.joint_dim(),
                actual: amplitudes.len(),
            });
        }
        let n2 = linalg::norm_sqr(&amplitudes);
        if libm::fabs(n2 - 1.0) > tol.norm {
            return Err(Error::NotNormalized {
                norm_sqr: n2,
                tol: tol.norm,
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> LatticeSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Inverse relabeling back to `|x₁, x₂⟩` (exact round-trip).
    pub fn to_positions(&self) -> LatticeState {
        let d = self.space.d;
        let inv2 = self.space.inv2() as i64;
        let mut out = vec![C64::ZERO; self.amplitudes.len()];
        for r in 0..d {
            for a in 0..d {
                let x1 = self.space.wrap(inv2 * (a as i64 + r as i64));
                let x2 = self.space.wrap(inv2 * (a as i64 - r as i64));
                out[self.space.index(x1, x2)] = self.amplitudes[r * d + a];
            }
        }
        LatticeState {
            space: self.space,
            amplitudes: out,
        }
    }

    /// Apply the SUM gate `|x_r, x_a⟩ ↦ |x_r, x_a + x_r⟩`.
    pub fn apply_sum(&self) -> RelCenterState {
        let d = self.space.d;
        let mut out = vec![C64::ZERO; self.amplitudes.len()];
        for r in 0..d {
            for a in 0..d {
                out[r * d + (a + r) % d] = self.amplitudes[r * d + a];
            }
        }
        RelCenterState {
            space: self.space,
            amplitudes: out,
        }
    }

    /// Entanglement entropy (base-2) across the relative|center split, from
    /// the Schmidt spectrum of the amplitude matrix.
    pub fn entanglement_entropy_bits(&self) -> f64 {
        let d = self.space.d;
        let m = CMat::from_fn(d, d, |r, a| self.amplitudes[r * d + a]);
        let gram = m.mul(&m.adjoint());
        let (eigs, _) = linalg::eigh(&gram);
        let mut s = 0.0;
        for lam in eigs {
            if lam > 1e-15 {
                s -= lam * libm::log2(lam);
            }
        }
        s
    }
}

/// Validate a prior over displacements: one nonnegative weight per site,
/// summing to 1 within 1e-12.
fn validate_shift_prior(space: LatticeSpace, weights: &[f64]) -> Result<()> {
    if weights.len() != space.d {
        return Err(Error::InvalidPrior {
            reason: "need one weight per lattice site",
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidPrior {
            reason: "shift weights must be finite and >= 0",
        });
    }
    let total: f64 = weights.iter().sum();
    if libm::fabs(total - 1.0) > 1e-12 {
        return Err(Error::InvalidPrior {
            reason: "shift weights must sum to 1",
        });
    }
    Ok(())
}

/// `ρ = Σ_X P(X) D(X)|ψ⟩⟨ψ|D†(X)` over the two-particle space
/// (position basis).
pub fn displacement_average(
    state: &LatticeState,
    weights: &[f64],
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    let space = state.space;
    validate_shift_prior(space, weights)?;
    let n = space.joint_dim();
    let mut mat = CMat::zeros(n, n);
    for (shift, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let displaced = state.displaced(shift as i64);
        mat.outer_accumulate(w, &displaced.amplitudes);
    }
    DensityMatrix::new(mat, BasisLabel::Lattice, tol)
}

/// Single-particle analog of [`displacement_average`]: average the cyclic
/// shift of one coordinate vector. A flat prior applied to a position
/// eigenstate gives exactly `I/d`.
pub fn shift_average_single(
    space: LatticeSpace,
    psi: &[C64],
    weights: &[f64],
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    validate_shift_prior(space, weights)?;
    if psi.len() != space.d {
        return Err(Error::DimensionMismatch {
            expected: space.d,
            actual: psi.len(),
        });
    }
    let n2 = linalg::norm_sqr(psi);
    if libm::fabs(n2 - 1.0) > tol.norm {
        return Err(Error::NotNormalized {
            norm_sqr: n2,
            tol: tol.norm,
        });
    }
    let d = space.d;
    let mut mat = CMat::zeros(d, d);
    let mut shifted = vec![C64::ZERO; d];
    for (shift, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (x, &amp) in psi.iter().enumerate() {
            shifted[(x + shift) % d] = amp;
        }
        mat.outer_accumulate(w, &shifted);
    }
    DensityMatrix::new(mat, BasisLabel::Lattice, tol)
}

/// Relabel a position-basis density matrix into the relative/center basis
/// (permutation conjugation).
pub fn density_to_rel_center(
    rho: &DensityMatrix,
    space: LatticeSpace,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if rho.basis() != BasisLabel::Lattice {
        return Err(Error::BasisMismatch {
            expected: BasisLabel::Lattice,
            actual: rho.basis(),
        });
    }
    if rho.dim() != space.joint_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.joint_dim(),
            actual: rho.dim(),
        });
    }
    let perm = rel_center_permutation(space);
    let n = space.joint_dim();
    let mut mat = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat.set(perm[i], perm[j], rho.entry(i, j));
        }
    }
    DensityMatrix::new(mat, BasisLabel::LatticeRelCenter, tol)
}

/// Position-basis joint index → relative/center joint index.
fn rel_center_permutation(space: LatticeSpace) -> Vec<usize> {
    let d = space.d;
    let mut perm = vec![0usize; space.joint_dim()];
    for x1 in 0..d {
        for x2 in 0..d {
            let r = space.wrap(x1 as i64 - x2 as i64);
            let a = space.wrap(x1 as i64 + x2 as i64);
            perm[space.index(x1, x2)] = r * d + a;
        }
    }
    perm
}

/// Outcome of testing `ρ ≈ ρ_r ⊗ ρ_a` in the relative/center basis.
#[derive(Debug, Clone)]
pub struct FactorizationCheck {
    /// `residual ≤ FACTORIZATION_RESIDUAL_TOL`.
    pub is_factorized: bool,
    /// `Tr_a ρ`.
    pub rel_factor: DensityMatrix,
    /// `Tr_r ρ`.
    pub center_factor: DensityMatrix,
    /// `‖ρ - ρ_r ⊗ ρ_a‖_max`.
    pub residual: f64,
    /// Purity of the relative factor.
    pub rel_purity: f64,
}

/// Compare a relative/center density matrix against the product of its own
/// marginals. The residual is data: entangled inputs simply report how far
/// from factorized they are.
pub fn factorization_check(
    rho: &DensityMatrix,
    space: LatticeSpace,
    tol: &Tolerances,
) -> Result<FactorizationCheck> {
    if rho.basis() != BasisLabel::LatticeRelCenter {
        return Err(Error::BasisMismatch {
            expected: BasisLabel::LatticeRelCenter,
            actual: rho.basis(),
        });
    }
    if rho.dim() != space.joint_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.joint_dim(),
            actual: rho.dim(),
        });
    }
    let d = space.d;
    let rel_factor = rho.partial_trace((d, d), Keep::First, tol)?;
    let center_factor = rho.partial_trace((d, d), Keep::Second, tol)?;
    let product = rel_factor.mat().kron(center_factor.mat());
    let residual = rho.mat().max_abs_diff(&product);
    let rel_purity = rel_factor.purity();
    Ok(FactorizationCheck {
        is_factorized: residual <= FACTORIZATION_RESIDUAL_TOL,
        rel_factor,
        center_factor,
        residual,
        rel_purity,
    })
}

/// Displace a two-particle density matrix: `ρ ↦ D(X) ρ D†(X)`, a
/// permutation conjugation (unitary, so all invariants survive untouched).
pub fn displace_density(
    rho: &DensityMatrix,
    space: LatticeSpace,
    shift: i64,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if rho.basis() != BasisLabel::Lattice {
        return Err(Error::BasisMismatch {
            expected: BasisLabel::Lattice,
            actual: rho.basis(),
        });
    }
    if rho.dim() != space.joint_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.joint_dim(),
            actual: rho.dim(),
        });
    }
    let d = space.d;
    let mut perm = vec![0usize; space.joint_dim()];
    for x1 in 0..d {
        let y1 = space.wrap(x1 as i64 + shift);
        for x2 in 0..d {
            let y2 = space.wrap(x2 as i64 + shift);
            perm[space.index(x1, x2)] = space.index(y1, y2);
        }
    }
    let n = space.joint_dim();
    let mut mat = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat.set(perm[i], perm[j], rho.entry(i, j));
        }
    }
    DensityMatrix::new(mat, BasisLabel::Lattice, tol)
}

/// Dense displacement matrix `D(X)` on the two-particle position basis.
pub fn displacement_matrix(space: LatticeSpace, shift: i64) -> CMat {
    let d = space.d;
    let n = space.joint_dim();
    let mut m = CMat::zeros(n, n);
    for x1 in 0..d {
        let y1 = space.wrap(x1 as i64 + shift);
        for x2 in 0..d {
            let y2 = space.wrap(x2 as i64 + shift);
            m.set(space.index(y1, y2), space.index(x1, x2), C64::ONE);
        }
    }
    m
}

/// Total momentum `Π̂` on the two-particle space: diagonal in the joint
/// Fourier basis with eigenvalue `2π·((k₁+k₂) mod d)/d`, expressed in the
/// position basis. Satisfies `D(X) = exp(-iX·Π̂)` for integer shifts.
pub fn total_momentum(space: LatticeSpace) -> CMat {
    let d = space.d;
    // g[m] = (2π/d²)·Σ_k k·e^{i·2πkm/d}; the matrix element between position
    // pairs with equal coordinate differences (x₂ - x₂' ≡ x₁ - x₁' ≡ m).
    let mut g = vec![C64::ZERO; d];
    for (m, gm) in g.iter_mut().enumerate() {
        let mut s = C64::ZERO;
        for k in 0..d {
            s += C64::from_polar(k as f64, TAU * (k * m % d) as f64 / d as f64);
        }
        *gm = s * (TAU / (d * d) as f64);
    }
    let n = space.joint_dim();
    let mut out = CMat::zeros(n, n);
    for x1 in 0..d {
        for x2 in 0..d {
            let row = space.index(x1, x2);
            for (m, &gm) in g.iter().enumerate() {
                let y1 = space.wrap(x1 as i64 - m as i64);
                let y2 = space.wrap(x2 as i64 - m as i64);
                out.set(row, space.index(y1, y2), gm);
            }
        }
    }
    out
}

/// The SUM gate `exp(-i x̂_r ⊗ Π̂_a)` as a permutation of position labels:
/// in relative/center labels it shifts the center coordinate by the relative
/// one, `|x_r, x_a⟩ ↦ |x_r, x_a + x_r⟩`.
pub fn sum_gate(space: LatticeSpace) -> CMat {
    let n = space.joint_dim();
    let perm = sum_permutation(space);
    let mut m = CMat::zeros(n, n);
    for (from, &to) in perm.iter().enumerate() {
        m.set(to, from, C64::ONE);
    }
    m
}

/// Basis-label map of the SUM gate on the position basis.
pub fn sum_permutation(space: LatticeSpace) -> Vec<usize> {
    let d = space.d;
    let inv2 = space.inv2() as i64;
    let mut perm = vec![0usize; space.joint_dim()];
    for x1 in 0..d {
        for x2 in 0..d {
            let r = space.wrap(x1 as i64 - x2 as i64);
            let a = space.wrap(x1 as i64 + x2 as i64);
            // (r, a) ↦ (r, a + r), back to positions.
            let y1 = space.wrap(inv2 * (a as i64 + 2 * r as i64));
            let y2 = space.wrap(inv2 * (a as i64));
            perm[space.index(x1, x2)] = space.index(y1, y2);
        }
    }
    perm
}

/// `max |[P, M]_ij|` where `P` is the permutation matrix mapping basis state
/// `k` to `perm[k]`: `(PM)_ij = M_{σ⁻¹(i), j}` and `(MP)_ij = M_{i, σ(j)}`,
/// so the commutator never forms a product.
pub fn permutation_commutator_max(perm: &[usize], m: &CMat) -> f64 {
    let n = perm.len();
    let mut inv = vec![0usize; n];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    let mut r = 0.0f64;
    for (i, &inv_i) in inv.iter().enumerate() {
        for (j, &perm_j) in perm.iter().enumerate().take(n) {
            let v = (m.get(inv_i, j) - m.get(i, perm_j)).norm();
            if v > r {
                r = v;
            }
        }
    }
    r
}

/// Diagonal of the relative-position observable `x̂_r` (centered labels) on
/// the position basis.
pub fn rel_position_diag(space: LatticeSpace) -> Vec<f64> {
    let d = space.d;
    let mut diag = vec![0.0; space.joint_dim()];
    for x1 in 0..d {
        for x2 in 0..d {
            let r = space.wrap(x1 as i64 - x2 as i64);
            diag[space.index(x1, x2)] = space.centered(r);
        }
    }
    diag
}

/// Diagonal of the absolute position `x̂₁` (centered labels).
pub fn abs_position_diag(space: LatticeSpace) -> Vec<f64> {
    let d = space.d;
    let mut diag = vec![0.0; space.joint_dim()];
    for x1 in 0..d {
        for x2 in 0..d {
            diag[space.index(x1, x2)] = space.centered(x1);
        }
    }
    diag
}

/// Result of sweeping an observable's displacement-averaged expectation over
/// a set of priors.
#[derive(Debug, Clone, Copy)]
pub struct InvarianceReport {
    /// `‖[obs, Π̂]‖_max` — at or below 1e-10 the deviation is guaranteed to
    /// vanish; above it the deviation is still reported, just not protected.
    pub commutator_norm: f64,
    /// Max pairwise deviation of `Tr[obs·ρ_P]` across the priors.
    pub deviation: f64,
}

/// Deviation of `Tr[obs · displacement_average(state, P)]` across a prior
/// list, together with the observable's commutator norm with the total
/// momentum. Both numbers are returned; the caller asserts invariance only
/// for momentum-commuting observables.
pub fn expectation_invariance(
    state: &LatticeState,
    obs: &CMat,
    priors: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<InvarianceReport> {
    let space = state.space;
    let pi = total_momentum(space);
    let commutator_norm = if obs.off_diagonal_max() == 0.0 {
        let diag: Vec<f64> = (0..obs.rows()).map(|i| obs.get(i, i).re).collect();
        CMat::commutator_max_with_diag(&diag, &pi)
    } else {
        obs.mul(&pi).sub(&pi.mul(obs)).max_abs()
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for weights in priors {
        let rho = displacement_average(state, weights, tol)?;
        let e = expectation(obs, &rho, tol)?;
        lo = lo.min(e);
        hi = hi.max(e);
    }
    let deviation = if priors.is_empty() { 0.0 } else { hi - lo };
    Ok(InvarianceReport {
        commutator_norm,
        deviation,
    })
}

/// Flat prior over all `d` shifts.
pub fn flat_shift_prior(space: LatticeSpace) -> Vec<f64> {
    vec![1.0 / space.d as f64; space.d]
}

/// Point prior at shift `x` (taken mod d).
pub fn delta_shift_prior(space: LatticeSpace, x: i64) -> Vec<f64> {
    let mut w = vec![0.0; space.d];
    w[space.wrap(x)] = 1.0;
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::fidelity;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        linalg::normalized(&v).unwrap()
    }

    /// Series matrix exponential with scaling and squaring; test-only oracle.
    fn expm_oracle(a: &CMat) -> CMat {
        let n = a.rows();
        let norm = a.max_abs() * n as f64;
        let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
        let scaled = a.scale(C64::new(1.0 / 2f64.powi(squarings as i32), 0.0));
        let mut term = CMat::identity(n);
        let mut sum = CMat::identity(n);
        for k in 1..24 {
            term = term.mul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = out.mul(&out);
        }
        out
    }

    #[test]
    fn rejects_even_lattice() {
        assert!(matches!(
            LatticeSpace::new(4),
            Err(Error::EvenLatticeSize { d: 4 })
        ));
        assert!(LatticeSpace::new(5).is_ok());
    }

    #[test]
    fn displacement_definitional_shift() {
        let t = tol();
        let space = LatticeSpace::new(31).unwrap();
        let psi = LatticeState::position(space, 1, 5).unwrap();
        let shifted = psi.displaced(3);
        let want = LatticeState::position(space, 4, 8).unwrap();
        assert_eq!(shifted.amplitudes(), want.amplitudes());
        // X = 0 and X = d are the identity.
        assert_eq!(psi.displaced(0).amplitudes(), psi.amplitudes());
        assert_eq!(psi.displaced(31).amplitudes(), psi.amplitudes());
        let _ = t;
    }

    #[test]
    fn rel_center_relabeling() {
        let space = LatticeSpace::new(7).unwrap();
        let psi = LatticeState::position(space, 2, 2).unwrap();
        let rc = psi.to_rel_center();
        // |x₁=2, x₂=2⟩ → |x_r=0, x_a=4⟩.
        for (i, &amp) in rc.amplitudes().iter().enumerate() {
            let want = if i == 4 { C64::ONE } else { C64::ZERO };
            assert_eq!(amp, want);
        }
    }

    #[test]
    fn rel_center_roundtrip_exact() {
        let t = tol();
        let space = LatticeSpace::new(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = LatticeState::new(space, random_unit(81, &mut rng), &t).unwrap();
        let rc = psi.to_rel_center();
        // Entries are moved, not recomputed; only the summation order of the
        // norm differs.
        assert!(
            (linalg::norm_sqr(rc.amplitudes()) - linalg::norm_sqr(psi.amplitudes())).abs() < 1e-15
        );
        let back = rc.to_positions();
        assert_eq!(back.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn momentum_commutes_with_displacements() {
        let space = LatticeSpace::new(9).unwrap();
        let pi = total_momentum(space);
        assert!(pi.hermiticity_residual() < 1e-13);
        for shift in [1i64, 2, 7] {
            let d_mat = displacement_matrix(space, shift);
            let comm = d_mat.mul(&pi).sub(&pi.mul(&d_mat)).max_abs();
            assert!(comm < 1e-12, "shift {shift}: {comm}");
        }
    }

    #[test]
    fn momentum_spectrum_is_fourier_grid() {
        let space = LatticeSpace::new(5).unwrap();
        let pi = total_momentum(space);
        let (eigs, _) = linalg::eigh(&pi);
        for lam in eigs {
            let nearest = (lam * 5.0 / TAU).round();
            assert!((lam - TAU * nearest / 5.0).abs() < 1e-10);
            assert!((0.0..5.0).contains(&nearest));
        }
    }

    #[test]
    fn momentum_generates_displacement() {
        let space = LatticeSpace::new(5).unwrap();
        let pi = total_momentum(space);
        let generator = pi.scale(C64::new(0.0, -1.0)); // -i·1·Π̂
        let exp = expm_oracle(&generator);
        let d1 = displacement_matrix(space, 1);
        assert!(exp.max_abs_diff(&d1) < 1e-10);
    }

    #[test]
    fn flat_average_of_position_eigenstate_is_maximally_mixed() {
        let t = tol();
        let space = LatticeSpace::new(31).unwrap();
        let mut psi = vec![C64::ZERO; 31];
        psi[4] = C64::ONE;
        let rho = shift_average_single(space, &psi, &flat_shift_prior(space), &t).unwrap();
        let mixed = DensityMatrix::maximally_mixed(31, BasisLabel::Lattice, &t).unwrap();
        assert!(rho.mat().max_abs_diff(mixed.mat()) < 1e-15);
    }

    #[test]
    fn density_displacement_matches_state_displacement() {
        let t = tol();
        let space = LatticeSpace::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let psi = LatticeState::new(space, random_unit(49, &mut rng), &t).unwrap();
        let rho = DensityMatrix::from_pure(psi.amplitudes(), BasisLabel::Lattice, &t).unwrap();
        let moved = displace_density(&rho, space, 3, &t).unwrap();
        let via_state =
            DensityMatrix::from_pure(psi.displaced(3).amplitudes(), BasisLabel::Lattice, &t)
                .unwrap();
        assert!(moved.mat().max_abs_diff(via_state.mat()) < 1e-14);
        // X = 0 and X = d leave the matrix untouched.
        assert_eq!(
            displace_density(&rho, space, 0, &t).unwrap().mat(),
            rho.mat()
        );
        assert_eq!(
            displace_density(&rho, space, 7, &t).unwrap().mat(),
            rho.mat()
        );
    }

    #[test]
    fn delta_prior_leaves_state_pure() {
        let t = tol();
        let space = LatticeSpace::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = LatticeState::new(space, random_unit(49, &mut rng), &t).unwrap();
        let rho = displacement_average(&psi, &delta_shift_prior(space, 0), &t).unwrap();
        let pure = DensityMatrix::from_pure(psi.amplitudes(), BasisLabel::Lattice, &t).unwrap();
        assert!(rho.mat().max_abs_diff(pure.mat()) < 1e-14);
    }

    #[test]
    fn averaged_product_state_keeps_rel_factor_pure() {
        let t = tol();
        let space = LatticeSpace::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi_r = random_unit(7, &mut rng);
        let psi_a = random_unit(7, &mut rng);
        let rc = RelCenterState::product(space, &psi_r, &psi_a, &t).unwrap();
        let state = rc.to_positions();

        for weights in [flat_shift_prior(space), delta_shift_prior(space, 2), {
            let mut w: Vec<f64> = (0..7).map(|i| 1.0 + (i as f64).sin().abs()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        }] {
            let rho = displacement_average(&state, &weights, &t).unwrap();
            let rho_rc = density_to_rel_center(&rho, space, &t).unwrap();
            let check = factorization_check(&rho_rc, space, &t).unwrap();
            assert!(check.residual < 1e-12);
            assert!(check.is_factorized);
            assert!(check.rel_purity > 1.0 - 1e-8);
            // The rel factor is the input |ψ_r⟩⟨ψ_r|.
            let pr = DensityMatrix::from_pure(&psi_r, BasisLabel::LatticeRelCenter, &t).unwrap();
            assert!(fidelity(&check.rel_factor, &pr, &t).unwrap() > 1.0 - 1e-8);
        }
    }

    #[test]
    fn maximally_entangled_residual_is_one_third() {
        let t = tol();
        let space = LatticeSpace::new(3).unwrap();
        let mut amps = vec![C64::ZERO; 9];
        for i in 0..3 {
            amps[i * 3 + i] = C64::new(1.0 / 3f64.sqrt(), 0.0);
        }
        let rho = DensityMatrix::from_pure(&amps, BasisLabel::LatticeRelCenter, &t).unwrap();
        let check = factorization_check(&rho, space, &t).unwrap();
        assert!((check.residual - 1.0 / 3.0).abs() < 1e-12);
        assert!(check.residual > 0.1);
        assert!(!check.is_factorized);
    }

    #[test]
    fn entangled_state_stays_entangled_after_averaging() {
        let t = tol();
        let space = LatticeSpace::new(7).unwrap();
        let mut amps = vec![C64::ZERO; 49];
        amps[0] = C64::new(0.5f64.sqrt(), 0.0); // |r=0, a=0⟩
        amps[7 + 1] = C64::new(0.5f64.sqrt(), 0.0); // |r=1, a=1⟩
        let rc = RelCenterState::new(space, amps, &t).unwrap();
        let state = rc.to_positions();
        let rho = displacement_average(&state, &flat_shift_prior(space), &t).unwrap();
        let rho_rc = density_to_rel_center(&rho, space, &t).unwrap();
        let check = factorization_check(&rho_rc, space, &t).unwrap();
        assert!(check.residual > 1e-3);
        assert!(!check.is_factorized);
    }

    #[test]
    fn sum_gate_commutes_with_momentum_and_preserves_it() {
        let space = LatticeSpace::new(7).unwrap();
        let pi = total_momentum(space);
        let sum = sum_gate(space);
        let dense = sum.mul(&pi).sub(&pi.mul(&sum)).max_abs();
        assert!(dense < 1e-12);
        let fast = permutation_commutator_max(&sum_permutation(space), &pi);
        assert!((dense - fast).abs() < 1e-13);
        // Conjugation leaves Π̂ unchanged.
        let conj = sum.mul(&pi).mul(&sum.adjoint());
        assert!(conj.max_abs_diff(&pi) < 1e-10);
    }

    #[test]
    fn sum_gate_zero_control_is_identity() {
        let t = tol();
        let space = LatticeSpace::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut psi_r = vec![C64::ZERO; 7];
        psi_r[0] = C64::ONE; // |x_r = 0⟩
        let psi_a = random_unit(7, &mut rng);
        let rc = RelCenterState::product(space, &psi_r, &psi_a, &t).unwrap();
        let out = rc.apply_sum();
        assert_eq!(out.amplitudes(), rc.amplitudes());
    }

    #[test]
    fn sum_gate_entangles_superposed_control() {
        let t = tol();
        let space = LatticeSpace::new(31).unwrap();
        let mut psi_r = vec![C64::ZERO; 31];
        psi_r[1] = C64::new(0.5f64.sqrt(), 0.0);
        psi_r[4] = C64::new(0.5f64.sqrt(), 0.0);
        let mut psi_a = vec![C64::ZERO; 31];
        psi_a[0] = C64::ONE;
        let rc = RelCenterState::product(space, &psi_r, &psi_a, &t).unwrap();
        assert!(rc.entanglement_entropy_bits() < 1e-12);
        let out = rc.apply_sum();
        let bits = out.entanglement_entropy_bits();
        // Two equal Schmidt weights: exactly one bit.
        assert!((bits - 1.0).abs() < 1e-12);
        assert!(bits > 0.5);
    }

    #[test]
    fn sum_gate_matrix_matches_state_application() {
        let t = tol();
        let space = LatticeSpace::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let psi = LatticeState::new(space, random_unit(25, &mut rng), &t).unwrap();
        let via_matrix = sum_gate(space).mul_vec(psi.amplitudes());
        let via_perm = psi.to_rel_center().apply_sum().to_positions();
        for (a, b) in via_matrix.iter().zip(via_perm.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn relative_position_is_prior_independent() {
        let t = tol();
        let space = LatticeSpace::new(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = LatticeState::new(space, random_unit(81, &mut rng), &t).unwrap();
        let xr = CMat::diag_real(&rel_position_diag(space));
        let priors = vec![
            flat_shift_prior(space),
            delta_shift_prior(space, 0),
            delta_shift_prior(space, 5),
        ];
        let report = expectation_invariance(&state, &xr, &priors, &t).unwrap();
        assert!(report.commutator_norm < 1e-12);
        assert!(report.deviation < 1e-10);
    }

    #[test]
    fn absolute_position_mean_shifts_with_the_prior() {
        let t = tol();
        let space = LatticeSpace::new(31).unwrap();
        let state = LatticeState::position(space, 2, 5).unwrap();
        let x1 = CMat::diag_real(&abs_position_diag(space));
        let priors = vec![delta_shift_prior(space, 0), delta_shift_prior(space, 1)];
        let report = expectation_invariance(&state, &x1, &priors, &t).unwrap();
        assert!(report.commutator_norm > 0.1);
        assert!((report.deviation - 1.0).abs() < 1e-12);

        let id = CMat::identity(space.joint_dim());
        let report = expectation_invariance(&state, &id, &priors, &t).unwrap();
        assert!(report.deviation < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn prop_momentum_polynomials_are_prior_independent(seed in 0u64..4000) {
            // Random Hermitian polynomials in x̂_r and Π̂ commute with Π̂ and
            // must give prior-independent averaged expectations.
            let t = tol();
            let space = LatticeSpace::new(7).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = LatticeState::new(space, random_unit(49, &mut rng), &t).unwrap();
            let xr = CMat::diag_real(&rel_position_diag(space));
            let pi = total_momentum(space);
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let obs = CMat::identity(49).scale(C64::new(c[0], 0.0))
                .add(&xr.scale(C64::new(c[1], 0.0)))
                .add(&pi.scale(C64::new(c[2], 0.0)))
                .add(&xr.mul(&xr).scale(C64::new(c[3], 0.0)))
                .add(&xr.mul(&pi).scale(C64::new(c[4], 0.0)));
            let priors: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    let mut w: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
                    let s: f64 = w.iter().sum();
                    w.iter_mut().for_each(|x| *x /= s);
                    w
                })
                .collect();
            let report = expectation_invariance(&state, &obs, &priors, &t).unwrap();
            prop_assert!(report.commutator_norm <= 1e-10);
            prop_assert!(report.deviation <= 1e-8);
        }

        #[test]
        fn prop_rel_center_is_isometric(seed in 0u64..400) {
            let t = tol();
            let space = LatticeSpace::new(9).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = LatticeState::new(space, random_unit(81, &mut rng), &t).unwrap();
            let rc = psi.to_rel_center();
            prop_assert!(
                (linalg::norm_sqr(rc.amplitudes()) - linalg::norm_sqr(psi.amplitudes())).abs()
                    < 1e-15
            );
            let back = rc.to_positions();
            prop_assert_eq!(back.amplitudes(), psi.amplitudes());
        }
    }
}
