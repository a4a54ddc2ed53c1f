//! Density matrices with validated invariants, composition, reduction and
//! distance metrics.
//!
//! Every [`DensityMatrix`] constructor checks Hermiticity and unit trace at
//! the configured tolerances and rejects matrices whose diagonal already
//! witnesses a positivity violation. The full positive-semidefiniteness
//! check is a separate step ([`DensityMatrix::validate_psd`]) because it
//! costs an eigensolve or a Cholesky pass; call it wherever a matrix enters
//! from an untrusted route.
//!
//! Fidelity uses the squared-overlap convention throughout the project:
//! `F(|ψ⟩⟨ψ|, |φ⟩⟨φ|) = |⟨ψ|φ⟩|²`, i.e. `F(ρ, σ) = (Tr √(√ρ σ √ρ))²` in
//! general.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::Tolerances;

/// Expectation values must be real up to this imaginary residue.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Purity above `1 - PURITY_PURE_TOL` routes fidelity through the pure-state
/// shortcut `⟨ψ|ρ|ψ⟩`.
const PURITY_PURE_TOL: f64 = 1e-12;

/// Dimension up to which positivity validation runs a full eigensolve;
/// beyond it the shifted-Cholesky bound is used instead.
const PSD_EIGH_MAX_DIM: usize = 128;

/// Which basis the matrix indices refer to. Purely a descriptor; it guards
/// against feeding, say, a position-basis lattice matrix into an operation
/// that expects relative/center labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// Photon-number basis of one mode (or a joint row-major composition).
    Fock,
    /// Two-particle position basis `|x₁, x₂⟩` on the ring.
    Lattice,
    /// Relative/center basis `|x_r, x_a⟩` on the ring.
    LatticeRelCenter,
    /// Effective single-mode relative-phase Fock space.
    RelativeFock,
}

impl core::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            BasisLabel::Fock => "fock",
            BasisLabel::Lattice => "lattice",
            BasisLabel::LatticeRelCenter => "lattice-rel-center",
            BasisLabel::RelativeFock => "relative-fock",
        };
        f.write_str(s)
    }
}

/// Hermitian, positive-semidefinite, unit-trace complex matrix over a
/// declared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    basis: BasisLabel,
}

/// Subsystem selector for [`DensityMatrix::partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix.
    ///
    /// Checks: square shape, `‖ρ - ρ†‖_max ≤ herm_tol`, `|Tr ρ - 1| ≤
    /// trace_tol`, and that no diagonal entry undershoots `-psd_tol` (a
    /// cheap necessary condition for positivity).
    pub fn new(mat: CMat, basis: BasisLabel, tol: &Tolerances) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch {
                expected: mat.rows(),
                actual: mat.cols(),
            });
        }
        let residual = mat.hermiticity_residual();
        if residual > tol.herm {
            return Err(Error::NotHermitian {
                residual,
                tol: tol.herm,
            });
        }
        let trace = mat.trace().re;
        if libm::fabs(trace - 1.0) > tol.trace {
            return Err(Error::TraceNotOne {
                trace,
                tol: tol.trace,
            });
        }
        for i in 0..mat.rows() {
            let d = mat.get(i, i).re;
            if d < -tol.psd {
                return Err(Error::NotPositive {
                    witness: d,
                    tol: tol.psd,
                });
            }
        }
        Ok(Self { mat, basis })
    }

    /// `|ψ⟩⟨ψ|` from a state vector. The vector must be normalized within
    /// `tol.norm`; the residual norm defect is divided out exactly so the
    /// trace invariant holds.
    pub fn from_pure(psi: &[C64], basis: BasisLabel, tol: &Tolerances) -> Result<Self> {
        let n2 = linalg::norm_sqr(psi);
        if libm::fabs(n2 - 1.0) > tol.norm {
            return Err(Error::NotNormalized {
                norm_sqr: n2,
                tol: tol.norm,
            });
        }
        let psi = linalg::normalized(psi)?;
        let mut mat = CMat::zeros(psi.len(), psi.len());
        mat.outer_accumulate(1.0, &psi);
        Self::new(mat, basis, tol)
    }

    /// Rank-1 projector `|n⟩⟨n|` onto basis index `n`.
    pub fn number_projector(n: usize, dim: usize, tol: &Tolerances) -> Result<Self> {
        if n >= dim {
            return Err(Error::IndexOutOfRange { index: n, dim });
        }
        let mut mat = CMat::zeros(dim, dim);
        mat.set(n, n, C64::ONE);
        Self::new(mat, BasisLabel::Fock, tol)
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize, basis: BasisLabel, tol: &Tolerances) -> Result<Self> {
        let w = 1.0 / dim as f64;
        let diag: Vec<f64> = (0..dim).map(|_| w).collect();
        Self::new(CMat::diag_real(&diag), basis, tol)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn basis(&self) -> BasisLabel {
        self.basis
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Populations `ρ_nn`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat.get(i, i).re).collect()
    }

    /// `Tr[ρ²]`, computed as the squared Frobenius norm (valid because the
    /// matrix is Hermitian by construction).
    pub fn purity(&self) -> f64 {
        self.mat.frobenius_sqr()
    }

    /// Largest off-diagonal magnitude `max |ρ_nm|, n ≠ m`.
    pub fn off_diagonal_max(&self) -> f64 {
        self.mat.off_diagonal_max()
    }

    /// Full positivity check: `min eig ≥ -psd_tol`, by eigensolve at small
    /// dimension and by the shifted-Cholesky bound beyond
    /// `PSD_EIGH_MAX_DIM`.
    pub fn validate_psd(&self, tol: &Tolerances) -> Result<()> {
        if self.dim() <= PSD_EIGH_MAX_DIM {
            let (eigs, _) = linalg::eigh(&self.mat);
            let min = eigs.first().copied().unwrap_or(0.0);
            if min < -tol.psd {
                return Err(Error::NotPositive {
                    witness: min,
                    tol: tol.psd,
                });
            }
        } else if !linalg::psd_within(&self.mat, tol.psd) {
            return Err(Error::NotPositive {
                witness: f64::NAN,
                tol: tol.psd,
            });
        }
        Ok(())
    }

    /// Kronecker composition, row-major in the first factor (same index
    /// convention as [`crate::fock::FockVector::tensor`]). The result keeps
    /// `self`'s basis label.
    pub fn tensor(&self, other: &DensityMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
        let dim = self.dim() * other.dim();
        if dim > tol.max_dim {
            return Err(Error::DimensionOverflow {
                dim,
                max: tol.max_dim,
            });
        }
        DensityMatrix::new(self.mat.kron(&other.mat), self.basis, tol)
    }

    /// Trace out one factor of a bipartite space with `dims = (d_first,
    /// d_second)`, joint index `i_first·d_second + i_second`.
    pub fn partial_trace(
        &self,
        dims: (usize, usize),
        keep: Keep,
        tol: &Tolerances,
    ) -> Result<DensityMatrix> {
        let (da, db) = dims;
        if da * db != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: da * db,
            });
        }
        let mat = match keep {
            Keep::First => {
                let mut out = CMat::zeros(da, da);
                for i1 in 0..da {
                    for i2 in 0..da {
                        let mut s = C64::ZERO;
                        for j in 0..db {
                            s += self.mat.get(i1 * db + j, i2 * db + j);
                        }
                        out.set(i1, i2, s);
                    }
                }
                out
            }
            Keep::Second => {
                let mut out = CMat::zeros(db, db);
                for j1 in 0..db {
                    for j2 in 0..db {
                        let mut s = C64::ZERO;
                        for i in 0..da {
                            s += self.mat.get(i * db + j1, i * db + j2);
                        }
                        out.set(j1, j2, s);
                    }
                }
                out
            }
        };
        DensityMatrix::new(mat, self.basis, tol)
    }

    /// If the state is numerically pure, recover its state vector from the
    /// dominant column (exact for rank-1 matrices, up to global phase).
    fn pure_vector(&self) -> Option<Vec<C64>> {
        if libm::fabs(self.purity() - 1.0) > PURITY_PURE_TOL {
            return None;
        }
        let n = self.dim();
        let mut jmax = 0;
        let mut dmax = -1.0;
        for j in 0..n {
            let d = self.mat.get(j, j).re;
            if d > dmax {
                dmax = d;
                jmax = j;
            }
        }
        if dmax <= 0.0 {
            return None;
        }
        let inv = 1.0 / libm::sqrt(dmax);
        Some((0..n).map(|i| self.mat.get(i, jmax) * inv).collect())
    }

    /// `⟨ψ|ρ|ψ⟩` for a (not necessarily normalized) vector; real part of the
    /// quadratic form.
    pub fn quadratic_form(&self, psi: &[C64]) -> f64 {
        let v = self.mat.mul_vec(psi);
        linalg::inner(psi, &v).re
    }
}

/// Uhlmann fidelity in the squared-overlap convention.
///
/// Pure `σ` (or pure `ρ`) short-circuits to the quadratic form
/// `⟨ψ|ρ|ψ⟩`. The general case is the squared trace norm of `√ρ·√σ`,
/// equal to `(Tr √(√ρ σ √ρ))²`; the singular values come from the Hermitian
/// embedding `[[0, B], [B†, 0]]` rather than from eigenvalues of `B†B`, so
/// near-zero singular values are not polluted by the squaring (this is what
/// keeps the result symmetric within 1e-10 on rank-deficient inputs).
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    if let Some(psi) = sigma.pure_vector() {
        return Ok(clamp_unit(rho.quadratic_form(&psi)));
    }
    if let Some(psi) = rho.pure_vector() {
        return Ok(clamp_unit(sigma.quadratic_form(&psi)));
    }

    let sqrt_rho = hermitian_sqrt(rho.mat(), tol)?;
    let sqrt_sigma = hermitian_sqrt(sigma.mat(), tol)?;
    let b = sqrt_rho.mul(&sqrt_sigma);
    let n = b.rows();
    let embedded = CMat::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j >= n {
            b.get(i, j - n)
        } else if i >= n && j < n {
            b.get(j, i - n).conj()
        } else {
            C64::ZERO
        }
    });
    let (eigs, _) = linalg::eigh(&embedded);
    let s: f64 = eigs.iter().filter(|&&lam| lam > 0.0).sum();
    Ok(clamp_unit(s * s))
}

/// `√ρ` by eigendecomposition with negative-eigenvalue clipping.
fn hermitian_sqrt(mat: &CMat, tol: &Tolerances) -> Result<CMat> {
    let (eigs, v) = linalg::eigh(mat);
    let n = eigs.len();
    let mut roots = Vec::with_capacity(n);
    for lam in eigs {
        if lam < -tol.psd {
            return Err(Error::NotPositive {
                witness: lam,
                tol: tol.psd,
            });
        }
        roots.push(libm::sqrt(lam.max(0.0)));
    }
    Ok(v.mul(&CMat::diag_real(&roots)).mul(&v.adjoint()))
}

fn clamp_unit(f: f64) -> f64 {
    f.clamp(0.0, 1.0)
}

/// `Tr[obs·ρ]` for a Hermitian observable; errors if `obs` is not Hermitian
/// within `tol.herm`, on dimension mismatch, or if the imaginary residue of
/// the trace exceeds [`IMAG_RESIDUE_TOL`] (it is discarded after the check).
pub fn expectation(obs: &CMat, rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    if obs.rows() != rho.dim() || obs.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: obs.rows(),
        });
    }
    let residual = obs.hermiticity_residual();
    if residual > tol.herm {
        return Err(Error::NotHermitian {
            residual,
            tol: tol.herm,
        });
    }
    // Tr[obs·ρ] = Σ_ij obs_ij ρ_ji without forming the product.
    let n = rho.dim();
    let mut t = C64::ZERO;
    for i in 0..n {
        for j in 0..n {
            t += obs.get(i, j) * rho.entry(j, i);
        }
    }
    if libm::fabs(t.im) > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { imag: t.im });
    }
    Ok(t.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{self, FockVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_pure(dim: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let v = linalg::normalized(&v).unwrap();
        DensityMatrix::from_pure(&v, BasisLabel::Fock, &tol()).unwrap()
    }

    fn random_mixed(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mat = CMat::zeros(dim, dim);
        let mut ws: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = ws.iter().sum();
        for w in &mut ws {
            *w /= total;
        }
        for &w in &ws {
            let v: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let v = linalg::normalized(&v).unwrap();
            mat.outer_accumulate(w, &v);
        }
        DensityMatrix::new(mat, BasisLabel::Fock, &tol()).unwrap()
    }

    #[test]
    fn number_projector_diagonals() {
        let p0 = DensityMatrix::number_projector(0, 3, &tol()).unwrap();
        assert_eq!(p0.diagonal(), alloc::vec![1.0, 0.0, 0.0]);
        let p2 = DensityMatrix::number_projector(2, 3, &tol()).unwrap();
        assert_eq!(p2.diagonal(), alloc::vec![0.0, 0.0, 1.0]);
        assert!(DensityMatrix::number_projector(3, 3, &tol()).is_err());
        for n in 0..3 {
            let p = DensityMatrix::number_projector(n, 3, &tol()).unwrap();
            assert!((p.trace() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = CMat::identity(2);
        m.set(0, 1, C64::new(0.1, 0.0));
        assert!(matches!(
            DensityMatrix::new(m.scale(C64::new(0.5, 0.0)), BasisLabel::Fock, &tol()),
            Err(Error::NotHermitian { .. })
        ));
        let m = CMat::identity(2); // trace 2
        assert!(matches!(
            DensityMatrix::new(m, BasisLabel::Fock, &tol()),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let t = tol();
        let a = fock::coherent_amplitudes(C64::new(0.9, 0.2), 24, &t).unwrap();
        let b = fock::coherent_amplitudes(C64::new(-0.4, 0.6), 24, &t).unwrap();
        let joint = a.tensor(&b, &t).unwrap();
        let rho = DensityMatrix::from_pure(joint.amplitudes(), BasisLabel::Fock, &t).unwrap();
        let ra = rho
            .partial_trace((a.dim(), b.dim()), Keep::First, &t)
            .unwrap();
        let pa = DensityMatrix::from_pure(a.amplitudes(), BasisLabel::Fock, &t).unwrap();
        assert!(fidelity(&ra, &pa, &t).unwrap() > 1.0 - 1e-12);
        let rb = rho
            .partial_trace((a.dim(), b.dim()), Keep::Second, &t)
            .unwrap();
        let pb = DensityMatrix::from_pure(b.amplitudes(), BasisLabel::Fock, &t).unwrap();
        assert!(fidelity(&rb, &pb, &t).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn partial_trace_of_00_projector() {
        let t = tol();
        let v = FockVector::vacuum(1);
        let joint = v.tensor(&v, &t).unwrap();
        let rho = DensityMatrix::from_pure(joint.amplitudes(), BasisLabel::Fock, &t).unwrap();
        let ra = rho.partial_trace((2, 2), Keep::First, &t).unwrap();
        assert!((ra.entry(0, 0).re - 1.0).abs() < 1e-15);
        assert!(ra.entry(1, 1).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_maximally_entangled_is_mixed() {
        let t = tol();
        let d = 3;
        let mut v = alloc::vec![C64::ZERO; d * d];
        for i in 0..d {
            v[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let rho = DensityMatrix::from_pure(&v, BasisLabel::Fock, &t).unwrap();
        let ra = rho.partial_trace((d, d), Keep::First, &t).unwrap();
        let mixed = DensityMatrix::maximally_mixed(d, BasisLabel::Fock, &t).unwrap();
        assert!(ra.mat().max_abs_diff(mixed.mat()) < 1e-14);
    }

    #[test]
    fn fidelity_self_orthogonal_and_dephased() {
        let t = tol();
        let rho = random_mixed(6, 3, 42);
        assert!((fidelity(&rho, &rho, &t).unwrap() - 1.0).abs() < 1e-10);

        let p0 = DensityMatrix::number_projector(0, 4, &t).unwrap();
        let p1 = DensityMatrix::number_projector(1, 4, &t).unwrap();
        assert!(fidelity(&p0, &p1, &t).unwrap() < 1e-14);

        // Poisson-dephased |α=1⟩ against the pure coherent state:
        // F = Σ_n p_n² = e^{-2}·I₀(2), by series oracle.
        let alpha = C64::ONE;
        let coh = fock::coherent_amplitudes(alpha, 32, &t).unwrap();
        let pure = DensityMatrix::from_pure(coh.amplitudes(), BasisLabel::Fock, &t).unwrap();
        let mut mat = CMat::zeros(33, 33);
        for (n, a) in coh.amplitudes().iter().enumerate() {
            mat.set(n, n, C64::new(a.norm_sqr(), 0.0));
        }
        let dephased = DensityMatrix::new(mat, BasisLabel::Fock, &t).unwrap();
        let f = fidelity(&dephased, &pure, &t).unwrap();
        // Series oracle: Σ (e^{-1}/n!)².
        let mut p = (-1.0f64).exp();
        let mut oracle = 0.0;
        for n in 0..33u32 {
            if n > 0 {
                p /= n as f64;
            }
            oracle += p * p;
        }
        assert!((oracle - 0.308_508_3).abs() < 1e-6);
        assert!((f - oracle).abs() < 1e-10);
        // Same value through the general Uhlmann route (both arguments mixed).
        let f_uhlmann = fidelity(&dephased, &dephased, &t).unwrap();
        assert!((f_uhlmann - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetric_and_pure_pure_overlap() {
        let t = tol();
        let a = random_pure(7, 1);
        let b = random_pure(7, 2);
        let fab = fidelity(&a, &b, &t).unwrap();
        let fba = fidelity(&b, &a, &t).unwrap();
        assert!((fab - fba).abs() < 1e-10);
        let m = random_mixed(7, 4, 3);
        let fam = fidelity(&a, &m, &t).unwrap();
        let fma = fidelity(&m, &a, &t).unwrap();
        assert!((fam - fma).abs() < 1e-10);
    }

    #[test]
    fn expectation_examples() {
        let t = tol();
        let rho = random_mixed(5, 2, 9);
        let id = CMat::identity(5);
        assert!((expectation(&id, &rho, &t).unwrap() - 1.0).abs() < 1e-12);

        // ⟨n̂⟩ on |α⟩⟨α| is |α|².
        let alpha = C64::new(0.8, -0.5);
        let coh = fock::coherent_amplitudes(alpha, 40, &t).unwrap();
        let rho = DensityMatrix::from_pure(coh.amplitudes(), BasisLabel::Fock, &t).unwrap();
        let n_op = fock::number_operator(41);
        let mean = expectation(&n_op, &rho, &t).unwrap();
        assert!((mean - alpha.norm_sqr()).abs() < 1e-8);

        // ⟨0|0⟩ projector on vacuum.
        let vac =
            DensityMatrix::from_pure(FockVector::vacuum(4).amplitudes(), BasisLabel::Fock, &t)
                .unwrap();
        let p0 = DensityMatrix::number_projector(0, 5, &t).unwrap();
        assert!((expectation(p0.mat(), &vac, &t).unwrap() - 1.0).abs() < 1e-14);

        // Non-Hermitian observable is rejected.
        let mut bad = CMat::zeros(5, 5);
        bad.set(0, 1, C64::ONE);
        assert!(matches!(
            expectation(&bad, &vac, &t),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn tensor_then_partial_trace_roundtrip() {
        let t = tol();
        let a = random_mixed(4, 2, 5);
        let b = random_pure(3, 6);
        let joint = a.tensor(&b, &t).unwrap();
        joint.validate_psd(&t).unwrap();
        let ra = joint.partial_trace((4, 3), Keep::First, &t).unwrap();
        assert!(fidelity(&ra, &a, &t).unwrap() > 1.0 - 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_operations_preserve_invariants(seed in 0u64..2000) {
            let t = tol();
            let rho = random_mixed(6, 3, seed);
            rho.validate_psd(&t).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() <= t.trace);
            prop_assert!(rho.mat().hermiticity_residual() <= t.herm);
            let sigma = random_pure(4, seed.wrapping_add(1));
            let joint = rho.tensor(&sigma, &t).unwrap();
            joint.validate_psd(&t).unwrap();
            let back = joint.partial_trace((6, 4), Keep::First, &t).unwrap();
            back.validate_psd(&t).unwrap();
            prop_assert!(fidelity(&back, &rho, &t).unwrap() > 1.0 - 1e-10);
        }

        #[test]
        fn prop_fidelity_symmetric_and_bounded(sa in 0u64..300, sb in 0u64..300) {
            let t = tol();
            let a = random_mixed(5, 2, sa);
            let b = random_mixed(5, 3, sb.wrapping_add(1000));
            let fab = fidelity(&a, &b, &t).unwrap();
            let fba = fidelity(&b, &a, &t).unwrap();
            prop_assert!((fab - fba).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&fab));
        }
    }
}
