//! Validated value types: Hermitian operators, states, Choi matrices.

use super::{CMat, CVec, C64, QcoreError};
use nalgebra::DVector;

const HERM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Square complex matrix with Hermitian symmetry, the universal carrier.
///
/// Construction validates symmetry to 1e-12 (max absolute entry deviation)
/// and then stores the exactly hermitized average, so downstream spectral
/// routines never see asymmetry at roundoff level.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(mat: CMat) -> Result<Self, QcoreError> {
        if mat.nrows() != mat.ncols() {
            return Err(QcoreError::DimMismatch {
                context: format!("expected square matrix, got {}x{}", mat.nrows(), mat.ncols()),
            });
        }
        let adj = mat.adjoint();
        let max_asym = (&mat - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_asym > HERM_TOL {
            return Err(QcoreError::NonHermitian { max_asym });
        }
        Ok(Self::hermitize(mat))
    }

    /// Builds from a matrix that is Hermitian up to roundoff, averaging away
    /// the asymmetry without the 1e-12 gate. For internal accumulations.
    pub fn hermitize(mat: CMat) -> Self {
        let adj = mat.adjoint();
        Self { mat: (mat + adj).scale(0.5) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMat::identity(dim, dim) }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMat::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Self-adjoint eigendecomposition: ascending real eigenvalues and the
    /// matching unitary of column eigenvectors.
    pub fn eigh(&self) -> (DVector<f64>, CMat) {
        eigh_mat(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = self.eigh();
        vals[0]
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }
}

/// Eigendecomposition of a Hermitian matrix given as a raw `CMat`,
/// ascending eigenvalue order.
pub(crate) fn eigh_mat(mat: &CMat) -> (DVector<f64>, CMat) {
    let dim = mat.nrows();
    let se = nalgebra::SymmetricEigen::new(mat.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals = DVector::from_iterator(dim, order.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = CMat::zeros(dim, dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        vecs.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    (vals, vecs)
}

/// Positive semidefinite, trace-one Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self, QcoreError> {
        let min_eig = op.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(QcoreError::NegativeSpectrum { min_eig, tol: PSD_TOL });
        }
        let dev = (op.trace() - 1.0).abs();
        if dev > TRACE_TOL {
            return Err(QcoreError::NotNormalized { dev, tol: TRACE_TOL });
        }
        Ok(Self { op })
    }

    pub fn from_mat(mat: CMat) -> Result<Self, QcoreError> {
        Self::new(HermitianOperator::new(mat)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMat::identity(dim, dim).scale(1.0 / dim as f64);
        Self { op: HermitianOperator { mat: m } }
    }

    /// |v><v| for a normalized vector; errors if the norm is off.
    pub fn pure(v: &CVec) -> Result<Self, QcoreError> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(QcoreError::NotNormalized { dev: (n - 1.0).abs(), tol: 1e-9 });
        }
        let m = v * v.adjoint();
        Self::from_mat(m)
    }

    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self { op: HermitianOperator { mat: m } }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn mat(&self) -> &CMat {
        self.op.mat()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eigh(&self) -> (DVector<f64>, CMat) {
        self.op.eigh()
    }

    /// Transposed state (still a valid density operator).
    pub fn transposed(&self) -> Self {
        Self { op: HermitianOperator { mat: self.op.mat().transpose() } }
    }
}

/// Choi matrix of a completely positive trace-preserving map `A -> B`,
/// stored on `B ⊗ R` (`B` slow index, `R ≅ A`), normalized so that
/// `tr_B N = 1_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim_b: usize,
    dim_r: usize,
    op: HermitianOperator,
}

impl ChoiMatrix {
    pub fn new(dim_b: usize, dim_r: usize, op: HermitianOperator) -> Result<Self, QcoreError> {
        if dim_b == 0 || dim_r == 0 || op.dim() != dim_b * dim_r {
            return Err(QcoreError::DimMismatch {
                context: format!(
                    "Choi operator dim {} does not factor as dimB {} * dimR {}",
                    op.dim(),
                    dim_b,
                    dim_r
                ),
            });
        }
        let min_eig = op.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(QcoreError::NegativeSpectrum { min_eig, tol: PSD_TOL });
        }
        let marg = super::ops::partial_trace_mat(op.mat(), dim_b, dim_r, super::Subsystem::R);
        let residual = (&marg - CMat::identity(dim_r, dim_r)).norm();
        if residual > TRACE_TOL {
            return Err(QcoreError::NotTracePreserving { residual });
        }
        Ok(Self { dim_b, dim_r, op })
    }

    pub fn from_mat(dim_b: usize, dim_r: usize, mat: CMat) -> Result<Self, QcoreError> {
        Self::new(dim_b, dim_r, HermitianOperator::new(mat)?)
    }

    /// Choi matrix of the identity channel: the unnormalized maximally
    /// entangled operator `Φ = Σ_{k,l} |kk><ll|`.
    pub fn identity_channel(dim: usize) -> Self {
        let mut m = CMat::zeros(dim * dim, dim * dim);
        for k in 0..dim {
            for l in 0..dim {
                m[(k * dim + k, l * dim + l)] = C64::new(1.0, 0.0);
            }
        }
        Self { dim_b: dim, dim_r: dim, op: HermitianOperator { mat: m } }
    }

    /// Choi matrix of the completely depolarizing channel `ρ -> 1_B/dim_b`.
    pub fn completely_depolarizing(dim_b: usize, dim_r: usize) -> Self {
        let d = dim_b * dim_r;
        let m = CMat::identity(d, d).scale(1.0 / dim_b as f64);
        Self { dim_b, dim_r, op: HermitianOperator { mat: m } }
    }

    /// Choi matrix of a replacer channel `ρ -> tr(ρ) τ`: `τ ⊗ 1_R`.
    pub fn replacer(tau: &DensityOperator, dim_r: usize) -> Self {
        let m = super::ops::kron(tau.mat(), &CMat::identity(dim_r, dim_r));
        Self { dim_b: tau.dim(), dim_r, op: HermitianOperator::hermitize(m) }
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn mat(&self) -> &CMat {
        self.op.mat()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (self.mat() - other.mat()).norm()
    }
}

/// Input state `φ_R` together with its canonical purification
/// `|φ>_AR = (1_A ⊗ φ_R^{1/2}) |Φ_{A:R}>`, with `A ≅ R` and `A` the slow
/// index of the purification vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InputState {
    phi_r: DensityOperator,
    purification: CVec,
}

impl InputState {
    pub fn from_phi_r(phi_r: DensityOperator) -> Self {
        let d = phi_r.dim();
        let (vals, vecs) = phi_r.eigh();
        let mut sqrt = CMat::zeros(d, d);
        for k in 0..d {
            let lam = vals[k].max(0.0).sqrt();
            let col = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    sqrt[(i, j)] += col[i] * col[j].conj() * C64::new(lam, 0.0);
                }
            }
        }
        // |φ>_{(a,r)} = (φ^{1/2})_{r,a}
        let mut v = CVec::zeros(d * d);
        for a in 0..d {
            for r in 0..d {
                v[a * d + r] = sqrt[(r, a)];
            }
        }
        Self { phi_r, purification: v }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_phi_r(DensityOperator::maximally_mixed(dim))
    }

    pub fn phi_r(&self) -> &DensityOperator {
        &self.phi_r
    }

    /// `φ_A = φ_R^t`, the marginal of the purification on `A`.
    pub fn phi_a(&self) -> DensityOperator {
        self.phi_r.transposed()
    }

    pub fn purification(&self) -> &CVec {
        &self.purification
    }

    pub fn dim(&self) -> usize {
        self.phi_r.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{partial_trace_mat, Subsystem};

    #[test]
    fn hermitian_rejects_asymmetry() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(QcoreError::NonHermitian { .. })));
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.2, 0.3), C64::new(0.2, -0.3), C64::new(-0.5, 0.0)],
        );
        let h = HermitianOperator::new(m.clone()).unwrap();
        let (vals, vecs) = h.eigh();
        let mut rec = CMat::zeros(2, 2);
        for k in 0..2 {
            let col = vecs.column(k);
            for i in 0..2 {
                for j in 0..2 {
                    rec[(i, j)] += col[i] * col[j].conj() * C64::new(vals[k], 0.0);
                }
            }
        }
        assert!((rec - m).norm() < 1e-10);
        assert!(vals[0] <= vals[1]);
    }

    #[test]
    fn density_checks_trace_and_positivity() {
        let bad = CMat::identity(2, 2);
        assert!(matches!(DensityOperator::from_mat(bad), Err(QcoreError::NotNormalized { .. })));
        let neg = CMat::from_row_slice(
            2,
            2,
            &[C64::new(1.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.2, 0.0)],
        );
        assert!(matches!(DensityOperator::from_mat(neg), Err(QcoreError::NegativeSpectrum { .. })));
    }

    #[test]
    fn identity_choi_is_valid_and_marginal_is_identity() {
        let c = ChoiMatrix::identity_channel(2);
        let marg = partial_trace_mat(c.mat(), 2, 2, Subsystem::R);
        assert!((marg - CMat::identity(2, 2)).norm() < 1e-12);
        // tr_R of Φ is the identity on A (here labeled B).
        let marg_b = partial_trace_mat(c.mat(), 2, 2, Subsystem::B);
        assert!((marg_b - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn purification_marginals_match() {
        // Full-rank and rank-deficient cases.
        for diag in [[0.7, 0.3], [1.0, 0.0]] {
            let phi = DensityOperator::from_mat(
                HermitianOperator::from_real_diag(&diag).into_mat(),
            )
            .unwrap();
            let inp = InputState::from_phi_r(phi.clone());
            let v = inp.purification();
            assert!((v.norm() - 1.0).abs() < 1e-10);
            let d = 2;
            let mut rho_r = CMat::zeros(d, d);
            let mut rho_a = CMat::zeros(d, d);
            for a in 0..d {
                for r in 0..d {
                    for rp in 0..d {
                        rho_r[(r, rp)] += v[a * d + r] * v[a * d + rp].conj();
                    }
                    for ap in 0..d {
                        rho_a[(a, ap)] += v[a * d + r] * v[(ap) * d + r].conj();
                    }
                }
            }
            assert!((rho_r - phi.mat()).norm() < 1e-10);
            assert!((rho_a - phi.mat().transpose()).norm() < 1e-10);
        }
    }
}
