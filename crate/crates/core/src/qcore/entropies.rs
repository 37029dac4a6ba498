//! Von Neumann entropy, Umegaki relative entropy, conditional entropy.
//!
//! All values are in nats.

use super::types::eigh_mat;
use super::{partial_trace_mat, CMat, DensityOperator, Subsystem, SUPPORT_TOL};

/// Von Neumann entropy `S(ρ) = -tr ρ ln ρ`.
pub fn von_neumann(rho: &DensityOperator) -> f64 {
    von_neumann_mat(rho.mat())
}

/// Entropy of a PSD matrix by its eigenvalues; tiny negative eigenvalues
/// from roundoff are clamped to zero.
pub(crate) fn von_neumann_mat(rho: &CMat) -> f64 {
    let (vals, _) = eigh_mat(rho);
    vals.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

/// Umegaki relative entropy `D(ρ ‖ Γ) = tr ρ (ln ρ - ln Γ)` for PSD `Γ`.
///
/// Returns `f64::INFINITY` when the weight of `ρ` on the kernel of `Γ`
/// exceeds `support_tol` (support violation sentinel).
pub fn relative_entropy(rho: &DensityOperator, gamma: &super::HermitianOperator) -> f64 {
    relative_entropy_mats(rho.mat(), gamma.mat(), SUPPORT_TOL)
}

/// Relative entropy on raw PSD matrices with an explicit support tolerance.
/// `rho` need not be normalized; the Umegaki form is evaluated literally.
pub fn relative_entropy_mats(rho: &CMat, gamma: &CMat, support_tol: f64) -> f64 {
    let (gvals, gvecs) = eigh_mat(gamma);
    let d = gamma.nrows();
    // Weight of rho on the kernel of gamma.
    let mut kernel_weight = 0.0;
    for k in 0..d {
        if gvals[k] <= support_tol {
            let col = gvecs.column(k);
            let mut w = 0.0;
            for i in 0..d {
                for j in 0..d {
                    w += (col[i].conj() * rho[(i, j)] * col[j]).re;
                }
            }
            kernel_weight += w;
        }
    }
    if kernel_weight > support_tol {
        return f64::INFINITY;
    }
    let (rvals, rvecs) = eigh_mat(rho);
    let tr_rho_ln_rho: f64 = rvals.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum();
    // tr ρ ln Γ over the support of Γ.
    let mut tr_rho_ln_gamma = 0.0;
    for k in 0..d {
        if gvals[k] > support_tol {
            let col = gvecs.column(k);
            let mut w = 0.0;
            for i in 0..d {
                for j in 0..d {
                    w += (col[i].conj() * rho[(i, j)] * col[j]).re;
                }
            }
            tr_rho_ln_gamma += w * gvals[k].ln();
        }
    }
    let _ = rvecs;
    tr_rho_ln_rho - tr_rho_ln_gamma
}

/// Conditional entropy `S(B|R) = S(ρ_BR) - S(ρ_R)` of a joint state.
pub fn conditional_entropy(rho_br: &CMat, dim_b: usize, dim_r: usize) -> f64 {
    let marg = partial_trace_mat(rho_br, dim_b, dim_r, Subsystem::R);
    von_neumann_mat(rho_br) - von_neumann_mat(&marg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{kron, HermitianOperator};

    #[test]
    fn entropy_of_maximally_mixed() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!((von_neumann(&rho) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn entropy_frozen_value() {
        let rho = DensityOperator::from_mat(
            HermitianOperator::from_real_diag(&[0.8, 0.2]).into_mat(),
        )
        .unwrap();
        assert!((von_neumann(&rho) - 0.5004024235381879).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_pure_vs_mixed() {
        let rho = DensityOperator::basis_state(2, 0);
        let gamma = HermitianOperator::from_real_diag(&[0.5, 0.5]);
        let d = relative_entropy(&rho, &gamma);
        assert!((d - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_support_sentinel() {
        let rho = DensityOperator::maximally_mixed(2);
        let gamma = HermitianOperator::from_real_diag(&[1.0, 0.0]);
        assert!(relative_entropy(&rho, &gamma).is_infinite());
        // Supported case is finite even with a rank-deficient reference.
        let ok = DensityOperator::basis_state(2, 0);
        assert!(relative_entropy(&ok, &gamma).is_finite());
    }

    #[test]
    fn conditional_entropy_of_product() {
        let b = DensityOperator::maximally_mixed(2);
        let r = DensityOperator::from_mat(
            HermitianOperator::from_real_diag(&[0.9, 0.1]).into_mat(),
        )
        .unwrap();
        let joint = kron(b.mat(), r.mat());
        let s = conditional_entropy(&joint, 2, 2);
        assert!((s - std::f64::consts::LN_2).abs() < 1e-10);
    }
}
