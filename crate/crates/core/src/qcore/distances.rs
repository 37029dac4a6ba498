//! Fidelity, trace distance, purified distance.

use super::ops::from_eigh;
use super::types::eigh_mat;
use super::{CMat, DensityOperator};

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn trace_norm_hermitian(x: &CMat) -> f64 {
    let (vals, _) = eigh_mat(x);
    vals.iter().map(|l| l.abs()).sum()
}

/// Trace distance `(1/2) ‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    0.5 * trace_norm_hermitian(&(rho.mat() - sigma.mat()))
}

/// Uhlmann fidelity `F(ρ, σ) = tr √(√σ ρ √σ)` (eigenvalue route).
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    let (svals, svecs) = sigma.eigh();
    let mapped: Vec<f64> = svals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sqrt_sigma = from_eigh(&mapped, &svecs);
    let inner = &sqrt_sigma * rho.mat() * &sqrt_sigma;
    let (vals, _) = eigh_mat(&inner);
    vals.iter().map(|&l| l.max(0.0).sqrt()).sum()
}

/// Purified distance `P = sqrt(1 - F²)`, clamped into `[0, 1]`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    let f = fidelity(rho, sigma).min(1.0);
    (1.0 - f * f).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::HermitianOperator;

    #[test]
    fn identical_states() {
        let rho = DensityOperator::from_mat(
            HermitianOperator::from_real_diag(&[0.6, 0.4]).into_mat(),
        )
        .unwrap();
        assert!((fidelity(&rho, &rho) - 1.0).abs() < 1e-10);
        assert!(trace_distance(&rho, &rho) < 1e-12);
        assert!(purified_distance(&rho, &rho) < 1e-7);
    }

    #[test]
    fn orthogonal_states() {
        let a = DensityOperator::basis_state(2, 0);
        let b = DensityOperator::basis_state(2, 1);
        assert!(fidelity(&a, &b).abs() < 1e-10);
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-12);
        assert!((purified_distance(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commuting_fidelity_frozen_value() {
        let rho = DensityOperator::maximally_mixed(2);
        let sigma = DensityOperator::from_mat(
            HermitianOperator::from_real_diag(&[0.9, 0.1]).into_mat(),
        )
        .unwrap();
        let f = fidelity(&rho, &sigma);
        assert!((f - 0.8944271909999159).abs() < 1e-12);
        let p = purified_distance(&rho, &sigma);
        assert!((p - 0.44721359549995804).abs() < 1e-10);
        // Trace distance never exceeds purified distance.
        assert!(trace_distance(&rho, &sigma) <= p + 1e-12);
    }
}
