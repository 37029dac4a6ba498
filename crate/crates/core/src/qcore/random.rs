//! Random operators, states, unitaries, and channels.

use super::ops::{from_eigh, kron, partial_trace_mat};
use super::types::eigh_mat;
use super::{CMat, CVec, C64, ChoiMatrix, DensityOperator, HermitianOperator, QcoreError, Subsystem};
use rand::Rng;
use rand_distr::StandardNormal;

/// Matrix with iid standard complex Gaussian entries.
pub(crate) fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random Hermitian operator with Gaussian entries, spectral width O(1).
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::hermitize(g.scale(0.5))
}

/// Random full-rank density operator (normalized Wishart).
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityOperator::from_mat(w.scale(1.0 / tr)).expect("wishart state is valid")
}

/// Random pure state vector, Haar distributed.
pub fn random_pure<R: Rng>(rng: &mut R, dim: usize) -> CVec {
    let g = ginibre(rng, dim, 1);
    let v = CVec::from_iterator(dim, g.iter().cloned());
    let n = v.norm();
    v.scale(1.0 / n)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase.conj();
    }
    q
}

/// Random channel by the normalized-Wishart recipe: `P = G G†`,
/// `Q = tr_B P`, `N = (1 ⊗ Q^{-1/2}) P (1 ⊗ Q^{-1/2})`.
///
/// Deterministic per seed. Resamples internally up to 16 times when the
/// marginal `Q` is near singular (eigenvalue below 1e-12), then fails.
pub fn random_channel(seed: u64, dim_a: usize, dim_b: usize) -> Result<ChoiMatrix, QcoreError> {
    let mut rng = super::rng::seeded_rng(seed);
    let d = dim_a * dim_b;
    let mut attempts = 0u32;
    loop {
        attempts += 1;
        let g = ginibre(&mut rng, d, d);
        let p = &g * g.adjoint();
        let q = partial_trace_mat(&p, dim_b, dim_a, Subsystem::R);
        let (qvals, qvecs) = eigh_mat(&q);
        if qvals[0] < 1e-12 {
            if attempts >= 16 {
                return Err(QcoreError::SingularMarginal { attempts });
            }
            continue;
        }
        let inv_sqrt: Vec<f64> = qvals.iter().map(|&l| 1.0 / l.sqrt()).collect();
        let qis = from_eigh(&inv_sqrt, &qvecs);
        let sandwich = kron(&CMat::identity(dim_b, dim_b), &qis);
        let n = &sandwich * p * &sandwich;
        return ChoiMatrix::new(dim_b, dim_a, HermitianOperator::hermitize(n));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::seeded_rng;

    #[test]
    fn random_channel_is_valid_and_deterministic() {
        let a = random_channel(42, 2, 2).unwrap();
        let b = random_channel(42, 2, 2).unwrap();
        assert_eq!(a.mat(), b.mat());
        let c = random_channel(43, 2, 2).unwrap();
        assert!((a.mat() - c.mat()).norm() > 1e-6);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(5);
        let u = random_unitary(&mut rng, 3);
        assert!((u.adjoint() * &u - CMat::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn output_marginal_concentrates_coarsely() {
        // Monte-Carlo sanity: mean over samples of tr_R N / d_R approaches
        // 1_B/d_B within a loose tolerance.
        let mut acc = CMat::zeros(2, 2);
        let samples = 1000;
        for s in 0..samples {
            let n = random_channel(1000 + s, 2, 2).unwrap();
            acc += partial_trace_mat(n.mat(), 2, 2, Subsystem::B).scale(0.5);
        }
        acc /= C64::new(samples as f64, 0.0);
        assert!((acc - CMat::identity(2, 2).scale(0.5)).norm() < 0.1);
    }
}
