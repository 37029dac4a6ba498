//! Matrix functions, partial traces, and channel application.

use super::{CMat, C64, ChoiMatrix, DensityOperator, HermitianOperator, InputState, QcoreError};

/// Which tensor factor of `B ⊗ R` to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    B,
    R,
}

/// Scalar function applied to the spectrum of a Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatFn {
    Exp,
    /// `ln` on eigenvalues above the support tolerance, 0 on the kernel.
    LogOnSupport,
    Sqrt,
    /// `λ^{-1/2}` above the support tolerance, 0 on the kernel.
    InvSqrtOnSupport,
}

/// Kronecker product with the left factor as the slow index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Applies a scalar function to the spectrum, with kernel handling for the
/// `-on-support` variants: eigenvalues in `(-support_tol, support_tol)` are
/// treated as exact zeros and mapped to 0.
pub fn mat_fn_hermitian(
    h: &HermitianOperator,
    f: MatFn,
    support_tol: f64,
) -> Result<HermitianOperator, QcoreError> {
    let (vals, vecs) = h.eigh();
    let needs_psd = matches!(f, MatFn::LogOnSupport | MatFn::Sqrt | MatFn::InvSqrtOnSupport);
    if needs_psd && vals[0] < -support_tol {
        return Err(QcoreError::NegativeSpectrum { min_eig: vals[0], tol: support_tol });
    }
    let mapped: Vec<f64> = vals
        .iter()
        .map(|&lam| match f {
            MatFn::Exp => lam.exp(),
            MatFn::LogOnSupport => {
                if lam <= support_tol {
                    0.0
                } else {
                    lam.ln()
                }
            }
            MatFn::Sqrt => lam.max(0.0).sqrt(),
            MatFn::InvSqrtOnSupport => {
                if lam <= support_tol {
                    0.0
                } else {
                    1.0 / lam.sqrt()
                }
            }
        })
        .collect();
    Ok(HermitianOperator::hermitize(from_eigh(&mapped, &vecs)))
}

/// `Re tr[a b]`, the Hilbert-Schmidt pairing (real for Hermitian pairs).
pub(crate) fn tr_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Rebuilds `Σ_k f_k |v_k><v_k|` from real values and eigenvector columns.
pub(crate) fn from_eigh(vals: &[f64], vecs: &CMat) -> CMat {
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= C64::new(v, 0.0);
    }
    scaled * vecs.adjoint()
}

/// Partial trace on a raw matrix over `B ⊗ R`.
pub fn partial_trace_mat(x: &CMat, dim_b: usize, dim_r: usize, keep: Subsystem) -> CMat {
    match keep {
        Subsystem::R => {
            let mut out = CMat::zeros(dim_r, dim_r);
            for b in 0..dim_b {
                for r in 0..dim_r {
                    for rp in 0..dim_r {
                        out[(r, rp)] += x[(b * dim_r + r, b * dim_r + rp)];
                    }
                }
            }
            out
        }
        Subsystem::B => {
            let mut out = CMat::zeros(dim_b, dim_b);
            for b in 0..dim_b {
                for bp in 0..dim_b {
                    for r in 0..dim_r {
                        out[(b, bp)] += x[(b * dim_r + r, bp * dim_r + r)];
                    }
                }
            }
            out
        }
    }
}

/// Partial trace of a Hermitian operator on `B ⊗ R` with the given factor
/// dimensions, keeping the named subsystem.
pub fn partial_trace(
    x: &HermitianOperator,
    dim_b: usize,
    dim_r: usize,
    keep: Subsystem,
) -> Result<HermitianOperator, QcoreError> {
    if dim_b * dim_r != x.dim() {
        return Err(QcoreError::DimMismatch {
            context: format!("operator dim {} != {} * {}", x.dim(), dim_b, dim_r),
        });
    }
    Ok(HermitianOperator::hermitize(partial_trace_mat(x.mat(), dim_b, dim_r, keep)))
}

/// Applies the channel to a state on `A`, or on `A ⊗ R'` through an
/// identity wire on `R'` (detected from the input dimension).
///
/// Contraction: `out_{(b,e),(b',e')} = Σ_{a,a'} N_{(b,a),(b',a')} ρ_{(a,e),(a',e')}`.
pub fn apply_channel(n: &ChoiMatrix, rho: &DensityOperator) -> Result<DensityOperator, QcoreError> {
    let da = n.dim_r();
    let din = rho.dim();
    if !din.is_multiple_of(da) {
        return Err(QcoreError::DimMismatch {
            context: format!("input dim {din} not a multiple of channel input dim {da}"),
        });
    }
    let de = din / da;
    let db = n.dim_b();
    let nm = n.mat();
    let rm = rho.mat();
    let mut out = CMat::zeros(db * de, db * de);
    for b in 0..db {
        for bp in 0..db {
            for a in 0..da {
                for ap in 0..da {
                    let nv = nm[(b * da + a, bp * da + ap)];
                    if nv == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for e in 0..de {
                        for ep in 0..de {
                            out[(b * de + e, bp * de + ep)] += nv * rm[(a * de + e, ap * de + ep)];
                        }
                    }
                }
            }
        }
    }
    DensityOperator::new(HermitianOperator::hermitize(out))
}

/// Adjoint (Heisenberg picture) action on an output-side observable:
/// `N†(Y_B) = [tr_B(N_BR (Y_B ⊗ 1_R))]^t`, an operator on `A`.
pub fn apply_channel_adjoint(n: &ChoiMatrix, y_b: &HermitianOperator) -> Result<HermitianOperator, QcoreError> {
    let db = n.dim_b();
    let dr = n.dim_r();
    if y_b.dim() != db {
        return Err(QcoreError::DimMismatch {
            context: format!("observable dim {} != output dim {}", y_b.dim(), db),
        });
    }
    let prod = n.mat() * kron(y_b.mat(), &CMat::identity(dr, dr));
    let on_r = partial_trace_mat(&prod, db, dr, Subsystem::R);
    Ok(HermitianOperator::hermitize(on_r.transpose()))
}

/// Joint output `N(φ_AR) = (1_B ⊗ φ_R^{1/2}) N_BR (1_B ⊗ φ_R^{1/2})` on
/// `B ⊗ R`, trace one. This is the workhorse object of every entropy
/// functional.
pub fn channel_output_joint(n: &ChoiMatrix, phi: &InputState) -> CMat {
    let dr = n.dim_r();
    let db = n.dim_b();
    debug_assert_eq!(phi.dim(), dr);
    let (vals, vecs) = phi.phi_r().eigh();
    let mapped: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sqrt_phi = from_eigh(&mapped, &vecs);
    let s = kron(&CMat::identity(db, db), &sqrt_phi);
    let out = &s * n.mat() * &s;
    let adj = out.adjoint();
    (out + adj).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::CVec;

    fn herm(entries: &[[f64; 2]], d: usize) -> HermitianOperator {
        let data: Vec<C64> = entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        HermitianOperator::new(CMat::from_row_slice(d, d, &data)).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = HermitianOperator::zeros(2);
        let e = mat_fn_hermitian(&z, MatFn::Exp, 1e-9).unwrap();
        assert!((e.mat() - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn log_on_support_kernel_convention() {
        let h = HermitianOperator::from_real_diag(&[2.0, 0.0]);
        let l = mat_fn_hermitian(&h, MatFn::LogOnSupport, 1e-9).unwrap();
        let expect = HermitianOperator::from_real_diag(&[2.0_f64.ln(), 0.0]);
        assert!(l.frobenius_distance(&expect) < 1e-12);
    }

    #[test]
    fn exp_composes_to_identity() {
        let h = herm(&[[0.3, 0.0], [0.1, -0.4], [0.1, 0.4], [-0.7, 0.0]], 2);
        let neg = HermitianOperator::new(h.mat().scale(-1.0)).unwrap();
        let a = mat_fn_hermitian(&h, MatFn::Exp, 1e-9).unwrap();
        let b = mat_fn_hermitian(&neg, MatFn::Exp, 1e-9).unwrap();
        assert!((a.mat() * b.mat() - CMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn log_rejects_negative_spectrum() {
        let h = HermitianOperator::from_real_diag(&[1.0, -0.5]);
        assert!(mat_fn_hermitian(&h, MatFn::LogOnSupport, 1e-9).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let sigma = herm(&[[0.6, 0.0], [0.2, 0.1], [0.2, -0.1], [0.4, 0.0]], 2);
        let tau = herm(&[[0.3, 0.0], [0.0, 0.2], [0.0, -0.2], [0.7, 0.0]], 2);
        let joint = kron(sigma.mat(), tau.mat());
        let on_r = partial_trace_mat(&joint, 2, 2, Subsystem::R);
        assert!((on_r - tau.mat().scale(sigma.trace())).norm() < 1e-12);
        let on_b = partial_trace_mat(&joint, 2, 2, Subsystem::B);
        assert!((on_b - sigma.mat().scale(tau.trace())).norm() < 1e-12);
    }

    #[test]
    fn identity_channel_reproduces_input() {
        let n = ChoiMatrix::identity_channel(2);
        let rho = DensityOperator::from_mat(
            herm(&[[0.7, 0.0], [0.1, 0.2], [0.1, -0.2], [0.3, 0.0]], 2).into_mat(),
        )
        .unwrap();
        let out = apply_channel(&n, &rho).unwrap();
        assert!((out.mat() - rho.mat()).norm() < 1e-12);
    }

    #[test]
    fn depolarizing_family_on_basis_state() {
        // Completely depolarizing: anything -> I/2.
        let n = ChoiMatrix::completely_depolarizing(2, 2);
        let rho = DensityOperator::basis_state(2, 0);
        let out = apply_channel(&n, &rho).unwrap();
        assert!((out.mat() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-12);
        // p-depolarizing on |0><0| -> diag(1 - 2p/3, 2p/3): frozen for p = 0.2.
        let p = 0.2;
        let id = ChoiMatrix::identity_channel(2);
        let full = ChoiMatrix::completely_depolarizing(2, 2);
        // (1-4p/3) id + (4p/3) full is exactly the p-depolarizing channel.
        let w = 4.0 * p / 3.0;
        let mix = id.mat().scale(1.0 - w) + full.mat().scale(w);
        let depol = ChoiMatrix::from_mat(2, 2, mix).unwrap();
        let out = apply_channel(&depol, &rho).unwrap();
        let expect = HermitianOperator::from_real_diag(&[0.8666666666666667, 0.13333333333333333]);
        assert!((out.mat() - expect.mat()).norm() < 1e-12);
    }

    #[test]
    fn identity_wire_extends_channel() {
        // (N ⊗ id) on a maximally entangled pure state reproduces the Choi
        // matrix itself (normalized).
        let p = 0.3;
        let w = 4.0 * p / 3.0;
        let id = ChoiMatrix::identity_channel(2);
        let full = ChoiMatrix::completely_depolarizing(2, 2);
        let depol = ChoiMatrix::from_mat(2, 2, id.mat().scale(1.0 - w) + full.mat().scale(w)).unwrap();
        let mut v = CVec::zeros(4);
        v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ent = DensityOperator::pure(&v).unwrap();
        let out = apply_channel(&depol, &ent).unwrap();
        assert!((out.mat() - depol.mat().scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_matches_trace_pairing() {
        // tr[Y N(ρ)] = tr[N†(Y) ρ] for random-ish fixed instances.
        let p = 0.2;
        let w = 4.0 * p / 3.0;
        let id = ChoiMatrix::identity_channel(2);
        let full = ChoiMatrix::completely_depolarizing(2, 2);
        let n = ChoiMatrix::from_mat(2, 2, id.mat().scale(1.0 - w) + full.mat().scale(w)).unwrap();
        let y = herm(&[[0.4, 0.0], [0.3, -0.2], [0.3, 0.2], [-0.9, 0.0]], 2);
        let rho = DensityOperator::from_mat(
            herm(&[[0.55, 0.0], [0.1, 0.05], [0.1, -0.05], [0.45, 0.0]], 2).into_mat(),
        )
        .unwrap();
        let lhs = (y.mat() * apply_channel(&n, &rho).unwrap().mat()).trace().re;
        let adj = apply_channel_adjoint(&n, &y).unwrap();
        let rhs = (adj.mat() * rho.mat()).trace().re;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn joint_output_trace_one_and_matches_wire() {
        let n = ChoiMatrix::identity_channel(2);
        let phi = InputState::from_phi_r(
            DensityOperator::from_mat(HermitianOperator::from_real_diag(&[0.7, 0.3]).into_mat())
                .unwrap(),
        );
        let joint = channel_output_joint(&n, &phi);
        assert!((joint.trace().re - 1.0).abs() < 1e-12);
        // Same thing through the identity-wire path on the purification.
        let v = phi.purification();
        let rho_ar = DensityOperator::from_mat(v * v.adjoint()).unwrap();
        let via_wire = apply_channel(&n, &rho_ar).unwrap();
        assert!((joint - via_wire.mat()).norm() < 1e-10);
    }
}
