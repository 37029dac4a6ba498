//! Discrete Weyl (shift/clock) operators and the Bell basis they generate.

use super::{CMat, CVec, C64};

/// Discrete Weyl operator `W^{z,x} = Z^z X^x` on dimension `d`, with
/// `X|k> = |k+1 mod d>` and `Z|k> = ω^k |k>`, `ω = exp(2πi/d)`.
pub fn weyl_operator(d: usize, z: usize, x: usize) -> CMat {
    let mut w = CMat::zeros(d, d);
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    for k in 0..d {
        let row = (k + x) % d;
        let phase = omega * (z as f64) * (row as f64);
        w[(row, k)] = C64::new(phase.cos(), phase.sin());
    }
    w
}

/// Normalized Bell vector `|Φ_{z,x}> = (W^{z,x} ⊗ 1)|Φ>/√d` on `B ⊗ R`
/// (`B` slow index), where `|Φ> = Σ_k |kk>`.
pub fn bell_vector(d: usize, z: usize, x: usize) -> CVec {
    let w = weyl_operator(d, z, x);
    let mut v = CVec::zeros(d * d);
    let scale = 1.0 / (d as f64).sqrt();
    for b in 0..d {
        for r in 0..d {
            v[b * d + r] = w[(b, r)] * C64::new(scale, 0.0);
        }
    }
    v
}

/// Pinching onto the Bell basis: `Σ_{z,x} |Φ_{z,x}><Φ_{z,x}| A |Φ_{z,x}><Φ_{z,x}|`.
pub fn bell_pinching(a: &CMat, d: usize) -> CMat {
    let mut out = CMat::zeros(d * d, d * d);
    for z in 0..d {
        for x in 0..d {
            let v = bell_vector(d, z, x);
            let amp = (v.adjoint() * a * &v)[(0, 0)];
            for i in 0..d * d {
                for j in 0..d * d {
                    out[(i, j)] += amp * v[i] * v[j].conj();
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weyl_operators_are_unitary_and_orthogonal() {
        let d = 3;
        for z in 0..d {
            for x in 0..d {
                let w = weyl_operator(d, z, x);
                assert!((w.adjoint() * &w - CMat::identity(d, d)).norm() < 1e-12);
            }
        }
        // tr[W^{z,x}† W^{z',x'}] = d δ.
        let a = weyl_operator(d, 1, 2);
        let b = weyl_operator(d, 2, 2);
        assert!((a.adjoint() * &a).trace().norm() - 3.0 < 1e-12);
        assert!((a.adjoint() * &b).trace().norm() < 1e-12);
    }

    #[test]
    fn bell_vectors_form_orthonormal_basis() {
        let d = 2;
        let vs: Vec<_> = (0..d)
            .flat_map(|z| (0..d).map(move |x| bell_vector(d, z, x)))
            .collect();
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let ip = (a.adjoint() * b)[(0, 0)].norm();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn pinching_fixes_bell_diagonal_operators() {
        let d = 2;
        let v = bell_vector(d, 1, 0);
        let proj = &v * v.adjoint();
        let pinched = bell_pinching(&proj, d);
        assert!((&pinched - &proj).norm() < 1e-12);
        // And averages away a computational-basis projector's coherences.
        let mut e00 = CMat::zeros(4, 4);
        e00[(0, 0)] = C64::new(1.0, 0.0);
        let p = bell_pinching(&e00, d);
        assert!((&p - &e00).norm() > 0.1);
    }
}
