//! Independent certificate verification.
//!
//! [`kkt_verify`] rebuilds the effective Hamiltonian from the multipliers
//! alone, reconstructs the channel through the support-restricted
//! exponential form, and reports every optimality residual. It shares no
//! intermediate state with the solver, so a bookkeeping bug on either side
//! shows up as a residual instead of cancelling out.

use crate::qcore::{
    kron, partial_trace_mat, C64, CMat, HermitianOperator, Subsystem, SUPPORT_TOL,
};

use super::inner::tr_prod;
use super::{KktReport, MaxEntProblem, ThermalSolution};

/// Floor for logarithms of reference-channel eigenvalues.
const LOG_FLOOR: f64 = -700.0;

/// Recomputes all optimality residuals of `sol` for `problem`.
///
/// The report is purely diagnostic: it never fails, it just measures. The
/// solution is taken at face value (channel, multipliers, input) and tested
/// against the first-order conditions of the problem.
pub fn kkt_verify(sol: &ThermalSolution, problem: &MaxEntProblem) -> KktReport {
    let db = problem.dim_b;
    let dr = problem.dim_a;
    let dim = db * dr;
    assert_eq!(sol.choi.mat().nrows(), dim, "solution/problem dimension mismatch");
    assert_eq!(sol.mu.len(), problem.equality.len(), "multiplier count mismatch");
    assert_eq!(sol.nu.len(), problem.inequality.len(), "multiplier count mismatch");
    assert_eq!(sol.w.len(), problem.quadratic.len(), "multiplier count mismatch");

    let n = sol.choi.mat();
    let eye_b = CMat::identity(db, db);
    let (pv, pu) = sol.phi.phi_r().op().eigh();
    let support: Vec<bool> = pv.iter().map(|&v| v > SUPPORT_TOL).collect();

    // Effective Hamiltonian from the multipliers alone.
    let mut g = CMat::zeros(dim, dim);
    for (c, &mu) in problem.equality.iter().zip(&sol.mu) {
        g += c.op.mat().scale(mu);
    }
    for (d, &nu) in problem.inequality.iter().zip(&sol.nu) {
        g += d.op.mat().scale(nu);
    }
    for (e, &w) in problem.quadratic.iter().zip(&sol.w) {
        g += e.op.mat().scale(w);
    }
    g -= kron(&eye_b, sol.f_r.mat());
    g -= reference_log_term(problem, &pv, &pu, db);
    g -= sol.s_br.mat();
    let g_rec = HermitianOperator::hermitize(g);

    // Channel reconstruction restricted to the input support: in the input
    // eigenbasis, sandwich −G with φ^{-1/2}, exponentiate the support block,
    // sandwich again, and rotate back.
    let w_rot = kron(&eye_b, &pu);
    let g_rot = w_rot.adjoint() * g_rec.mat() * &w_rot;
    let kept: Vec<usize> = (0..dim).filter(|i| support[i % dr]).collect();
    let si: Vec<f64> = (0..dim)
        .map(|i| if support[i % dr] { 1.0 / pv[i % dr].sqrt() } else { 0.0 })
        .collect();
    let ns = kept.len();
    let mut small = CMat::zeros(ns, ns);
    for (a, &i) in kept.iter().enumerate() {
        for (b, &j) in kept.iter().enumerate() {
            small[(a, b)] = -g_rot[(i, j)] * C64::new(si[i] * si[j], 0.0);
        }
    }
    let (se, su) = HermitianOperator::hermitize(small).eigh();
    let sexp: Vec<f64> = se.iter().map(|&v| v.exp()).collect();
    let small_exp = crate::qcore::from_eigh(&sexp, &su);
    let mut exppart_rot = CMat::zeros(dim, dim);
    for (a, &i) in kept.iter().enumerate() {
        for (b, &j) in kept.iter().enumerate() {
            exppart_rot[(i, j)] =
                small_exp[(a, b)] * C64::new(si[i] * si[j], 0.0);
        }
    }
    let exppart = &w_rot * exppart_rot * w_rot.adjoint();

    // Exponential-form residual: reconstruction, Hamiltonian agreement, and
    // the support conditions on the off-support remainder Y.
    let y = sol.y_br.mat();
    let recon = (n - &exppart - y).norm();
    let g_agree = (g_rec.mat() - sol.g_br.mat()).norm();
    let y_rot = w_rot.adjoint() * y * &w_rot;
    let mut y_on_support = 0.0f64;
    for &i in &kept {
        for &j in &kept {
            y_on_support += y_rot[(i, j)].norm_sqr();
        }
    }
    let y_on_support = y_on_support.sqrt();
    let mut kernel_proj = CMat::zeros(dr, dr);
    for r in 0..dr {
        if !support[r] {
            let col = pu.column(r);
            for i in 0..dr {
                for j in 0..dr {
                    kernel_proj[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
    }
    let y_marginal = (partial_trace_mat(y, db, dr, Subsystem::R) - kernel_proj).norm();
    let exp_form_residual = recon.max(g_agree).max(y_on_support).max(y_marginal);

    let tp_residual = (partial_trace_mat(n, db, dr, Subsystem::R) - CMat::identity(dr, dr)).norm();

    let mut constraint_residuals = Vec::new();
    for c in &problem.equality {
        constraint_residuals.push((tr_prod(c.op.mat(), n) - c.target).abs());
    }
    for d in &problem.inequality {
        constraint_residuals.push((tr_prod(d.op.mat(), n) - d.target).max(0.0));
    }

    let slackness_residuals: Vec<f64> = problem
        .inequality
        .iter()
        .zip(&sol.nu)
        .map(|(d, &nu)| (nu * (d.target - tr_prod(d.op.mat(), n))).abs())
        .collect();

    let w_consistency_residuals: Vec<f64> = problem
        .quadratic
        .iter()
        .zip(&sol.w)
        .map(|(t, &w)| (w - 2.0 * t.weight * (tr_prod(t.op.mat(), n) - t.target)).abs())
        .collect();

    // Closed-form dual value of the (quadratic-free part of the) objective.
    let tr_f = sol.f_r.trace();
    let mut closed = tr_f;
    for (c, &mu) in problem.equality.iter().zip(&sol.mu) {
        closed -= mu * c.target;
    }
    for (d, &nu) in problem.inequality.iter().zip(&sol.nu) {
        closed -= nu * d.target;
    }
    for (t, &w) in problem.quadratic.iter().zip(&sol.w) {
        closed -= w * t.target;
        if t.weight > 0.0 {
            closed -= w * w / (2.0 * t.weight);
        }
    }
    let expected = if problem.reference.is_some() { closed } else { -closed };
    let entropy_identity_residual = (sol.achieved - expected).abs();

    KktReport {
        exp_form_residual,
        tp_residual,
        constraint_residuals,
        g_min_eigenvalue: g_rec.min_eigenvalue(),
        slackness_residuals,
        w_consistency_residuals,
        entropy_identity_residual,
    }
}

/// `φ^{1/2} log(φ^{1/2} M φ^{1/2}) φ^{1/2}` on the input support. Without a
/// reference this reduces to `1_B ⊗ φ_R log φ_R`.
fn reference_log_term(
    problem: &MaxEntProblem,
    pv: &nalgebra::DVector<f64>,
    pu: &CMat,
    db: usize,
) -> CMat {
    let eye_b = CMat::identity(db, db);
    match &problem.reference {
        None => {
            let xlogx: Vec<f64> = pv
                .iter()
                .map(|&v| if v > SUPPORT_TOL { v * v.ln() } else { 0.0 })
                .collect();
            kron(&eye_b, &crate::qcore::from_eigh(&xlogx, pu))
        }
        Some(m) => {
            let sq: Vec<f64> = pv.iter().map(|&v| v.max(0.0).sqrt()).collect();
            let half = crate::qcore::from_eigh(&sq, pu);
            let s_half = kron(&eye_b, &half);
            let mt = HermitianOperator::hermitize(&s_half * m.mat() * &s_half);
            let (mv, mu) = mt.eigh();
            let lv: Vec<f64> = mv
                .iter()
                .map(|&v| v.max(1e-300).ln().max(LOG_FLOOR))
                .collect();
            let logm = crate::qcore::from_eigh(&lv, &mu);
            let prod = &s_half * logm * &s_half;
            (&prod + prod.adjoint()).scale(0.5)
        }
    }
}
