//! Fixed-input dual solver.
//!
//! For a fixed full-rank input φ the problem is convex in the Choi matrix
//! and its Lagrange dual is a smooth concave function of the multipliers
//! θ = (μ, ν, w, f), where f collects the coordinates of F_R over an
//! orthonormal Hermitian basis. Writing `Ã = φ^{-1/2} A φ^{-1/2}` (with
//! φ ≡ 1_B ⊗ φ_R) and `M̃ = φ^{1/2} M φ^{1/2}`, the dual is
//!
//! ```text
//! g(θ) = −tr exp X(θ) + tr F_R + 1 − μ·q − ν·r − w·s − Σ_m w_m²/(4 η_m),
//! X(θ) = log M̃ − Σ_j μ_j C̃^j − Σ_ℓ ν_ℓ D̃^ℓ − Σ_m w_m Ẽ^m + 1_B ⊗ F̃_R,
//! ```
//!
//! maximized by a damped Newton method. The gradient components are the
//! physical constraint residuals of `N(θ) = φ^{-1/2} exp(X) φ^{-1/2}`, which
//! is what the stopping rule tests; the Hessian is the Fréchet derivative
//! of `tr exp` in the sandwiched coordinates. Internally every coordinate
//! is rescaled by the Frobenius norm of its direction matrix, which keeps
//! the Newton system conditioned even for strongly regularized inputs.

use nalgebra::{DMatrix, DVector};

use crate::qcore::{
    kron, partial_trace_mat, C64, CMat, HermitianOperator, InputState, Subsystem,
};

use super::{MaxEntError, MaxEntProblem};

/// Overflow guard: reject dual points whose largest exponent exceeds this.
const MAX_EXPONENT: f64 = 600.0;
/// Floor for logarithms of reference-channel eigenvalues.
const LOG_FLOOR: f64 = -700.0;
/// Iterations without a 1% residual improvement before the Newton loop is
/// declared stagnant. At a near-boundary input the physical gradient has an
/// f64 rounding floor well above any fixed tolerance, so the loop would
/// otherwise spin on noise until the iteration cap.
const STAGNATION_WINDOW: usize = 10;
/// Safety factor on the estimated rounding floor when a stagnant residual
/// is judged as converged-at-numerical-precision.
const FLOOR_SAFETY: f64 = 4.0;

/// Orthonormal (Frobenius) Hermitian basis on dimension `d`: first the `d`
/// diagonal projectors, then `(E_kl + E_lk)/√2` and `i(E_kl − E_lk)/√2`
/// for `k < l`.
pub(super) fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = C64::new(1.0, 0.0);
        out.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        for l in (k + 1)..d {
            let mut m = CMat::zeros(d, d);
            m[(k, l)] = C64::new(s, 0.0);
            m[(l, k)] = C64::new(s, 0.0);
            out.push(m);
            let mut m = CMat::zeros(d, d);
            m[(k, l)] = C64::new(0.0, -s);
            m[(l, k)] = C64::new(0.0, s);
            out.push(m);
        }
    }
    out
}

/// `Re tr[a b]` (real for Hermitian pairs).
pub(super) fn tr_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn hermitize_mat(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// φ-dependent precomputation shared by every dual evaluation.
pub(super) struct Prepared {
    pub db: usize,
    pub dr: usize,
    /// 1_B ⊗ φ_R^{-1/2}.
    s_ihalf: CMat,
    /// log(φ^{1/2} M φ^{1/2}) with floored spectrum (the pure-entropy case
    /// uses M = 1, giving 1_B ⊗ log φ_R).
    log_mref: CMat,
    /// φ^{1/2} log(φ^{1/2} M φ^{1/2}) φ^{1/2}, reused when assembling G.
    /// Sandwiched equality / inequality / quadratic constraint operators.
    c_tilde: Vec<CMat>,
    d_tilde: Vec<CMat>,
    e_tilde: Vec<CMat>,
    /// Raw operators (for physical gradients).
    c_raw: Vec<CMat>,
    d_raw: Vec<CMat>,
    e_raw: Vec<CMat>,
    q: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    eta: Vec<f64>,
    /// Indices of the original quadratic terms with positive weight.
    pub quad_idx: Vec<usize>,
    /// Caller-side quadratic term count (zero-weight terms included).
    n_quad_orig: usize,
    /// Orthonormal Hermitian basis on R and its traces.
    basis: Vec<CMat>,
    basis_tr: Vec<f64>,
    /// Full-dimension dual directions 1_B ⊗ (φ_R^{-1/2} B_α φ_R^{-1/2}).
    f_dirs: Vec<CMat>,
    /// Frobenius scale of every coordinate direction.
    sigma: Vec<f64>,
    /// Scale of the f64 rounding floor of the physical gradient.
    noise_scale: f64,
    /// φ_R as a dense matrix (for the default-start coordinates of F_R).
    phi_r_mat: CMat,
    pub nj: usize,
    pub nl: usize,
    pub nm: usize,
    pub nf: usize,
}

impl Prepared {
    pub fn new(problem: &MaxEntProblem, phi: &InputState) -> Self {
        let db = problem.dim_b;
        let dr = problem.dim_a;
        let eye_b = CMat::identity(db, db);
        let (pv, pu) = phi.phi_r().op().eigh();
        let floor = 1e-300;
        let sq: Vec<f64> = pv.iter().map(|&v| v.max(floor).sqrt()).collect();
        let si: Vec<f64> = sq.iter().map(|&v| 1.0 / v).collect();
        let half_r = crate::qcore::from_eigh(&sq, &pu);
        let ihalf_r = crate::qcore::from_eigh(&si, &pu);
        let s_half = kron(&eye_b, &half_r);
        let s_ihalf = kron(&eye_b, &ihalf_r);

        let log_mref = match &problem.reference {
            None => {
                let lv: Vec<f64> = pv.iter().map(|&v| v.max(floor).ln().max(LOG_FLOOR)).collect();
                kron(&eye_b, &crate::qcore::from_eigh(&lv, &pu))
            }
            Some(m) => {
                let mt = HermitianOperator::hermitize(&s_half * m.mat() * &s_half);
                let (mv, mu) = mt.eigh();
                let lv: Vec<f64> = mv.iter().map(|&v| v.max(floor).ln().max(LOG_FLOOR)).collect();
                crate::qcore::from_eigh(&lv, &mu)
            }
        };
        let n_quad_orig = problem.quadratic.len();

        let sandwich = |op: &HermitianOperator| hermitize_mat(&(&s_ihalf * op.mat() * &s_ihalf));
        let c_tilde: Vec<CMat> = problem.equality.iter().map(|c| sandwich(&c.op)).collect();
        let d_tilde: Vec<CMat> = problem.inequality.iter().map(|c| sandwich(&c.op)).collect();
        let quad_idx: Vec<usize> = problem
            .quadratic
            .iter()
            .enumerate()
            .filter(|(_, t)| t.weight > 0.0)
            .map(|(m, _)| m)
            .collect();
        let e_tilde: Vec<CMat> = quad_idx
            .iter()
            .map(|&m| sandwich(&problem.quadratic[m].op))
            .collect();
        let c_raw: Vec<CMat> = problem.equality.iter().map(|c| c.op.mat().clone()).collect();
        let d_raw: Vec<CMat> = problem.inequality.iter().map(|c| c.op.mat().clone()).collect();
        let e_raw: Vec<CMat> = quad_idx
            .iter()
            .map(|&m| problem.quadratic[m].op.mat().clone())
            .collect();

        let basis = hermitian_basis(dr);
        let basis_tr: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
        let f_dirs: Vec<CMat> = basis
            .iter()
            .map(|b| kron(&eye_b, &hermitize_mat(&(&ihalf_r * b * &ihalf_r))))
            .collect();

        let mut sigma = Vec::new();
        for m in c_tilde.iter().chain(&d_tilde).chain(&e_tilde).chain(&f_dirs) {
            sigma.push(m.norm().max(1e-10));
        }

        // Rounding-floor scale of the physical gradient: every entry comes
        // from tr[C · S^{-1/2} e^X S^{-1/2}], so its f64 error grows with
        // the squared inverse-sqrt conditioning and the constraint norms.
        let smax = si.iter().fold(0.0f64, |a, &b| a.max(b));
        let raw_norm_max = c_raw
            .iter()
            .chain(&d_raw)
            .chain(&e_raw)
            .map(|m| m.norm())
            .fold(1.0f64, f64::max);
        let noise_scale = smax * smax * raw_norm_max;

        Self {
            db,
            dr,
            s_ihalf,
            n_quad_orig,
            log_mref,
            q: problem.equality.iter().map(|c| c.target).collect(),
            r: problem.inequality.iter().map(|c| c.target).collect(),
            s: quad_idx.iter().map(|&m| problem.quadratic[m].target).collect(),
            eta: quad_idx.iter().map(|&m| problem.quadratic[m].weight).collect(),
            nj: c_tilde.len(),
            nl: d_tilde.len(),
            nm: e_tilde.len(),
            nf: dr * dr,
            c_tilde,
            d_tilde,
            e_tilde,
            c_raw,
            d_raw,
            e_raw,
            quad_idx,
            basis,
            basis_tr,
            f_dirs,
            sigma,
            noise_scale,
            phi_r_mat: phi.phi_r().mat().clone(),
        }
    }

    pub fn ncoord(&self) -> usize {
        self.nj + self.nl + self.nm + self.nf
    }

    fn o_nu(&self) -> usize {
        self.nj
    }
    fn o_w(&self) -> usize {
        self.nj + self.nl
    }
    fn o_f(&self) -> usize {
        self.nj + self.nl + self.nm
    }

    /// Default start: exactly the maximally mixed output channel when no
    /// reference is set (F_R = −ln(d_B)·φ_R), the reference itself otherwise.
    pub fn cold_start(&self, has_reference: bool) -> Vec<f64> {
        let mut theta = vec![0.0; self.ncoord()];
        if !has_reference {
            let scale = -(self.db as f64).ln();
            for (a, b) in self.basis.iter().enumerate() {
                theta[self.o_f() + a] = scale * tr_prod(b, &self.phi_r_mat);
            }
        }
        theta
    }

    /// Direction matrix of coordinate `a` (the derivative of X along it).
    fn direction(&self, a: usize) -> CMat {
        if a < self.o_nu() {
            -&self.c_tilde[a]
        } else if a < self.o_w() {
            -&self.d_tilde[a - self.o_nu()]
        } else if a < self.o_f() {
            -&self.e_tilde[a - self.o_w()]
        } else {
            self.f_dirs[a - self.o_f()].clone()
        }
    }

    fn build_x(&self, theta: &[f64]) -> CMat {
        let mut x = self.log_mref.clone();
        for (j, c) in self.c_tilde.iter().enumerate() {
            x -= c.scale(theta[j]);
        }
        for (l, d) in self.d_tilde.iter().enumerate() {
            x -= d.scale(theta[self.o_nu() + l]);
        }
        for (m, e) in self.e_tilde.iter().enumerate() {
            x -= e.scale(theta[self.o_w() + m]);
        }
        for (a, v) in self.f_dirs.iter().enumerate() {
            x += v.scale(theta[self.o_f() + a]);
        }
        x
    }

    /// Scalar bookkeeping part of the dual: tr F + 1 − μ·q − ν·r − w·s − Σ w²/4η.
    fn dual_affine(&self, theta: &[f64]) -> f64 {
        let mut acc = 1.0;
        for a in 0..self.nf {
            acc += theta[self.o_f() + a] * self.basis_tr[a];
        }
        for j in 0..self.nj {
            acc -= theta[j] * self.q[j];
        }
        for l in 0..self.nl {
            acc -= theta[self.o_nu() + l] * self.r[l];
        }
        for m in 0..self.nm {
            let w = theta[self.o_w() + m];
            acc -= w * self.s[m] + w * w / (4.0 * self.eta[m]);
        }
        acc
    }

    /// Dual value only (used by the line search).
    fn value(&self, theta: &[f64]) -> Option<f64> {
        let x = HermitianOperator::hermitize(self.build_x(theta));
        let (xe, _) = x.eigh();
        if xe.iter().any(|v| !v.is_finite()) || xe.max() > MAX_EXPONENT {
            return None;
        }
        let trexp: f64 = xe.iter().map(|&v| v.exp()).sum();
        Some(-trexp + self.dual_affine(theta))
    }

    /// Full evaluation: dual value, channel, physical gradient, and the
    /// eigensystem of X (reused by the Hessian).
    fn eval(&self, theta: &[f64]) -> Option<EvalPoint> {
        let x = HermitianOperator::hermitize(self.build_x(theta));
        let (xe, xu) = x.eigh();
        if xe.iter().any(|v| !v.is_finite()) || xe.max() > MAX_EXPONENT {
            return None;
        }
        let exps: Vec<f64> = xe.iter().map(|&v| v.exp()).collect();
        let expx = crate::qcore::from_eigh(&exps, &xu);
        let g = -exps.iter().sum::<f64>() + self.dual_affine(theta);
        let n = hermitize_mat(&(&self.s_ihalf * &expx * &self.s_ihalf));
        let q_r = partial_trace_mat(&n, self.db, self.dr, Subsystem::R);

        let mut grad = vec![0.0; self.ncoord()];
        for j in 0..self.nj {
            grad[j] = tr_prod(&self.c_raw[j], &n) - self.q[j];
        }
        for l in 0..self.nl {
            grad[self.o_nu() + l] = tr_prod(&self.d_raw[l], &n) - self.r[l];
        }
        for m in 0..self.nm {
            let w = theta[self.o_w() + m];
            grad[self.o_w() + m] =
                tr_prod(&self.e_raw[m], &n) - self.s[m] - w / (2.0 * self.eta[m]);
        }
        for a in 0..self.nf {
            grad[self.o_f() + a] = self.basis_tr[a] - tr_prod(&self.basis[a], &q_r);
        }
        Some(EvalPoint {
            g,
            n,
            grad,
            xe: xe.iter().copied().collect(),
            xu,
        })
    }

    /// Largest optimality violation: gradient sup-norm with the inequality
    /// coordinates measured in complementary-slackness form.
    fn residual(&self, theta: &[f64], grad: &[f64]) -> f64 {
        let mut res = 0.0f64;
        for a in 0..self.ncoord() {
            let v = if a >= self.o_nu() && a < self.o_w() && theta[a] <= 0.0 {
                grad[a].max(0.0)
            } else {
                grad[a].abs()
            };
            res = res.max(v);
        }
        res
    }

    /// Negative dual Hessian (PSD), restricted to `free`, in scaled coords.
    fn neg_hessian_scaled(&self, ev: &EvalPoint, free: &[usize]) -> DMatrix<f64> {
        let dim = ev.xe.len();
        // Divided-difference kernel of exp at the spectrum of X.
        let mut kern = DMatrix::<f64>::zeros(dim, dim);
        for p in 0..dim {
            for qq in 0..dim {
                let mid = 0.5 * (ev.xe[p] + ev.xe[qq]);
                let del = 0.5 * (ev.xe[p] - ev.xe[qq]);
                kern[(p, qq)] = if del.abs() < 1e-7 {
                    mid.exp() * (1.0 + del * del / 6.0)
                } else {
                    mid.exp() * del.sinh() / del
                };
            }
        }
        let rotated: Vec<CMat> = free
            .iter()
            .map(|&a| ev.xu.adjoint() * self.direction(a) * &ev.xu)
            .collect();
        let nfree = free.len();
        let mut h = DMatrix::<f64>::zeros(nfree, nfree);
        for ia in 0..nfree {
            for ib in ia..nfree {
                let mut acc = 0.0;
                for p in 0..dim {
                    for qq in 0..dim {
                        acc += (rotated[ia][(p, qq)] * rotated[ib][(qq, p)]).re * kern[(p, qq)];
                    }
                }
                // −H is PSD for the concave dual; build it directly.
                let mut v = acc;
                let (a, b) = (free[ia], free[ib]);
                if ia == ib && a >= self.o_w() && a < self.o_f() {
                    v += 1.0 / (2.0 * self.eta[a - self.o_w()]);
                }
                let scale = 1.0 / (self.sigma[a] * self.sigma[b]);
                h[(ia, ib)] = v * scale;
                h[(ib, ia)] = v * scale;
            }
        }
        h
    }
}

struct EvalPoint {
    g: f64,
    n: CMat,
    grad: Vec<f64>,
    xe: Vec<f64>,
    xu: CMat,
}

/// Converged (or best-effort) fixed-input dual solution.
pub(super) struct InnerSolution {
    /// Trace-preserving Choi matrix (exactly polished).
    pub n: CMat,
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// Quadratic multipliers re-expanded to the original term count.
    pub w: Vec<f64>,
    pub f_r: HermitianOperator,
    /// Dual optimum g*(φ); the outer search maximizes this over φ.
    pub g_star: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes the dual at fixed φ. `warm` seeds θ from a nearby solve.
///
/// `converged` means the optimality residual reached `inner_tol`, or
/// stagnated within the rounding floor attainable for this input's
/// conditioning (which exceeds any fixed tolerance near the boundary).
pub(super) fn solve_dual(
    prep: &Prepared,
    has_reference: bool,
    warm: Option<&[f64]>,
    inner_tol: f64,
    max_iters: usize,
) -> Result<InnerSolution, MaxEntError> {
    let n_coord = prep.ncoord();
    let mut theta = match warm {
        Some(t) if t.len() == n_coord && prep.value(t).is_some() => t.to_vec(),
        _ => prep.cold_start(has_reference),
    };
    if prep.value(&theta).is_none() {
        theta = prep.cold_start(has_reference);
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut last: Option<EvalPoint> = None;
    let mut residual = f64::INFINITY;
    let mut best_residual = f64::INFINITY;
    let mut stagnant = 0usize;

    while iterations < max_iters {
        iterations += 1;
        let ev = match prep.eval(&theta) {
            Some(e) => e,
            None => {
                // A corrupt warm start is the only way to get here.
                theta = prep.cold_start(has_reference);
                continue;
            }
        };
        residual = prep.residual(&theta, &ev.grad);
        if residual <= inner_tol {
            converged = true;
            last = Some(ev);
            break;
        }
        if residual <= 0.99 * best_residual {
            best_residual = residual;
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= STAGNATION_WINDOW {
                let trexp: f64 = ev.xe.iter().map(|&v| v.exp()).sum();
                let floor = f64::EPSILON * prep.noise_scale * trexp.max(1.0);
                converged = residual <= inner_tol.max(FLOOR_SAFETY * floor);
                last = Some(ev);
                break;
            }
        }

        // Inequality multipliers pinned at zero with nonpositive gradient
        // stay frozen this iteration.
        let free: Vec<usize> = (0..n_coord)
            .filter(|&a| {
                !(a >= prep.nj && a < prep.nj + prep.nl && theta[a] <= 0.0 && ev.grad[a] <= 0.0)
            })
            .collect();
        let g_scaled: Vec<f64> = free.iter().map(|&a| ev.grad[a] / prep.sigma[a]).collect();
        let neg_h = prep.neg_hessian_scaled(&ev, &free);
        let diag_scale = (0..free.len())
            .map(|i| neg_h[(i, i)].abs())
            .fold(0.0f64, f64::max)
            .max(1.0);

        let mut stepped = false;
        let mut tau = 0.0f64;
        for _attempt in 0..9 {
            let mut reg = neg_h.clone();
            for i in 0..free.len() {
                reg[(i, i)] += tau;
            }
            let rhs = DVector::from_column_slice(&g_scaled);
            let dir_scaled = match reg.cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => {
                    tau = if tau == 0.0 { 1e-12 * diag_scale } else { tau * 100.0 };
                    continue;
                }
            };
            let slope: f64 = dir_scaled
                .iter()
                .zip(&g_scaled)
                .map(|(d, g)| d * g)
                .sum();
            if !slope.is_finite() || slope <= 0.0 {
                tau = if tau == 0.0 { 1e-12 * diag_scale } else { tau * 100.0 };
                continue;
            }
            let mut alpha = 1.0f64;
            for _ in 0..60 {
                let mut cand = theta.clone();
                for (i, &a) in free.iter().enumerate() {
                    cand[a] += alpha * dir_scaled[i] / prep.sigma[a];
                }
                for l in 0..prep.nl {
                    let a = prep.nj + l;
                    if cand[a] < 0.0 {
                        cand[a] = 0.0;
                    }
                }
                if let Some(gc) = prep.value(&cand) {
                    if gc >= ev.g + 1e-4 * alpha * slope {
                        theta = cand;
                        stepped = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if stepped {
                break;
            }
            tau = if tau == 0.0 { 1e-12 * diag_scale } else { tau * 100.0 };
        }
        last = Some(ev);
        if !stepped {
            break;
        }
    }

    // The loop may exit on the iteration cap without a final evaluation of
    // the last accepted point; refresh so the certificate matches θ.
    let ev = match last {
        Some(e) if converged => e,
        _ => prep
            .eval(&theta)
            .ok_or(MaxEntError::InvalidProblem {
                context: "dual evaluation diverged".into(),
            })?,
    };
    if !converged {
        residual = prep.residual(&theta, &ev.grad);
    }

    // Exact trace-preservation polish: N ← (1 ⊗ Q^{-1/2}) N (1 ⊗ Q^{-1/2}).
    let q_r = partial_trace_mat(&ev.n, prep.db, prep.dr, Subsystem::R);
    let (qv, qu) = HermitianOperator::hermitize(q_r).eigh();
    let qi: Vec<f64> = qv.iter().map(|&v| 1.0 / v.max(1e-300).sqrt()).collect();
    let qihalf = kron(
        &CMat::identity(prep.db, prep.db),
        &crate::qcore::from_eigh(&qi, &qu),
    );
    let n_pol = hermitize_mat(&(&qihalf * &ev.n * &qihalf));

    // Re-expand to the caller's quadratic term count (zero-weight slots stay 0).
    let mut w_full = vec![0.0; prep.n_quad_orig];
    for (i, &m) in prep.quad_idx.iter().enumerate() {
        w_full[m] = theta[prep.o_w() + i];
    }

    let mut f_mat = CMat::zeros(prep.dr, prep.dr);
    for (a, b) in prep.basis.iter().enumerate() {
        f_mat += b.scale(theta[prep.o_f() + a]);
    }

    Ok(InnerSolution {
        n: n_pol,
        mu: theta[..prep.nj].to_vec(),
        nu: theta[prep.nj..prep.nj + prep.nl].to_vec(),
        w: w_full,
        f_r: HermitianOperator::hermitize(f_mat),
        g_star: ev.g,
        theta,
        residual,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::DensityOperator;

    #[test]
    fn basis_is_orthonormal_and_complete() {
        for d in [2usize, 3] {
            let basis = hermitian_basis(d);
            assert_eq!(basis.len(), d * d);
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let ip = tr_prod(a, b);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-14, "({i},{j}) -> {ip}");
                }
            }
        }
    }

    #[test]
    fn unconstrained_dual_converges_to_maximally_mixed_output() {
        let problem = MaxEntProblem::new(2, 2);
        let phi = InputState::maximally_mixed(2);
        let prep = Prepared::new(&problem, &phi);
        let sol = solve_dual(&prep, false, None, 1e-11, 100).unwrap();
        assert!(sol.converged);
        // Cold start is already optimal here: one evaluation suffices.
        assert!(sol.iterations <= 2, "iterations = {}", sol.iterations);
        let expect = CMat::identity(4, 4).scale(0.5);
        assert!((&sol.n - &expect).norm() < 1e-10);
        assert!((sol.g_star - -(2.0f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn skewed_input_still_yields_maximally_mixed_output() {
        let problem = MaxEntProblem::new(2, 3);
        let phi = InputState::from_phi_r(
            DensityOperator::new(HermitianOperator::from_real_diag(&[0.9, 0.1])).unwrap(),
        );
        let prep = Prepared::new(&problem, &phi);
        let sol = solve_dual(&prep, false, None, 1e-11, 100).unwrap();
        assert!(sol.converged);
        let expect = CMat::identity(6, 6).scale(1.0 / 3.0);
        assert!((&sol.n - &expect).norm() < 1e-9);
        assert!((sol.g_star - -(3.0f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn reference_channel_is_recovered_without_constraints() {
        // Minimizing D(N ‖ M) without constraints returns M itself.
        let m = crate::qcore::random_channel(5, 3, 2).unwrap();
        let problem = MaxEntProblem {
            reference: Some(m.clone()),
            ..MaxEntProblem::new(3, 2)
        };
        let phi = InputState::maximally_mixed(3);
        let prep = Prepared::new(&problem, &phi);
        let sol = solve_dual(&prep, true, None, 1e-11, 200).unwrap();
        assert!(sol.converged);
        assert!((&sol.n - m.mat()).norm() < 1e-8);
        assert!(sol.g_star.abs() < 1e-9);
    }

    #[test]
    fn equality_constraint_is_met_and_warm_start_is_cheap() {
        // Pin the output-Z expectation of the Choi matrix.
        let mut zr = CMat::zeros(4, 4);
        zr[(0, 0)] = C64::new(1.0, 0.0);
        zr[(1, 1)] = C64::new(1.0, 0.0);
        zr[(2, 2)] = C64::new(-1.0, 0.0);
        zr[(3, 3)] = C64::new(-1.0, 0.0);
        let problem = MaxEntProblem {
            equality: vec![super::super::LinearConstraint {
                op: HermitianOperator::new(zr).unwrap(),
                target: 0.4,
            }],
            ..MaxEntProblem::new(2, 2)
        };
        let phi = InputState::maximally_mixed(2);
        let prep = Prepared::new(&problem, &phi);
        let sol = solve_dual(&prep, false, None, 1e-11, 200).unwrap();
        assert!(sol.converged);
        assert!((tr_prod(problem.equality[0].op.mat(), &sol.n) - 0.4).abs() < 1e-10);
        let warm = solve_dual(&prep, false, Some(&sol.theta), 1e-11, 200).unwrap();
        assert!(warm.converged && warm.iterations <= 2);
    }
}
