//! Channel-level entropy functionals.
//!
//! The central quantity is the input-conditional output entropy
//! `S_φ(N) = S(B|R)` of the joint output `N(φ_AR)`, equal to
//! `S(N(φ)) − S(φ_R)`. Minimizing it over inputs gives the channel
//! entropy `S(N)`; maximizing the output relative entropy gives the
//! channel relative entropy `D(N‖M)`. Also here: thermodynamic capacity
//! `T(N) = max_σ [S(σ) − S(N(σ))]` and a multi-start diamond-distance
//! lower bound.
//!
//! All searches over states run through the unconstrained square-root
//! parameterization `φ = LL†/tr(LL†)` with finite-difference gradients,
//! from a deterministic set of starting points. Values are contractual;
//! reported optimizers are advisory (degenerate optima return the first
//! found under best-value-then-lowest-start-index reduction).

use crate::optim::{
    density_to_l, fd_gradient, l_to_params, minimize, params_to_density, LocalOpt, MinimizeCfg,
};
use crate::qcore::{
    apply_channel, apply_channel_adjoint, complement_channel, conditional_entropy,
    mat_fn_hermitian, random_density, relative_entropy_mats, substream, trace_norm_hermitian,
    von_neumann, ChoiMatrix, DensityOperator, HermitianOperator, InputState, MatFn, QcoreError,
    SUPPORT_TOL,
};
use rayon::prelude::*;

/// Options for the multi-start input-state searches.
#[derive(Debug, Clone)]
pub struct OptimOpts {
    /// Number of starting points: maximally mixed, near-basis states,
    /// remainder random.
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Stop when the value change and gradient norm both fall below
    /// `value_tol` / `grad_tol`.
    pub value_tol: f64,
    pub grad_tol: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
    /// A report claims `converged` only if its stationarity residual is
    /// at most this.
    pub stationarity_tol: f64,
    /// Seed for the random starting points.
    pub seed: u64,
}

impl Default for OptimOpts {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iters: 600,
            value_tol: 1e-9,
            grad_tol: 1e-7,
            fd_step: 1e-6,
            stationarity_tol: 1e-6,
            seed: 7,
        }
    }
}

/// Outcome of an entropy-functional optimization over input states.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    /// Optimal value in nats.
    pub value: f64,
    /// Input state achieving `value` (advisory; see module docs).
    pub optimizer: InputState,
    /// Frobenius-norm residual of the first-order optimality condition at
    /// `optimizer` (see the producing function for the exact condition).
    pub stationarity_residual: f64,
    /// Total local-descent iterations across all starts.
    pub iterations: usize,
    /// True iff the winning start converged and the residual is within
    /// the configured tolerance.
    pub converged: bool,
}

/// Diamond-distance search result. `value` is a certified lower bound on
/// the true diamond distance (it is an attained objective value); with
/// multi-start it is typically the distance itself.
#[derive(Debug, Clone)]
pub struct DiamondReport {
    pub value: f64,
    /// Companion metric: trace distance of the normalized Choi states,
    /// `(1/2) ‖(N − M)/d_R‖₁`.
    pub choi_trace_distance: f64,
    pub optimizer: InputState,
    /// Parameter-space gradient norm at the optimizer.
    pub stationarity_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum EntropyError {
    #[error(
        "input-state search did not converge (best value {best_value}, stationarity residual {stationarity_residual:.3e})"
    )]
    NotConverged { best_value: f64, stationarity_residual: f64 },
    #[error("channel shapes differ: {context}")]
    ShapeMismatch { context: String },
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// `S_φ(N) = S(N(φ_AR)) − S(φ_R)`, the output entropy conditioned on the
/// purifying reference. Equals `−D(N(φ) ‖ 1_B ⊗ φ_R)`.
pub fn channel_entropy_at_input(n: &ChoiMatrix, phi: &InputState) -> f64 {
    let joint = crate::qcore::channel_output_joint(n, phi);
    conditional_entropy(&joint, n.dim_b(), n.dim_r())
}

/// `D_φ(N‖M) = D(N(φ_AR) ‖ M(φ_AR))`; `+∞` when the first output leaves
/// the support of the second.
pub fn channel_relative_entropy_at_input(n: &ChoiMatrix, m: &ChoiMatrix, phi: &InputState) -> f64 {
    let rho = crate::qcore::channel_output_joint(n, phi);
    let sigma = crate::qcore::channel_output_joint(m, phi);
    relative_entropy_mats(&rho, &sigma, SUPPORT_TOL)
}

/// Channel entropy `S(N) = min_φ S_φ(N)` by multi-start descent over
/// `φ_R`.
///
/// The stationarity residual is the Frobenius norm of
/// `Π X Π − λ Π` with `X = log φ_A − N̂†(log N̂(φ_A))`, `Π` the support
/// projector of `φ_A`, `λ = tr(Π X Π)/rank Π`, and `N̂` a complement of
/// `N`: the first-order condition satisfied by any optimal input.
pub fn channel_entropy(n: &ChoiMatrix, opts: &OptimOpts) -> Result<EntropyReport, EntropyError> {
    let d = n.dim_r();
    let objective = |phi: &DensityOperator| {
        channel_entropy_at_input(n, &InputState::from_phi_r(phi.clone()))
    };
    let win = multistart(&objective, d, opts, Direction::Minimize);
    let optimizer = InputState::from_phi_r(win.density.clone());
    let stationarity_residual = input_stationarity_residual(n, &optimizer)?;
    let converged = win.converged && stationarity_residual <= opts.stationarity_tol;
    let report = EntropyReport {
        value: win.value,
        optimizer,
        stationarity_residual,
        iterations: win.iterations,
        converged,
    };
    finish(report)
}

/// Channel relative entropy `D(N‖M) = max_φ D(N(φ)‖M(φ))`.
///
/// If the Choi matrix of `N` has weight above the support tolerance on
/// the kernel of the Choi matrix of `M`, the supremum is `+∞` (witnessed
/// already by the maximally mixed input) and the sentinel report is
/// returned immediately. Otherwise the objective is finite for every
/// input and the maximum is found by multi-start ascent; the residual is
/// the parameter-space gradient norm at the optimizer.
pub fn channel_relative_entropy(
    n: &ChoiMatrix,
    m: &ChoiMatrix,
    opts: &OptimOpts,
) -> Result<EntropyReport, EntropyError> {
    check_same_shape(n, m)?;
    let d = n.dim_r();
    if choi_kernel_weight(n, m) > SUPPORT_TOL {
        return Ok(EntropyReport {
            value: f64::INFINITY,
            optimizer: InputState::maximally_mixed(d),
            stationarity_residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let objective = |phi: &DensityOperator| {
        channel_relative_entropy_at_input(n, m, &InputState::from_phi_r(phi.clone()))
    };
    let win = multistart(&objective, d, opts, Direction::Maximize);
    let stationarity_residual = fd_grad_norm(&objective, &win.density, opts.fd_step);
    let converged = win.converged && stationarity_residual <= opts.stationarity_tol;
    let report = EntropyReport {
        value: win.value,
        optimizer: InputState::from_phi_r(win.density),
        stationarity_residual,
        iterations: win.iterations,
        converged,
    };
    finish(report)
}

/// Thermodynamic capacity `T(N) = max_σ [S(σ) − S(N(σ))]` (identity
/// reference operators on both ends).
///
/// The optimizer is stored as an [`InputState`] with `φ_R = σ^t`, so its
/// `phi_a()` is the maximizing input `σ` itself.
pub fn thermodynamic_capacity(
    n: &ChoiMatrix,
    opts: &OptimOpts,
) -> Result<EntropyReport, EntropyError> {
    let d = n.dim_r();
    let objective = |sigma: &DensityOperator| match apply_channel(n, sigma) {
        Ok(out) => von_neumann(sigma) - von_neumann(&out),
        Err(_) => f64::NEG_INFINITY,
    };
    let win = multistart(&objective, d, opts, Direction::Maximize);
    let stationarity_residual = fd_grad_norm(&objective, &win.density, opts.fd_step);
    let converged = win.converged && stationarity_residual <= opts.stationarity_tol;
    let report = EntropyReport {
        value: win.value,
        optimizer: InputState::from_phi_r(win.density.transposed()),
        stationarity_residual,
        iterations: win.iterations,
        converged,
    };
    finish(report)
}

/// Diamond-distance lower bound
/// `(1/2) max_φ ‖N(φ_AR) − M(φ_AR)‖₁` over pure inputs (local-unitary
/// invariance reduces the search to `φ_R`), plus the normalized-Choi
/// trace distance as a cheap companion metric.
pub fn diamond_distance(
    n: &ChoiMatrix,
    m: &ChoiMatrix,
    opts: &OptimOpts,
) -> Result<DiamondReport, EntropyError> {
    check_same_shape(n, m)?;
    let d = n.dim_r();
    let diff = HermitianOperator::hermitize(n.mat() - m.mat());
    let choi_trace_distance = 0.5 * trace_norm_hermitian(diff.mat()) / d as f64;
    let objective = |phi: &DensityOperator| {
        let inp = InputState::from_phi_r(phi.clone());
        let delta = crate::qcore::channel_output_joint(n, &inp)
            - crate::qcore::channel_output_joint(m, &inp);
        0.5 * trace_norm_hermitian(HermitianOperator::hermitize(delta).mat())
    };
    let win = multistart(&objective, d, opts, Direction::Maximize);
    let stationarity_residual = fd_grad_norm(&objective, &win.density, opts.fd_step);
    let converged = win.converged && stationarity_residual <= opts.stationarity_tol;
    let report = DiamondReport {
        value: win.value,
        choi_trace_distance,
        optimizer: InputState::from_phi_r(win.density),
        stationarity_residual,
        iterations: win.iterations,
        converged,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(EntropyError::NotConverged {
            best_value: report.value,
            stationarity_residual: report.stationarity_residual,
        })
    }
}

/// First-order optimality residual of the channel-entropy minimization at
/// a given input: `‖Π X Π − λ Π‖_F` with
/// `X = log φ_A − N̂†(log N̂(φ_A))` on the support of `φ_A`.
pub fn input_stationarity_residual(n: &ChoiMatrix, phi: &InputState) -> Result<f64, QcoreError> {
    let nhat = complement_channel(n, SUPPORT_TOL)?;
    let phi_a = phi.phi_a();
    let out_e = apply_channel(&nhat, &phi_a)?;
    let log_out = mat_fn_hermitian(out_e.op(), MatFn::LogOnSupport, SUPPORT_TOL)?;
    let pulled_back = apply_channel_adjoint(&nhat, &log_out)?;
    let log_phi_a = mat_fn_hermitian(phi_a.op(), MatFn::LogOnSupport, SUPPORT_TOL)?;
    let x = log_phi_a.mat() - pulled_back.mat();
    // Support projector of φ_A.
    let (vals, vecs) = phi_a.eigh();
    let d = phi_a.dim();
    let mut proj = crate::qcore::CMat::zeros(d, d);
    let mut rank = 0usize;
    for k in 0..d {
        if vals[k] > SUPPORT_TOL {
            let col = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    proj[(i, j)] += col[i] * col[j].conj();
                }
            }
            rank += 1;
        }
    }
    if rank == 0 {
        return Ok(0.0);
    }
    let pxp = &proj * x * &proj;
    let lambda = pxp.trace().re / rank as f64;
    Ok((pxp - proj.scale(lambda)).norm())
}

enum Direction {
    Minimize,
    Maximize,
}

struct Winner {
    density: DensityOperator,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Deterministic multi-start local search over density operators of
/// dimension `d`. Starts: maximally mixed, then near-basis states
/// `0.95|k><k| + 0.05·1/d`, then seeded random states. Reduction is by
/// best value then lowest start index, independent of scheduling.
fn multistart<F>(f: &F, d: usize, opts: &OptimOpts, dir: Direction) -> Winner
where
    F: Fn(&DensityOperator) -> f64 + Sync,
{
    let sign = match dir {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut starts: Vec<DensityOperator> = vec![DensityOperator::maximally_mixed(d)];
    for k in 0..d {
        if starts.len() >= opts.starts {
            break;
        }
        let basis = DensityOperator::basis_state(d, k);
        let mixed = basis.mat().scale(0.95)
            + crate::qcore::CMat::identity(d, d).scale(0.05 / d as f64);
        starts.push(DensityOperator::from_mat(mixed).expect("mixture of states is a state"));
    }
    let mut idx = 0u64;
    while starts.len() < opts.starts {
        let mut rng = substream(opts.seed, 1000 + idx);
        starts.push(random_density(&mut rng, d));
        idx += 1;
    }
    let cfg = MinimizeCfg {
        fd_step: opts.fd_step,
        value_tol: opts.value_tol,
        grad_tol: opts.grad_tol,
        max_iters: opts.max_iters,
    };
    let runs: Vec<(usize, LocalOpt)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, start)| {
            let x0 = l_to_params(&density_to_l(start));
            let mut g = |p: &[f64]| sign * f(&params_to_density(p, d));
            (i, minimize(&mut g, &x0, &cfg))
        })
        .collect();
    let total_iters: usize = runs.iter().map(|(_, r)| r.iterations).sum();
    let best = runs
        .iter()
        .min_by(|(ia, ra), (ib, rb)| {
            ra.value
                .partial_cmp(&rb.value)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ia.cmp(ib))
        })
        .expect("at least one start");
    let density = params_to_density(&best.1.params, d);
    Winner {
        density,
        value: sign * best.1.value,
        iterations: total_iters,
        converged: best.1.converged,
    }
}

/// Norm of the finite-difference gradient in the square-root
/// parameterization at a given state; the generic smooth-stationarity
/// residual for searches without a closed-form optimality condition.
fn fd_grad_norm<F>(f: &F, phi: &DensityOperator, h: f64) -> f64
where
    F: Fn(&DensityOperator) -> f64,
{
    let d = phi.dim();
    let x = l_to_params(&density_to_l(phi));
    let mut g = |p: &[f64]| f(&params_to_density(p, d));
    let grad = fd_gradient(&mut g, &x, h);
    grad.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn choi_kernel_weight(n: &ChoiMatrix, m: &ChoiMatrix) -> f64 {
    let (vals, vecs) = m.op().eigh();
    let dim = m.mat().nrows();
    let mut w = 0.0;
    for k in 0..dim {
        if vals[k] <= SUPPORT_TOL {
            let col = vecs.column(k);
            let mut acc = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    acc += (col[i].conj() * n.mat()[(i, j)] * col[j]).re;
                }
            }
            w += acc;
        }
    }
    w
}

fn check_same_shape(n: &ChoiMatrix, m: &ChoiMatrix) -> Result<(), EntropyError> {
    if n.dim_b() != m.dim_b() || n.dim_r() != m.dim_r() {
        return Err(EntropyError::ShapeMismatch {
            context: format!(
                "({} -> {}) vs ({} -> {})",
                n.dim_r(),
                n.dim_b(),
                m.dim_r(),
                m.dim_b()
            ),
        });
    }
    Ok(())
}

fn finish(report: EntropyReport) -> Result<EntropyReport, EntropyError> {
    if report.converged {
        Ok(report)
    } else {
        Err(EntropyError::NotConverged {
            best_value: report.value,
            stationarity_residual: report.stationarity_residual,
        })
    }
}
