//! Constrained channel optimizers with dual certificates.
//!
//! A problem fixes input dimension `A` and output dimension `B` and
//! constrains the Choi matrix `N` on `B ⊗ R` (R ≅ A) through linear
//! functionals `tr[C N]`. Without a reference channel the solver maximizes
//! the channel entropy `S(N) = min_φ S_φ(N)`; with a reference `M` it
//! minimizes the channel relative entropy `D(N ‖ M) = max_φ D_φ(N ‖ M)`.
//! Quadratic penalty terms `weight · (tr[E N] − target)²` may be added to
//! the minimized objective in both cases.
//!
//! The optimum for fixed input φ has an explicit exponential form
//!
//! ```text
//! N = φ^{-1/2} exp{ −φ^{-1/2} G φ^{-1/2} } φ^{-1/2} + Y,   φ ≡ 1_B ⊗ φ_R,
//! G = Σ_j μ_j C^j + Σ_ℓ ν_ℓ D^ℓ + Σ_m w_m E^m − 1_B ⊗ F_R
//!     − φ^{1/2} log(φ^{1/2} M φ^{1/2}) φ^{1/2} − S_BR,
//! ```
//!
//! with `M` the reference Choi matrix (the identity operator when no
//! reference is set, which turns the relative-entropy objective into the
//! negated entropy). The multipliers (μ, ν, w, F_R) are found by maximizing
//! the smooth concave Lagrange dual with a damped Newton method; the outer
//! search over inputs runs multi-start quasi-Newton on the inner optimal
//! value. Every returned solution carries a [`KktReport`] recomputed by
//! [`kkt_verify`] from the certificate alone.

mod inner;
mod kkt;
mod outer;
mod symmetry;

pub use kkt::kkt_verify;
pub use outer::{solve_fixed_input, solve_thermal_channel};
pub use symmetry::{symmetry_reduce, SymmetryReport};

use serde::{Deserialize, Serialize};

use crate::qcore::{ChoiMatrix, HermitianOperator, InputState, QcoreError};

/// Linear expectation constraint on the Choi matrix: `tr[op · N]` equal to
/// (or at most) `target`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub op: HermitianOperator,
    pub target: f64,
}

/// Quadratic penalty `weight · (tr[op · N] − target)²` on the objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub op: HermitianOperator,
    pub target: f64,
    /// Nonnegative penalty weight.
    pub weight: f64,
}

/// A constrained channel-entropy (or channel-relative-entropy) problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MaxEntProblem {
    /// Input dimension (system A, mirrored by the reference wire R).
    pub dim_a: usize,
    /// Output dimension (system B).
    pub dim_b: usize,
    /// Equality constraints `tr[C^j N] = q_j`.
    #[serde(default)]
    pub equality: Vec<LinearConstraint>,
    /// Inequality constraints `tr[D^ℓ N] ≤ r_ℓ`.
    #[serde(default)]
    pub inequality: Vec<LinearConstraint>,
    /// Quadratic penalty terms.
    #[serde(default)]
    pub quadratic: Vec<QuadraticTerm>,
    /// Reference channel. `None` maximizes entropy; `Some(M)` minimizes the
    /// relative entropy to `M`.
    #[serde(default)]
    pub reference: Option<ChoiMatrix>,
}

impl MaxEntProblem {
    /// An unconstrained entropy-maximization problem.
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            equality: Vec::new(),
            inequality: Vec::new(),
            quadratic: Vec::new(),
            reference: None,
        }
    }

    /// Joint dimension of the Choi matrix, `dim_b · dim_a`.
    pub fn dim(&self) -> usize {
        self.dim_b * self.dim_a
    }

    pub fn validate(&self) -> Result<(), MaxEntError> {
        let fail = |context: String| Err(MaxEntError::InvalidProblem { context });
        if self.dim_a == 0 || self.dim_b == 0 {
            return fail("dimensions must be positive".into());
        }
        let dim = self.dim();
        for (kind, ops) in [("equality", &self.equality), ("inequality", &self.inequality)] {
            for (i, c) in ops.iter().enumerate() {
                if c.op.dim() != dim {
                    return fail(format!(
                        "{kind} constraint {i} has dimension {} (expected {dim})",
                        c.op.dim()
                    ));
                }
                if !c.target.is_finite() {
                    return fail(format!("{kind} constraint {i} target is not finite"));
                }
            }
        }
        for (m, t) in self.quadratic.iter().enumerate() {
            if t.op.dim() != dim {
                return fail(format!(
                    "quadratic term {m} has dimension {} (expected {dim})",
                    t.op.dim()
                ));
            }
            if !t.target.is_finite() || !t.weight.is_finite() {
                return fail(format!("quadratic term {m} has a non-finite scalar"));
            }
            if t.weight < 0.0 {
                return fail(format!("quadratic term {m} has negative weight"));
            }
        }
        if let Some(m) = &self.reference {
            if m.dim_b() != self.dim_b || m.dim_r() != self.dim_a {
                return fail(format!(
                    "reference channel is {}x{} (expected {}x{})",
                    m.dim_b(),
                    m.dim_r(),
                    self.dim_b,
                    self.dim_a
                ));
            }
        }
        Ok(())
    }
}

/// Solution channel plus the dual certificate that proves its optimality.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ThermalSolution {
    /// Optimal Choi matrix (a valid channel).
    pub choi: ChoiMatrix,
    /// Equality multipliers.
    pub mu: Vec<f64>,
    /// Inequality multipliers, componentwise ≥ 0.
    pub nu: Vec<f64>,
    /// Effective quadratic multipliers, `w_m = 2·weight_m·(tr[E^m N] − target_m)`.
    pub w: Vec<f64>,
    /// Dual operator on R enforcing trace preservation.
    pub f_r: HermitianOperator,
    /// PSD slack absorbing rank-deficient optimal channels. The iterative
    /// solver always returns zero here; the field participates in
    /// verification so externally built certificates can use it.
    pub s_br: HermitianOperator,
    /// Off-support remainder of the channel when the optimal input is rank
    /// deficient (`Π Y Π = 0` and `tr_B Y = Π⊥` on the input support Π);
    /// zero for full-rank inputs.
    pub y_br: HermitianOperator,
    /// Effective Hamiltonian of the exponential form.
    pub g_br: HermitianOperator,
    /// Optimal input state (or the caller-fixed input).
    pub phi: InputState,
    /// Attained objective in nats: channel entropy at `phi` when no
    /// reference is set, else channel relative entropy to the reference.
    pub achieved: f64,
    /// True when the optimal input was rank deficient and the solution was
    /// obtained as a regularized full-rank limit.
    pub degenerate_optimal_input: bool,
    /// Certificate residuals, recomputed independently from the certificate.
    pub residuals: KktReport,
}

/// Residuals of an optimality certificate. Finite by construction; values
/// at or below the solver tolerance certify the solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KktReport {
    /// Exponential-form reconstruction error: the largest of the Choi
    /// reconstruction mismatch, the disagreement between stored and
    /// recomputed effective Hamiltonians, the on-support weight of `y_br`,
    /// and `‖tr_B Y − Π⊥‖_F`.
    pub exp_form_residual: f64,
    /// `‖tr_B N − 1_R‖_F`.
    pub tp_residual: f64,
    /// `|tr[C^j N] − q_j|` for equalities, then `max(0, tr[D^ℓ N] − r_ℓ)`
    /// for inequalities.
    pub constraint_residuals: Vec<f64>,
    /// Minimum eigenvalue of the recomputed effective Hamiltonian; dual
    /// feasibility needs it nonnegative up to tolerance.
    pub g_min_eigenvalue: f64,
    /// Complementary slackness `|ν_ℓ · (r_ℓ − tr[D^ℓ N])|`.
    pub slackness_residuals: Vec<f64>,
    /// `|w_m − 2·weight_m·(tr[E^m N] − target_m)|`.
    pub w_consistency_residuals: Vec<f64>,
    /// Gap between the attained objective and its closed-form dual value.
    pub entropy_identity_residual: f64,
}

impl KktReport {
    /// Largest residual in the report. Negative spectrum of the effective
    /// Hamiltonian enters as `max(0, −g_min_eigenvalue)`.
    pub fn worst(&self) -> f64 {
        let vecs = self
            .constraint_residuals
            .iter()
            .chain(&self.slackness_residuals)
            .chain(&self.w_consistency_residuals)
            .fold(0.0f64, |a, &b| a.max(b));
        vecs.max(self.exp_form_residual)
            .max(self.tp_residual)
            .max((-self.g_min_eigenvalue).max(0.0))
            .max(self.entropy_identity_residual)
    }
}

/// Solver options. Defaults reproduce the documented tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct SolveOpts {
    /// Certificate residual target; a worse certificate raises `NotConverged`.
    pub tol: f64,
    /// Stationarity tolerance for the returned input state of the full
    /// (input-optimizing) solve.
    pub phi_tol: f64,
    /// Sup-norm target for the dual gradient of the fixed-input solve.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Number of multi-starts of the outer input search.
    pub starts: usize,
    pub outer_max_iters: usize,
    pub outer_value_tol: f64,
    pub outer_grad_tol: f64,
    /// Step for the outer finite-difference gradients.
    pub fd_step: f64,
    /// Seed for the random outer starts.
    pub seed: u64,
    /// Solve rank-deficient fixed inputs through a regularized limit
    /// instead of rejecting them.
    pub regularize_rank_deficient: bool,
    /// Fixed inputs with a smaller minimum eigenvalue count as rank
    /// deficient.
    pub rank_tol: f64,
    /// Optimal inputs with a smaller minimum eigenvalue trigger the
    /// regularized-limit finisher and the degenerate flag.
    pub degenerate_tol: f64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            phi_tol: 1e-4,
            inner_tol: 1e-11,
            inner_max_iters: 300,
            starts: 8,
            outer_max_iters: 400,
            outer_value_tol: 1e-9,
            outer_grad_tol: 1e-7,
            fd_step: 1e-6,
            seed: 7,
            regularize_rank_deficient: true,
            rank_tol: 1e-9,
            degenerate_tol: 1e-6,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MaxEntError {
    #[error("invalid problem: {context}")]
    InvalidProblem { context: String },
    #[error("problem appears infeasible (projected-channel min eigenvalue {min_eigenvalue:.3e})")]
    Infeasible { min_eigenvalue: f64 },
    #[error("input has min eigenvalue {min_eigenvalue:.3e} and regularization is disabled")]
    RankDeficientInput { min_eigenvalue: f64 },
    #[error("residual target missed (worst residual {residual:.3e}); best iterate attached")]
    NotConverged {
        residual: f64,
        best: Box<ThermalSolution>,
    },
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}
