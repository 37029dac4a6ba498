//! Detection of constraint symmetries that shrink the input search.
//!
//! Three canonical channel symmetries are checked: computational-basis
//! dephasing on the reference wire R, the same on the output B, and the
//! Bell-basis pinching (square problems only). When every problem operator
//! (constraints and reference channel alike) is invariant under one of
//! them, the optimal input can be restricted accordingly: dephasing on R
//! admits a diagonal optimal input, and Bell covariance pins the optimal
//! input to the maximally mixed state.

use crate::qcore::{bell_pinching, CMat, HermitianOperator};

use super::MaxEntProblem;

/// Invariance tolerance (Frobenius norm).
const SYM_TOL: f64 = 1e-10;

/// Which canonical symmetries the whole problem respects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SymmetryReport {
    /// Every operator commutes with computational-basis dephasing on R;
    /// the optimal input may be taken diagonal.
    pub input_dephasing: bool,
    /// Every operator commutes with computational-basis dephasing on B;
    /// dephasing the solution output preserves feasibility and value.
    pub output_dephasing: bool,
    /// Every operator is fixed by the Bell-basis pinching (requires equal
    /// dimensions); the optimal input is the maximally mixed state and the
    /// solution is Bell diagonal.
    pub bell_pinching: bool,
}

/// Dephasing on R: `Σ_k (1_B ⊗ |k><k|) A (1_B ⊗ |k><k|)`.
fn dephase_r(a: &CMat, dr: usize) -> CMat {
    let dim = a.nrows();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i % dr == j % dr {
                out[(i, j)] = a[(i, j)];
            }
        }
    }
    out
}

/// Dephasing on B: `Σ_k (|k><k| ⊗ 1_R) A (|k><k| ⊗ 1_R)`.
fn dephase_b(a: &CMat, dr: usize) -> CMat {
    let dim = a.nrows();
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i / dr == j / dr {
                out[(i, j)] = a[(i, j)];
            }
        }
    }
    out
}

/// Reports which canonical symmetries every operator of `problem` respects.
pub fn symmetry_reduce(problem: &MaxEntProblem) -> SymmetryReport {
    let dr = problem.dim_a;
    let square = problem.dim_a == problem.dim_b;
    let ops: Vec<&HermitianOperator> = problem
        .equality
        .iter()
        .map(|c| &c.op)
        .chain(problem.inequality.iter().map(|c| &c.op))
        .chain(problem.quadratic.iter().map(|t| &t.op))
        .collect();
    let ref_mat = problem.reference.as_ref().map(|m| m.mat());

    let invariant = |f: &dyn Fn(&CMat) -> CMat| {
        ops.iter().all(|op| (f(op.mat()) - op.mat()).norm() <= SYM_TOL)
            && ref_mat.is_none_or(|m| (f(m) - m).norm() <= SYM_TOL)
    };

    SymmetryReport {
        input_dephasing: invariant(&|a| dephase_r(a, dr)),
        output_dephasing: invariant(&|a| dephase_b(a, dr)),
        bell_pinching: square && invariant(&|a| bell_pinching(a, dr)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{bell_vector, random_hermitian, seeded_rng, C64};
    use crate::maxent::LinearConstraint;

    fn problem_with(op: HermitianOperator, dim_a: usize, dim_b: usize) -> MaxEntProblem {
        MaxEntProblem {
            equality: vec![LinearConstraint { op, target: 0.5 }],
            ..MaxEntProblem::new(dim_a, dim_b)
        }
    }

    #[test]
    fn bell_projector_is_bell_symmetric_only() {
        let v = bell_vector(2, 0, 1);
        let op = HermitianOperator::hermitize(&v * v.adjoint());
        let report = symmetry_reduce(&problem_with(op, 2, 2));
        assert!(report.bell_pinching);
        assert!(!report.input_dephasing);
        assert!(!report.output_dephasing);
    }

    #[test]
    fn computational_diagonal_operator_has_both_dephasings() {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(3, 3)] = C64::new(-2.0, 0.0);
        let report = symmetry_reduce(&problem_with(HermitianOperator::hermitize(m), 2, 2));
        assert!(report.input_dephasing);
        assert!(report.output_dephasing);
        assert!(!report.bell_pinching);
    }

    #[test]
    fn generic_operator_has_no_symmetry_and_empty_problem_has_all() {
        let op = random_hermitian(&mut seeded_rng(3), 4);
        let report = symmetry_reduce(&problem_with(op, 2, 2));
        assert!(!report.input_dephasing && !report.output_dephasing && !report.bell_pinching);

        let all = symmetry_reduce(&MaxEntProblem::new(2, 2));
        assert!(all.input_dephasing && all.output_dephasing && all.bell_pinching);

        let rect = symmetry_reduce(&MaxEntProblem::new(2, 3));
        assert!(!rect.bell_pinching);
    }
}
