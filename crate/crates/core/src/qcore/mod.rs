//! Dense Hermitian linear algebra and quantum-information primitives.

mod complement;
mod distances;
mod entropies;
mod io;
mod ops;
mod random;
mod rng;
mod types;
mod weyl;

pub use complement::complement_channel;
pub use distances::{fidelity, purified_distance, trace_distance, trace_norm_hermitian};
pub use entropies::{conditional_entropy, relative_entropy, relative_entropy_mats, von_neumann};
pub use io::{ChoiJson, MatrixJson};
pub use ops::{
    apply_channel, apply_channel_adjoint, channel_output_joint, kron, mat_fn_hermitian,
    partial_trace, partial_trace_mat, MatFn, Subsystem,
};
pub(crate) use ops::{from_eigh, tr_re};
pub use random::{random_channel, random_density, random_hermitian, random_pure, random_unitary};
pub use rng::{seeded_rng, substream};
pub use types::{ChoiMatrix, DensityOperator, HermitianOperator, InputState};
pub use weyl::{bell_pinching, bell_vector, weyl_operator};

use num_complex::Complex64;

/// Complex scalar used everywhere.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;

/// Default tolerance below which an eigenvalue counts as kernel.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Errors for construction and plumbing operations.
#[derive(Debug, thiserror::Error)]
pub enum QcoreError {
    #[error("matrix is not Hermitian (max asymmetry {max_asym:.3e})")]
    NonHermitian { max_asym: f64 },
    #[error("negative spectrum: eigenvalue {min_eig:.6e} below allowed -{tol:.1e}")]
    NegativeSpectrum { min_eig: f64, tol: f64 },
    #[error("dimension mismatch: {context}")]
    DimMismatch { context: String },
    #[error("marginal of random channel candidate near-singular after {attempts} attempts")]
    SingularMarginal { attempts: u32 },
    #[error("trace must be 1 within {tol:.1e}, found deviation {dev:.3e}")]
    NotNormalized { dev: f64, tol: f64 },
    #[error("partial trace over B of a Choi matrix must be the identity (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },
}
