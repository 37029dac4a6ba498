//! Channel-level maximum-entropy toolkit.
//!
//! The crate is organized in layers:
//!
//! * [`qcore`] — dense Hermitian linear algebra, states, Choi matrices,
//!   entropies, distances, complements, seeded randomness, JSON exchange.
//! * [`entropy`] — channel entropy functionals: `S_phi(N)`, `S(N)`,
//!   `D(N ‖ M)`, thermodynamic capacity, diamond distance.
//! * [`maxent`] — the constrained solver: maximum channel entropy /
//!   minimum channel relative entropy with full KKT certificates.
//! * [`exemplars`] — closed-form solutions (replacer, energy-conserving,
//!   Bell-diagonal, classical) used as independent oracles, plus a
//!   randomized passivity probe.
//! * [`learn`] — online channel learning against a shot-based simulator.
//! * [`schurweyl`] — symmetric-group projectors, de Finetti states, and
//!   concentration-bound arithmetic at small copy numbers.
//!
//! Conventions used throughout: all entropies are in nats (natural
//! logarithm); bipartite operators live on `B ⊗ R` with `B` as the slow
//! tensor index; a channel `A → B` is represented by its Choi matrix
//! `N_BR = (N ⊗ id)(Φ_{A:R})` with `Φ` the *unnormalized* maximally
//! entangled operator, so `tr_B N_BR = 1_R`.

pub mod entropy;
pub mod exemplars;
pub mod learn;
pub mod maxent;
pub(crate) mod optim;
pub mod qcore;
pub mod schurweyl;

pub use qcore::{
    apply_channel, mat_fn_hermitian, partial_trace, ChoiMatrix, DensityOperator,
    HermitianOperator, InputState, MatFn, QcoreError, Subsystem,
};

use once_cell::sync::Lazy;

/// Initializes the global rayon pool, honoring `THERMAL_CHANNEL_THREADS`.
///
/// Called lazily by every parallel entry point; safe to call repeatedly.
/// Without the env var the rayon default (one thread per core) applies.
pub fn init_thread_pool() {
    static INIT: Lazy<()> = Lazy::new(|| {
        if let Ok(v) = std::env::var("THERMAL_CHANNEL_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    // Errors only if a global pool already exists, which is fine.
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
    Lazy::force(&INIT);
}
