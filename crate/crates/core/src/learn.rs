//! Online channel learning from shot-based measurements.
//!
//! The learner maintains a channel guess `M^(t)`, starting from the
//! completely depolarizing channel. Each iteration draws an observable
//! from a fixed ensemble, estimates its expectation on the unknown channel
//! from a finite number of measurement shots, folds the estimate into a
//! per-observable running average `s`, and replaces the guess by the
//! minimizer of
//!
//! ```text
//! D(N ‖ M^(t)) + η (s − tr[E N])²
//! ```
//!
//! over all channels `N`, a single-quadratic-term problem for
//! [`crate::maxent::solve_thermal_channel`]. Convergence metrics against
//! the simulated truth are recorded per iteration in a [`LearningTrace`].

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::entropy::{channel_relative_entropy, diamond_distance, EntropyError, OptimOpts};
use crate::maxent::{
    solve_thermal_channel, MaxEntError, MaxEntProblem, QuadraticTerm, SolveOpts,
};
use crate::qcore::{
    apply_channel, bell_vector, kron, seeded_rng, substream, tr_re, trace_norm_hermitian, C64,
    CMat, CVec, ChoiMatrix, DensityOperator, HermitianOperator, QcoreError,
};

/// Reference channels below this minimum eigenvalue are blended with the
/// completely depolarizing channel before entering the relative-entropy
/// term, which needs a full-rank second argument.
const RANK_GUARD_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("parameter out of range: {context}")]
    ParamOutOfRange { context: String },
    #[error("observable ensemble is empty")]
    EmptyEnsemble,
    #[error("observable '{key}' does not match the channel dimensions")]
    ShapeMismatch { key: String },
    #[error("trace row {row} is malformed: {context}")]
    MalformedRow { row: usize, context: String },
    #[error("trace serialization: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    MaxEnt(#[from] MaxEntError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// How an observable acts on the channel.
#[derive(Debug, Clone)]
pub enum ObservableKind {
    /// `E = P_B ⊗ ρ_R`: prepare `ρ_R` (transposed onto the input system),
    /// send it through the channel, measure `P_B` on the output. The Choi
    /// pairing identity `tr[(P ⊗ ρ) N] = tr[P · N(ρ^t)]` holds exactly.
    Factored {
        p_b: HermitianOperator,
        rho_r: DensityOperator,
    },
    /// An arbitrary Hermitian `E` on `B ⊗ R`; simulated measurements use a
    /// Gaussian surrogate (see [`simulate_expectation`]).
    General { e: HermitianOperator },
}

/// A channel observable together with a stable key used to bucket its
/// running average. Two specs with the same key share one average, two
/// specs with different keys never do, even if they describe the same
/// physical functional.
#[derive(Debug, Clone)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    pub key: String,
}

impl ObservableSpec {
    pub fn factored(
        key: impl Into<String>,
        p_b: HermitianOperator,
        rho_r: DensityOperator,
    ) -> Self {
        Self { kind: ObservableKind::Factored { p_b, rho_r }, key: key.into() }
    }

    pub fn general(key: impl Into<String>, e: HermitianOperator) -> Self {
        Self { kind: ObservableKind::General { e }, key: key.into() }
    }

    /// The observable as an operator on `B ⊗ R`, pairing directly with
    /// Choi matrices.
    pub fn operator(&self) -> HermitianOperator {
        match &self.kind {
            ObservableKind::Factored { p_b, rho_r } => {
                HermitianOperator::hermitize(kron(p_b.mat(), rho_r.mat()))
            }
            ObservableKind::General { e } => e.clone(),
        }
    }

    /// Exact expectation `tr[E N]` on a channel.
    pub fn expectation(&self, n: &ChoiMatrix) -> f64 {
        tr_re(self.operator().mat(), n.mat())
    }

    fn matches(&self, dim_b: usize, dim_r: usize) -> bool {
        match &self.kind {
            ObservableKind::Factored { p_b, rho_r } => {
                p_b.dim() == dim_b && rho_r.dim() == dim_r
            }
            ObservableKind::General { e } => e.dim() == dim_b * dim_r,
        }
    }
}

/// Simulates measuring an observable on the channel `truth` with a finite
/// number of shots; deterministic in `seed`.
///
/// Factored observables run the physical protocol: the stored input state
/// is transposed onto the channel input, sent through, and the output is
/// measured in the eigenbasis of `P_B`, returning the mean of `shots`
/// sampled eigenvalues. The estimate is unbiased for `tr[E N]`.
///
/// General observables use a documented Gaussian surrogate: one draw with
/// mean `tr[E N]` and standard deviation `‖E‖/√shots`.
pub fn simulate_expectation(
    truth: &ChoiMatrix,
    obs: &ObservableSpec,
    shots: usize,
    seed: u64,
) -> f64 {
    assert!(shots >= 1, "need at least one shot");
    let mut rng = seeded_rng(seed);
    match &obs.kind {
        ObservableKind::Factored { p_b, rho_r } => {
            let input = rho_r.transposed();
            let out = apply_channel(truth, &input).expect("observable dims match the channel");
            let (vals, vecs) = p_b.eigh();
            let probs: Vec<f64> = (0..vals.len())
                .map(|i| {
                    let col = vecs.column(i).into_owned();
                    (col.adjoint() * out.mat() * &col)[(0, 0)].re.max(0.0)
                })
                .collect();
            let dist = WeightedIndex::new(&probs).expect("Born weights sum to one");
            let mut acc = 0.0;
            for _ in 0..shots {
                acc += vals[dist.sample(&mut rng)];
            }
            acc / shots as f64
        }
        ObservableKind::General { e } => {
            let mean = tr_re(e.mat(), truth.mat());
            let (vals, _) = e.eigh();
            let op_norm = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let z: f64 = rng.sample(StandardNormal);
            mean + op_norm / (shots as f64).sqrt() * z
        }
    }
}

/// Incremental mean: the average after folding `new_hat` into `count_prev`
/// previous samples averaging `prev_s`.
pub fn running_average(prev_s: f64, count_prev: usize, new_hat: f64) -> f64 {
    (count_prev as f64 * prev_s + new_hat) / (count_prev as f64 + 1.0)
}

/// Blends in a sliver of the completely depolarizing channel when the
/// reference is not safely full rank.
fn ensure_full_rank(m: &ChoiMatrix) -> ChoiMatrix {
    if m.op().min_eigenvalue() >= RANK_GUARD_EPS {
        return m.clone();
    }
    let mix = ChoiMatrix::completely_depolarizing(m.dim_b(), m.dim_r());
    let blended = m.mat().scale(1.0 - RANK_GUARD_EPS) + mix.mat().scale(RANK_GUARD_EPS);
    ChoiMatrix::from_mat(m.dim_b(), m.dim_r(), blended)
        .expect("convex mix of channels is a channel")
}

/// One learning update: the channel minimizing
/// `D(N ‖ M_t) + η (s_t − tr[E_t N])²`.
///
/// `M_t` must be full rank for the relative-entropy term; nearly singular
/// guesses are blended with `1e-10` of the completely depolarizing channel
/// first. A [`MaxEntError::NotConverged`] outcome should be treated as
/// "keep the previous guess" by callers (as [`run_learning`] does).
pub fn learn_step(
    m_t: &ChoiMatrix,
    e_t: &ObservableSpec,
    s_t: f64,
    eta: f64,
    opts: &SolveOpts,
) -> Result<ChoiMatrix, MaxEntError> {
    let problem = MaxEntProblem {
        quadratic: vec![QuadraticTerm { op: e_t.operator(), target: s_t, weight: eta }],
        reference: Some(ensure_full_rank(m_t)),
        ..MaxEntProblem::new(m_t.dim_r(), m_t.dim_b())
    };
    solve_thermal_channel(&problem, opts).map(|sol| sol.choi)
}

/// Learning-run configuration. `eta` is the squared-error weight, `shots`
/// the per-estimate measurement budget, `iterations` the number of update
/// steps, and `seed` drives both observable draws and shot noise.
#[derive(Debug, Clone)]
pub struct LearnConfig {
    pub eta: f64,
    pub shots: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Also record the diamond distance to the truth each iteration; off
    /// by default because it runs an optimization per iteration.
    pub compute_diamond: bool,
    /// Options for the per-step channel solve.
    pub solve_opts: SolveOpts,
    /// Options for the metric optimizations (relative entropy, diamond).
    pub metric_opts: OptimOpts,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            eta: 0.15,
            shots: 10_000,
            iterations: 300,
            seed: 7,
            compute_diamond: false,
            solve_opts: SolveOpts::default(),
            metric_opts: OptimOpts::default(),
        }
    }
}

/// One learning iteration's record; exactly the columns of the CSV trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub obs_key: String,
    /// Shot estimate from this iteration.
    pub s_hat: f64,
    /// Running average for this observable after folding in `s_hat`.
    pub s_avg: f64,
    /// Trace distance between the normalized Choi states of guess and
    /// truth.
    pub choi_td: f64,
    /// Diamond distance to the truth, when computed.
    pub diamond: Option<f64>,
    /// Channel relative entropy `D(M^(t) ‖ truth)`; `+∞` when the guess
    /// leaves the truth's support.
    pub rel_ent: f64,
}

/// Full record of a learning run.
#[derive(Debug, Clone)]
pub struct LearningTrace {
    /// Per-iteration records, `t = 1..=iterations` strictly increasing.
    pub records: Vec<TraceRecord>,
    /// Echo of the configuration that produced the trace.
    pub config: LearnConfig,
    /// Iterations whose update solve did not converge; the previous guess
    /// was kept there.
    pub failed_steps: Vec<usize>,
    /// The final learned channel `M^(T)`.
    pub final_choi: ChoiMatrix,
}

const CSV_HEADER: [&str; 7] = ["t", "obs_key", "s_hat", "s_avg", "choi_td", "diamond", "rel_ent"];

fn fmt_f64(v: f64) -> String {
    // `{}` prints the shortest digits that parse back to the same bits,
    // and renders infinities as "inf".
    format!("{v}")
}

impl LearningTrace {
    /// Writes the records as CSV with header
    /// `t,obs_key,s_hat,s_avg,choi_td,diamond,rel_ent`. Infinite relative
    /// entropies serialize as `inf`; a skipped diamond metric is an empty
    /// field.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LearnError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(CSV_HEADER)?;
        for r in &self.records {
            wtr.write_record(&[
                r.t.to_string(),
                r.obs_key.clone(),
                fmt_f64(r.s_hat),
                fmt_f64(r.s_avg),
                fmt_f64(r.choi_td),
                r.diamond.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.rel_ent),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads records written by [`LearningTrace::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Vec<TraceRecord>, LearnError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let mut out = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2; // 1-based, after the header line
            let field = |j: usize| -> Result<&str, LearnError> {
                rec.get(j).ok_or(LearnError::MalformedRow {
                    row,
                    context: format!("missing column {}", CSV_HEADER[j]),
                })
            };
            let num = |j: usize| -> Result<f64, LearnError> {
                field(j)?.parse().map_err(|_| LearnError::MalformedRow {
                    row,
                    context: format!("column {} is not a number", CSV_HEADER[j]),
                })
            };
            let diamond_raw = field(5)?;
            out.push(TraceRecord {
                t: field(0)?.parse().map_err(|_| LearnError::MalformedRow {
                    row,
                    context: "column t is not an integer".into(),
                })?,
                obs_key: field(1)?.to_string(),
                s_hat: num(2)?,
                s_avg: num(3)?,
                choi_td: num(4)?,
                diamond: if diamond_raw.is_empty() { None } else { Some(num(5)?) },
                rel_ent: num(6)?,
            });
        }
        Ok(out)
    }
}

/// Runs the online learner against a simulated truth channel.
///
/// Starts from the completely depolarizing guess. Each iteration draws an
/// observable uniformly from `ensemble`, simulates a `shots`-shot estimate,
/// updates that observable's running average, and solves the update
/// problem; a non-converged solve keeps the previous guess and logs the
/// iteration in `failed_steps`. Metrics recorded per iteration refer to
/// the post-update guess. Identical `(truth, ensemble, config)` give a
/// bit-identical trace.
pub fn run_learning(
    truth: &ChoiMatrix,
    ensemble: &[ObservableSpec],
    config: &LearnConfig,
) -> Result<LearningTrace, LearnError> {
    if ensemble.is_empty() {
        return Err(LearnError::EmptyEnsemble);
    }
    if config.iterations < 1 {
        return Err(LearnError::ParamOutOfRange { context: "iterations must be >= 1".into() });
    }
    if config.shots < 1 {
        return Err(LearnError::ParamOutOfRange { context: "shots must be >= 1".into() });
    }
    if !(config.eta > 0.0) {
        return Err(LearnError::ParamOutOfRange { context: "eta must be > 0".into() });
    }
    let (db, dr) = (truth.dim_b(), truth.dim_r());
    for obs in ensemble {
        if !obs.matches(db, dr) {
            return Err(LearnError::ShapeMismatch { key: obs.key.clone() });
        }
    }
    crate::init_thread_pool();

    let mut m = ChoiMatrix::completely_depolarizing(db, dr);
    let mut averages: HashMap<String, (f64, usize)> = HashMap::new();
    let mut draw_rng = substream(config.seed, 1);
    let mut shot_seeds = substream(config.seed, 2);
    let mut records = Vec::with_capacity(config.iterations);
    let mut failed_steps = Vec::new();

    for t in 1..=config.iterations {
        let obs = &ensemble[draw_rng.random_range(0..ensemble.len())];
        let s_hat = simulate_expectation(truth, obs, config.shots, shot_seeds.random());
        let entry = averages.entry(obs.key.clone()).or_insert((0.0, 0));
        let s_avg = running_average(entry.0, entry.1, s_hat);
        *entry = (s_avg, entry.1 + 1);

        match learn_step(&m, obs, s_avg, config.eta, &config.solve_opts) {
            Ok(next) => m = next,
            Err(MaxEntError::NotConverged { .. }) => failed_steps.push(t),
            Err(e) => return Err(e.into()),
        }

        let diff = HermitianOperator::hermitize(m.mat() - truth.mat());
        let choi_td = 0.5 * trace_norm_hermitian(diff.mat()) / dr as f64;
        let rel_ent = match channel_relative_entropy(&m, truth, &config.metric_opts) {
            Ok(rep) => rep.value,
            // The best ascent value is still a valid lower bound; good
            // enough for a diagnostic curve.
            Err(EntropyError::NotConverged { best_value, .. }) => best_value,
            Err(e) => return Err(e.into()),
        };
        let diamond = if config.compute_diamond {
            Some(match diamond_distance(&m, truth, &config.metric_opts) {
                Ok(rep) => rep.value,
                Err(EntropyError::NotConverged { best_value, .. }) => best_value,
                Err(e) => return Err(e.into()),
            })
        } else {
            None
        };
        records.push(TraceRecord {
            t,
            obs_key: obs.key.clone(),
            s_hat,
            s_avg,
            choi_td,
            diamond,
            rel_ent,
        });
    }
    Ok(LearningTrace { records, config: config.clone(), failed_steps, final_choi: m })
}

/// Pauli X as a Hermitian operator.
pub fn pauli_x() -> HermitianOperator {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m[(1, 0)] = C64::new(1.0, 0.0);
    HermitianOperator::new(m).expect("Pauli X is Hermitian")
}

/// Pauli Y as a Hermitian operator.
pub fn pauli_y() -> HermitianOperator {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    HermitianOperator::new(m).expect("Pauli Y is Hermitian")
}

/// Pauli Z as a Hermitian operator.
pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::from_real_diag(&[1.0, -1.0])
}

/// Qubit depolarizing channel: with probability `p` one of the three
/// non-identity Paulis is applied (p/3 each), so the Bell-basis weights
/// are `(1−p, p/3, p/3, p/3)`.
pub fn depolarizing_choi(p: f64) -> Result<ChoiMatrix, LearnError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LearnError::ParamOutOfRange {
            context: format!("depolarizing probability {p} outside [0, 1]"),
        });
    }
    let probs = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
    let mut m = CMat::zeros(4, 4);
    for z in 0..2 {
        for x in 0..2 {
            let v = bell_vector(2, z, x);
            m += (&v * v.adjoint()).scale(2.0 * probs[z * 2 + x]);
        }
    }
    Ok(ChoiMatrix::from_mat(2, 2, m).expect("Bell mixture is a channel"))
}

/// Qubit amplitude damping channel with decay probability `gamma`, Kraus
/// operators `K₁ = diag(1, √(1−γ))` and `K₂ = √γ |0⟩⟨1|`.
pub fn amplitude_damping_choi(gamma: f64) -> Result<ChoiMatrix, LearnError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(LearnError::ParamOutOfRange {
            context: format!("damping probability {gamma} outside [0, 1]"),
        });
    }
    let mut k1 = CMat::zeros(2, 2);
    k1[(0, 0)] = C64::new(1.0, 0.0);
    k1[(1, 1)] = C64::new((1.0 - gamma).sqrt(), 0.0);
    let mut k2 = CMat::zeros(2, 2);
    k2[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
    // Choi entry ((b,r),(b',r')) = Σ_i K_i[b,r] · conj(K_i[b',r']).
    let mut m = CMat::zeros(4, 4);
    for k in [&k1, &k2] {
        for b in 0..2 {
            for r in 0..2 {
                for bp in 0..2 {
                    for rp in 0..2 {
                        m[(b * 2 + r, bp * 2 + rp)] += k[(b, r)] * k[(bp, rp)].conj();
                    }
                }
            }
        }
    }
    Ok(ChoiMatrix::from_mat(2, 2, m).expect("Kraus construction is a channel"))
}

/// The standard single-qubit learning ensemble: the three non-identity
/// Paulis measured after each of the six stabilizer states, 18 factored
/// observables. The input-state set is closed under transposition, so the
/// physically prepared states are stabilizer states too.
pub fn stabilizer_pauli_ensemble() -> Vec<ObservableSpec> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets: [(&str, CVec); 6] = [
        ("z0", CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])),
        ("z1", CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])),
        ("xp", CVec::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)])),
        ("xm", CVec::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)])),
        ("yp", CVec::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, s)])),
        ("ym", CVec::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, -s)])),
    ];
    let paulis = [("X", pauli_x()), ("Y", pauli_y()), ("Z", pauli_z())];
    let mut out = Vec::with_capacity(18);
    for (pn, p) in &paulis {
        for (sn, ket) in &kets {
            let rho = DensityOperator::pure(ket).expect("stabilizer kets are normalized");
            out.push(ObservableSpec::factored(format!("{pn}@{sn}"), p.clone(), rho));
        }
    }
    out
}
