//! Command-line surface for the thermal-channel toolkit: problem
//! ingestion, solver invocation, learning experiments, verification
//! suites, and plot-ready CSV/JSON emission.
//!
//! Exit codes: 0 when every requested check passes, 1 when a solve or
//! verification fails (infeasible problem, missed tolerance, red suite
//! item), 2 on parse or I/O errors. Failures also emit a single
//! machine-readable JSON object on stderr. Identical command line and seed
//! produce byte-identical output files.

mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use thermch::learn::{
    amplitude_damping_choi, depolarizing_choi, run_learning, stabilizer_pauli_ensemble,
    LearnConfig,
};
use thermch::maxent::{solve_fixed_input, solve_thermal_channel, MaxEntError, MaxEntProblem, SolveOpts};
use thermch::schurweyl::{
    definetti_state, dim_p, dim_q, schur_projector, verify_block_compat, young_diagrams,
    SchurWeylError,
};
use thermch::{ChoiMatrix, InputState};

#[derive(Parser)]
#[command(
    name = "thermch",
    version,
    about = "Maximum-entropy channel solver, channel learning, and verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a constrained channel-entropy problem from a JSON file and
    /// write the solution channel with its optimality certificate.
    Solve(SolveArgs),
    /// Run a simulated channel-learning experiment against a truth channel
    /// and write the per-iteration trace as CSV.
    Learn(LearnArgs),
    /// Run the built-in oracle suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Check symmetric-subspace identities at one copy number and emit a
    /// JSON residual report.
    Schurweyl(SchurweylArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON: dimensions, constraints, optional reference).
    input: PathBuf,
    /// Output path for the solution JSON.
    #[arg(short, long)]
    output: PathBuf,
    /// Certificate residual target.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for the randomized input-search starts.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Multi-start count for the input search.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Hold the input state fixed at the density matrix in this JSON file
    /// instead of optimizing over inputs.
    #[arg(long)]
    input_state: Option<PathBuf>,
    /// Reject rank-deficient fixed inputs instead of solving a regularized
    /// limit.
    #[arg(long)]
    no_regularize: bool,
}

#[derive(Args)]
struct LearnArgs {
    /// Truth channel: `depolarizing:P`, `amplitude-damping:G`, or
    /// `@choi.json`.
    #[arg(long)]
    truth: String,
    /// Learning rate.
    #[arg(long, default_value_t = 0.15)]
    eta: f64,
    /// Shots per expectation estimate.
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    /// Number of learning iterations.
    #[arg(short = 'T', long, default_value_t = 300)]
    iterations: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Also record the diamond distance to the truth each iteration
    /// (runs an optimization per iteration).
    #[arg(long)]
    diamond: bool,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Optional path for the final learned Choi matrix (JSON).
    #[arg(long)]
    final_choi: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the randomized suite items.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct SchurweylArgs {
    /// Copy number.
    #[arg(long)]
    n: usize,
    /// Local dimension.
    #[arg(long)]
    d: usize,
    /// Output path for the JSON report (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A failure to report: exit code plus one JSON object for stderr.
struct Failure {
    code: i32,
    payload: serde_json::Value,
}

impl Failure {
    fn usage(detail: impl Into<String>) -> Self {
        Self {
            code: 2,
            payload: serde_json::json!({"error": "usage", "detail": detail.into()}),
        }
    }

    fn check(kind: &str, payload: serde_json::Value) -> Self {
        let mut obj = serde_json::json!({"error": kind});
        if let (Some(dst), Some(src)) = (obj.as_object_mut(), payload.as_object()) {
            for (k, v) in src {
                dst.insert(k.clone(), v.clone());
            }
        }
        Self { code: 1, payload: obj }
    }
}

fn main() {
    thermch::init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            eprintln!(
                "{}",
                serde_json::json!({"error": "parse", "detail": e.to_string()})
            );
            std::process::exit(2);
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(a) => run_solve(&a),
        Cmd::Learn(a) => run_learn(&a),
        Cmd::Verify(a) => verify::run(a.seed),
        Cmd::Schurweyl(a) => run_schurweyl(&a),
    };
    if let Err(f) = result {
        eprintln!("{}", f.payload);
        std::process::exit(f.code);
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serialization cannot fail");
    out.push(b'\n');
    out
}

fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let problem: MaxEntProblem = serde_json::from_str(&read_to_string(&args.input)?)
        .map_err(|e| Failure::usage(format!("invalid problem file: {e}")))?;
    let opts = SolveOpts {
        tol: args.tol,
        seed: args.seed,
        starts: args.starts,
        regularize_rank_deficient: !args.no_regularize,
        ..SolveOpts::default()
    };
    let solved = match &args.input_state {
        Some(path) => {
            let phi: InputState = serde_json::from_str(&read_to_string(path)?)
                .map_err(|e| Failure::usage(format!("invalid input state file: {e}")))?;
            solve_fixed_input(&problem, &phi, &opts)
        }
        None => solve_thermal_channel(&problem, &opts),
    };
    match solved {
        Ok(sol) => {
            write_bytes(&args.output, &to_pretty_json(&sol))?;
            println!(
                "solved: objective {} nats, worst residual {:.3e}, wrote {}",
                sol.achieved,
                sol.residuals.worst(),
                args.output.display()
            );
            Ok(())
        }
        Err(MaxEntError::Infeasible { min_eigenvalue }) => Err(Failure::check(
            "infeasible",
            serde_json::json!({
                "detail": "no channel satisfies the constraints",
                "minEigenvalue": min_eigenvalue,
            }),
        )),
        Err(MaxEntError::NotConverged { residual, best }) => {
            // The best iterate is still written so the caller can inspect
            // how far the solve got.
            write_bytes(&args.output, &to_pretty_json(&best))?;
            Err(Failure::check(
                "not_converged",
                serde_json::json!({
                    "detail": "residual target missed; best iterate written to the output path",
                    "residual": residual,
                }),
            ))
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}

/// Truth-channel mini-language: `name:param` for the zoo, `@file.json` for
/// an arbitrary Choi matrix.
fn parse_truth(spec: &str) -> Result<ChoiMatrix, Failure> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = read_to_string(Path::new(path))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid Choi file {path}: {e}")));
    }
    let (name, param) = spec
        .split_once(':')
        .ok_or_else(|| Failure::usage(format!("truth spec `{spec}` is not name:param or @file")))?;
    let value: f64 = param
        .parse()
        .map_err(|_| Failure::usage(format!("truth parameter `{param}` is not a number")))?;
    match name {
        "depolarizing" => depolarizing_choi(value),
        "amplitude-damping" => amplitude_damping_choi(value),
        _ => {
            return Err(Failure::usage(format!(
                "unknown truth channel `{name}` (try depolarizing, amplitude-damping, or @file)"
            )))
        }
    }
    .map_err(|e| Failure::usage(e.to_string()))
}

fn run_learn(args: &LearnArgs) -> Result<(), Failure> {
    let truth = parse_truth(&args.truth)?;
    if truth.dim_b() != 2 || truth.dim_r() != 2 {
        return Err(Failure::usage(
            "learning uses the stabilizer observable ensemble, which is qubit-to-qubit",
        ));
    }
    let config = LearnConfig {
        eta: args.eta,
        shots: args.shots,
        iterations: args.iterations,
        seed: args.seed,
        compute_diamond: args.diamond,
        ..LearnConfig::default()
    };
    let trace = run_learning(&truth, &stabilizer_pauli_ensemble(), &config)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let mut csv_bytes = Vec::new();
    trace
        .write_csv(&mut csv_bytes)
        .map_err(|e| Failure::usage(e.to_string()))?;
    write_bytes(&args.output, &csv_bytes)?;
    if let Some(path) = &args.final_choi {
        write_bytes(path, &to_pretty_json(&trace.final_choi))?;
    }
    let last = trace.records.last().expect("iterations >= 1");
    println!(
        "learned {} iterations: final choi trace distance {}, {} failed update steps, wrote {}",
        args.iterations,
        last.choi_td,
        trace.failed_steps.len(),
        args.output.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
#[serde(rename_all = "camelCase")]
struct SchurweylReport {
    n: usize,
    d: usize,
    /// Sum of products of paired irrep dimensions; must equal d^n.
    dimension_sum: u64,
    dimension_expected: u64,
    completeness_residual: f64,
    orthogonality_residual: f64,
    idempotence_residual: f64,
    trace_residual: f64,
    /// Gap between the two de Finetti constructions; absent when the
    /// doubled system exceeds the supported scale.
    definetti_gap: Option<f64>,
    /// Block-compatibility residual on two same-dimension factors; absent
    /// beyond the supported scale.
    block_compat_residual: Option<f64>,
    tolerance: f64,
    pass: bool,
}

fn run_schurweyl(args: &SchurweylArgs) -> Result<(), Failure> {
    let scale_err = |e: SchurWeylError| Failure::usage(e.to_string());
    let (n, d) = (args.n, args.d);
    let lams = young_diagrams(d.min(4), n).map_err(scale_err)?;

    let mut dimension_sum = 0u64;
    let mut projs = Vec::new();
    for lam in &lams {
        dimension_sum += dim_p(lam).map_err(scale_err)? * dim_q(lam, d).map_err(scale_err)?;
        projs.push((lam.clone(), schur_projector(lam, d, n).map_err(scale_err)?));
    }
    let dim = d.pow(n as u32);
    let mut completeness = thermch::qcore::CMat::identity(dim, dim);
    let mut orthogonality = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut trace_residual = 0.0f64;
    for (i, (lam, p)) in projs.iter().enumerate() {
        completeness -= p.mat();
        idempotence = idempotence.max((p.mat() * p.mat() - p.mat()).norm());
        let want = (dim_p(lam).map_err(scale_err)? * dim_q(lam, d).map_err(scale_err)?) as f64;
        trace_residual = trace_residual.max((p.mat().trace().re - want).abs());
        for (_, q) in projs.iter().take(i) {
            orthogonality = orthogonality.max((p.mat() * q.mat()).norm());
        }
    }
    let completeness_residual = completeness.norm();

    let definetti_gap = definetti_state(d, n).ok().map(|s| s.gap);
    let block_compat_residual = verify_block_compat(n, d, d).ok();

    let tolerance = 1e-10;
    let pass = dimension_sum == (d as u64).pow(n as u32)
        && completeness_residual <= tolerance
        && orthogonality <= tolerance
        && idempotence <= tolerance
        && trace_residual <= 1e-9
        && definetti_gap.is_none_or(|g| g <= tolerance)
        && block_compat_residual.is_none_or(|r| r <= tolerance);

    let report = SchurweylReport {
        n,
        d,
        dimension_sum,
        dimension_expected: (d as u64).pow(n as u32),
        completeness_residual,
        orthogonality_residual: orthogonality,
        idempotence_residual: idempotence,
        trace_residual,
        definetti_gap,
        block_compat_residual,
        tolerance,
        pass,
    };
    let bytes = to_pretty_json(&report);
    match &args.output {
        Some(path) => write_bytes(path, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::check(
            "schurweyl_residuals",
            serde_json::json!({"detail": "an identity residual exceeded tolerance"}),
        ))
    }
}
