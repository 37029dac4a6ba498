//! Built-in oracle suite: every item compares a solver output against an
//! independent closed form or identity and reports one pass/fail line.
//! Items run concurrently; output ordering is fixed by item index.

use rayon::prelude::*;

use thermch::entropy::{channel_entropy, thermodynamic_capacity, OptimOpts};
use thermch::exemplars::{
    average_energy_problem, avg_energy_thermal, beta_for_energy, pauli_maxent, pauli_problem,
    replacer_problem, replacer_thermal, strict_energy_problem, strict_energy_thermal,
};
use thermch::maxent::{solve_thermal_channel, MaxEntProblem, SolveOpts, ThermalSolution};
use thermch::qcore::{
    bell_pinching, bell_vector, complement_channel, random_channel, random_hermitian, seeded_rng,
    substream, CMat, ChoiMatrix, C64,
};
use thermch::schurweyl::{
    definetti_state, dim_p, dim_q, schur_projector, verify_block_compat, young_diagrams,
};

use crate::Failure;

type ItemResult = Result<String, String>;

fn opts(seed: u64) -> SolveOpts {
    SolveOpts { seed, ..SolveOpts::default() }
}

fn entropy_opts(seed: u64) -> OptimOpts {
    OptimOpts { seed, ..OptimOpts::default() }
}

fn solve(problem: &MaxEntProblem, seed: u64) -> Result<ThermalSolution, String> {
    solve_thermal_channel(problem, &opts(seed)).map_err(|e| format!("solver failed: {e}"))
}

/// The certificate itself is part of every item's pass condition.
fn certified(sol: &ThermalSolution) -> Result<(), String> {
    let worst = sol.residuals.worst();
    if worst <= 1e-6 && sol.residuals.g_min_eigenvalue >= -1e-8 {
        Ok(())
    } else {
        Err(format!(
            "certificate violated: worst residual {worst:.3e}, min eig {:.3e}",
            sol.residuals.g_min_eigenvalue
        ))
    }
}

fn within(got: f64, want: f64, tol: f64, what: &str) -> Result<f64, String> {
    let dev = (got - want).abs();
    if dev <= tol {
        Ok(dev)
    } else {
        Err(format!("{what}: got {got}, want {want} (dev {dev:.3e} > {tol:.0e})"))
    }
}

fn unconstrained_qubit(seed: u64) -> ItemResult {
    let sol = solve(&MaxEntProblem::new(2, 2), seed)?;
    certified(&sol)?;
    let dev = sol.choi.frobenius_distance(&ChoiMatrix::completely_depolarizing(2, 2));
    if dev > 1e-6 {
        return Err(format!("choi deviates from the flat channel by {dev:.3e}"));
    }
    let gap = within(sol.achieved, 2.0f64.ln(), 1e-6, "entropy")?;
    Ok(format!("choi dev {dev:.2e}, entropy gap {gap:.2e}"))
}

fn replacer_closed_form(seed: u64) -> ItemResult {
    let mut rng = seeded_rng(seed);
    let mut worst_dev = 0.0f64;
    for k in 0..3 {
        let h = random_hermitian(&mut rng, 2);
        let (evals, _) = h.eigh();
        let (lo, hi) = (evals[0], evals[1]);
        let q = lo + (0.2 + 0.2 * k as f64) * (hi - lo);
        let sol = solve(&replacer_problem(&h, q), seed + k as u64)?;
        certified(&sol)?;
        let oracle = replacer_thermal(&h, q).map_err(|e| e.to_string())?;
        let dev = sol.choi.frobenius_distance(&oracle);
        if dev > 1e-4 {
            return Err(format!("instance {k}: choi deviates from gamma x 1 by {dev:.3e}"));
        }
        let cons = sol.residuals.constraint_residuals[0];
        if cons > 1e-6 {
            return Err(format!("instance {k}: energy constraint missed by {cons:.3e}"));
        }
        worst_dev = worst_dev.max(dev);
    }
    Ok(format!("3 instances, worst choi dev {worst_dev:.2e}"))
}

fn strict_energy_closed_form(seed: u64) -> ItemResult {
    let h = thermch::HermitianOperator::from_real_diag(&[0.0, 1.0]);
    let sol = solve(&strict_energy_problem(&h), seed)?;
    certified(&sol)?;
    let (oracle, value) = strict_energy_thermal(&h);
    let dev = sol.choi.frobenius_distance(&oracle);
    if dev > 1e-4 {
        return Err(format!("choi deviates from the closed form by {dev:.3e}"));
    }
    let gap = within(sol.achieved, value, 1e-5, "entropy")?;
    Ok(format!("choi dev {dev:.2e}, entropy gap {gap:.2e}"))
}

fn average_energy_qutrit(seed: u64) -> ItemResult {
    let h = thermch::HermitianOperator::from_real_diag(&[0.0, 1.0, 2.0]);
    let sol = solve(&average_energy_problem(&h), seed)?;
    certified(&sol)?;
    let (oracle, value) = avg_energy_thermal(&h);
    let dev = sol.choi.frobenius_distance(&oracle);
    if dev > 1e-4 {
        return Err(format!("choi deviates from the closed form by {dev:.3e}"));
    }
    let gap = within(sol.achieved, value, 1e-5, "entropy")?;
    Ok(format!("choi dev {dev:.2e}, entropy gap {gap:.2e}"))
}

fn pauli_entropy_identity(seed: u64) -> ItemResult {
    let mut rng = substream(seed, 11);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let raw: Vec<f64> =
            (0..4).map(|_| rand::Rng::random_range(&mut rng, 0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let mut m = CMat::zeros(4, 4);
        for z in 0..2 {
            for x in 0..2 {
                let v = bell_vector(2, z, x);
                m += (&v * v.adjoint()).scale(2.0 * p[z * 2 + x]);
            }
        }
        let choi = ChoiMatrix::from_mat(2, 2, m).map_err(|e| e.to_string())?;
        let report = channel_entropy(&choi, &entropy_opts(seed)).map_err(|e| e.to_string())?;
        let shannon: f64 = p.iter().map(|&v| -v * v.ln()).sum();
        let dev = within(report.value, shannon - 2.0f64.ln(), 1e-8, "pauli entropy")?;
        worst = worst.max(dev);
    }
    Ok(format!("2 random distributions, worst gap {worst:.2e}"))
}

fn capacity_complement_duality(seed: u64) -> ItemResult {
    let n = random_channel(seed.wrapping_add(23), 2, 2).map_err(|e| e.to_string())?;
    let s = channel_entropy(&n, &entropy_opts(seed)).map_err(|e| e.to_string())?;
    let comp = complement_channel(&n, 1e-9).map_err(|e| e.to_string())?;
    let t = thermodynamic_capacity(&comp, &entropy_opts(seed)).map_err(|e| e.to_string())?;
    let dev = within(s.value, -t.value, 2e-3, "entropy vs minus complement capacity")?;
    Ok(format!("duality gap {dev:.2e}"))
}

fn bell_diagonal_reduction(seed: u64) -> ItemResult {
    let constraint = (vec![0.0, 1.0, 1.0, 0.0], 0.4);
    let sol = solve(&pauli_problem(2, &[constraint.clone()]), seed)?;
    certified(&sol)?;
    let off_bell = (sol.choi.mat() - bell_pinching(sol.choi.mat(), 2)).norm();
    if off_bell > 1e-8 {
        return Err(format!("off-Bell weight {off_bell:.3e}"));
    }
    let (_, oracle) = pauli_maxent(2, &[constraint]).map_err(|e| e.to_string())?;
    let dev = sol.choi.frobenius_distance(&oracle);
    if dev > 1e-6 {
        return Err(format!("choi deviates from classical max-ent by {dev:.3e}"));
    }
    Ok(format!("off-Bell {off_bell:.2e}, classical dev {dev:.2e}"))
}

fn gibbs_beta_bisection(_seed: u64) -> ItemResult {
    let h = thermch::HermitianOperator::from_real_diag(&[0.0, 1.0]);
    let beta = beta_for_energy(&h, 0.3).map_err(|e| e.to_string())?;
    let dev = within(beta, (7.0f64 / 3.0).ln(), 1e-9, "inverse temperature")?;
    Ok(format!("beta gap {dev:.2e}"))
}

fn schur_weyl_identities(_seed: u64) -> ItemResult {
    // Dimension identity at every supported scale.
    for d in 1..=4usize {
        for n in 1..=6usize {
            let mut total = 0u64;
            for lam in young_diagrams(d, n).map_err(|e| e.to_string())? {
                total += dim_p(&lam).map_err(|e| e.to_string())?
                    * dim_q(&lam, d).map_err(|e| e.to_string())?;
            }
            if total != (d as u64).pow(n as u32) {
                return Err(format!("dimension sum {total} != {d}^{n}"));
            }
        }
    }
    // Projector completeness and the two cross-construction identities.
    let (d, n) = (2usize, 3usize);
    let dim = d.pow(n as u32);
    let mut sum = CMat::zeros(dim, dim);
    for lam in young_diagrams(d, n).map_err(|e| e.to_string())? {
        sum += schur_projector(&lam, d, n).map_err(|e| e.to_string())?.mat();
    }
    sum -= CMat::from_diagonal_element(dim, dim, C64::new(1.0, 0.0));
    let completeness = sum.norm();
    if completeness > 1e-10 {
        return Err(format!("completeness residual {completeness:.3e}"));
    }
    let gap = definetti_state(2, 3).map_err(|e| e.to_string())?.gap;
    if gap > 1e-10 {
        return Err(format!("de Finetti construction gap {gap:.3e}"));
    }
    let compat = verify_block_compat(2, 2, 2).map_err(|e| e.to_string())?;
    if compat > 1e-10 {
        return Err(format!("block compatibility residual {compat:.3e}"));
    }
    Ok(format!(
        "completeness {completeness:.2e}, definetti gap {gap:.2e}, block compat {compat:.2e}"
    ))
}

pub fn run(seed: u64) -> Result<(), Failure> {
    let items: Vec<(&str, fn(u64) -> ItemResult)> = vec![
        ("unconstrained-qubit-channel", unconstrained_qubit),
        ("replacer-closed-form", replacer_closed_form),
        ("strict-energy-closed-form", strict_energy_closed_form),
        ("average-energy-qutrit", average_energy_qutrit),
        ("pauli-entropy-identity", pauli_entropy_identity),
        ("capacity-complement-duality", capacity_complement_duality),
        ("bell-diagonal-reduction", bell_diagonal_reduction),
        ("gibbs-beta-bisection", gibbs_beta_bisection),
        ("schur-weyl-identities", schur_weyl_identities),
    ];
    let results: Vec<ItemResult> =
        items.par_iter().map(|(_, f)| f(seed)).collect();

    let mut failed = Vec::new();
    for (i, ((name, _), result)) in items.iter().zip(&results).enumerate() {
        match result {
            Ok(detail) => println!("{:>2}  {name:<30} PASS  {detail}", i + 1),
            Err(detail) => {
                println!("{:>2}  {name:<30} FAIL  {detail}", i + 1);
                failed.push(*name);
            }
        }
    }
    println!(
        "{} checks: {} passed, {} failed",
        items.len(),
        items.len() - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(
            "verification_failed",
            serde_json::json!({"failed": failed}),
        ))
    }
}
