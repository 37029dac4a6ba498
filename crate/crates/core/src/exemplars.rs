//! Closed-form thermal channels and their classical reductions.
//!
//! Everything here is computed by an independent route from the solver in
//! [`crate::maxent`]: Gibbs states by spectral bisection, energy-structured
//! channels assembled block by block, and the Pauli/classical cases through
//! a plain finite-dimensional maximum-entropy Newton iteration. The module
//! doubles as the solver's oracle set, so the two code paths must never be
//! merged. Also hosts the unitary passivity probe, a falsification test for
//! solved instances.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::maxent::{LinearConstraint, MaxEntProblem, ThermalSolution};
use crate::qcore::{
    bell_vector, kron, random_unitary, substream, tr_re, C64, CMat, ChoiMatrix, DensityOperator,
    HermitianOperator,
};

/// Eigenvalue clustering tolerance for the energy-structured constructions.
const CLUSTER_TOL: f64 = 1e-8;
/// Inverse-temperature cap during bisection; beyond this the Gibbs state is
/// numerically indistinguishable from the edge projector state.
const BETA_CAP: f64 = 700.0;

#[derive(Debug, Error)]
pub enum ExemplarsError {
    #[error("target energy {energy} outside the spectrum [{min}, {max}]")]
    EnergyOutOfRange { energy: f64, min: f64, max: f64 },
    #[error("classical maximum-entropy iteration did not converge (residual {residual:.3e}); targets likely infeasible")]
    Infeasible { residual: f64 },
    #[error("invalid exemplar input: {context}")]
    Invalid { context: String },
}

/// A Gibbs state together with its defining data.
#[derive(Debug, Clone)]
pub struct GibbsSpec {
    pub h: HermitianOperator,
    /// Inverse temperature; `±INFINITY` selects the edge eigenprojector
    /// state (zero-temperature convention).
    pub beta: f64,
    /// Partition function; `None` at infinite beta, where it is undefined.
    pub z: Option<f64>,
    pub gamma: DensityOperator,
}

impl GibbsSpec {
    pub fn new(h: &HermitianOperator, beta: f64) -> Result<Self, ExemplarsError> {
        let gamma = gibbs(h, beta);
        let z = if beta.is_finite() {
            let (vals, _) = h.eigh();
            let z: f64 = vals.iter().map(|&l| (-beta * l).exp()).sum();
            if !z.is_finite() || z <= 0.0 {
                return Err(ExemplarsError::Invalid {
                    context: format!("partition function overflows at beta = {beta}"),
                });
            }
            Some(z)
        } else {
            None
        };
        Ok(Self { h: h.clone(), beta, z, gamma })
    }
}

/// Groups an ascending eigenvalue list into near-degenerate clusters;
/// returns (representative value, member indices) per cluster.
fn cluster_eigs(vals: &DVector<f64>) -> Vec<(f64, Vec<usize>)> {
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match clusters.last_mut() {
            Some((rep, members)) if (v - *rep).abs() <= CLUSTER_TOL => members.push(i),
            _ => clusters.push((v, vec![i])),
        }
    }
    clusters
}

/// Orthogonal projector onto the listed eigenvector columns.
fn projector(vecs: &CMat, members: &[usize]) -> CMat {
    let d = vecs.nrows();
    let mut p = CMat::zeros(d, d);
    for &i in members {
        let v = vecs.column(i);
        p += v * v.adjoint();
    }
    p
}

/// The Gibbs state exp(−βH)/Z, with `β = ±∞` mapping to the normalized
/// projector onto the bottom/top near-degenerate eigenspace.
pub fn gibbs(h: &HermitianOperator, beta: f64) -> DensityOperator {
    let (vals, vecs) = h.eigh();
    let clusters = cluster_eigs(&vals);
    if beta.is_infinite() {
        let (_, members) = if beta == f64::INFINITY {
            clusters.first().expect("nonempty spectrum")
        } else {
            clusters.last().expect("nonempty spectrum")
        };
        let p = projector(&vecs, members).scale(1.0 / members.len() as f64);
        return DensityOperator::from_mat(p).expect("projector state is valid");
    }
    // Shift so the largest Boltzmann exponent is zero; immune to overflow.
    let shift = vals.iter().map(|&l| -beta * l).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = vals.iter().map(|&l| (-beta * l - shift).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DensityOperator::from_mat(crate::qcore::from_eigh(&probs, &vecs))
        .expect("normalized Boltzmann weights form a state")
}

/// Mean energy of the Gibbs state at inverse temperature `beta`, computed
/// on the eigenvalue list alone.
fn gibbs_energy(vals: &[f64], beta: f64) -> f64 {
    let shift = vals.iter().map(|&l| -beta * l).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut num = 0.0;
    for &l in vals {
        let w = (-beta * l - shift).exp();
        z += w;
        num += l * w;
    }
    num / z
}

/// Inverts tr(γ_β H) = E for β by bisection; the expectation is strictly
/// decreasing in β. Edge energies return ±∞ (zero-temperature convention).
pub fn beta_for_energy(h: &HermitianOperator, e: f64) -> Result<f64, ExemplarsError> {
    let (vals, _) = h.eigh();
    let lmin = vals[0];
    let lmax = vals[vals.len() - 1];
    let scale = 1.0f64.max(lmin.abs()).max(lmax.abs());
    if e < lmin - 1e-9 * scale || e > lmax + 1e-9 * scale {
        return Err(ExemplarsError::EnergyOutOfRange { energy: e, min: lmin, max: lmax });
    }
    if lmax - lmin <= CLUSTER_TOL {
        // Flat spectrum: every β gives the same state.
        return Ok(0.0);
    }
    if e <= lmin + 1e-12 * scale {
        return Ok(f64::INFINITY);
    }
    if e >= lmax - 1e-12 * scale {
        return Ok(f64::NEG_INFINITY);
    }
    let evals: Vec<f64> = vals.iter().copied().collect();
    let mut lo = -BETA_CAP;
    let mut hi = BETA_CAP;
    // The target may still be unreachable inside the cap (it sits within
    // ~e^{-700·gap} of an edge); the capped endpoint is then the best
    // finite answer and meets the stated tolerance for generic spectra.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let val = gibbs_energy(&evals, mid);
        if (val - e).abs() <= 1e-13 * scale {
            return Ok(mid);
        }
        if val > e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Thermal replacer channel: trace out the input (dimension equal to the
/// output), emit the Gibbs state with mean energy `q`. Choi is γ_B ⊗ 1_R.
pub fn replacer_thermal(h_b: &HermitianOperator, q: f64) -> Result<ChoiMatrix, ExemplarsError> {
    let beta = beta_for_energy(h_b, q)?;
    let gamma = gibbs(h_b, beta);
    let d = h_b.dim();
    let mat = kron(gamma.mat(), &CMat::identity(d, d));
    Ok(ChoiMatrix::from_mat(d, d, mat).expect("replacer Choi is valid"))
}

/// Measure-and-depolarize within each energy eigenspace: the maximum
/// entropy channel under strict energy conservation. Returns the channel
/// and its entropy, min over eigenspaces of ln(dimension).
pub fn strict_energy_thermal(h: &HermitianOperator) -> (ChoiMatrix, f64) {
    let d = h.dim();
    let (vals, vecs) = h.eigh();
    let mut choi = CMat::zeros(d * d, d * d);
    let mut entropy = f64::INFINITY;
    for (_, members) in cluster_eigs(&vals) {
        let p = projector(&vecs, members.as_slice());
        let dim_e = members.len() as f64;
        choi += kron(&p.scale(1.0 / dim_e), &p.transpose());
        entropy = entropy.min(dim_e.ln());
    }
    (
        ChoiMatrix::from_mat(d, d, choi).expect("block channel is valid"),
        entropy,
    )
}

/// Measure the energy, then emit the Gibbs state whose mean energy equals
/// the outcome: the limiting maximum entropy channel under average energy
/// conservation. Returns the channel and its entropy, min over levels of
/// the Gibbs-state entropy.
pub fn avg_energy_thermal(h: &HermitianOperator) -> (ChoiMatrix, f64) {
    let d = h.dim();
    let (vals, vecs) = h.eigh();
    let mut choi = CMat::zeros(d * d, d * d);
    let mut entropy = f64::INFINITY;
    for (e, members) in cluster_eigs(&vals) {
        let beta = beta_for_energy(h, e).expect("eigenvalue lies in the spectrum range");
        let gamma = gibbs(h, beta);
        let p = projector(&vecs, members.as_slice());
        choi += kron(gamma.mat(), &p.transpose());
        entropy = entropy.min(crate::qcore::von_neumann(&gamma));
    }
    (
        ChoiMatrix::from_mat(d, d, choi).expect("level-Gibbs channel is valid"),
        entropy,
    )
}

/// Column-stochastic matrix T_{k|ℓ} (entry (k, ℓ) is the probability of
/// output k given input ℓ).
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    pub d: usize,
    t: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(t: DMatrix<f64>) -> Result<Self, ExemplarsError> {
        if t.nrows() != t.ncols() || t.nrows() == 0 {
            return Err(ExemplarsError::Invalid {
                context: format!("stochastic matrix must be square, got {}x{}", t.nrows(), t.ncols()),
            });
        }
        for l in 0..t.ncols() {
            let mut sum = 0.0;
            for k in 0..t.nrows() {
                if t[(k, l)] < -1e-12 {
                    return Err(ExemplarsError::Invalid {
                        context: format!("negative entry {} at ({k}, {l})", t[(k, l)]),
                    });
                }
                sum += t[(k, l)];
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(ExemplarsError::Invalid {
                    context: format!("column {l} sums to {sum}, not 1"),
                });
            }
        }
        Ok(Self { d: t.nrows(), t })
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.t
    }
}

/// Shannon entropy in nats with the 0·ln 0 = 0 convention.
fn shannon(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

/// Core classical maximum-entropy iteration over per-column distributions:
/// maximizes Σ_ℓ p_ℓ H(T_{·|ℓ}) subject to Σ_{k,ℓ} c^j_{k,ℓ} T_{k|ℓ} = q_j,
/// giving columns T_{k|ℓ} ∝ exp(p_ℓ^{-1} Σ_j μ_j c^j_{k,ℓ}). Newton steps
/// on μ with the per-column covariance as curvature.
fn maxent_columns(
    cs: &[DMatrix<f64>],
    q: &[f64],
    p: &[f64],
) -> Result<DMatrix<f64>, ExemplarsError> {
    let nj = cs.len();
    let (rows, cols) = if nj > 0 {
        (cs[0].nrows(), cs[0].ncols())
    } else {
        (0, 0)
    };
    if nj != q.len() || (nj > 0 && cols != p.len()) {
        return Err(ExemplarsError::Invalid {
            context: "constraint, target, and input-distribution counts disagree".into(),
        });
    }
    if p.iter().any(|&x| x <= 0.0) {
        return Err(ExemplarsError::Invalid {
            context: "input distribution must be strictly positive".into(),
        });
    }

    let build = |mu: &[f64], rows: usize, cols: usize| -> DMatrix<f64> {
        let mut t = DMatrix::<f64>::zeros(rows, cols);
        for l in 0..cols {
            let mut logits = vec![0.0; rows];
            for (j, c) in cs.iter().enumerate() {
                for (k, logit) in logits.iter_mut().enumerate() {
                    *logit += mu[j] * c[(k, l)] / p[l];
                }
            }
            let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let mut z = 0.0;
            for k in 0..rows {
                let w = (logits[k] - m).exp();
                t[(k, l)] = w;
                z += w;
            }
            for k in 0..rows {
                t[(k, l)] /= z;
            }
        }
        t
    };
    let residual = |t: &DMatrix<f64>| -> Vec<f64> {
        cs.iter()
            .zip(q)
            .map(|(c, &qj)| c.iter().zip(t.iter()).map(|(a, b)| a * b).sum::<f64>() - qj)
            .collect()
    };
    let norm_inf = |r: &[f64]| r.iter().fold(0.0f64, |a, &b| a.max(b.abs()));

    let mut mu = vec![0.0; nj];
    let mut t = build(&mu, rows, cols);
    if nj == 0 {
        return Ok(t);
    }
    let mut r = residual(&t);
    for _ in 0..200 {
        if norm_inf(&r) <= 1e-12 {
            return Ok(t);
        }
        // Newton curvature: per-column covariance of the constraint rows.
        let mut jac = DMatrix::<f64>::zeros(nj, nj);
        for l in 0..cols {
            let means: Vec<f64> = cs
                .iter()
                .map(|c| (0..rows).map(|k| c[(k, l)] * t[(k, l)]).sum::<f64>())
                .collect();
            for a in 0..nj {
                for b in a..nj {
                    let mut cov = 0.0;
                    for k in 0..rows {
                        cov += cs[a][(k, l)] * cs[b][(k, l)] * t[(k, l)];
                    }
                    cov -= means[a] * means[b];
                    let v = cov / p[l];
                    jac[(a, b)] += v;
                    if a != b {
                        jac[(b, a)] += v;
                    }
                }
            }
        }
        let ridge = 1e-14 * (0..nj).map(|i| jac[(i, i)].abs()).fold(1.0f64, f64::max);
        for i in 0..nj {
            jac[(i, i)] += ridge;
        }
        let rhs = DVector::from_iterator(nj, r.iter().map(|&x| -x));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        // Damped step: insist the residual norm drops.
        let mut alpha = 1.0;
        let r0 = norm_inf(&r);
        let mut advanced = false;
        for _ in 0..50 {
            let cand: Vec<f64> = mu.iter().zip(step.iter()).map(|(m, s)| m + alpha * s).collect();
            let tc = build(&cand, rows, cols);
            let rc = residual(&tc);
            if norm_inf(&rc) < r0 {
                mu = cand;
                t = tc;
                r = rc;
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    if norm_inf(&r) <= 1e-12 {
        Ok(t)
    } else {
        Err(ExemplarsError::Infeasible { residual: norm_inf(&r) })
    }
}

/// Classical maximum-entropy problem over d² Bell-basis atoms: the Pauli
/// reduction of the thermal-channel problem. Constraints are pairs of a
/// coefficient list over atoms (index z·d + x) and a target. Returns the
/// atom distribution and the Bell-diagonal Choi Σ p_{z,x} d·|Φ_{z,x}⟩⟨Φ_{z,x}|.
pub fn pauli_maxent(
    d: usize,
    bell_constraints: &[(Vec<f64>, f64)],
) -> Result<(Vec<f64>, ChoiMatrix), ExemplarsError> {
    if d == 0 {
        return Err(ExemplarsError::Invalid { context: "dimension must be positive".into() });
    }
    let atoms = d * d;
    for (c, _) in bell_constraints {
        if c.len() != atoms {
            return Err(ExemplarsError::Invalid {
                context: format!("constraint has {} coefficients, expected {atoms}", c.len()),
            });
        }
    }
    let probs: Vec<f64> = if bell_constraints.is_empty() {
        vec![1.0 / atoms as f64; atoms]
    } else {
        let cs: Vec<DMatrix<f64>> = bell_constraints
            .iter()
            .map(|(c, _)| DMatrix::from_column_slice(atoms, 1, c))
            .collect();
        let q: Vec<f64> = bell_constraints.iter().map(|&(_, qj)| qj).collect();
        let t = maxent_columns(&cs, &q, &[1.0])?;
        (0..atoms).map(|k| t[(k, 0)]).collect()
    };

    let mut choi = CMat::zeros(atoms, atoms);
    for z in 0..d {
        for x in 0..d {
            let v = bell_vector(d, z, x);
            choi += (&v * v.adjoint()).scale(probs[z * d + x] * d as f64);
        }
    }
    Ok((
        probs,
        ChoiMatrix::from_mat(d, d, choi).expect("Bell mixture is a valid Choi"),
    ))
}

/// Closed-form classical thermal channel at a fixed full-support input
/// distribution: columns T_{k|ℓ} ∝ exp(p_ℓ^{-1} Σ_j μ_j c^j_{k,ℓ}) with μ
/// solved so that Σ_{k,ℓ} c^j_{k,ℓ} T_{k|ℓ} = q_j.
pub fn classical_maxent_fixed_input(
    cs: &[DMatrix<f64>],
    q: &[f64],
    p: &[f64],
) -> Result<StochasticMatrix, ExemplarsError> {
    let d = p.len();
    for c in cs {
        if c.nrows() != d || c.ncols() != d {
            return Err(ExemplarsError::Invalid {
                context: format!("constraint must be {d}x{d}, got {}x{}", c.nrows(), c.ncols()),
            });
        }
    }
    if cs.is_empty() {
        return StochasticMatrix::new(DMatrix::from_element(d, d, 1.0 / d as f64));
    }
    let t = maxent_columns(cs, q, p)?;
    StochasticMatrix::new(t)
}

/// Entropy of a classical stochastic mapping: the worst (minimum) column
/// Shannon entropy.
pub fn classical_channel_entropy(t: &StochasticMatrix) -> f64 {
    (0..t.d)
        .map(|l| shannon((0..t.d).map(|k| t.mat()[(k, l)])))
        .fold(f64::INFINITY, f64::min)
}

/// A unitary pair witnessing a passivity violation.
#[derive(Debug, Clone)]
pub struct PassivityWitness {
    pub u_a: CMat,
    pub u_b: CMat,
    /// Value of the first constraint under the rotated channel.
    pub constraint_value: f64,
}

/// Random-unitary passivity probe for a solved instance: a thermal channel
/// should not admit input/output unitaries that strictly lower the first
/// constraint's expectation while keeping every other constraint within
/// tolerance. Assumes the caller oriented the problem so that all μ_j ≥ 0
/// (flip constraint signs otherwise). Returns the first witness found, or
/// None after `trials` attempts (vacuously None for zero trials or an
/// unconstrained problem).
pub fn passivity_probe(
    sol: &ThermalSolution,
    problem: &MaxEntProblem,
    trials: usize,
    seed: u64,
) -> Option<PassivityWitness> {
    if problem.equality.is_empty() {
        return None;
    }
    let da = problem.dim_a;
    let db = problem.dim_b;
    let n = sol.choi.mat();
    for t in 0..trials {
        let u_a = random_unitary(&mut substream(seed, 2 * t as u64), da);
        let u_b = random_unitary(&mut substream(seed, 2 * t as u64 + 1), db);
        let rot = kron(&u_b, &u_a.transpose());
        let n_rot = &rot * n * rot.adjoint();
        let value = |op: &HermitianOperator| tr_re(op.mat(), &n_rot);
        let first = value(&problem.equality[0].op);
        if first >= problem.equality[0].target - 1e-7 {
            continue;
        }
        let others_ok = problem.equality[1..]
            .iter()
            .all(|c| value(&c.op) <= c.target + 1e-7)
            && problem
                .inequality
                .iter()
                .all(|c| value(&c.op) <= c.target + 1e-7);
        if others_ok {
            return Some(PassivityWitness { u_a, u_b, constraint_value: first });
        }
    }
    None
}

/// Constraint set whose maximum entropy channel is the thermal replacer:
/// one output-energy expectation at the maximally mixed input,
/// tr[(H_B ⊗ 1_R/d) N] = q.
pub fn replacer_problem(h_b: &HermitianOperator, q: f64) -> MaxEntProblem {
    let d = h_b.dim();
    let op = HermitianOperator::hermitize(kron(
        h_b.mat(),
        &CMat::identity(d, d).scale(1.0 / d as f64),
    ));
    MaxEntProblem {
        equality: vec![LinearConstraint { op, target: q }],
        ..MaxEntProblem::new(d, d)
    }
}

/// Constraint set forbidding leakage between energy eigenspaces: for each
/// near-degenerate eigenspace E, tr[(Π^E ⊗ (1−Π^E)^t) N] = 0. The maximum
/// entropy channel is the measure-and-depolarize block channel.
pub fn strict_energy_problem(h: &HermitianOperator) -> MaxEntProblem {
    let d = h.dim();
    let (vals, vecs) = h.eigh();
    let eye = CMat::identity(d, d);
    let equality = cluster_eigs(&vals)
        .iter()
        .map(|(_, members)| {
            let p = projector(&vecs, members);
            let complement = (&eye - &p).transpose();
            LinearConstraint {
                op: HermitianOperator::hermitize(kron(&p, &complement)),
                target: 0.0,
            }
        })
        .collect();
    MaxEntProblem { equality, ..MaxEntProblem::new(d, d) }
}

/// Average-energy conservation constraints over a spanning set of pure
/// states σ (the energy eigenbasis completed by pairwise superpositions):
/// tr[(1⊗σ^{t/2})(H_B⊗1 − 1⊗H^t_R)(1⊗σ^{t/2}) N] = 0, which given trace
/// preservation encodes tr[H N(σ)] = tr[H σ].
pub fn average_energy_problem(h: &HermitianOperator) -> MaxEntProblem {
    let d = h.dim();
    let (_, vecs) = h.eigh();
    let eye_b = CMat::identity(d, d);
    let h_r_t = h.mat().transpose();
    let core = kron(h.mat(), &CMat::identity(d, d)) - kron(&eye_b, &h_r_t);

    let mut sigmas: Vec<CMat> = Vec::with_capacity(d * d);
    for k in 0..d {
        let v = vecs.column(k).into_owned();
        sigmas.push(&v * v.adjoint());
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        for l in (k + 1)..d {
            let vk = vecs.column(k);
            let vl = vecs.column(l);
            let plus = (vk.into_owned() + vl.into_owned()).scale(inv_sqrt2);
            sigmas.push(&plus * plus.adjoint());
            let imag = (vk.into_owned() + vl.into_owned() * C64::new(0.0, 1.0)).scale(inv_sqrt2);
            sigmas.push(&imag * imag.adjoint());
        }
    }

    let equality = sigmas
        .iter()
        .map(|sigma| {
            // σ is pure, so σ^{1/2} = σ; transpose moves it to the R leg.
            let s_t = kron(&eye_b, &sigma.transpose());
            LinearConstraint {
                op: HermitianOperator::hermitize(&s_t * &core * &s_t),
                target: 0.0,
            }
        })
        .collect();
    MaxEntProblem { equality, ..MaxEntProblem::new(d, d) }
}

/// Bell-diagonal constraint set matching [`pauli_maxent`]: the atom
/// coefficients become C^j = (1/d) Σ_{z,x} c^j_{z,x} |Φ_{z,x}⟩⟨Φ_{z,x}| so
/// that tr[C^j N] = Σ c^j p for a Bell-diagonal Choi with weights p.
pub fn pauli_problem(d: usize, bell_constraints: &[(Vec<f64>, f64)]) -> MaxEntProblem {
    let equality = bell_constraints
        .iter()
        .map(|(c, q)| {
            let mut op = CMat::zeros(d * d, d * d);
            for z in 0..d {
                for x in 0..d {
                    let v = bell_vector(d, z, x);
                    op += (&v * v.adjoint()).scale(c[z * d + x] / d as f64);
                }
            }
            LinearConstraint { op: HermitianOperator::hermitize(op), target: *q }
        })
        .collect();
    MaxEntProblem { equality, ..MaxEntProblem::new(d, d) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply_channel, random_density, seeded_rng, von_neumann};

    fn diag(entries: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diag(entries)
    }

    #[test]
    fn gibbs_inversion_hits_symmetry_and_edges() {
        let h = diag(&[0.0, 1.0]);
        let beta = beta_for_energy(&h, 0.5).unwrap();
        assert!(beta.abs() < 1e-10);
        assert!((gibbs(&h, beta).mat() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-12);

        let beta_edge = beta_for_energy(&h, 0.0).unwrap();
        assert_eq!(beta_edge, f64::INFINITY);
        let ground = gibbs(&h, beta_edge);
        assert!((ground.mat()[(0, 0)].re - 1.0).abs() < 1e-12);

        let h3 = diag(&[0.0, 1.0, 2.0]);
        let beta3 = beta_for_energy(&h3, 1.0).unwrap();
        assert!(beta3.abs() < 1e-10);
        let gamma3 = gibbs(&h3, beta3);
        assert!((von_neumann(&gamma3) - 3.0f64.ln()).abs() < 1e-12);

        assert!(matches!(
            beta_for_energy(&h, 1.5),
            Err(ExemplarsError::EnergyOutOfRange { .. })
        ));
    }

    #[test]
    fn gibbs_spec_partition_function_normalizes() {
        let h = diag(&[0.0, 0.7, 1.3]);
        let spec = GibbsSpec::new(&h, 1.25).unwrap();
        let z = spec.z.unwrap();
        let direct: f64 = [0.0f64, 0.7, 1.3].iter().map(|l| (-1.25 * l).exp()).sum();
        assert!((z - direct).abs() / direct < 1e-12);
        // tr(exp(−βH))/Z = 1.
        assert!((direct / z - 1.0).abs() < 1e-10);
        assert!(GibbsSpec::new(&h, f64::INFINITY).unwrap().z.is_none());
    }

    #[test]
    fn replacer_frozen_inverse_temperature() {
        // H = diag(0,1), q = 0.3: tr(γH) = γ_11 = e^{-β}/(1+e^{-β}) = 0.3
        // inverts to β = ln(7/3).
        let h = diag(&[0.0, 1.0]);
        let beta = beta_for_energy(&h, 0.3).unwrap();
        assert!((beta - 0.8472978603872037).abs() < 1e-9, "beta {beta}");
        let choi = replacer_thermal(&h, 0.3).unwrap();
        let expect = kron(
            diag(&[0.7, 0.3]).mat(),
            &CMat::identity(2, 2),
        );
        assert!((choi.mat() - expect).norm() < 1e-9);

        // Z-diagonal Hamiltonian at q = 0 is infinite temperature.
        let hz = diag(&[1.0, -1.0]);
        let choi_z = replacer_thermal(&hz, 0.0).unwrap();
        let mixed = kron(&CMat::identity(2, 2).scale(0.5), &CMat::identity(2, 2));
        assert!((choi_z.mat() - mixed).norm() < 1e-10);
    }

    #[test]
    fn strict_energy_blocks_and_entropy() {
        // Nondegenerate spectrum: complete dephasing, entropy 0.
        let (choi, s) = strict_energy_thermal(&diag(&[0.0, 1.0]));
        let dephase = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            crate::qcore::C64::new(1.0, 0.0),
            crate::qcore::C64::new(0.0, 0.0),
            crate::qcore::C64::new(0.0, 0.0),
            crate::qcore::C64::new(1.0, 0.0),
        ]));
        assert!((choi.mat() - dephase).norm() < 1e-12);
        assert_eq!(s, 0.0);

        // One doubly degenerate level: entropy still pinned by the
        // nondegenerate one.
        let (_, s2) = strict_energy_thermal(&diag(&[0.0, 0.0, 1.0]));
        assert_eq!(s2, 0.0);

        // Flat spectrum: a single block, the completely depolarizing channel.
        let (choi3, s3) = strict_energy_thermal(&diag(&[2.0, 2.0, 2.0]));
        let expect = ChoiMatrix::completely_depolarizing(3, 3);
        assert!(choi3.frobenius_distance(&expect) < 1e-12);
        assert!((s3 - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn avg_energy_channel_structure_and_conservation() {
        // Qubit: both levels are spectrum edges, so each Gibbs state is the
        // level projector and the channel dephases completely.
        let (choi, s) = avg_energy_thermal(&diag(&[0.0, 1.0]));
        let (strict, _) = strict_energy_thermal(&diag(&[0.0, 1.0]));
        assert!(choi.frobenius_distance(&strict) < 1e-12);
        assert_eq!(s, 0.0);

        // Qutrit ladder: the middle level relaxes to the maximally mixed
        // state (β = 0), edges stay sharp.
        let h3 = diag(&[0.0, 1.0, 2.0]);
        let (choi3, s3) = avg_energy_thermal(&h3);
        let mut expect = CMat::zeros(9, 9);
        let e = |k: usize| DensityOperator::basis_state(3, k).mat().clone();
        expect += kron(&e(0), &e(0));
        expect += kron(&CMat::identity(3, 3).scale(1.0 / 3.0), &e(1));
        expect += kron(&e(2), &e(2));
        assert!((choi3.mat() - expect).norm() < 1e-9);
        assert!(s3.abs() < 1e-12);

        // Average energy is conserved on random inputs.
        let mut rng = seeded_rng(11);
        for _ in 0..100 {
            let rho = random_density(&mut rng, 3);
            let out = apply_channel(&choi3, &rho).unwrap();
            let before = tr_re(h3.mat(), rho.mat());
            let after = tr_re(h3.mat(), out.mat());
            assert!((before - after).abs() < 1e-8, "drift {}", (before - after).abs());
        }

        // Flat spectrum: completely depolarizing.
        let (choi_flat, s_flat) = avg_energy_thermal(&diag(&[1.0, 1.0]));
        assert!(choi_flat.frobenius_distance(&ChoiMatrix::completely_depolarizing(2, 2)) < 1e-12);
        assert!((s_flat - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pauli_maxent_symmetric_solutions() {
        // No constraints: uniform.
        let (p, choi) = pauli_maxent(2, &[]).unwrap();
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-12));
        assert!(choi.frobenius_distance(&ChoiMatrix::completely_depolarizing(2, 2)) < 1e-10);

        // Bell-sampling constraint p_00 = 0.9: remainder spreads uniformly.
        let mut c = vec![0.0; 4];
        c[0] = 1.0;
        let (p2, _) = pauli_maxent(2, &[(c, 0.9)]).unwrap();
        assert!((p2[0] - 0.9).abs() < 1e-10);
        for &x in &p2[1..] {
            assert!((x - 0.1 / 3.0).abs() < 1e-10);
        }

        // Two-atom sum constraint: symmetry forces 1/4 everywhere.
        let mut c2 = vec![0.0; 4];
        c2[0] = 1.0;
        c2[1] = 1.0;
        let (p3, _) = pauli_maxent(2, &[(c2, 0.5)]).unwrap();
        assert!(p3.iter().all(|&x| (x - 0.25).abs() < 1e-10));

        // Qutrit with p_00 = 0.5: frozen independent check of the
        // normalization (rest uniform at 0.5/8).
        let mut c3 = vec![0.0; 9];
        c3[0] = 1.0;
        let (p4, choi4) = pauli_maxent(3, &[(c3, 0.5)]).unwrap();
        assert!((p4[0] - 0.5).abs() < 1e-10);
        assert!(p4[1..].iter().all(|&x| (x - 0.0625).abs() < 1e-10));
        // Off-diagonal weight in the Bell basis must vanish identically.
        let bells: Vec<_> = (0..3)
            .flat_map(|z| (0..3).map(move |x| bell_vector(3, z, x)))
            .collect();
        let mut off = 0.0f64;
        for (i, vi) in bells.iter().enumerate() {
            for (j, vj) in bells.iter().enumerate() {
                if i == j {
                    continue;
                }
                let amp = (vi.adjoint() * choi4.mat() * vj)[(0, 0)];
                off = off.max(amp.norm());
            }
        }
        assert!(off < 1e-12);

        // Contradictory targets are infeasible.
        let bad = vec![
            (vec![1.0, 0.0, 0.0, 0.0], 0.9),
            (vec![1.0, 1.0, 0.0, 0.0], 0.5),
        ];
        assert!(matches!(
            pauli_maxent(2, &bad),
            Err(ExemplarsError::Infeasible { .. })
        ));
    }

    #[test]
    fn classical_closed_form_and_entropy() {
        // No constraints: uniform columns.
        let t = classical_maxent_fixed_input(&[], &[], &[0.5, 0.5]).unwrap();
        assert!(t.mat().iter().all(|&x| (x - 0.5).abs() < 1e-12));

        // Identity permutation has entropy 0; uniform 3x3 has ln 3.
        let id = StochasticMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(classical_channel_entropy(&id), 0.0);
        let u3 = StochasticMatrix::new(DMatrix::from_element(3, 3, 1.0 / 3.0)).unwrap();
        assert!((classical_channel_entropy(&u3) - 3.0f64.ln()).abs() < 1e-12);

        // One binding constraint: the closed form meets it and the matrix
        // stays column-stochastic.
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let t2 = classical_maxent_fixed_input(&[c.clone()], &[0.6], &[0.5, 0.5]).unwrap();
        let got: f64 = c.iter().zip(t2.mat().iter()).map(|(a, b)| a * b).sum();
        assert!((got - 0.6).abs() < 1e-10);

        // Column sums are validated.
        let bad = DMatrix::from_row_slice(2, 2, &[0.6, 0.5, 0.5, 0.5]);
        assert!(StochasticMatrix::new(bad).is_err());
    }

    /// Wraps a bare channel in the solution record the probe expects; the
    /// certificate fields are irrelevant to the rotation test.
    fn as_solution(choi: ChoiMatrix, n_eq: usize) -> ThermalSolution {
        let d = choi.dim_r();
        let dd = choi.dim_b() * d;
        ThermalSolution {
            choi,
            mu: vec![1.0; n_eq],
            nu: vec![],
            w: vec![],
            f_r: HermitianOperator::zeros(d),
            s_br: HermitianOperator::zeros(dd),
            y_br: HermitianOperator::zeros(dd),
            g_br: HermitianOperator::zeros(dd),
            phi: crate::qcore::InputState::maximally_mixed(d),
            achieved: 0.0,
            degenerate_optimal_input: false,
            residuals: crate::maxent::KktReport {
                exp_form_residual: 0.0,
                tp_residual: 0.0,
                constraint_residuals: vec![],
                g_min_eigenvalue: 0.0,
                slackness_residuals: vec![],
                w_consistency_residuals: vec![],
                entropy_identity_residual: 0.0,
            },
        }
    }

    #[test]
    fn passivity_probe_flags_obvious_slack_and_passes_replacer() {
        // Identity channel claimed "thermal" for an input-selective energy
        // observable: rotations easily lower it.
        let h = diag(&[0.0, 1.0]);
        let plus = CMat::from_element(2, 2, C64::new(0.5, 0.0));
        let c1 = HermitianOperator::hermitize(kron(h.mat(), &plus.transpose()));
        let problem = MaxEntProblem {
            equality: vec![LinearConstraint { op: c1, target: 0.5 }],
            ..MaxEntProblem::new(2, 2)
        };
        let fake = as_solution(ChoiMatrix::identity_channel(2), 1);
        let witness = passivity_probe(&fake, &problem, 200, 5);
        assert!(witness.is_some(), "no witness found for an obviously slack constraint");
        assert!(witness.unwrap().constraint_value < 0.5 - 1e-7);

        // Zero trials is vacuous.
        assert!(passivity_probe(&fake, &problem, 0, 5).is_none());

        // A genuine thermal replacer survives the probe: rotating a Gibbs
        // output only raises the mean energy (β > 0 here).
        let replacer = as_solution(replacer_thermal(&h, 0.3).unwrap(), 1);
        let rp = replacer_problem(&h, 0.3);
        assert!(passivity_probe(&replacer, &rp, 300, 5).is_none());
    }
}
