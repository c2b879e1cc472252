//! Elementary local operations and Monte-Carlo monotonicity checks.
//!
//! A [`UnilocalOperation`] acts on one party's factor with outcome-labelled
//! Kraus operators. Local unitaries, von Neumann measurements, ancilla
//! addition, dismissal of a local factor and forgetting outcome labels are
//! the elementary steps; [`check_c1`] and [`check_c2`] sample random
//! instances and record the monotonicity margin of each.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::monotone::Monotone;
use crate::random::{self, Rng};
use crate::roof::{self, RoofOptions};
use crate::state::{
    apply_kraus, hermitian_eigen, hermiticity_error, max_abs_diff, psd_sqrt, schmidt, CMatrix, CVector,
    DensityMatrix, EnsembleItem, OutcomeEnsemble, PureState, QuantumState, IMPOSSIBLE_OUTCOME,
};

const COMPLETENESS_TOL: f64 = 1e-9;
const RENORMALIZE_DRIFT: f64 = 1e-12;
/// Margin below which a trial counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: String,
    pub kraus: Vec<CMatrix>,
}

/// Quantum operation performed by a single party.
#[derive(Debug, Clone)]
pub struct UnilocalOperation {
    party: Party,
    dim_in: usize,
    dim_out: usize,
    outcomes: Vec<Outcome>,
    trace_preserving: bool,
}

impl UnilocalOperation {
    /// Checks shapes and `Σ K†K ≤ I` within `1e-9`.
    pub fn new(party: Party, outcomes: Vec<Outcome>) -> Result<Self> {
        let first = outcomes
            .iter()
            .flat_map(|o| o.kraus.iter())
            .next()
            .ok_or_else(|| Error::InvalidArgument("operation without Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for op in outcomes.iter().flat_map(|o| o.kraus.iter()) {
            if op.nrows() != dim_out || op.ncols() != dim_in {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            sum += op.adjoint() * op;
        }
        let slack = CMatrix::identity(dim_in, dim_in) - &sum;
        let min_eig = hermitian_eigen(&slack).0.last().copied().unwrap_or(0.0);
        if min_eig < -COMPLETENESS_TOL {
            return Err(Error::Completeness(-min_eig));
        }
        let trace_preserving = max_abs_diff(&sum, &CMatrix::identity(dim_in, dim_in)) <= COMPLETENESS_TOL;
        Ok(Self { party, dim_in, dim_out, outcomes, trace_preserving })
    }

    /// Single-outcome local unitary.
    pub fn unitary(party: Party, u: CMatrix) -> Result<Self> {
        Self::new(party, vec![Outcome { label: "u".into(), kraus: vec![u] }])
    }

    /// Complete projective measurement onto the columns of `basis`.
    pub fn von_neumann(party: Party, basis: &CMatrix) -> Result<Self> {
        let outcomes = (0..basis.ncols())
            .map(|k| {
                let v: CVector = basis.column(k).into_owned();
                Outcome { label: k.to_string(), kraus: vec![&v * v.adjoint()] }
            })
            .collect();
        Self::new(party, outcomes)
    }

    /// Measurement in the computational basis of `dim` levels.
    pub fn computational(party: Party, dim: usize) -> Result<Self> {
        Self::von_neumann(party, &CMatrix::identity(dim, dim))
    }

    /// Interaction with an `n_outcomes`-level ancilla prepared in `|0⟩`
    /// through a Haar unitary, followed by a projective readout of the
    /// ancilla. One Kraus operator per outcome, complete by construction.
    pub fn random_pure_outcome(party: Party, dim: usize, n_outcomes: usize, rng: &mut Rng) -> Self {
        let u = random::haar_unitary(dim * n_outcomes, rng);
        let outcomes = (0..n_outcomes)
            .map(|k| {
                let kraus = CMatrix::from_fn(dim, dim, |i, j| u[(i * n_outcomes + k, j * n_outcomes)]);
                Outcome { label: k.to_string(), kraus: vec![kraus] }
            })
            .collect();
        Self::new(party, outcomes).expect("ancilla construction is complete")
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    fn lift(&self, op: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
        match self.party {
            Party::A => op.kronecker(&CMatrix::identity(dim_b, dim_b)),
            Party::B => CMatrix::identity(dim_a, dim_a).kronecker(op),
        }
    }

    /// Local dimensions after the operation.
    pub fn output_dims(&self, dim_a: usize, dim_b: usize) -> (usize, usize) {
        match self.party {
            Party::A => (self.dim_out, dim_b),
            Party::B => (dim_a, self.dim_out),
        }
    }
}

/// Applies `op` to a state on `C^dim_a ⊗ C^dim_b`.
///
/// Pure inputs with one Kraus operator per outcome stay pure. Outcomes with
/// probability below `1e-14` are dropped; for trace-preserving operations
/// the remaining probabilities are renormalized if they drift from one by
/// more than `1e-12`.
pub fn apply_unilocal(
    state: &QuantumState,
    dim_a: usize,
    dim_b: usize,
    op: &UnilocalOperation,
) -> Result<OutcomeEnsemble> {
    let local = match op.party {
        Party::A => dim_a,
        Party::B => dim_b,
    };
    if local != op.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "operation acts on {} levels, party has {local}",
            op.dim_in
        )));
    }
    let total = match state {
        QuantumState::Pure(psi) => {
            if psi.dim_a() != dim_a || psi.dim_b() != dim_b {
                return Err(Error::DimensionMismatch("state dimensions differ from declared".into()));
            }
            psi.dim()
        }
        QuantumState::Mixed(rho) => rho.dim(),
    };
    if total != dim_a * dim_b {
        return Err(Error::DimensionMismatch("state dimension differs from dim_a*dim_b".into()));
    }
    let (out_a, out_b) = op.output_dims(dim_a, dim_b);

    let mut items = Vec::new();
    for (label, outcome) in op.outcomes.iter().enumerate() {
        let item = match state {
            QuantumState::Pure(psi) if outcome.kraus.len() == 1 => {
                let phi = apply_local_op(psi, op.party, &outcome.kraus[0]);
                let p = phi.norm_squared();
                if p < IMPOSSIBLE_OUTCOME {
                    continue;
                }
                let post = PureState::from_unnormalized(out_a, out_b, phi.iter().copied().collect())?;
                EnsembleItem { label, probability: p, state: QuantumState::Pure(post) }
            }
            _ => {
                let rho = state.to_density();
                let lifted: Vec<CMatrix> =
                    outcome.kraus.iter().map(|k| op.lift(k, dim_a, dim_b)).collect();
                match apply_kraus(&rho, &lifted) {
                    Ok((post, p)) => EnsembleItem { label, probability: p, state: QuantumState::Mixed(post) },
                    Err(Error::ImpossibleOutcome(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        };
        items.push(item);
    }
    if items.is_empty() {
        return Err(Error::ImpossibleOutcome(0.0));
    }
    let total: f64 = items.iter().map(|it| it.probability).sum();
    if op.trace_preserving && (total - 1.0).abs() > RENORMALIZE_DRIFT {
        items.iter_mut().for_each(|it| it.probability /= total);
    }
    Ok(OutcomeEnsemble::from_items_unchecked(items))
}

/// `(K ⊗ I)ψ` or `(I ⊗ K)ψ`, unnormalized, as a row-major vector.
fn apply_local_op(psi: &PureState, party: Party, k: &CMatrix) -> CVector {
    let c = psi.coefficient_matrix();
    let out = match party {
        Party::A => k * c,
        Party::B => c * k.transpose(),
    };
    CVector::from_iterator(out.len(), (0..out.nrows()).flat_map(|i| (0..out.ncols()).map(move |j| (i, j))).map(|(i, j)| out[(i, j)]))
}

/// Tensor factors of each party's space, outermost first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Layout {
    pub fn bipartite(dim_a: usize, dim_b: usize) -> Self {
        Self { a: vec![dim_a], b: vec![dim_b] }
    }

    pub fn dim_a(&self) -> usize {
        self.a.iter().product()
    }

    pub fn dim_b(&self) -> usize {
        self.b.iter().product()
    }

    fn factors(&self) -> Vec<usize> {
        self.a.iter().chain(self.b.iter()).copied().collect()
    }
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
fn permute_factors(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let n = m.nrows();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map: Vec<usize> = (0..n)
        .map(|new_idx| {
            let mut digits = vec![0; dims.len()];
            let mut rem = new_idx;
            for k in (0..new_dims.len()).rev() {
                digits[perm[k]] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            digits.iter().zip(dims).fold(0, |acc, (&d, &size)| acc * size + d)
        })
        .collect();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Traces out factor `index` of a multi-factor space.
fn trace_factor(m: &CMatrix, dims: &[usize], index: usize) -> CMatrix {
    let before: usize = dims[..index].iter().product();
    let traced = dims[index];
    let after: usize = dims[index + 1..].iter().product();
    let n = before * after;
    CMatrix::from_fn(n, n, |r, c| {
        let (r0, r1) = (r / after, r % after);
        let (c0, c1) = (c / after, c % after);
        (0..traced)
            .map(|t| m[((r0 * traced + t) * after + r1, (c0 * traced + t) * after + c1)])
            .sum()
    })
}

/// `ρ → ρ ⊗ ρ_Q` with `Q` appended to `party`'s factors.
pub fn add_ancilla(
    rho: &DensityMatrix,
    layout: &Layout,
    party: Party,
    ancilla: &DensityMatrix,
) -> Result<(DensityMatrix, Layout)> {
    let factors = layout.factors();
    if factors.iter().product::<usize>() != rho.dim() {
        return Err(Error::DimensionMismatch("layout does not match state".into()));
    }
    let joint = rho.entries().kronecker(ancilla.entries());
    let mut dims = factors.clone();
    dims.push(ancilla.dim());
    let q = dims.len() - 1;
    let mut new_layout = layout.clone();
    let perm: Vec<usize> = match party {
        Party::A => {
            new_layout.a.push(ancilla.dim());
            let na = layout.a.len();
            (0..na).chain(std::iter::once(q)).chain(na..q).collect()
        }
        Party::B => {
            new_layout.b.push(ancilla.dim());
            (0..=q).collect()
        }
    };
    let out = permute_factors(&joint, &dims, &perm);
    Ok((DensityMatrix::from_raw(out), new_layout))
}

/// Pure-state version of [`add_ancilla`] for a two-factor layout.
pub fn add_ancilla_pure(psi: &PureState, party: Party, ancilla: &[Complex64]) -> Result<PureState> {
    let phi = PureState::from_unnormalized(1, ancilla.len(), ancilla.to_vec())?;
    let q = ancilla.len();
    let (da, db) = (psi.dim_a(), psi.dim_b());
    let amps = psi.amplitudes();
    let phi = phi.amplitudes();
    let out: Vec<Complex64> = match party {
        Party::A => (0..da * q * db)
            .map(|idx| {
                let (i, rest) = (idx / (q * db), idx % (q * db));
                let (k, j) = (rest / db, rest % db);
                amps[i * db + j] * phi[k]
            })
            .collect(),
        Party::B => (0..da * db * q)
            .map(|idx| amps[idx / q] * phi[idx % q])
            .collect(),
    };
    let (na, nb) = match party {
        Party::A => (da * q, db),
        Party::B => (da, db * q),
    };
    PureState::from_unnormalized(na, nb, out)
}

/// Partial trace over factor `factor` of `party`'s space.
pub fn dismiss_part(
    rho: &DensityMatrix,
    layout: &Layout,
    party: Party,
    factor: usize,
) -> Result<(DensityMatrix, Layout)> {
    let factors = layout.factors();
    if factors.iter().product::<usize>() != rho.dim() {
        return Err(Error::DimensionMismatch("layout does not match state".into()));
    }
    let list = match party {
        Party::A => &layout.a,
        Party::B => &layout.b,
    };
    if factor >= list.len() {
        return Err(Error::InvalidArgument(format!(
            "party {party:?} has no factor {factor} (has {})",
            list.len()
        )));
    }
    let global = match party {
        Party::A => factor,
        Party::B => layout.a.len() + factor,
    };
    let out = trace_factor(rho.entries(), &factors, global);
    let mut new_layout = layout.clone();
    match party {
        Party::A => new_layout.a.remove(factor),
        Party::B => new_layout.b.remove(factor),
    };
    if new_layout.a.is_empty() {
        new_layout.a.push(1);
    }
    if new_layout.b.is_empty() {
        new_layout.b.push(1);
    }
    Ok((DensityMatrix::from_raw(out), new_layout))
}

/// Discards the outcome record: `Σ q_k ϱ_k`.
pub fn forget(ensemble: &OutcomeEnsemble) -> DensityMatrix {
    let items = ensemble.items();
    let dim = items[0].state.to_density().dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for it in items {
        acc += it.state.to_density().entries().scale(it.probability);
    }
    DensityMatrix::from_raw(acc)
}

/// Two-outcome measurement on B that moves the reduced state of A to
/// `σ ± δσ` with probability `1/2` each.
#[derive(Debug, Clone)]
pub struct PerturbationMeasurement {
    /// Acting on B's computational basis.
    pub o1: CMatrix,
    pub o2: CMatrix,
    /// `τ_ij = δσ_ij / √(α_i α_j)`, in the Schmidt basis.
    pub tau: CMatrix,
    /// Columns: A's Schmidt basis in which `δσ` is expressed.
    pub basis_a: CMatrix,
    pub spectrum: Vec<f64>,
}

impl PerturbationMeasurement {
    pub fn as_operation(&self) -> UnilocalOperation {
        UnilocalOperation::new(
            Party::B,
            vec![
                Outcome { label: "+".into(), kraus: vec![self.o1.clone()] },
                Outcome { label: "-".into(), kraus: vec![self.o2.clone()] },
            ],
        )
        .expect("O1†O1 + O2†O2 = I")
    }

    /// `O₁†O₁ + O₂†O₂ − I`, max entry.
    pub fn completeness_error(&self) -> f64 {
        let n = self.o1.nrows();
        let sum = self.o1.adjoint() * &self.o1 + self.o2.adjoint() * &self.o2;
        max_abs_diff(&sum, &CMatrix::identity(n, n))
    }

    /// Expresses a matrix on A in the Schmidt basis used for `δσ`.
    pub fn to_schmidt_basis(&self, m: &CMatrix) -> CMatrix {
        self.basis_a.adjoint() * m * &self.basis_a
    }
}

/// Builds the measurement for `ψ` and a traceless Hermitian `δσ` given in
/// A's Schmidt basis, with `|δσ_ij| < min_l α_l²`.
///
/// The operator on B has matrix `τᵀ` in B's Schmidt basis (identity on any
/// complement), which makes the A-side reduced states exactly `σ ± δσ`.
pub fn perturbation_measurement(psi: &PureState, delta_sigma: &CMatrix) -> Result<PerturbationMeasurement> {
    let n = psi.dim_a();
    if delta_sigma.nrows() != n || delta_sigma.ncols() != n {
        return Err(Error::DimensionMismatch(format!("δσ must be {n}x{n}")));
    }
    if hermiticity_error(delta_sigma) > 1e-12 {
        return Err(Error::InvalidArgument("δσ must be Hermitian".into()));
    }
    if delta_sigma.trace().norm() > 1e-12 {
        return Err(Error::InvalidArgument("δσ must be traceless".into()));
    }
    let d = schmidt(psi);
    let alphas = d.spectrum.values().to_vec();
    if alphas.len() < n || alphas.iter().any(|&a| a <= 0.0) {
        return Err(Error::Precondition("ψ must have full Schmidt rank on A".into()));
    }
    let min_sq = alphas.iter().fold(f64::INFINITY, |m, &a| m.min(a * a));
    let worst = delta_sigma.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if worst >= min_sq {
        return Err(Error::Precondition(format!(
            "|δσ_ij| = {worst} not below min α² = {min_sq}"
        )));
    }
    let tau = CMatrix::from_fn(n, n, |i, j| delta_sigma[(i, j)] / (alphas[i] * alphas[j]).sqrt());
    let tau_eigs = hermitian_eigen(&tau).0;
    if tau_eigs.iter().any(|&l| l.abs() > 1.0) {
        return Err(Error::Precondition("I ± τ is not positive semidefinite".into()));
    }

    let db = psi.dim_b();
    let vb = &d.basis_b;
    let m_b = vb * tau.transpose() * vb.adjoint();
    let id = CMatrix::identity(db, db);
    let o1 = psd_sqrt(&(&id + &m_b).unscale(2.0));
    let o2 = psd_sqrt(&(&id - &m_b).unscale(2.0));
    Ok(PerturbationMeasurement { o1, o2, tau, basis_a: d.basis_a, spectrum: alphas })
}

/// One Monte-Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub before: f64,
    pub after: f64,
    /// `before - after`; negative beyond tolerance is a violation.
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub condition: &'static str,
    pub monotone: String,
    pub rows: Vec<TrialRow>,
}

impl CheckReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.margin < -VIOLATION_TOL).count()
    }

    /// Largest `after - before`, zero if none positive.
    pub fn max_violation(&self) -> f64 {
        self.rows.iter().map(|r| -r.margin).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&TrialRow> {
        self.rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    /// `trial,mu_before,avg_after,margin`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,mu_before,avg_after,margin\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.trial,
                crate::io::fmt_num(r.before),
                crate::io::fmt_num(r.after),
                crate::io::fmt_num(r.margin)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} check for {}: {} trials, {} violations, max violation {:.4e}",
            self.condition,
            self.monotone,
            self.rows.len(),
            self.violations(),
            self.max_violation()
        );
        if let Some(w) = self.worst().filter(|w| w.margin < -VIOLATION_TOL) {
            let _ = write!(s, "; worst trial {} (before {:.4}, after {:.4})", w.trial, w.before, w.after);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct C1Options {
    pub trials: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub seed: u64,
    /// Only single-outcome local unitaries.
    pub unitary_only: bool,
    pub max_outcomes: usize,
}

impl Default for C1Options {
    fn default() -> Self {
        Self { trials: 10_000, dim_a: 4, dim_b: 4, seed: 0, unitary_only: false, max_outcomes: 4 }
    }
}

/// Samples state and operation for trial `index`.
pub fn c1_instance(opts: &C1Options, index: usize) -> (PureState, UnilocalOperation) {
    let mut rng = random::stream(opts.seed, index as u64);
    let psi = random::haar_state(opts.dim_a, opts.dim_b, &mut rng);
    let party = if random::unit_interval(&mut rng) < 0.5 { Party::A } else { Party::B };
    let dim = match party {
        Party::A => opts.dim_a,
        Party::B => opts.dim_b,
    };
    let op = if opts.unitary_only {
        UnilocalOperation::unitary(party, random::haar_unitary(dim, &mut rng)).expect("unitary")
    } else {
        let span = opts.max_outcomes.max(2) - 1;
        let k = 2 + (random::unit_interval(&mut rng) * span as f64) as usize % span;
        UnilocalOperation::random_pure_outcome(party, dim, k, &mut rng)
    };
    (psi, op)
}

/// Condition C1 on pure states: `μ(ψ) ≥ Σ p_k μ(ψ_k)` for random unilocal
/// operations with one Kraus operator per outcome.
pub fn check_c1(monotone: &Monotone, opts: &C1Options) -> CheckReport {
    let rows = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let (psi, op) = c1_instance(opts, trial);
            let before = monotone.eval_state(&psi);
            let ens = apply_unilocal(&QuantumState::Pure(psi), opts.dim_a, opts.dim_b, &op)
                .expect("trace-preserving operation has an outcome");
            let after: f64 = ens
                .items()
                .iter()
                .map(|it| it.probability * monotone.eval_state(it.state.as_pure().expect("pure outcome")))
                .sum();
            TrialRow { trial, before, after, margin: before - after }
        })
        .collect();
    CheckReport { condition: "C1", monotone: monotone.name().to_string(), rows }
}

#[derive(Debug, Clone)]
pub struct C2Options {
    pub trials: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub seed: u64,
    pub max_members: usize,
    pub roof: RoofOptions,
}

impl Default for C2Options {
    fn default() -> Self {
        Self {
            trials: 200,
            dim_a: 2,
            dim_b: 2,
            seed: 0,
            max_members: 3,
            roof: RoofOptions { restarts: 2, iterations: 300, ..Default::default() },
        }
    }
}

/// Random pure-state ensemble for C2 trial `index`.
pub fn c2_instance(opts: &C2Options, index: usize) -> Vec<(f64, PureState)> {
    let mut rng = random::stream(opts.seed, index as u64);
    let span = opts.max_members.max(1);
    let k = 1 + (random::unit_interval(&mut rng) * span as f64) as usize % span;
    let weights = random::simplex_point(k, &mut rng);
    weights
        .into_iter()
        .map(|q| (q, random::haar_state(opts.dim_a, opts.dim_b, &mut rng)))
        .collect()
}

/// Condition C2 on pure ensembles: `Σ q_k μ(ψ_k) ≥ roof(Σ q_k ψ_k)`, with the
/// roof replaced by its upper-bound estimate (warm-started from the
/// ensemble itself).
pub fn check_c2(monotone: &Monotone, opts: &C2Options) -> CheckReport {
    let rows = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let ens = c2_instance(opts, trial);
            let before = roof::ensemble_value(monotone, &ens);
            let rho = DensityMatrix::from_raw(roof::mixture(&ens));
            let roof_opts = RoofOptions { seed: opts.seed ^ trial as u64, ..opts.roof.clone() };
            let est = roof::roof_estimate_seeded(&rho, opts.dim_a, opts.dim_b, monotone, &roof_opts, &[ens])
                .expect("valid mixture");
            TrialRow { trial, before, after: est.value, margin: before - est.value }
        })
        .collect();
    CheckReport { condition: "C2", monotone: monotone.name().to_string(), rows }
}

/// Convenience: a single-outcome identity on `party`.
pub fn identity(party: Party, dim: usize) -> UnilocalOperation {
    UnilocalOperation::unitary(party, CMatrix::identity(dim, dim)).expect("identity")
}

#[allow(dead_code)]
fn basis_ket(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::{e_alpha_state, monotone_from_concave_with, AlphaParam, MonotoneSpec, ValidationOptions};
    use crate::state::{density_of, partial_trace_b};

    fn bell() -> PureState {
        PureState::from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    fn entropy() -> Monotone {
        monotone_from_concave_with(MonotoneSpec::entropy(), &ValidationOptions { samples: 500, ..Default::default() })
            .unwrap()
    }

    #[test]
    fn unitary_keeps_spectrum() {
        let mut rng = random::seeded(1);
        let psi = random::haar_state(2, 3, &mut rng);
        let op = UnilocalOperation::unitary(Party::B, random::haar_unitary(3, &mut rng)).unwrap();
        let ens = apply_unilocal(&psi.clone().into(), 2, 3, &op).unwrap();
        assert_eq!(ens.len(), 1);
        assert!((ens.items()[0].probability - 1.0).abs() < 1e-12);
        let post = ens.items()[0].state.as_pure().unwrap();
        let (s0, s1) = (schmidt(&psi).spectrum, schmidt(post).spectrum);
        for (x, y) in s0.values().iter().zip(s1.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn measuring_bell_pair_gives_product_states() {
        let op = UnilocalOperation::computational(Party::B, 2).unwrap();
        let ens = apply_unilocal(&bell().into(), 2, 2, &op).unwrap();
        assert_eq!(ens.len(), 2);
        for it in ens.items() {
            assert!((it.probability - 0.5).abs() < 1e-15);
            let s = schmidt(it.state.as_pure().unwrap()).spectrum;
            assert_eq!(s.rank(), 1);
        }
    }

    #[test]
    fn mixed_input_and_multi_kraus() {
        let rho = density_of(&bell());
        let op = UnilocalOperation::computational(Party::A, 2).unwrap();
        let ens = apply_unilocal(&rho.clone().into(), 2, 2, &op).unwrap();
        assert!((ens.total_probability() - 1.0).abs() < 1e-12);
        // dephasing channel as one outcome with two Kraus operators
        let p0 = op.outcomes()[0].kraus[0].clone();
        let p1 = op.outcomes()[1].kraus[0].clone();
        let deph = UnilocalOperation::new(Party::A, vec![Outcome { label: "d".into(), kraus: vec![p0, p1] }]).unwrap();
        let ens = apply_unilocal(&bell().into(), 2, 2, &deph).unwrap();
        assert!(matches!(ens.items()[0].state, QuantumState::Mixed(_)));
        assert!((ens.items()[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn completeness_and_dimension_errors() {
        let twice = CMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(UnilocalOperation::unitary(Party::A, twice), Err(Error::Completeness(_))));
        let op = UnilocalOperation::computational(Party::A, 3).unwrap();
        assert!(apply_unilocal(&bell().into(), 2, 2, &op).is_err());
        let partial = UnilocalOperation::new(
            Party::A,
            vec![Outcome { label: "0".into(), kraus: vec![CMatrix::identity(2, 2).scale(0.5)] }],
        )
        .unwrap();
        assert!(!partial.is_trace_preserving());
    }

    #[test]
    fn random_operations_are_complete() {
        let mut rng = random::seeded(2);
        for k in 2..5 {
            let op = UnilocalOperation::random_pure_outcome(Party::A, 3, k, &mut rng);
            assert!(op.is_trace_preserving());
            let psi = random::haar_state(3, 2, &mut rng);
            let ens = apply_unilocal(&psi.into(), 3, 2, &op).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn no_signalling_bookkeeping() {
        let mut rng = random::seeded(3);
        let psi = random::haar_state(3, 3, &mut rng);
        let op = UnilocalOperation::random_pure_outcome(Party::B, 3, 3, &mut rng);
        let ens = apply_unilocal(&psi.clone().into(), 3, 3, &op).unwrap();
        let avg = forget(&ens);
        let lhs = partial_trace_b(&avg, 3, 3).unwrap();
        assert!(lhs.max_abs_diff(&psi.reduced_a()) < 1e-9);
    }

    #[test]
    fn ancilla_round_trip() {
        let mut rng = random::seeded(4);
        let rho = random::random_density(6, 3, &mut rng);
        let anc = random::random_density(2, 2, &mut rng);
        let layout = Layout::bipartite(2, 3);
        for party in [Party::A, Party::B] {
            let (ext, lay) = add_ancilla(&rho, &layout, party, &anc).unwrap();
            assert!((ext.trace() - 1.0).abs() < 1e-12);
            let (back, lay2) = dismiss_part(&ext, &lay, party, 1).unwrap();
            assert_eq!(lay2, layout);
            assert!(back.max_abs_diff(&rho) < 1e-10);
            // dismissing the original factor leaves the ancilla
            let (only_anc, _) = dismiss_part(&ext, &lay, party, 0).unwrap();
            let other = match party {
                Party::A => crate::state::partial_trace_b(&only_anc, 2, 3).unwrap(),
                Party::B => crate::state::partial_trace_a(&only_anc, 2, 2).unwrap(),
            };
            assert_eq!(other.dim(), 2);
        }
        assert!(dismiss_part(&rho, &layout, Party::B, 1).is_err());
    }

    #[test]
    fn ancilla_keeps_entanglement() {
        let anc = [ONE, Complex64::new(0.0, 0.0)];
        for party in [Party::A, Party::B] {
            let ext = add_ancilla_pure(&bell(), party, &anc).unwrap();
            for a in [0.0, 0.3, 0.7, 1.0] {
                let e = e_alpha_state(&ext, AlphaParam::new(a).unwrap());
                assert!((e - 1.0).abs() < 1e-12);
            }
            let (rho_ext, _) = add_ancilla(
                &density_of(&bell()),
                &Layout::bipartite(2, 2),
                party,
                &density_of(&PureState::new(1, 2, anc.to_vec()).unwrap()),
            )
            .unwrap();
            assert!(rho_ext.max_abs_diff(&density_of(&ext)) < 1e-14);
        }
    }

    #[test]
    fn forget_examples() {
        let a = PureState::basis(2, 2, 0, 0).unwrap();
        let b = PureState::basis(2, 2, 1, 1).unwrap();
        let single = OutcomeEnsemble::from_pure(vec![(1.0, a.clone())]).unwrap();
        assert!(forget(&single).max_abs_diff(&density_of(&a)) < 1e-15);
        let mix = forget(&OutcomeEnsemble::from_pure(vec![(0.5, a), (0.5, b)]).unwrap());
        assert!((mix.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((mix.entries()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(mix.entries()[(0, 3)].norm() < 1e-15);
        assert!(DensityMatrix::new(mix.into_entries()).is_ok());
    }

    #[test]
    fn perturbation_on_bell_state() {
        let eps = 0.1;
        let ds = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(eps, 0.0),
            Complex64::new(-eps, 0.0),
        ]));
        let pm = perturbation_measurement(&bell(), &ds).unwrap();
        assert!(pm.completeness_error() < 1e-12);
        let ens = apply_unilocal(&bell().into(), 2, 2, &pm.as_operation()).unwrap();
        let mut spectra = Vec::new();
        for it in ens.items() {
            assert!((it.probability - 0.5).abs() < 1e-12);
            spectra.push(schmidt(it.state.as_pure().unwrap()).spectrum.values().to_vec());
        }
        for s in &spectra {
            assert!((s[0] - 0.6).abs() < 1e-10 && (s[1] - 0.4).abs() < 1e-10);
        }
        let r1 = pm.to_schmidt_basis(ens.items()[0].state.as_pure().unwrap().reduced_a().entries());
        assert!((r1[(0, 0)].re - 0.6).abs() < 1e-10);
    }

    #[test]
    fn zero_perturbation_is_trivial() {
        let pm = perturbation_measurement(&bell(), &CMatrix::zeros(2, 2)).unwrap();
        let half = CMatrix::identity(2, 2).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(max_abs_diff(&pm.o1, &half) < 1e-12);
        let ens = apply_unilocal(&bell().into(), 2, 2, &pm.as_operation()).unwrap();
        for it in ens.items() {
            assert!(it.state.as_pure().unwrap().phase_distance(&bell()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn perturbation_rejections() {
        let big = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(-0.3, 0.0),
        ]));
        assert!(matches!(perturbation_measurement(&bell(), &big), Err(Error::Precondition(_))));
        let product = PureState::basis(2, 2, 0, 0).unwrap();
        assert!(perturbation_measurement(&product, &CMatrix::zeros(2, 2)).is_err());
        let traced = CMatrix::identity(2, 2).scale(0.01);
        assert!(perturbation_measurement(&bell(), &traced).is_err());
    }

    #[test]
    fn c1_entropy_has_no_violations() {
        let opts = C1Options { trials: 300, seed: 7, ..Default::default() };
        let report = check_c1(&entropy(), &opts);
        assert_eq!(report.violations(), 0, "{}", report.summary());
    }

    #[test]
    fn c1_unitaries_are_equalities() {
        let opts = C1Options { trials: 100, unitary_only: true, ..Default::default() };
        let report = check_c1(&entropy(), &opts);
        assert!(report.rows.iter().all(|r| r.margin.abs() < 1e-10));
    }

    #[test]
    fn c1_convex_control_fails() {
        let convex = Monotone::unchecked(MonotoneSpec::trace_fn_unchecked("square", |x| x * x - x));
        let report = check_c1(&convex, &C1Options { trials: 200, ..Default::default() });
        assert!(report.violations() > 0);
        assert!(report.summary().contains("worst trial"));
    }

    #[test]
    fn c2_reports() {
        let m = entropy();
        let report = check_c2(&m, &C2Options { trials: 20, ..Default::default() });
        assert!(report.passed(), "{}", report.summary());
        let csv = report.to_csv();
        assert!(csv.starts_with("trial,mu_before,avg_after,margin\n"));
        assert_eq!(csv.lines().count(), 21);
    }

    #[test]
    fn c2_examples() {
        let m = entropy();
        let opts = RoofOptions { restarts: 6, iterations: 2000, ..Default::default() };
        // one-element ensemble: equality
        let ens = vec![(1.0, bell())];
        let est = roof::roof_estimate(&DensityMatrix::from_raw(roof::mixture(&ens)), 2, 2, &m, &opts).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);
        // half Bell, half |00⟩
        let ens = vec![(0.5, bell()), (0.5, PureState::basis(2, 2, 0, 0).unwrap())];
        let avg = roof::ensemble_value(&m, &ens);
        assert!((avg - 0.5).abs() < 1e-12);
        let est = roof::roof_estimate(&DensityMatrix::from_raw(roof::mixture(&ens)), 2, 2, &m, &opts).unwrap();
        assert!(est.value <= avg + 1e-9);
        // orthogonal product states
        let ens = vec![(0.5, PureState::basis(2, 2, 0, 1).unwrap()), (0.5, PureState::basis(2, 2, 1, 0).unwrap())];
        let est = roof::roof_estimate(&DensityMatrix::from_raw(roof::mixture(&ens)), 2, 2, &m, &opts).unwrap();
        assert!(est.value <= 1e-6);
    }
}
