//! Convex-roof upper bounds for mixed bipartite states.
//!
//! Every pure-state ensemble `{p_j, ψ_j}` realizing `ρ = Σ λ_i |e_i⟩⟨e_i|`
//! has the form `√p_j |ψ_j⟩ = Σ_i V_ji √λ_i |e_i⟩` for an isometry `V`
//! (`V†V = I`). The estimator searches over `V` with random two-row
//! rotations and keeps the best ensemble found. The returned value is the
//! average of the monotone over an explicit ensemble, so it is always an
//! upper bound on the roof; the minimum itself is never claimed.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::monotone::Monotone;
use crate::random::{self, Rng};
use crate::state::{hermitian_eigen, max_abs_diff, CMatrix, CVector, DensityMatrix, PureState, SchmidtSpectrum};
use crate::RANK_CUTOFF;

const ISOMETRY_TOL: f64 = 1e-10;
const MIN_WEIGHT: f64 = 1e-15;

pub type Ensemble = Vec<(f64, PureState)>;

#[derive(Debug, Clone)]
pub struct RoofOptions {
    /// Ensemble size `m`; `None` means `rank + 2`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub final_step: f64,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 20,
            iterations: 4000,
            seed: 0,
            initial_step: 0.6,
            final_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoofEstimate {
    /// Upper bound on the convex roof.
    pub value: f64,
    pub ensemble: Ensemble,
    pub restarts: usize,
    /// The cap `m` used for the search.
    pub ensemble_size: usize,
    pub converged: bool,
}

impl RoofEstimate {
    /// `Σ p_j |ψ_j⟩⟨ψ_j|`.
    pub fn reconstruct(&self) -> CMatrix {
        mixture(&self.ensemble)
    }
}

pub fn mixture(ensemble: &[(f64, PureState)]) -> CMatrix {
    let dim = ensemble[0].1.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (p, psi) in ensemble {
        let v = psi.amplitudes();
        acc += (v * v.adjoint()).scale(*p);
    }
    acc
}

/// `Σ p_j ν(ψ_j)`.
pub fn ensemble_value(monotone: &Monotone, ensemble: &[(f64, PureState)]) -> f64 {
    ensemble.iter().map(|(p, psi)| p * monotone.eval_state(psi)).sum()
}

/// Eigen-data of `ρ` restricted to its support.
struct Support {
    /// `dim × r`, columns `√λ_i |e_i⟩`.
    weighted: CMatrix,
    /// `dim × r`, columns `|e_i⟩`.
    vectors: CMatrix,
    values: Vec<f64>,
}

fn support(rho: &DensityMatrix) -> Support {
    let (values, basis) = hermitian_eigen(rho.entries());
    let r = values.iter().filter(|&&l| l > RANK_CUTOFF).count().max(1);
    let values: Vec<f64> = values[..r].to_vec();
    let vectors = basis.columns(0, r).into_owned();
    let mut weighted = vectors.clone();
    for (i, &l) in values.iter().enumerate() {
        let mut col = weighted.column_mut(i);
        col *= Complex64::new(l.max(0.0).sqrt(), 0.0);
    }
    Support { weighted, vectors, values }
}

/// Rank of `ρ` with the shared `1e-12` cutoff.
pub fn rank(rho: &DensityMatrix) -> usize {
    support(rho).values.len()
}

/// The ensemble realized by an `m × r` isometry over `ρ`'s eigenbasis.
pub fn ensemble_from_isometry(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    v: &CMatrix,
) -> Result<Ensemble> {
    if dim_a * dim_b != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{dim_a}x{dim_b} does not match a {}-dimensional state",
            rho.dim()
        )));
    }
    let sup = support(rho);
    let r = sup.values.len();
    if v.ncols() != r {
        return Err(Error::DimensionMismatch(format!("isometry has {} columns, rank is {r}", v.ncols())));
    }
    if v.nrows() < r {
        return Err(Error::InvalidArgument(format!("ensemble size {} below rank {r}", v.nrows())));
    }
    let gram = v.adjoint() * v;
    let err = max_abs_diff(&gram, &CMatrix::identity(r, r));
    if err > ISOMETRY_TOL {
        return Err(Error::InvalidArgument(format!("not an isometry (V†V - I = {err:e})")));
    }
    Ok(realize(&sup.weighted, v, dim_a, dim_b))
}

fn realize(weighted: &CMatrix, v: &CMatrix, dim_a: usize, dim_b: usize) -> Ensemble {
    let phis = weighted * v.transpose();
    let mut out = Vec::new();
    for j in 0..phis.ncols() {
        let col: CVector = phis.column(j).into_owned();
        let p = col.norm_squared();
        if p > MIN_WEIGHT {
            let psi = PureState::from_unnormalized(dim_a, dim_b, col.iter().copied().collect())
                .expect("non-zero column");
            out.push((p, psi));
        }
    }
    out
}

/// Isometry reproducing a given pure-state decomposition of `ρ`, padded with
/// zero rows to `m`.
fn isometry_for(sup: &Support, ensemble: &[(f64, PureState)], m: usize) -> Option<CMatrix> {
    let r = sup.values.len();
    let rows = m.max(ensemble.len());
    let mut v = CMatrix::zeros(rows, r);
    for (j, (p, psi)) in ensemble.iter().enumerate() {
        if psi.dim() != sup.vectors.nrows() {
            return None;
        }
        let phi = psi.amplitudes() * Complex64::new(p.sqrt(), 0.0);
        for i in 0..r {
            let proj = sup.vectors.column(i).dotc(&phi);
            v[(j, i)] = proj / sup.values[i].sqrt();
        }
    }
    let gram = v.adjoint() * &v;
    (max_abs_diff(&gram, &CMatrix::identity(r, r)) < 1e-8).then_some(v)
}

/// Local search state over one isometry.
struct Search<'a> {
    monotone: &'a Monotone,
    weighted: &'a CMatrix,
    dim_a: usize,
    dim_b: usize,
    v: CMatrix,
    terms: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(monotone: &'a Monotone, weighted: &'a CMatrix, dim_a: usize, dim_b: usize, v: CMatrix) -> Self {
        let mut s = Self { monotone, weighted, dim_a, dim_b, v, terms: Vec::new() };
        s.terms = (0..s.v.nrows()).map(|j| s.term(&s.v, j)).collect();
        s
    }

    fn value(&self) -> f64 {
        self.terms.iter().sum()
    }

    /// `p_j ν(ψ_j)` for row `j` of `v`.
    fn term(&self, v: &CMatrix, j: usize) -> f64 {
        let phi = self.weighted * v.row(j).transpose();
        let p = phi.norm_squared();
        if p <= MIN_WEIGHT {
            return 0.0;
        }
        let c = CMatrix::from_fn(self.dim_a, self.dim_b, |i, k| phi[i * self.dim_b + k]);
        let reduced = if self.dim_a <= self.dim_b { &c * c.adjoint() } else { c.adjoint() * &c };
        let mut ev: Vec<f64> = reduced
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| {
                let x = l / p;
                if x < RANK_CUTOFF {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        let s: f64 = ev.iter().sum();
        ev.iter_mut().for_each(|x| *x /= s);
        ev.sort_by(|a, b| b.total_cmp(a));
        let spec = SchmidtSpectrum::with_tolerance(ev, 1e-6).expect("normalized spectrum");
        p * self.monotone.eval_spectrum(&spec)
    }

    fn run(&mut self, opts: &RoofOptions, rng: &mut Rng) -> bool {
        let m = self.v.nrows();
        if m < 2 || opts.iterations == 0 {
            return true;
        }
        let ratio = (opts.final_step / opts.initial_step).max(1e-300);
        let tail_start = opts.iterations - opts.iterations / 10;
        let mut tail_gain = 0.0;
        for t in 0..opts.iterations {
            let step = opts.initial_step * ratio.powf(t as f64 / opts.iterations as f64);
            let j = (random::unit_interval(rng) * m as f64) as usize % m;
            let mut k = (random::unit_interval(rng) * (m - 1) as f64) as usize % (m - 1);
            if k >= j {
                k += 1;
            }
            let g = small_unitary(step, rng);
            let mut trial = self.v.clone();
            for c in 0..trial.ncols() {
                let (x, y) = (self.v[(j, c)], self.v[(k, c)]);
                trial[(j, c)] = g[0] * x + g[1] * y;
                trial[(k, c)] = g[2] * x + g[3] * y;
            }
            let tj = self.term(&trial, j);
            let tk = self.term(&trial, k);
            let gain = self.terms[j] + self.terms[k] - tj - tk;
            if gain > 0.0 {
                self.v = trial;
                self.terms[j] = tj;
                self.terms[k] = tk;
                if t >= tail_start {
                    tail_gain += gain;
                }
            }
        }
        tail_gain < 1e-9
    }
}

/// `exp(i·step·H)` for a random traceless Hermitian `2 × 2` `H` with unit
/// Frobenius-scale entries, row-major.
fn small_unitary(step: f64, rng: &mut Rng) -> [Complex64; 4] {
    let theta = step * (2.0 * random::unit_interval(rng) - 1.0) * std::f64::consts::PI;
    let phi = 2.0 * std::f64::consts::PI * random::unit_interval(rng);
    let chi = step * (2.0 * random::unit_interval(rng) - 1.0) * std::f64::consts::PI;
    let (c, s) = (theta.cos(), theta.sin());
    let e = Complex64::from_polar(1.0, phi);
    let d = Complex64::from_polar(1.0, chi);
    // rotation by theta mixed with a relative phase chi
    [d * c, -(e.conj()) * s, e * s, d.conj() * c]
}

/// Upper bound on the convex roof of `monotone` at `ρ` on `C^dim_a ⊗ C^dim_b`.
pub fn roof_estimate(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    monotone: &Monotone,
    opts: &RoofOptions,
) -> Result<RoofEstimate> {
    roof_estimate_seeded(rho, dim_a, dim_b, monotone, opts, &[])
}

/// [`roof_estimate`] with extra starting points: each warm start is a known
/// decomposition of `ρ` and the result is never worse than any of them.
pub fn roof_estimate_seeded(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    monotone: &Monotone,
    opts: &RoofOptions,
    warm_starts: &[Ensemble],
) -> Result<RoofEstimate> {
    if dim_a * dim_b != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{dim_a}x{dim_b} does not match a {}-dimensional state",
            rho.dim()
        )));
    }
    let sup = support(rho);
    let r = sup.values.len();
    let m = opts.ensemble_size.unwrap_or(r + 2);
    if m < r {
        return Err(Error::InvalidArgument(format!("ensemble size {m} below rank {r}")));
    }

    let mut starts: Vec<(CMatrix, Option<u64>)> = Vec::new();
    for ws in warm_starts {
        match isometry_for(&sup, ws, m) {
            Some(v) => starts.push((v, None)),
            None => log::warn!("warm start does not decompose the input state; skipped"),
        }
    }
    for restart in 0..opts.restarts.max(1) {
        let v = if restart == 0 {
            let mut v = CMatrix::zeros(m, r);
            for i in 0..r {
                v[(i, i)] = Complex64::new(1.0, 0.0);
            }
            v
        } else {
            random::haar_isometry(m, r, &mut random::stream(opts.seed, restart as u64))
        };
        starts.push((v, Some(restart as u64)));
    }

    let results: Vec<(f64, CMatrix, bool)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, (v, stream))| {
            let mut rng = random::stream(opts.seed ^ 0x9e37_79b9_7f4a_7c15, stream.unwrap_or(1 << 32 | idx as u64));
            let mut search = Search::new(monotone, &sup.weighted, dim_a, dim_b, v);
            let converged = search.run(opts, &mut rng);
            (search.value(), search.v, converged)
        })
        .collect();

    let (best_idx, _) = results
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.0.total_cmp(&b.0))
        .expect("at least one start");
    let (_, v, converged) = &results[best_idx];
    let ensemble = realize(&sup.weighted, v, dim_a, dim_b);
    let value = ensemble_value(monotone, &ensemble);
    Ok(RoofEstimate {
        value,
        ensemble,
        restarts: opts.restarts.max(1),
        ensemble_size: m,
        converged: *converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::{monotone_from_concave_with, MonotoneSpec, ValidationOptions};
    use crate::state::density_of;

    fn entropy() -> Monotone {
        monotone_from_concave_with(
            MonotoneSpec::entropy(),
            &ValidationOptions { samples: 500, ..Default::default() },
        )
        .unwrap()
    }

    fn quick() -> RoofOptions {
        RoofOptions { restarts: 4, iterations: 1500, seed: 1, ..Default::default() }
    }

    #[test]
    fn identity_isometry_gives_eigen_ensemble() {
        let mut rng = random::seeded(1);
        let rho = random::random_density(4, 4, &mut rng);
        let ens = ensemble_from_isometry(&rho, 2, 2, &CMatrix::identity(4, 4)).unwrap();
        let mut probs: Vec<f64> = ens.iter().map(|(p, _)| *p).collect();
        probs.sort_by(|a, b| b.total_cmp(a));
        for (p, l) in probs.iter().zip(rho.eigenvalues()) {
            assert!((p - l).abs() < 1e-12);
        }
    }

    #[test]
    fn random_isometry_reconstructs() {
        let mut rng = random::seeded(2);
        let rho = random::random_density(4, 2, &mut rng);
        let v = random::haar_isometry(3, 2, &mut rng);
        let ens = ensemble_from_isometry(&rho, 2, 2, &v).unwrap();
        let total: f64 = ens.iter().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(max_abs_diff(&mixture(&ens), rho.entries()) < 1e-10);
    }

    #[test]
    fn isometry_errors() {
        let mut rng = random::seeded(3);
        let rho = random::random_density(4, 2, &mut rng);
        let not_iso = CMatrix::from_element(3, 2, Complex64::new(1.0, 0.0));
        assert!(ensemble_from_isometry(&rho, 2, 2, &not_iso).is_err());
        let short = random::haar_isometry(2, 1, &mut rng);
        assert!(ensemble_from_isometry(&rho, 2, 2, &short).is_err());
        assert!(ensemble_from_isometry(&rho, 3, 2, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn pure_input_reproduces_monotone() {
        let mut rng = random::seeded(4);
        let psi = random::haar_state(2, 3, &mut rng);
        let m = entropy();
        let est = roof_estimate(&density_of(&psi), 2, 3, &m, &quick()).unwrap();
        assert!((est.value - m.eval_state(&psi)).abs() < 1e-10);
    }

    #[test]
    fn separable_diagonal_mixture_is_zero() {
        let mut diag = CMatrix::zeros(4, 4);
        for (i, p) in [0.4, 0.3, 0.3].iter().enumerate() {
            let idx = [0, 3, 1][i];
            diag[(idx, idx)] = Complex64::new(*p, 0.0);
        }
        let rho = DensityMatrix::new(diag).unwrap();
        let est = roof_estimate(&rho, 2, 2, &entropy(), &quick()).unwrap();
        assert!(est.value <= 1e-6, "value {}", est.value);
    }

    #[test]
    fn certificate_invariants_hold() {
        let mut rng = random::seeded(5);
        let rho = random::random_density(6, 2, &mut rng);
        let m = entropy();
        let est = roof_estimate(&rho, 2, 3, &m, &quick()).unwrap();
        assert!(max_abs_diff(&est.reconstruct(), rho.entries()) < 1e-8);
        assert!((ensemble_value(&m, &est.ensemble) - est.value).abs() < 1e-10);
        assert_eq!(est.ensemble_size, 4);
    }

    #[test]
    fn warm_start_is_never_beaten_upward() {
        let mut rng = random::seeded(6);
        let a = random::haar_state(2, 2, &mut rng);
        let b = random::haar_state(2, 2, &mut rng);
        let ens = vec![(0.3, a), (0.7, b)];
        let rho = DensityMatrix::new(mixture(&ens)).unwrap();
        let m = entropy();
        let opts = RoofOptions { restarts: 1, iterations: 0, ..quick() };
        let est = roof_estimate_seeded(&rho, 2, 2, &m, &opts, &[ens.clone()]).unwrap();
        assert!(est.value <= ensemble_value(&m, &ens) + 1e-12);
    }

    #[test]
    fn too_small_ensemble_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(4);
        let opts = RoofOptions { ensemble_size: Some(2), ..quick() };
        assert!(roof_estimate(&rho, 2, 2, &entropy(), &opts).is_err());
    }
}
