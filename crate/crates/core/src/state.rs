//! Bipartite states and the linear algebra they need.
//!
//! The product basis is row-major: basis vector `|i_a ⊗ i_b⟩` sits at index
//! `i_a * dim_b + i_b`. Every routine in the crate relies on this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::RANK_CUTOFF;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const NORM_TOL: f64 = 1e-10;
pub const DENSITY_TOL: f64 = 1e-10;
pub const ENSEMBLE_TOL: f64 = 1e-9;
/// Outcomes with trace below this are impossible.
pub const IMPOSSIBLE_OUTCOME: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Normalized amplitude vector on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Validates dimensions and unit norm (within `1e-10`).
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dims(dim_a, dim_b, amplitudes.len())?;
        let amplitudes = CVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { dim_a, dim_b, amplitudes })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn from_unnormalized(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dims(dim_a, dim_b, amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState("zero or non-finite amplitude vector".into()));
        }
        Ok(Self { dim_a, dim_b, amplitudes: v.unscale(norm) })
    }

    pub fn from_real(dim_a: usize, dim_b: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_unnormalized(
            dim_a,
            dim_b,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// `|i_a ⊗ i_b⟩`.
    pub fn basis(dim_a: usize, dim_b: usize, i_a: usize, i_b: usize) -> Result<Self> {
        if i_a >= dim_a || i_b >= dim_b {
            return Err(Error::DimensionMismatch(format!(
                "basis index ({i_a},{i_b}) outside {dim_a}x{dim_b}"
            )));
        }
        let mut amps = vec![ZERO; dim_a * dim_b];
        amps[i_a * dim_b + i_b] = ONE;
        Self::new(dim_a, dim_b, amps)
    }

    /// Product state `φ_A ⊗ φ_B` from two local vectors (normalized on input).
    pub fn product(phi_a: &[Complex64], phi_b: &[Complex64]) -> Result<Self> {
        let amps = phi_a
            .iter()
            .flat_map(|&x| phi_b.iter().map(move |&y| x * y))
            .collect();
        Self::from_unnormalized(phi_a.len(), phi_b.len(), amps)
    }

    /// `Σ_i √p_i |i ⊗ i⟩` on `C^n ⊗ C^n`.
    pub fn from_schmidt(spectrum: &SchmidtSpectrum) -> Self {
        let n = spectrum.len();
        let mut amps = vec![ZERO; n * n];
        for (i, &p) in spectrum.values().iter().enumerate() {
            amps[i * n + i] = Complex64::new(p.sqrt(), 0.0);
        }
        Self::from_unnormalized(n, n, amps).expect("spectrum sums to one")
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// The `dim_a × dim_b` matrix `C` with `ψ = Σ C_ij |i⟩|j⟩`.
    pub fn coefficient_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim_a, self.dim_b, |i, j| self.amplitudes[i * self.dim_b + j])
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(Error::DimensionMismatch("inner product of unequal spaces".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨ψ|φ⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Distance after removing the optimal global phase.
    pub fn phase_distance(&self, other: &PureState) -> Result<f64> {
        let overlap = self.inner(other)?;
        let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
        Ok((&self.amplitudes * phase - &other.amplitudes).norm())
    }

    /// `ψ ⊗ φ` split as `(A, A') | (B, B')`.
    ///
    /// The result has `dim_a = dim_a(ψ)·dim_a(φ)` and the A-index `i·dim_a(φ) + i'`.
    pub fn tensor_bipartite(&self, other: &PureState) -> PureState {
        let (da, db) = (self.dim_a, self.dim_b);
        let (ea, eb) = (other.dim_a, other.dim_b);
        let new_db = db * eb;
        let mut amps = vec![ZERO; da * ea * new_db];
        for i in 0..da {
            for j in 0..db {
                let x = self.amplitudes[i * db + j];
                for k in 0..ea {
                    for l in 0..eb {
                        let row = i * ea + k;
                        let col = j * eb + l;
                        amps[row * new_db + col] = x * other.amplitudes[k * eb + l];
                    }
                }
            }
        }
        PureState { dim_a: da * ea, dim_b: new_db, amplitudes: CVector::from_vec(amps) }
    }

    /// Applies `U_A ⊗ U_B`.
    pub fn apply_local(&self, u_a: &CMatrix, u_b: &CMatrix) -> Result<PureState> {
        let c = self.coefficient_matrix();
        if u_a.ncols() != self.dim_a || u_b.ncols() != self.dim_b {
            return Err(Error::DimensionMismatch("local operator size".into()));
        }
        // (U_A ⊗ U_B) ψ  ↔  U_A C U_Bᵀ
        let out = u_a * c * u_b.transpose();
        PureState::from_unnormalized(out.nrows(), out.ncols(), row_major(&out))
    }

    /// `Tr_B |ψ⟩⟨ψ| = C C†`.
    pub fn reduced_a(&self) -> DensityMatrix {
        let c = self.coefficient_matrix();
        DensityMatrix::from_raw(&c * c.adjoint())
    }

    /// `Tr_A |ψ⟩⟨ψ| = Cᵀ C̄`.
    pub fn reduced_b(&self) -> DensityMatrix {
        let c = self.coefficient_matrix();
        DensityMatrix::from_raw(c.transpose() * c.conjugate())
    }
}

fn check_dims(dim_a: usize, dim_b: usize, len: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::DimensionMismatch("local dimensions must be positive".into()));
    }
    if dim_a * dim_b != len {
        return Err(Error::DimensionMismatch(format!(
            "{dim_a}x{dim_b} product space needs {} amplitudes, got {len}",
            dim_a * dim_b
        )));
    }
    Ok(())
}

fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let herm = hermiticity_error(&entries);
        if herm > DENSITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = Self { entries };
        let min = rho.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Skips validation; for matrices that are density matrices by construction.
    pub(crate) fn from_raw(entries: CMatrix) -> Self {
        Self { entries }
    }

    /// `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_raw(CMatrix::identity(n, n).unscale(n as f64))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.entries).0
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_raw(self.entries.kronecker(&other.entries))
    }
}

/// Squared Schmidt coefficients, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates a probability vector (sum within `1e-10`) and sorts it.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, NORM_TOL)
    }

    pub fn with_tolerance(mut values: Vec<f64>, tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidState("empty spectrum".into()));
        }
        for &v in &values {
            if !v.is_finite() || !(-tol..=1.0 + tol).contains(&v) {
                return Err(Error::InvalidState(format!("spectral value {v} outside [0,1]")));
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("spectrum sums to {sum}")));
        }
        for v in &mut values {
            *v = v.clamp(0.0, 1.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidState("weights must be non-negative with positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self { values: vec![1.0 / n as f64; n] }
    }

    /// `(1, 0, …, 0)` of length `n`.
    pub fn product(n: usize) -> Self {
        let mut values = vec![0.0; n.max(1)];
        values[0] = 1.0;
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of entries above [`RANK_CUTOFF`].
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > RANK_CUTOFF).count()
    }

    /// Zero-padded to `len` entries (never truncates).
    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        if v.len() < len {
            v.resize(len, 0.0);
        }
        v
    }

    /// Spectrum of `ψ ⊗ φ`.
    pub fn tensor(&self, other: &SchmidtSpectrum) -> SchmidtSpectrum {
        let mut values: Vec<f64> = self
            .values
            .iter()
            .flat_map(|&x| other.values.iter().map(move |&y| x * y))
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        SchmidtSpectrum { values }
    }

    pub fn tensor_power(&self, n: usize) -> SchmidtSpectrum {
        let mut out = SchmidtSpectrum { values: vec![1.0] };
        for _ in 0..n {
            out = out.tensor(self);
        }
        out
    }
}

/// Result of [`schmidt`].
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub spectrum: SchmidtSpectrum,
    /// Columns are the local vectors `|i_A⟩`, ordered as the spectrum.
    pub basis_a: CMatrix,
    /// Columns are the local vectors `|i_B⟩`.
    pub basis_b: CMatrix,
}

impl SchmidtDecomposition {
    /// `Σ_i √α_i |i_A ⊗ i_B⟩`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (da, db) = (self.basis_a.nrows(), self.basis_b.nrows());
        let mut amps = vec![ZERO; da * db];
        for (k, &p) in self.spectrum.values().iter().enumerate() {
            let s = p.sqrt();
            for i in 0..da {
                let x = self.basis_a[(i, k)] * s;
                for j in 0..db {
                    amps[i * db + j] += x * self.basis_b[(j, k)];
                }
            }
        }
        amps
    }
}

/// Schmidt decomposition through the SVD of the coefficient matrix.
///
/// Squared singular values below [`RANK_CUTOFF`] are set to zero. The
/// spectrum has `min(dim_a, dim_b)` entries.
pub fn schmidt(psi: &PureState) -> SchmidtDecomposition {
    let c = psi.coefficient_matrix();
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut values = Vec::with_capacity(k);
    let mut basis_a = CMatrix::zeros(psi.dim_a, k);
    let mut basis_b = CMatrix::zeros(psi.dim_b, k);
    for (col, &idx) in order.iter().enumerate() {
        let s = svd.singular_values[idx];
        let p = s * s;
        values.push(if p < RANK_CUTOFF { 0.0 } else { p });
        basis_a.set_column(col, &u.column(idx));
        basis_b.set_column(col, &v_t.row(idx).transpose());
    }
    let sum: f64 = values.iter().sum();
    for v in &mut values {
        *v /= sum;
    }
    SchmidtDecomposition { spectrum: SchmidtSpectrum { values }, basis_a, basis_b }
}

/// Shorthand for `schmidt(psi).spectrum`.
pub fn schmidt_spectrum(psi: &PureState) -> SchmidtSpectrum {
    schmidt(psi).spectrum
}

/// Spectrum of a reduced density matrix, clamped and renormalized.
pub fn spectrum_of(rho: &DensityMatrix) -> SchmidtSpectrum {
    let mut values: Vec<f64> = rho
        .eigenvalues()
        .into_iter()
        .map(|v| if v < RANK_CUTOFF { 0.0 } else { v })
        .collect();
    let sum: f64 = values.iter().sum();
    for v in &mut values {
        *v /= sum;
    }
    SchmidtSpectrum { values }
}

/// `|ψ⟩⟨ψ|` on the full product space.
pub fn density_of(psi: &PureState) -> DensityMatrix {
    let v = psi.amplitudes();
    DensityMatrix::from_raw(v * v.adjoint())
}

/// `Tr_B ρ` for `ρ` on `C^dim_a ⊗ C^dim_b`.
pub fn partial_trace_b(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    check_dims(dim_a, dim_b, rho.dim())?;
    let m = rho.entries();
    let out = CMatrix::from_fn(dim_a, dim_a, |i, k| {
        (0..dim_b).map(|j| m[(i * dim_b + j, k * dim_b + j)]).sum()
    });
    Ok(DensityMatrix::from_raw(out))
}

/// `Tr_A ρ` for `ρ` on `C^dim_a ⊗ C^dim_b`.
pub fn partial_trace_a(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    check_dims(dim_a, dim_b, rho.dim())?;
    let m = rho.entries();
    let out = CMatrix::from_fn(dim_b, dim_b, |j, l| {
        (0..dim_a).map(|i| m[(i * dim_b + j, i * dim_b + l)]).sum()
    });
    Ok(DensityMatrix::from_raw(out))
}

/// Normalized `Σ_j O_j ρ O_j†` together with its trace.
pub fn apply_kraus(rho: &DensityMatrix, ops: &[CMatrix]) -> Result<(DensityMatrix, f64)> {
    let (out, p) = kraus_sum(rho.entries(), ops)?;
    if p < IMPOSSIBLE_OUTCOME {
        return Err(Error::ImpossibleOutcome(p));
    }
    Ok((DensityMatrix::from_raw(out.unscale(p)), p))
}

pub(crate) fn kraus_sum(rho: &CMatrix, ops: &[CMatrix]) -> Result<(CMatrix, f64)> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty operator list".into()))?;
    let out_dim = first.nrows();
    let mut acc = CMatrix::zeros(out_dim, out_dim);
    for op in ops {
        if op.ncols() != rho.nrows() || op.nrows() != out_dim {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} on a {}-dimensional state",
                op.nrows(),
                op.ncols(),
                rho.nrows()
            )));
        }
        acc += op * rho * op.adjoint();
    }
    let p = acc.trace().re;
    Ok((acc, p))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// descending.
///
/// Eigenvectors are phase-fixed so their first entry of magnitude above
/// `1e-12` is real and positive; ties in eigenvalue are ordered
/// lexicographically on the fixed entries, so the output is reproducible.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).unscale(2.0);
    let eig = herm.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut vecs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-12) {
                let phase = lead.conj() / lead.norm();
                v *= phase;
            }
            (eig.eigenvalues[k], v)
        })
        .collect();
    vecs.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() > 1e-12 {
            lb.total_cmp(la)
        } else {
            lex_cmp(va, vb)
        }
    });
    let values = vecs.iter().map(|(l, _)| *l).collect();
    let mut basis = CMatrix::zeros(m.nrows(), n);
    for (k, (_, v)) in vecs.iter().enumerate() {
        basis.set_column(k, v);
    }
    (values, basis)
}

fn lex_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if (x.re - y.re).abs() > 1e-12 || (x.im - y.im).abs() > 1e-12 {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Square root of a Hermitian PSD matrix; negative eigenvalues clamp to 0.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, basis) = hermitian_eigen(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    &basis * diag * basis.adjoint()
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A state that may or may not be pure.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(psi) => density_of(psi),
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            QuantumState::Pure(psi) => Some(psi),
            QuantumState::Mixed(_) => None,
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(psi: PureState) -> Self {
        QuantumState::Pure(psi)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(rho: DensityMatrix) -> Self {
        QuantumState::Mixed(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleItem {
    pub label: usize,
    pub probability: f64,
    pub state: QuantumState,
}

/// `{p_k, ρ_k}` with non-negative probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEnsemble {
    items: Vec<EnsembleItem>,
}

impl OutcomeEnsemble {
    pub fn new(items: Vec<EnsembleItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        if let Some(bad) = items.iter().find(|it| !(it.probability >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative probability {}", bad.probability)));
        }
        let total: f64 = items.iter().map(|it| it.probability).sum();
        if (total - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        let dim = items[0].state.to_density().dim();
        if items.iter().any(|it| it.state.to_density().dim() != dim) {
            return Err(Error::DimensionMismatch("ensemble members differ in dimension".into()));
        }
        Ok(Self { items })
    }

    /// Pure-state ensemble from `(probability, state)` pairs.
    pub fn from_pure(items: Vec<(f64, PureState)>) -> Result<Self> {
        Self::new(
            items
                .into_iter()
                .enumerate()
                .map(|(label, (probability, psi))| EnsembleItem {
                    label,
                    probability,
                    state: QuantumState::Pure(psi),
                })
                .collect(),
        )
    }

    pub(crate) fn from_items_unchecked(items: Vec<EnsembleItem>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[EnsembleItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.items.iter().map(|it| it.probability).sum()
    }
}
