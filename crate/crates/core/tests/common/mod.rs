//! Independent reference computations for integration tests. Everything here
//! works in the linear domain with plain loops and avoids the library's
//! log-domain and search code.
#![allow(dead_code)]

use entmon::state::{psd_sqrt, CMatrix, DensityMatrix};
use entmon::Complex64;

pub const ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Row `n` of Pascal's triangle, exact in f64 for `n ≤ 50`.
pub fn pascal_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

#[derive(Debug, Clone)]
pub struct DilutionPoint {
    pub tail: f64,
    pub m_of_r: f64,
    pub e1: f64,
    pub e_alpha: Vec<f64>,
}

fn entropies(weighted: &[(f64, f64)], n: usize, alphas: &[f64]) -> (f64, Vec<f64>) {
    let t: f64 = weighted.iter().map(|&(c, p)| c * p).sum();
    let e1 = -weighted
        .iter()
        .map(|&(c, p)| {
            let l = p / t;
            c * l * l.log2()
        })
        .sum::<f64>()
        / n as f64;
    let ea = alphas
        .iter()
        .map(|&a| {
            if a == 0.0 {
                weighted.iter().map(|&(c, _)| c).sum::<f64>().log2() / n as f64
            } else if a == 1.0 {
                e1
            } else {
                weighted.iter().map(|&(c, p)| c * (p / t).powf(a)).sum::<f64>().log2() / (n as f64 * (1.0 - a))
            }
        })
        .collect();
    (e1, ea)
}

/// Truncated dilution state through exact Pascal multiplicities.
pub fn dilution_by_multiplicity(theta: f64, n: usize, r: usize, alphas: &[f64]) -> DilutionPoint {
    let (a, b) = (theta.cos().powi(2), theta.sin().powi(2));
    let c = pascal_row(n);
    let kept: Vec<(f64, f64)> = (0..=r).map(|l| (c[l], a.powi((n - l) as i32) * b.powi(l as i32))).collect();
    let tail = kept.iter().map(|&(c, p)| c * p).sum();
    let m_of_r = kept.iter().map(|&(c, _)| c).sum::<f64>().log2();
    let (e1, e_alpha) = entropies(&kept, n, alphas);
    DilutionPoint { tail, m_of_r, e1, e_alpha }
}

/// Truncated dilution state by listing all `2^n` Schmidt coefficients of
/// the tensor power, sorting, and keeping those with at most `r` factors
/// of `sin²θ`.
pub fn dilution_by_full_spectrum(theta: f64, n: usize, r: usize, alphas: &[f64]) -> DilutionPoint {
    let (a, b) = (theta.cos().powi(2), theta.sin().powi(2));
    let mut coeffs: Vec<(u32, f64)> = (0u64..1 << n)
        .map(|mask| {
            let ones = mask.count_ones();
            let p = (0..n).map(|k| if mask >> k & 1 == 1 { b } else { a }).product();
            (ones, p)
        })
        .collect();
    coeffs.sort_by(|x, y| y.1.total_cmp(&x.1));
    let kept: Vec<(f64, f64)> = coeffs
        .iter()
        .filter(|(ones, _)| *ones as usize <= r)
        .map(|&(_, p)| (1.0, p))
        .collect();
    let tail = kept.iter().map(|&(_, p)| p).sum();
    let m_of_r = (kept.len() as f64).log2();
    let (e1, e_alpha) = entropies(&kept, n, alphas);
    DilutionPoint { tail, m_of_r, e1, e_alpha }
}

pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Two-qubit concurrence from the spectrum of `√(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sy = CMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let yy = sy.kronecker(&sy);
    let m = rho.entries();
    let tilde = &yy * m.map(|x| x.conj()) * &yy;
    let s = psd_sqrt(m);
    let inner = &s * tilde * &s;
    let inner = (&inner + inner.adjoint()).unscale(2.0);
    let mut l: Vec<f64> = inner
        .symmetric_eigenvalues()
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Entanglement of formation of a two-qubit state.
pub fn eof_two_qubits(rho: &DensityMatrix) -> f64 {
    let c = concurrence(rho);
    binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}

/// `0.5 Bell + 0.5 |01⟩⟨01|`.
pub fn roof_benchmark() -> DensityMatrix {
    let mut m = CMatrix::zeros(4, 4);
    let h = Complex64::new(0.25, 0.0);
    m[(0, 0)] = h;
    m[(0, 3)] = h;
    m[(3, 0)] = h;
    m[(3, 3)] = h;
    m[(1, 1)] = Complex64::new(0.5, 0.0);
    DensityMatrix::new(m).unwrap()
}

/// Value of the benchmark's entanglement of formation, from the closed form
/// with concurrence 1/2.
pub const ROOF_BENCHMARK_EOF: f64 = 0.354_578_902_665_269_5;
