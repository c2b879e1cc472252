//! Truncated dilution states and their large-`Ñ` behaviour.
//!
//! The target is `ψ̃ = cos θ |11⟩ + sin θ |22⟩` with `a = cos²θ`,
//! `b = sin²θ`. The Schmidt coefficients of `ψ̃^⊗Ñ` are
//! `p_l = a^(Ñ-l) b^l` with multiplicity `C(Ñ, l)`. Keeping only `l ≤ r`
//! and renormalizing gives the truncated state `ξ_Ñ(r/Ñ)`.
//!
//! Every sum is a log-sum-exp in natural logs; conversion to bits happens
//! only on output, so `Ñ` up to `10⁶` is safe.

use std::f64::consts::{FRAC_PI_4, LN_2};
use std::fmt::Write as _;

use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::monotone::renyi_raw;

/// Slack for `r = floor(x Ñ)` so that e.g. `x = 0.3, Ñ = 10` gives `r = 3`.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilutionTarget {
    theta: f64,
    a: f64,
    b: f64,
}

impl DilutionTarget {
    /// Requires `θ ∈ (0, π/4)` so that the target is entangled and `a > b`.
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_4) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside (0, pi/4)")));
        }
        let (s, c) = theta.sin_cos();
        Ok(Self { theta, a: c * c, b: s * s })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `E_α(ψ̃)` in bits.
    pub fn e_alpha(&self, alpha: f64) -> f64 {
        renyi_raw(&[self.a, self.b], alpha)
    }

    /// `E₁(ψ̃) = H(b)`.
    pub fn entropy(&self) -> f64 {
        self.e_alpha(1.0)
    }

    fn log_p(&self, n: u64, l: u64) -> f64 {
        (n - l) as f64 * self.a.ln() + l as f64 * self.b.ln()
    }
}

/// `ln C(n, l)`.
pub fn log_binom(n: u64, l: u64) -> Result<f64> {
    if l > n {
        return Err(Error::InvalidArgument(format!("C({n}, {l}) out of range")));
    }
    if l == 0 || l == n {
        return Ok(0.0);
    }
    Ok(ln_binomial(n, l))
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// `r = floor(x Ñ)`, ties downward.
pub fn truncation_index(x: f64, n_tilde: u64) -> Result<u64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [0, 1]")));
    }
    Ok(((x * n_tilde as f64 + FLOOR_SLACK).floor() as u64).min(n_tilde))
}

/// Prefix log-sums over `l = 0..=r` for one `(θ, Ñ)`.
struct Prefix {
    n: u64,
    /// `ln Σ C p`
    mass: Vec<f64>,
    /// `ln Σ C`
    count: Vec<f64>,
    /// `ln Σ C p (-ln p)`
    info: Vec<f64>,
    /// `ln Σ C p^α`, one row per α
    powers: Vec<Vec<f64>>,
}

impl Prefix {
    fn build(target: &DilutionTarget, n: u64, alphas: &[f64]) -> Self {
        let len = n as usize + 1;
        let mut mass = Vec::with_capacity(len);
        let mut count = Vec::with_capacity(len);
        let mut info = Vec::with_capacity(len);
        let mut powers = vec![Vec::with_capacity(len); alphas.len()];
        let mut acc = [f64::NEG_INFINITY; 3];
        let mut acc_pow = vec![f64::NEG_INFINITY; alphas.len()];
        for l in 0..=n {
            let lc = log_binom(n, l).expect("l <= n");
            let lp = target.log_p(n, l);
            acc[0] = log_add(acc[0], lc + lp);
            acc[1] = log_add(acc[1], lc);
            acc[2] = log_add(acc[2], lc + lp + (-lp).ln());
            mass.push(acc[0]);
            count.push(acc[1]);
            info.push(acc[2]);
            for (k, &alpha) in alphas.iter().enumerate() {
                acc_pow[k] = log_add(acc_pow[k], lc + alpha * lp);
                powers[k].push(acc_pow[k]);
            }
        }
        Self { n, mass, count, info, powers }
    }

    /// `ln T(r)`, normalized by the full sum so that `T(Ñ) = 1` exactly.
    fn log_tail(&self, r: usize) -> f64 {
        self.mass[r] - self.mass[self.n as usize]
    }

    /// `M(r) = log₂ Σ_{l≤r} C(Ñ,l)`, pinned to `M(0) = 0` and `M(Ñ) = Ñ`.
    fn m_of_r(&self, r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        self.n as f64 + (self.count[r] - self.count[self.n as usize]) / LN_2
    }

    /// Shannon entropy per copy of the renormalized truncation. Rounding can
    /// leave a single kept term slightly negative, hence the clamp.
    fn e1(&self, r: usize) -> f64 {
        let s_over_t = (self.info[r] - self.mass[r]).exp();
        ((s_over_t + self.mass[r]) / (self.n as f64 * LN_2)).max(0.0)
    }

    /// `-(1/Ñ) Σ_{l≤r} C p log₂ p` without renormalization.
    fn e1_weighted(&self, r: usize) -> f64 {
        (self.info[r] - self.mass[self.n as usize]).exp() / (self.n as f64 * LN_2)
    }

    fn e_alpha(&self, k: usize, alpha: f64, r: usize) -> f64 {
        if alpha == 0.0 {
            return self.m_of_r(r) / self.n as f64;
        }
        if alpha == 1.0 {
            return self.e1(r);
        }
        let value = (self.powers[k][r] - alpha * self.mass[r]) / (self.n as f64 * (1.0 - alpha) * LN_2);
        value.max(0.0)
    }
}

fn check_n(n_tilde: u64) -> Result<()> {
    if n_tilde == 0 {
        return Err(Error::InvalidArgument("number of copies must be positive".into()));
    }
    Ok(())
}

/// `T = Σ_{l≤r} C(Ñ,l) a^(Ñ-l) b^l`.
pub fn tail_mass(target: &DilutionTarget, n_tilde: u64, r: u64) -> Result<f64> {
    check_n(n_tilde)?;
    if r > n_tilde {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds {n_tilde}")));
    }
    Ok(Prefix::build(target, n_tilde, &[]).log_tail(r as usize).exp())
}

/// `M(r)` in bits.
pub fn ebit_cost(n_tilde: u64, r: u64) -> Result<f64> {
    check_n(n_tilde)?;
    if r > n_tilde {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds {n_tilde}")));
    }
    let all = lse((0..=n_tilde).map(|l| log_binom(n_tilde, l).expect("l <= n")));
    let kept = lse((0..=r).map(|l| log_binom(n_tilde, l).expect("l <= n")));
    Ok(n_tilde as f64 + (kept - all) / LN_2)
}

fn lse(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, log_add)
}

/// `(T², T)` at each sample: the squared-sum convention next to the overlap
/// of the renormalized truncation with `ψ̃^⊗Ñ`.
pub fn fidelity_curve(target: &DilutionTarget, n_tilde: u64, x_samples: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_n(n_tilde)?;
    let prefix = Prefix::build(target, n_tilde, &[]);
    let mut squared = Vec::with_capacity(x_samples.len());
    let mut normalized = Vec::with_capacity(x_samples.len());
    for &x in x_samples {
        let t = prefix.log_tail(truncation_index(x, n_tilde)? as usize).exp();
        squared.push(t * t);
        normalized.push(t);
    }
    Ok((squared, normalized))
}

/// Asymptotic step location: `H(x*) = H(b)` with `x* ≤ 1/2`, i.e. `x* = b`.
pub fn x_star(target: &DilutionTarget) -> f64 {
    target.b
}

/// Smallest `r` with `M(r) ≥ Ñ H(b)`, found by bisection; returns `r/Ñ`.
pub fn x_star_finite(target: &DilutionTarget, n_tilde: u64) -> Result<f64> {
    check_n(n_tilde)?;
    let prefix = Prefix::build(target, n_tilde, &[]);
    let goal = n_tilde as f64 * target.entropy();
    let (mut lo, mut hi) = (0usize, n_tilde as usize);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if prefix.m_of_r(mid) >= goal {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo as f64 / n_tilde as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilutionCurve {
    pub theta: f64,
    pub n_tilde: u64,
    pub x_samples: Vec<f64>,
    pub r: Vec<u64>,
    pub m_of_r: Vec<f64>,
    /// `T`, equal to the normalized-convention fidelity.
    pub tail: Vec<f64>,
    pub fidelity_squared: Vec<f64>,
    pub fidelity_normalized: Vec<f64>,
    /// Per-copy entropy of the renormalized truncation.
    pub e1_per_copy: Vec<f64>,
    /// Per-copy `-Σ C p log₂ p` over the kept terms, no renormalization.
    pub e1_weighted_per_copy: Vec<f64>,
    pub e_alpha_per_copy: Vec<(f64, Vec<f64>)>,
    pub x_star: f64,
    pub x_star_finite: f64,
}

impl DilutionCurve {
    /// Columns `x,r,M_of_r,T,F_paper,F_normalized,e1,e_alpha:<α>...`.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_num;
        let mut out = String::from("x,r,M_of_r,T,F_paper,F_normalized,e1");
        for (alpha, _) in &self.e_alpha_per_copy {
            let _ = write!(out, ",e_alpha:{alpha}");
        }
        out.push('\n');
        for i in 0..self.x_samples.len() {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(self.x_samples[i]),
                self.r[i],
                fmt_num(self.m_of_r[i]),
                fmt_num(self.tail[i]),
                fmt_num(self.fidelity_squared[i]),
                fmt_num(self.fidelity_normalized[i]),
                fmt_num(self.e1_per_copy[i])
            );
            for (_, values) in &self.e_alpha_per_copy {
                let _ = write!(out, ",{}", fmt_num(values[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn e_alpha(&self, alpha: f64) -> Option<&[f64]> {
        self.e_alpha_per_copy
            .iter()
            .find(|(a, _)| *a == alpha)
            .map(|(_, v)| v.as_slice())
    }
}

/// `n` equally spaced samples from 0 to 1 inclusive.
pub fn uniform_samples(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// Fidelities, ebit cost and per-copy entropies of `ξ_Ñ(x)` at each sample.
pub fn entropy_curves(
    target: &DilutionTarget,
    n_tilde: u64,
    x_samples: &[f64],
    alphas: &[f64],
) -> Result<DilutionCurve> {
    check_n(n_tilde)?;
    if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("alpha {bad} outside [0, 1]")));
    }
    let r: Vec<u64> = x_samples
        .iter()
        .map(|&x| truncation_index(x, n_tilde))
        .collect::<Result<_>>()?;
    let prefix = Prefix::build(target, n_tilde, alphas);
    let idx: Vec<usize> = r.iter().map(|&v| v as usize).collect();
    let tail: Vec<f64> = idx.iter().map(|&i| prefix.log_tail(i).exp()).collect();
    let e_alpha_per_copy = alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| (alpha, idx.iter().map(|&i| prefix.e_alpha(k, alpha, i)).collect()))
        .collect();
    Ok(DilutionCurve {
        theta: target.theta,
        n_tilde,
        x_samples: x_samples.to_vec(),
        m_of_r: idx.iter().map(|&i| prefix.m_of_r(i)).collect(),
        fidelity_squared: tail.iter().map(|t| t * t).collect(),
        fidelity_normalized: tail.clone(),
        e1_per_copy: idx.iter().map(|&i| prefix.e1(i)).collect(),
        e1_weighted_per_copy: idx.iter().map(|&i| prefix.e1_weighted(i)).collect(),
        e_alpha_per_copy,
        tail,
        r,
        x_star: x_star(target),
        x_star_finite: x_star_finite(target, n_tilde)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityRow {
    pub n_tilde: u64,
    pub x: f64,
    pub fidelity_squared: f64,
    pub fidelity_normalized: f64,
    pub e1: f64,
    pub e_alpha: f64,
    /// `E_α(ψ̃) − e_α(ξ_Ñ(x* + δ))`.
    pub gap: f64,
}

/// Evaluates `ξ_Ñ(x* + δ)` along a schedule of `Ñ`. Values only; no limit
/// is asserted.
pub fn discontinuity_report(
    target: &DilutionTarget,
    schedule: &[u64],
    alpha: f64,
    delta: f64,
) -> Result<Vec<DiscontinuityRow>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1) for the discontinuity report, got {alpha}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let x = (x_star(target) + delta).min(1.0);
    let reference = target.e_alpha(alpha);
    schedule
        .par_iter()
        .map(|&n| {
            let c = entropy_curves(target, n, &[x], &[alpha])?;
            let e_alpha = c.e_alpha_per_copy[0].1[0];
            Ok(DiscontinuityRow {
                n_tilde: n,
                x,
                fidelity_squared: c.fidelity_squared[0],
                fidelity_normalized: c.fidelity_normalized[0],
                e1: c.e1_per_copy[0],
                e_alpha,
                gap: reference - e_alpha,
            })
        })
        .collect()
}

/// `n_tilde,x,F_paper,F_normalized,e1,e_alpha,gap`.
pub fn discontinuity_csv(rows: &[DiscontinuityRow]) -> String {
    use crate::io::fmt_num;
    let mut out = String::from("n_tilde,x,F_paper,F_normalized,e1,e_alpha,gap\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.n_tilde,
            fmt_num(row.x),
            fmt_num(row.fidelity_squared),
            fmt_num(row.fidelity_normalized),
            fmt_num(row.e1),
            fmt_num(row.e_alpha),
            fmt_num(row.gap)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pi6() -> DilutionTarget {
        DilutionTarget::new(PI / 6.0).unwrap()
    }

    #[test]
    fn target_guard() {
        assert!(DilutionTarget::new(0.0).is_err());
        assert!(DilutionTarget::new(FRAC_PI_4).is_err());
        let t = pi6();
        assert!((t.a() + t.b() - 1.0).abs() < 1e-12);
        assert!((t.b() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn log_binom_examples() {
        assert!((log_binom(4, 1).unwrap() - 4f64.ln()).abs() < 1e-15);
        let exact = 155_117_520f64.ln();
        assert!(((log_binom(30, 15).unwrap() - exact) / exact).abs() < 1e-12);
        let big = log_binom(1_000_000, 500_000).unwrap();
        let n = 1e6_f64;
        let stirling = n * LN_2 - 0.5 * (PI * n / 2.0).ln();
        assert!(big.is_finite());
        assert!(((big - stirling) / stirling).abs() < 1e-6);
        assert!(log_binom(3, 4).is_err());
    }

    #[test]
    fn tail_mass_examples() {
        let t = pi6();
        assert!((tail_mass(&t, 4, 1).unwrap() - 0.738281).abs() < 1e-6);
        assert!((tail_mass(&t, 4, 1).unwrap() - (0.75f64.powi(4) + 4.0 * 0.75f64.powi(3) * 0.25)).abs() < 1e-12);
        assert_eq!(tail_mass(&t, 37, 37).unwrap(), 1.0);
        assert!((tail_mass(&t, 7, 0).unwrap() - 0.75f64.powi(7)).abs() < 1e-12);
        assert!(tail_mass(&t, 4, 5).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let (p, n) = fidelity_curve(&pi6(), 4, &[0.25, 1.0]).unwrap();
        let t = 0.75f64.powi(4) + 4.0 * 0.75f64.powi(3) * 0.25;
        assert!((n[0] - t).abs() < 1e-12 && (p[0] - t * t).abs() < 1e-12);
        assert_eq!((p[1], n[1]), (1.0, 1.0));
    }

    #[test]
    fn truncation_rounds_down() {
        assert_eq!(truncation_index(0.3, 10).unwrap(), 3);
        assert_eq!(truncation_index(0.29, 10).unwrap(), 2);
        assert_eq!(truncation_index(1.0, 7).unwrap(), 7);
        assert!(truncation_index(1.5, 7).is_err());
    }

    #[test]
    fn ebit_cost_boundary() {
        assert_eq!(ebit_cost(50, 50).unwrap(), 50.0);
        assert!((ebit_cost(4, 1).unwrap() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn x_star_variants() {
        assert!((x_star(&pi6()) - 0.25).abs() < 1e-15);
        let near = DilutionTarget::new(FRAC_PI_4 - 1e-6).unwrap();
        assert!((x_star(&near) - 0.5).abs() < 1e-5);
        let finite = x_star_finite(&pi6(), 1000).unwrap();
        assert!((finite - 0.25).abs() < 0.02, "{finite}");
    }

    #[test]
    fn full_truncation_recovers_target() {
        let t = pi6();
        let alphas = [0.0, 0.25, 0.5, 1.0];
        let c = entropy_curves(&t, 60, &[1.0], &alphas).unwrap();
        assert!((c.e1_per_copy[0] - 0.811278124459).abs() < 1e-9);
        for (alpha, v) in &c.e_alpha_per_copy {
            assert!((v[0] - t.e_alpha(*alpha)).abs() < 1e-9, "alpha {alpha}");
        }
        assert_eq!(c.m_of_r[0], 60.0);
        assert!((c.e1_weighted_per_copy[0] - c.e1_per_copy[0]).abs() < 1e-12);
    }

    #[test]
    fn curve_invariants() {
        let xs = uniform_samples(41);
        let c = entropy_curves(&pi6(), 200, &xs, &[0.5]).unwrap();
        for w in c.fidelity_squared.windows(2).chain(c.fidelity_normalized.windows(2)).chain(c.m_of_r.windows(2)) {
            assert!(w[1] >= w[0] - 1e-15);
        }
        let e_half = c.e_alpha(0.5).unwrap();
        for (e1, eh) in c.e1_per_copy.iter().zip(e_half) {
            assert!(*eh >= e1 - 1e-9);
        }
        assert!((c.m_of_r.last().unwrap() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn large_n_step() {
        let c = entropy_curves(&pi6(), 5000, &[0.2, 0.3], &[1.0]).unwrap();
        assert!(c.fidelity_normalized[0] < 0.01 && c.fidelity_squared[0] < 0.01);
        assert!(c.fidelity_normalized[1] > 0.99 && c.fidelity_squared[1] > 0.99);
        assert!((c.e1_per_copy[1] - 0.811278).abs() < 0.02);
        assert!(c.e1_weighted_per_copy[0] < 0.25 * pi6().entropy());
    }

    #[test]
    fn million_copies_is_finite() {
        let c = entropy_curves(&pi6(), 1_000_000, &[0.26], &[0.5]).unwrap();
        assert!(c.tail[0].is_finite() && c.tail[0] > 0.99);
        assert!(c.e_alpha_per_copy[0].1[0].is_finite());
    }

    #[test]
    fn discontinuity_guard_and_gap() {
        assert!(discontinuity_report(&pi6(), &[100], 1.0, 0.05).is_err());
        assert!(discontinuity_report(&pi6(), &[100], 0.5, 0.0).is_err());
        let rows = discontinuity_report(&pi6(), &[100, 500, 1000], 0.5, 0.05).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].fidelity_normalized > w[0].fidelity_normalized);
        }
        assert!(rows.iter().all(|r| r.gap > 0.02));
        let csv = discontinuity_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn csv_columns() {
        let c = entropy_curves(&pi6(), 4, &[0.25], &[0.5]).unwrap();
        let csv = c.to_csv();
        assert_eq!(csv.lines().next(), Some("x,r,M_of_r,T,F_paper,F_normalized,e1,e_alpha:0.5"));
    }
}
