//! Local equivalence of pure states and conversion-probability bounds from
//! the α-entropy family.
//!
//! For any monotone `μ`, a local protocol taking `ψ` to `φ` with probability
//! `p` satisfies `p ≤ μ(ψ)/μ(φ)`. Evaluating the ratio on a grid of
//! α-entropies and taking the minimum gives a certified upper bound; the
//! grid never proves tightness.

use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::monotone::renyi_raw;
use crate::state::SchmidtSpectrum;
use crate::RANK_CUTOFF;

pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Two pure states are interconvertible by local unitaries iff their sorted,
/// zero-padded spectra agree.
pub fn locally_equivalent(s1: &SchmidtSpectrum, s2: &SchmidtSpectrum, tol: f64) -> bool {
    let n = s1.len().max(s2.len());
    s1.padded(n)
        .iter()
        .zip(s2.padded(n))
        .all(|(x, y)| (x - y).abs() <= tol)
}

/// Sorted α values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid(Vec<f64>);

impl AlphaGrid {
    /// `points` equally spaced values from 0 to 1 inclusive.
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("alpha grid needs at least 2 points".into()));
        }
        let step = (points - 1) as f64;
        Ok(Self((0..points).map(|k| k as f64 / step).collect()))
    }

    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty alpha grid".into()));
        }
        if let Some(bad) = values.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!("alpha {bad} outside [0, 1]")));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_GRID_POINTS).expect("default grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionBound {
    /// `min(1, min ratio)`.
    pub value: f64,
    pub minimizing_alpha: f64,
    /// `(α, E_α(source)/E_α(target))`, unclipped, skipping vanishing
    /// denominators.
    pub per_alpha_curve: Vec<(f64, f64)>,
}

impl ConversionBound {
    /// Smallest ratio on the curve before clipping.
    pub fn min_ratio(&self) -> f64 {
        self.per_alpha_curve
            .iter()
            .map(|&(_, r)| r)
            .fold(f64::INFINITY, f64::min)
    }

    /// `alpha,ratio` rows.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("alpha,ratio\n");
        for &(a, r) in &self.per_alpha_curve {
            let _ = writeln!(out, "{},{}", crate::io::fmt_num(a), crate::io::fmt_num(r));
        }
        out
    }
}

fn ratio_curve(source: &SchmidtSpectrum, target: &SchmidtSpectrum, scale: f64, grid: &AlphaGrid) -> Result<ConversionBound> {
    let points: Vec<Option<(f64, f64)>> = grid
        .values()
        .par_iter()
        .map(|&a| {
            let den = scale * renyi_raw(target.values(), a);
            (den >= RANK_CUTOFF).then(|| (a, scale * renyi_raw(source.values(), a) / den))
        })
        .collect();
    let skipped = points.iter().filter(|p| p.is_none()).count();
    let curve: Vec<(f64, f64)> = points.into_iter().flatten().collect();
    if curve.is_empty() {
        return Err(Error::SeparableTarget);
    }
    if skipped > 0 {
        warn!("skipped {skipped} grid points where the target entropy vanishes");
    }
    let (minimizing_alpha, min_ratio) = curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
    Ok(ConversionBound { value: min_ratio.min(1.0), minimizing_alpha, per_alpha_curve: curve })
}

/// Upper bound on `P(source → target)` over the α grid.
pub fn bound_single(source: &SchmidtSpectrum, target: &SchmidtSpectrum, grid: &AlphaGrid) -> Result<ConversionBound> {
    ratio_curve(source, target, 1.0, grid)
}

/// Bound for `source^⊗N → target^⊗N`. Additivity makes both entropies scale
/// by `N`, so no tensor power is formed.
pub fn bound_multicopy(
    source: &SchmidtSpectrum,
    target: &SchmidtSpectrum,
    n_copies: usize,
    grid: &AlphaGrid,
) -> Result<ConversionBound> {
    if n_copies == 0 {
        return Err(Error::InvalidArgument("at least one copy required".into()));
    }
    ratio_curve(source, target, n_copies as f64, grid)
}

/// Same bound computed from explicit tensor powers. Only for small `N`; the
/// spectrum length grows as `d^N`.
pub fn bound_multicopy_explicit(
    source: &SchmidtSpectrum,
    target: &SchmidtSpectrum,
    n_copies: usize,
    grid: &AlphaGrid,
) -> Result<ConversionBound> {
    if n_copies == 0 {
        return Err(Error::InvalidArgument("at least one copy required".into()));
    }
    bound_single(&source.tensor_power(n_copies), &target.tensor_power(n_copies), grid)
}

/// `N · min_α E_α(source)/E_α(target)`: an upper bound on the average
/// number of target copies obtained from `N` source copies. Not clipped.
pub fn bound_average_yield(
    source: &SchmidtSpectrum,
    target: &SchmidtSpectrum,
    n_copies: usize,
    grid: &AlphaGrid,
) -> Result<f64> {
    let b = bound_single(source, target, grid)?;
    Ok(n_copies as f64 * b.min_ratio())
}
