//! Pure-state monotones as symmetric concave functions of the Schmidt
//! spectrum.
//!
//! A [`MonotoneSpec`] wraps a function `g` on probability vectors of any
//! length. [`monotone_from_concave`] checks symmetry, concavity and the
//! vanishing-on-product-states normalization by seeded random sampling and
//! returns a [`Monotone`] evaluator. Sampling can only refute concavity; a
//! pass is evidence, not proof.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::random::{self, Rng};
use crate::state::{schmidt_spectrum, spectrum_of, DensityMatrix, PureState, SchmidtSpectrum};
use crate::RANK_CUTOFF;

const DISTRIBUTION_TOL: f64 = 1e-9;
const CONCAVITY_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-12;

/// Rényi order, restricted to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaParam(f64);

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0,1]")));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for AlphaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shannon entropy in bits, `0·log 0 = 0`.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// `S_α` without input validation.
pub(crate) fn renyi_raw(p: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        let support = p.iter().filter(|&&x| x > RANK_CUTOFF).count();
        (support.max(1) as f64).log2()
    } else if alpha == 1.0 {
        shannon(p)
    } else {
        let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(alpha)).sum();
        s.log2() / (1.0 - alpha)
    }
}

/// α-entropy (information of order α) in bits.
///
/// `α = 0` counts entries above `1e-12`; `α = 1` is the Shannon limit.
pub fn renyi_entropy(p: &[f64], alpha: AlphaParam) -> Result<f64> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("probabilities must be finite and non-negative".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
    }
    Ok(renyi_raw(p, alpha.value()))
}

/// α-entropy of entanglement of a Schmidt spectrum.
pub fn e_alpha(spectrum: &SchmidtSpectrum, alpha: AlphaParam) -> f64 {
    renyi_raw(spectrum.values(), alpha.value())
}

pub fn e_alpha_state(psi: &PureState, alpha: AlphaParam) -> f64 {
    e_alpha(&schmidt_spectrum(psi), alpha)
}

/// `(1/(1-α)) log₂ Tr σ^α` on a reduced density matrix.
pub fn e_alpha_reduced(sigma: &DensityMatrix, alpha: AlphaParam) -> f64 {
    renyi_raw(spectrum_of(sigma).values(), alpha.value())
}

/// `Tr σ^α` through the eigenvalues of `σ`.
pub fn trace_power(sigma: &DensityMatrix, alpha: f64) -> f64 {
    sigma.eigenvalues().into_iter().filter(|&l| l > RANK_CUTOFF).map(|l| l.powf(alpha)).sum()
}

/// `ΔE_α` between `cos θ|11⟩ + sin θ|22⟩` and `|11⟩` as a function of the
/// fidelity `F = cos²θ`.
///
/// Continuous for `α ∈ (0, 1]`; at `α = 0` it is the step `0` on `F ∈ {0, 1}`
/// and `1` elsewhere.
pub fn delta_e_alpha_of_fidelity(fidelity: f64, alpha: AlphaParam) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidArgument(format!("fidelity {fidelity} outside [0,1]")));
    }
    let a = alpha.value();
    let f = fidelity;
    Ok(if a == 0.0 {
        if f == 0.0 || f == 1.0 {
            0.0
        } else {
            1.0
        }
    } else if a == 1.0 {
        shannon(&[f, 1.0 - f])
    } else {
        (f.powf(a) + (1.0 - f).powf(a)).log2() / (1.0 - a)
    })
}

pub type SpectrumFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A candidate monotone: `g` on probability vectors of any length.
#[derive(Clone)]
pub struct MonotoneSpec {
    name: String,
    g: SpectrumFn,
    normalized: bool,
}

impl fmt::Debug for MonotoneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneSpec")
            .field("name", &self.name)
            .field("normalized", &self.normalized)
            .finish_non_exhaustive()
    }
}

impl MonotoneSpec {
    pub fn new<F>(name: impl Into<String>, normalized: bool, g: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), g: Arc::new(g), normalized }
    }

    /// `E_α` as a spec.
    pub fn e_alpha(alpha: AlphaParam) -> Self {
        let a = alpha.value();
        let name = if a == 0.0 {
            "e0".to_string()
        } else if a == 1.0 {
            "e1".to_string()
        } else {
            format!("e_alpha:{a}")
        };
        Self::new(name, true, move |p| renyi_raw(p, a))
    }

    pub fn entropy() -> Self {
        Self::e_alpha(AlphaParam(1.0))
    }

    /// `g(p) = Σ_i f̂(p_i)` without any checks; see [`trace_fn_spec`].
    pub fn trace_fn_unchecked<F>(name: impl Into<String>, f_hat: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, true, move |p| p.iter().map(|&x| f_hat(x)).sum())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.g)(p)
    }

    /// Randomized symmetry, concavity and normalization checks.
    pub fn validate(&self, opts: &ValidationOptions) -> Result<()> {
        let mut rng = random::seeded(opts.seed);
        let reject = |reason: String| Error::InvalidMonotone { name: self.name.clone(), reason };

        if self.normalized {
            for n in 1..=opts.max_len {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                let v = self.eval(&e);
                if v.abs() > NORMALIZATION_TOL {
                    return Err(reject(format!("g({e:?}) = {v}, expected 0")));
                }
            }
        }

        for _ in 0..opts.samples {
            let n = 2 + (random::unit_interval(&mut rng) * (opts.max_len - 1) as f64) as usize;
            let n = n.min(opts.max_len);
            let x = sample_point(n, &mut rng);
            let y = sample_point(n, &mut rng);
            let lambda = 0.001 + 0.998 * random::unit_interval(&mut rng);
            let mix: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            let lhs = self.eval(&mix);
            let rhs = lambda * self.eval(&x) + (1.0 - lambda) * self.eval(&y);
            if !lhs.is_finite() || !rhs.is_finite() {
                return Err(reject(format!("non-finite value at x={x:?}, y={y:?}")));
            }
            if lhs < rhs - CONCAVITY_TOL {
                return Err(reject(format!(
                    "concavity violated by {:e} at x={x:?}, y={y:?}, lambda={lambda}",
                    rhs - lhs
                )));
            }

            let mut perm = x.clone();
            perm.shuffle(&mut rng);
            let (gx, gp) = (self.eval(&x), self.eval(&perm));
            if (gx - gp).abs() > SYMMETRY_TOL {
                return Err(reject(format!("not symmetric: g({x:?})={gx}, g({perm:?})={gp}")));
            }
        }
        Ok(())
    }
}

/// Points on the simplex, some on faces (exact zeros) or vertices.
fn sample_point(n: usize, rng: &mut Rng) -> Vec<f64> {
    let mut p = random::simplex_point(n, rng);
    let u = random::unit_interval(rng);
    if u < 0.1 {
        let k = (random::unit_interval(rng) * n as f64) as usize % n;
        p.iter_mut().enumerate().for_each(|(i, x)| *x = if i == k { 1.0 } else { 0.0 });
    } else if u < 0.3 {
        let k = (random::unit_interval(rng) * n as f64) as usize % n;
        p[k] = 0.0;
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            p.iter_mut().for_each(|x| *x /= s);
        } else {
            p[(k + 1) % n] = 1.0;
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub samples: usize,
    pub seed: u64,
    /// Largest simplex dimension sampled.
    pub max_len: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0x5eed, max_len: 6 }
    }
}

/// Builds `g(p) = Σ f̂(p_i)` after checking `f̂(0) = f̂(1) = 0` and sampled
/// concavity of `f̂` on `[0, 1]`.
pub fn trace_fn_spec<F>(name: impl Into<String>, f_hat: F) -> Result<MonotoneSpec>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    trace_fn_spec_with(name, f_hat, &ValidationOptions::default())
}

pub fn trace_fn_spec_with<F>(
    name: impl Into<String>,
    f_hat: F,
    opts: &ValidationOptions,
) -> Result<MonotoneSpec>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let name = name.into();
    let reject = |reason: String| Error::InvalidMonotone { name: name.clone(), reason };
    for end in [0.0, 1.0] {
        let v = f_hat(end);
        if !(v.abs() <= NORMALIZATION_TOL) {
            return Err(reject(format!("f({end}) = {v}, expected 0")));
        }
    }
    let mut rng = random::seeded(opts.seed);
    for _ in 0..opts.samples {
        let x = random::unit_interval(&mut rng);
        let y = random::unit_interval(&mut rng);
        let lambda = random::unit_interval(&mut rng);
        let lhs = f_hat(lambda * x + (1.0 - lambda) * y);
        let rhs = lambda * f_hat(x) + (1.0 - lambda) * f_hat(y);
        if lhs < rhs - CONCAVITY_TOL {
            return Err(reject(format!(
                "f not concave at x={x}, y={y}, lambda={lambda} (gap {:e})",
                rhs - lhs
            )));
        }
    }
    Ok(MonotoneSpec::trace_fn_unchecked(name, f_hat))
}

/// Pure-state evaluator `ν(ψ) = g(spectrum of ψ)`.
#[derive(Debug, Clone)]
pub struct Monotone {
    spec: MonotoneSpec,
    validated: bool,
}

impl Monotone {
    /// Wraps a spec without validation. Used for negative controls.
    pub fn unchecked(spec: MonotoneSpec) -> Self {
        Self { spec, validated: false }
    }

    pub fn spec(&self) -> &MonotoneSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        self.spec.name()
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn eval_spectrum(&self, spectrum: &SchmidtSpectrum) -> f64 {
        self.spec.eval(spectrum.values())
    }

    pub fn eval_state(&self, psi: &PureState) -> f64 {
        self.eval_spectrum(&schmidt_spectrum(psi))
    }

    /// Evaluates on the spectrum of a reduced density matrix.
    pub fn eval_reduced(&self, sigma: &DensityMatrix) -> f64 {
        self.eval_spectrum(&spectrum_of(sigma))
    }
}

pub fn monotone_from_concave(spec: MonotoneSpec) -> Result<Monotone> {
    monotone_from_concave_with(spec, &ValidationOptions::default())
}

pub fn monotone_from_concave_with(spec: MonotoneSpec, opts: &ValidationOptions) -> Result<Monotone> {
    spec.validate(opts)?;
    Ok(Monotone { spec, validated: true })
}

/// Names accepted by [`lookup`] after `trace_fn:`.
pub const TRACE_FN_BUILTINS: &[&str] = &["entropy", "linear", "sqrt", "square"];

fn builtin_trace_fn(name: &str) -> Option<fn(f64) -> f64> {
    Some(match name {
        "entropy" => |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 },
        "linear" => |x: f64| x * (1.0 - x),
        "sqrt" => |x: f64| x.sqrt() - x,
        // convex: a negative control, rejected by validation
        "square" => |x: f64| x * x - x,
        _ => return None,
    })
}

/// Resolves a registry name to an unvalidated spec.
///
/// Accepted forms: `e0`, `e1`, `entropy`, `e_alpha:<value>`, `trace_fn:<builtin>` with
/// builtins listed in [`TRACE_FN_BUILTINS`].
pub fn lookup(name: &str) -> Result<MonotoneSpec> {
    let unknown = || Error::InvalidArgument(format!("unknown monotone `{name}`"));
    match name {
        "e0" => Ok(MonotoneSpec::e_alpha(AlphaParam(0.0))),
        "e1" => Ok(MonotoneSpec::e_alpha(AlphaParam(1.0))),
        "entropy" => Ok(MonotoneSpec::entropy()),
        _ => {
            if let Some(v) = name.strip_prefix("e_alpha:") {
                let alpha: f64 = v.parse().map_err(|_| unknown())?;
                Ok(MonotoneSpec::e_alpha(AlphaParam::new(alpha)?))
            } else if let Some(b) = name.strip_prefix("trace_fn:") {
                let f = builtin_trace_fn(b).ok_or_else(unknown)?;
                Ok(MonotoneSpec::trace_fn_unchecked(name, f))
            } else {
                Err(unknown())
            }
        }
    }
}

/// [`lookup`] followed by validation with default options.
pub fn resolve(name: &str) -> Result<Monotone> {
    monotone_from_concave(lookup(name)?)
}
