//! JSON state files, roof certificates and CSV number formatting.
//!
//! A state file holds exactly one of:
//!
//! ```json
//! {"label": "bell", "amplitudes": {"dim_a": 2, "dim_b": 2, "values": [[0.7071, 0], [0, 0], [0, 0], [0.7071, 0]]}}
//! {"schmidt": [0.5, 0.5]}
//! {"density": {"dim_a": 2, "dim_b": 2, "rows": [[[0.5, 0], ...], ...]}}
//! {"certificate": {...}}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and amplitudes are row-major
//! (`index = i_a * dim_b + i_b`). Amplitudes and Schmidt weights are
//! normalized on ingest, density matrices are divided by their trace.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::Monotone;
use crate::roof::{self, Ensemble, RoofEstimate};
use crate::state::{density_of, schmidt_spectrum, CMatrix, DensityMatrix, PureState, SchmidtSpectrum};

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

/// Formats `v` with 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(v: f64) -> String {
    fmt_sig(v, CSV_DIGITS)
}

/// Formats `v` with `digits` significant digits.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.prec$e}", prec = digits - 1);
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim(mantissa.to_string())),
            None => s,
        }
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

type Pair = [f64; 2];

fn to_complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeBlock {
    pub dim_a: usize,
    pub dim_b: usize,
    pub values: Vec<Pair>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityBlock {
    pub dim_a: usize,
    pub dim_b: usize,
    pub rows: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CertificateMember {
    pub probability: f64,
    pub amplitudes: Vec<Pair>,
}

/// Exported roof ensemble. `value` is an upper bound on the convex roof,
/// `ensemble_size` the cap `m` used by the search.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub monotone: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub value: f64,
    pub upper_bound: bool,
    pub ensemble_size: usize,
    pub restarts: usize,
    pub converged: bool,
    pub members: Vec<CertificateMember>,
}

impl Certificate {
    pub fn from_estimate(est: &RoofEstimate, monotone: &str, dim_a: usize, dim_b: usize) -> Self {
        Self {
            monotone: monotone.to_string(),
            dim_a,
            dim_b,
            value: est.value,
            upper_bound: true,
            ensemble_size: est.ensemble_size,
            restarts: est.restarts,
            converged: est.converged,
            members: est
                .ensemble
                .iter()
                .map(|(p, psi)| CertificateMember {
                    probability: *p,
                    amplitudes: psi.amplitudes().iter().map(to_pair).collect(),
                })
                .collect(),
        }
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        self.members
            .iter()
            .map(|m| {
                let amps = m.amplitudes.iter().map(to_complex).collect();
                Ok((m.probability, PureState::new(self.dim_a, self.dim_b, amps)?))
            })
            .collect()
    }

    /// `Σ p_j μ(ψ_j)` recomputed from the stored members.
    pub fn reevaluate(&self, monotone: &Monotone) -> Result<f64> {
        Ok(roof::ensemble_value(monotone, &self.ensemble()?))
    }

    /// State realized by the ensemble.
    pub fn mixture(&self) -> Result<CMatrix> {
        Ok(roof::mixture(&self.ensemble()?))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

/// Parsed contents of a state file.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Pure(PureState),
    Spectrum(SchmidtSpectrum),
    Mixed { rho: DensityMatrix, dim_a: usize, dim_b: usize },
    Certificate(Certificate),
}

impl LoadedState {
    pub fn spectrum(&self) -> Result<SchmidtSpectrum> {
        match self {
            Self::Pure(psi) => Ok(schmidt_spectrum(psi)),
            Self::Spectrum(s) => Ok(s.clone()),
            _ => Err(Error::Precondition("a pure state or Schmidt spectrum is required".into())),
        }
    }

    /// Density matrix and bipartition. Spectra become `Σ √α_i |ii⟩`.
    pub fn density(&self) -> Result<(DensityMatrix, usize, usize)> {
        match self {
            Self::Pure(psi) => Ok((density_of(psi), psi.dim_a(), psi.dim_b())),
            Self::Spectrum(s) => {
                let psi = PureState::from_schmidt(s);
                Ok((density_of(&psi), psi.dim_a(), psi.dim_b()))
            }
            Self::Mixed { rho, dim_a, dim_b } => Ok((rho.clone(), *dim_a, *dim_b)),
            Self::Certificate(c) => Ok((DensityMatrix::new(c.mixture()?)?, c.dim_a, c.dim_b)),
        }
    }
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let present = [
            file.amplitudes.is_some(),
            file.schmidt.is_some(),
            file.density.is_some(),
            file.certificate.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if present != 1 {
            return Err(Error::Parse(format!(
                "expected exactly one of amplitudes, schmidt, density, certificate; found {present}"
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_pure(psi: &PureState, label: Option<String>) -> Self {
        Self {
            label,
            amplitudes: Some(AmplitudeBlock {
                dim_a: psi.dim_a(),
                dim_b: psi.dim_b(),
                values: psi.amplitudes().iter().map(to_pair).collect(),
            }),
            ..Default::default()
        }
    }

    pub fn from_certificate(cert: Certificate) -> Self {
        Self { certificate: Some(cert), ..Default::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes") + "\n"
    }

    /// Validates and normalizes the single representation present.
    pub fn state(&self) -> Result<LoadedState> {
        if let Some(a) = &self.amplitudes {
            let amps = a.values.iter().map(to_complex).collect();
            return Ok(LoadedState::Pure(PureState::from_unnormalized(a.dim_a, a.dim_b, amps)?));
        }
        if let Some(s) = &self.schmidt {
            return Ok(LoadedState::Spectrum(SchmidtSpectrum::from_weights(s)?));
        }
        if let Some(d) = &self.density {
            let n = d.dim_a * d.dim_b;
            if d.rows.len() != n || d.rows.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch(format!("density must be {n}x{n}")));
            }
            let m = CMatrix::from_fn(n, n, |i, j| to_complex(&d.rows[i][j]));
            let tr = m.trace().re;
            if !(tr > 0.0) {
                return Err(Error::InvalidState(format!("density trace {tr} is not positive")));
            }
            let rho = DensityMatrix::new(m.unscale(tr))?;
            return Ok(LoadedState::Mixed { rho, dim_a: d.dim_a, dim_b: d.dim_b });
        }
        if let Some(c) = &self.certificate {
            c.ensemble()?;
            return Ok(LoadedState::Certificate(c.clone()));
        }
        Err(Error::Parse("empty state file".into()))
    }
}

/// Density block for `rho` on `dim_a × dim_b`.
pub fn density_file(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> StateFile {
    let e = rho.entries();
    StateFile {
        density: Some(DensityBlock {
            dim_a,
            dim_b,
            rows: (0..e.nrows()).map(|i| (0..e.ncols()).map(|j| to_pair(&e[(i, j)])).collect()).collect(),
        }),
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::{monotone_from_concave_with, MonotoneSpec, ValidationOptions};
    use crate::roof::RoofOptions;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(5000.0), "5000");
        assert_eq!(fmt_num(3.479e-17), "3.479e-17");
        assert_eq!(fmt_num(-1e-20), "-1e-20");
        assert_eq!(fmt_sig(0.87540123, 4), "0.8754");
        assert_eq!(fmt_num(-1e-13), "-1e-13");
    }

    #[test]
    fn parse_each_representation() {
        let amp = r#"{"label":"bell","amplitudes":{"dim_a":2,"dim_b":2,"values":[[1,0],[0,0],[0,0],[1,0]]}}"#;
        let s = StateFile::parse(amp).unwrap().state().unwrap().spectrum().unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-15);

        let sch = r#"{"schmidt":[0.7,0.3]}"#;
        let s = StateFile::parse(sch).unwrap().state().unwrap().spectrum().unwrap();
        assert_eq!(s.values(), &[0.7, 0.3]);

        let den = r#"{"density":{"dim_a":1,"dim_b":2,"rows":[[[2,0],[0,0]],[[0,0],[2,0]]]}}"#;
        let (rho, _, _) = StateFile::parse(den).unwrap().state().unwrap().density().unwrap();
        assert!((rho.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_context() {
        let err = StateFile::parse("{\n  \"schmidt\": [0.5,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("line 3")), "{err}");
        assert!(matches!(StateFile::parse("{}"), Err(Error::Parse(_))));
        let both = r#"{"schmidt":[1],"amplitudes":{"dim_a":1,"dim_b":1,"values":[[1,0]]}}"#;
        assert!(matches!(StateFile::parse(both), Err(Error::Parse(_))));
        assert!(StateFile::parse(r#"{"schmit":[1]}"#).is_err());
        let bad_dims = r#"{"amplitudes":{"dim_a":2,"dim_b":2,"values":[[1,0]]}}"#;
        assert!(StateFile::parse(bad_dims).unwrap().state().is_err());
    }

    #[test]
    fn pure_round_trip() {
        let mut rng = crate::random::seeded(5);
        let psi = crate::random::haar_state(2, 3, &mut rng);
        let text = StateFile::from_pure(&psi, None).to_json();
        match StateFile::parse(&text).unwrap().state().unwrap() {
            LoadedState::Pure(back) => assert!(back.phase_distance(&psi).unwrap() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn certificate_round_trip() {
        let m = monotone_from_concave_with(MonotoneSpec::entropy(), &ValidationOptions { samples: 200, ..Default::default() })
            .unwrap();
        let mut rng = crate::random::seeded(6);
        let rho = crate::random::random_density(4, 2, &mut rng);
        let opts = RoofOptions { restarts: 2, iterations: 200, ..Default::default() };
        let est = roof::roof_estimate(&rho, 2, 2, &m, &opts).unwrap();
        let text = StateFile::from_certificate(Certificate::from_estimate(&est, m.name(), 2, 2)).to_json();
        let loaded = StateFile::parse(&text).unwrap().state().unwrap();
        let LoadedState::Certificate(cert) = &loaded else { panic!("not a certificate") };
        assert!((cert.reevaluate(&m).unwrap() - est.value).abs() < 1e-10);
        let (back, _, _) = loaded.density().unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-8);
    }
}
