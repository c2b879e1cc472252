//! Entanglement monotones for bipartite pure states.
//!
//! The crate is organised bottom-up:
//!
//! * [`state`]: pure states, density matrices, partial traces, the Schmidt
//!   decomposition and Kraus application on a row-major product basis
//!   (`index = i_a * dim_b + i_b`).
//! * [`monotone`]: monotones built from symmetric concave functions of the
//!   Schmidt spectrum, including the α-entropies of entanglement.
//! * [`locc`]: elementary local operations, the two-outcome perturbation
//!   measurement and Monte-Carlo monotonicity checks.
//! * [`conversion`]: local equivalence and conversion-probability bounds.
//! * [`roof`]: convex-roof upper bounds for mixed states.
//! * [`dilution`]: truncated dilution states, computed in the log domain.
//! * [`io`]: JSON state files and CSV formatting used by the CLI.
//!
//! All logarithms reported to callers are base 2.

pub mod conversion;
pub mod dilution;
pub mod error;
pub mod io;
pub mod locc;
pub mod monotone;
pub mod random;
pub mod roof;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Spectral values below this are treated as exact zeros.
pub const RANK_CUTOFF: f64 = 1e-12;
