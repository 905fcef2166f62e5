//! Stable inversion of discrete-time linear periodically time-varying (LPTV)
//! systems through cyclic reformulation.
//!
//! An `N`-periodic plant `(A_k, B_k, C_k, D_k)` is turned into an equivalent
//! LTI system of dimension `N·n` whose matrices are shift-structured block
//! matrices. The LTI inverse of that system keeps the same structure, so the
//! periodic inverse `(Γ_k, Λ_k, Ω_k, Π_k)` can be read off block by block.
//! This crate computes those inverse matrices in closed form, cross-checks
//! them against the dense cycled construction, classifies the stability of
//! the inverse and simulates input reconstruction.
//!
//! ```
//! use lptv::{builtin::Example, invert, analysis::stability_report};
//!
//! let sys = Example::Scalar.system();
//! let inv = invert(&sys).unwrap();
//! let report = stability_report(&inv, lptv::DEFAULT_STAB_TOL);
//! assert!(report.is_schur_stable);
//! assert!((report.spectral_radius - 1.0 / 150.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod builtin;
pub mod cyclic;
mod error;
pub mod format;
pub mod inversion;
pub mod linalg;
pub mod markov;
pub mod simulation;
pub mod system;

pub use analysis::{check_minimum_phase, stability_report, StabilityReport, Verdict};
pub use cyclic::{build_cycled, CycledSystem, ShiftBlockCirculant};
pub use error::{Error, Result};
pub use inversion::{invert, invert_rd0, invert_rdr, oracle_invert_cycled};
pub use markov::{detect_relative_degree, RelativeDegree};
pub use simulation::{reconstruct, simulate_inverse, simulate_plant, SignalSpec, SimulationTrace};
pub use system::{InverseSystem, LptvSystem, PhaseSequence};

pub use nalgebra::Complex;
pub use nalgebra::{DMatrix, DVector};

/// Default threshold for the scale-aware nonsingularity test.
pub const DEFAULT_SV_TOL: f64 = 1e-9;
/// Default width of the marginal band around the unit circle.
pub const DEFAULT_STAB_TOL: f64 = 1e-10;
/// Default relative tolerance for off-pattern entries during block extraction.
pub const DEFAULT_EXTRACT_TOL: f64 = 1e-9;
/// Default rank-drop ratio for the pencil probe.
pub const DEFAULT_DROP_TOL: f64 = 1e-6;
