//! Bundled demonstration systems and their reference numbers.
//!
//! Each example carries its system document, the reconstruction settings
//! used to exercise it and a list of golden checks. Values known as exact
//! fractions are checked at `1e-12`; values only known to three or four
//! digits are checked at `1e-3` (`2e-3` for the two-state eigenvalues).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector};

use crate::analysis::{split_delay_modes, stability_report, verify_zeros, StabilityReport};
use crate::error::{Error, Result};
use crate::format::parse_system_file;
use crate::inversion::invert;
use crate::linalg::{self, Complex64};
use crate::markov::{detect_relative_degree, markov_table, RelativeDegree};
use crate::simulation::{reconstruct, SignalSpec, SimulationTrace, Waveform};
use crate::system::{InverseSystem, LptvSystem};
use crate::{DEFAULT_STAB_TOL, DEFAULT_SV_TOL};

const SCALAR: &str = include_str!("../data/scalar.json");
const TWO_STATE: &str = include_str!("../data/two_state.json");
const UNIT_DELAY: &str = include_str!("../data/unit_delay.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// Scalar plant, period 2, nonsingular feedthrough (id `scalar`).
    Scalar,
    /// Two states, period 3, nonsingular feedthrough (id `two-state`).
    TwoState,
    /// Two states, period 3, `D_k = 0`, relative degree 1 (id `unit-delay`).
    RelativeDegreeOne,
}

impl Example {
    pub const ALL: [Example; 3] = [
        Example::Scalar,
        Example::TwoState,
        Example::RelativeDegreeOne,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Example::Scalar => "scalar",
            Example::TwoState => "two-state",
            Example::RelativeDegreeOne => "unit-delay",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Example::Scalar => SCALAR,
            Example::TwoState => TWO_STATE,
            Example::RelativeDegreeOne => UNIT_DELAY,
        }
    }

    pub fn name(self) -> String {
        parse_system_file(self.source())
            .expect("bundled documents are valid")
            .name
    }

    pub fn system(self) -> LptvSystem {
        parse_system_file(self.source())
            .expect("bundled documents are valid")
            .system
    }

    /// Reconstruction settings: reference input, plant and inverse initial
    /// states.
    pub fn settings(self) -> ReconstructionSettings {
        let sine = |frequency| Waveform::Sine {
            amplitude: 1.0,
            frequency,
            phase: 0.0,
        };
        match self {
            // sin(0.1πk), x(0) = 1, ζ(0) = 0
            Example::Scalar => ReconstructionSettings {
                waveform: sine(0.05),
                x0: vec![1.0],
                zeta0: vec![0.0],
                horizon: 200,
            },
            // sin(0.2πk), x(0) = [1, 0], ζ(0) = 0
            Example::TwoState => ReconstructionSettings {
                waveform: sine(0.1),
                x0: vec![1.0, 0.0],
                zeta0: vec![0.0, 0.0],
                horizon: 200,
            },
            // sin(0.15πk), ζ(0) = x(0) = [1, 0]
            Example::RelativeDegreeOne => ReconstructionSettings {
                waveform: sine(0.075),
                x0: vec![1.0, 0.0],
                zeta0: vec![1.0, 0.0],
                horizon: 200,
            },
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Example::Scalar),
            "two-state" => Ok(Example::TwoState),
            "unit-delay" => Ok(Example::RelativeDegreeOne),
            other => Err(Error::Parse {
                location: "example".into(),
                message: format!(
                    "unknown example {other:?}; expected scalar, two-state or unit-delay"
                ),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSettings {
    pub waveform: Waveform,
    pub x0: Vec<f64>,
    pub zeta0: Vec<f64>,
    pub horizon: usize,
}

impl ReconstructionSettings {
    pub fn run(&self, sys: &LptvSystem, inv: &InverseSystem) -> Result<SimulationTrace> {
        reconstruct(
            sys,
            inv,
            &SignalSpec::uniform(self.waveform.clone(), sys.inputs()),
            &DVector::from_vec(self.x0.clone()),
            &DVector::from_vec(self.zeta0.clone()),
            self.horizon,
        )
    }
}

/// One golden assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCheck {
    pub label: String,
    pub deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl GoldenCheck {
    fn new(label: impl Into<String>, deviation: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            deviation,
            tol,
            passed: deviation <= tol,
        }
    }

    fn flag(label: impl Into<String>, ok: bool) -> Self {
        Self {
            label: label.into(),
            deviation: if ok { 0.0 } else { 1.0 },
            tol: 0.0,
            passed: ok,
        }
    }
}

impl fmt::Display for GoldenCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (deviation {:.3e}, tol {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.label,
            self.deviation,
            self.tol
        )
    }
}

/// Everything produced by running a bundled example.
#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub example: Example,
    pub system: LptvSystem,
    pub relative_degree: RelativeDegree,
    pub inverse: InverseSystem,
    pub report: StabilityReport,
    pub trace: SimulationTrace,
    pub checks: Vec<GoldenCheck>,
}

impl ExampleRun {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn matrix_check(label: &str, got: &DMatrix<f64>, want: &DMatrix<f64>, tol: f64) -> GoldenCheck {
    GoldenCheck::new(label, linalg::max_abs_diff(got, want), tol)
}

fn scalar_check(label: &str, got: f64, want: f64, tol: f64) -> GoldenCheck {
    GoldenCheck::new(label, (got - want).abs(), tol)
}

fn zeros_check(label: &str, got: &[Complex64], want: &[Complex64], tol: f64) -> GoldenCheck {
    GoldenCheck::new(label, linalg::multiset_distance(want, got), tol)
}

/// Runs analysis and reconstruction for `example` and evaluates its golden
/// checks.
pub fn run_example(example: Example) -> Result<ExampleRun> {
    let system = example.system();
    let relative_degree = detect_relative_degree(&system, None, DEFAULT_SV_TOL)?;
    let inverse = invert(&system)?;
    let report = stability_report(&inverse, DEFAULT_STAB_TOL);
    let trace = example.settings().run(&system, &inverse)?;
    let mut checks = Vec::new();
    let s = |v: f64| mat(1, 1, &[v]);

    match example {
        Example::Scalar => {
            checks.push(GoldenCheck::flag(
                "relative degree 0",
                relative_degree == RelativeDegree::Zero,
            ));
            checks.push(matrix_check(
                "Gamma_0 = -0.2",
                &inverse.gamma[0],
                &s(-0.2),
                1e-12,
            ));
            checks.push(matrix_check(
                "Gamma_1 = -1/30",
                &inverse.gamma[1],
                &s(-1.0 / 30.0),
                1e-12,
            ));
            checks.push(matrix_check(
                "Lambda_0 = 1/2",
                &inverse.lambda[0],
                &s(0.5),
                1e-12,
            ));
            checks.push(matrix_check(
                "Lambda_1 = -1/6",
                &inverse.lambda[1],
                &s(-1.0 / 6.0),
                1e-12,
            ));
            checks.push(matrix_check(
                "Omega_0 = -1/2",
                &inverse.omega[0],
                &s(-0.5),
                1e-12,
            ));
            checks.push(matrix_check(
                "Omega_1 = 1/3",
                &inverse.omega[1],
                &s(1.0 / 3.0),
                1e-12,
            ));
            checks.push(matrix_check("Pi_0 = 1/2", &inverse.pi[0], &s(0.5), 1e-12));
            checks.push(matrix_check(
                "Pi_1 = -1/3",
                &inverse.pi[1],
                &s(-1.0 / 3.0),
                1e-12,
            ));
            checks.push(matrix_check(
                "Phi_inv = 1/150",
                &report.monodromy_inv,
                &s(1.0 / 150.0),
                1e-12,
            ));
            let root = (1.0_f64 / 150.0).sqrt();
            checks.push(zeros_check(
                "cycled zeros = +-sqrt(1/150)",
                &report.cycled_zeros,
                &[Complex::new(root, 0.0), Complex::new(-root, 0.0)],
                1e-9,
            ));
            checks.push(zeros_check(
                "cycled zeros ~ +-0.0816",
                &report.cycled_zeros,
                &[Complex::new(0.0816, 0.0), Complex::new(-0.0816, 0.0)],
                1e-3,
            ));
            checks.push(GoldenCheck::flag(
                "inverse is stable",
                report.is_schur_stable,
            ));
            checks.push(GoldenCheck::new(
                "reconstruction error < 1e-10 from step 10",
                trace.max_error_from(10).unwrap_or(f64::INFINITY),
                1e-10,
            ));
        }
        Example::TwoState => {
            checks.push(GoldenCheck::flag(
                "relative degree 0",
                relative_degree == RelativeDegree::Zero,
            ));
            let gammas = [
                mat(2, 2, &[-0.200, -0.050, -0.350, 0.275]),
                mat(2, 2, &[0.033, -0.033, -0.533, -0.567]),
                mat(2, 2, &[-0.092, -0.056, -0.044, 0.108]),
            ];
            for (k, want) in gammas.iter().enumerate() {
                checks.push(matrix_check(
                    &format!("Gamma_{k} as printed"),
                    &inverse.gamma[k],
                    want,
                    1e-3,
                ));
            }
            checks.push(zeros_check(
                "Phi_inv eigenvalues ~ {-0.032, 0.001}",
                &report.monodromy_eigs,
                &[Complex::new(-0.032, 0.0), Complex::new(0.001, 0.0)],
                2e-3,
            ));
            checks.push(scalar_check(
                "rho(Phi_inv) ~ 0.032",
                report.spectral_radius,
                0.032,
                2e-3,
            ));
            checks.push(GoldenCheck::flag(
                "inverse is stable",
                report.is_schur_stable,
            ));
            checks.push(GoldenCheck::new(
                "reconstruction error < 1e-6 from step 15",
                trace.max_error_from(15).unwrap_or(f64::INFINITY),
                1e-6,
            ));
        }
        Example::RelativeDegreeOne => {
            checks.push(GoldenCheck::flag(
                "relative degree 1",
                relative_degree == RelativeDegree::Uniform { order: 1 },
            ));
            let markov = markov_table(&system, 1);
            for (k, want) in [0.8, 1.0, 1.05].into_iter().enumerate() {
                checks.push(matrix_check(
                    &format!("M_{k} = {want}"),
                    markov.at(k),
                    &s(want),
                    1e-12,
                ));
            }
            checks.push(matrix_check(
                "Gamma_0 = [[0, 1], [0, -0.125]]",
                &inverse.gamma[0],
                &mat(2, 2, &[0.0, 1.0, 0.0, -0.125]),
                1e-12,
            ));
            checks.push(matrix_check(
                "Gamma_1 = [[0.4, 0.16], [-0.2, -0.08]]",
                &inverse.gamma[1],
                &mat(2, 2, &[0.4, 0.16, -0.2, -0.08]),
                1e-12,
            ));
            checks.push(matrix_check(
                "Gamma_2 ~ [[0.433, 0.186], [0.167, 0.071]]",
                &inverse.gamma[2],
                &mat(2, 2, &[0.433, 0.186, 0.167, 0.071]),
                1e-3,
            ));
            checks.push(matrix_check("Pi_0 = 1.25", &inverse.pi[0], &s(1.25), 1e-12));
            checks.push(matrix_check("Pi_1 = 1.0", &inverse.pi[1], &s(1.0), 1e-12));
            checks.push(matrix_check(
                "Pi_2 ~ 0.952",
                &inverse.pi[2],
                &s(0.952),
                1e-3,
            ));
            checks.push(zeros_check(
                "Phi_inv eigenvalues ~ {0, 0.0498}",
                &report.monodromy_eigs,
                &[Complex::new(0.0, 0.0), Complex::new(0.0498, 0.0)],
                1e-3,
            ));
            let expected = [
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.368, 0.0),
                Complex::new(-0.184, 0.319),
                Complex::new(-0.184, -0.319),
            ];
            checks.push(zeros_check(
                "cycled zeros ~ {0, 0, 0, 0.368, -0.184 +- 0.319j}",
                &report.cycled_zeros,
                &expected,
                1e-3,
            ));
            let (zeros, _) = split_delay_modes(&report);
            let pencil_ok = verify_zeros(&system, &zeros)?.iter().all(|c| c.passed);
            checks.push(GoldenCheck::flag(
                "nonzero cycled zeros drop the system-matrix rank",
                pencil_ok,
            ));
            checks.push(GoldenCheck::flag(
                "inverse is stable",
                report.is_schur_stable,
            ));
            checks.push(GoldenCheck::new(
                "reconstruction error at machine precision",
                trace.max_error_from(0).unwrap_or(f64::INFINITY),
                1e-12,
            ));
        }
    }

    Ok(ExampleRun {
        example,
        system,
        relative_degree,
        inverse,
        report,
        trace,
        checks,
    })
}
