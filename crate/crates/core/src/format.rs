//! JSON system and report documents, CSV traces.
//!
//! A system document looks like
//!
//! ```json
//! {
//!   "name": "scalar",
//!   "period": 2,
//!   "dims": { "n": 1, "m": 1, "p": 1 },
//!   "phases": [
//!     { "A": [[0.3]], "B": [[1.0]], "C": [[1.0]], "D": [[2.0]] },
//!     { "A": [[-0.2]], "B": [[0.5]], "C": [[1.0]], "D": [[-3.0]] }
//!   ]
//! }
//! ```
//!
//! Matrices are row-major nested arrays; `D` defaults to zeros.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::{StabilityReport, Verdict, ZeroCheck};
use crate::error::{Error, Result};
use crate::linalg::Complex64;
use crate::markov::RelativeDegree;
use crate::simulation::SimulationTrace;
use crate::system::{InverseSystem, LptvSystem, PhaseSequence};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDoc {
    #[serde(rename = "A")]
    a: Rows,
    #[serde(rename = "B")]
    b: Rows,
    #[serde(rename = "C")]
    c: Rows,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    d: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    name: String,
    period: usize,
    dims: Dims,
    phases: Vec<PhaseDoc>,
}

/// A parsed system document.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub name: String,
    pub system: LptvSystem,
}

fn rows_to_matrix(rows: &Rows, shape: (usize, usize), location: String) -> Result<DMatrix<f64>> {
    let dim_err = |msg: String| Error::Dimension(format!("{location}: {msg}"));
    if rows.len() != shape.0 {
        return Err(dim_err(format!(
            "expected {} rows, found {}",
            shape.0,
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != shape.1 {
            return Err(dim_err(format!(
                "row {i} has {} columns, expected {}",
                row.len(),
                shape.1
            )));
        }
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Parses and validates a system document.
pub fn parse_system_file(text: &str) -> Result<SystemFile> {
    let doc: SystemDoc = parse_json(text)?;
    if doc.period == 0 {
        return Err(Error::Dimension("period must be at least 1".into()));
    }
    if doc.phases.len() != doc.period {
        return Err(Error::Dimension(format!(
            "phases has {} entries, period is {}",
            doc.phases.len(),
            doc.period
        )));
    }
    let Dims { n, m, p } = doc.dims;
    let (mut a, mut b, mut c, mut d) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, ph) in doc.phases.iter().enumerate() {
        a.push(rows_to_matrix(
            &ph.a,
            (n, n),
            format!("phase {k}, field A"),
        )?);
        b.push(rows_to_matrix(
            &ph.b,
            (n, m),
            format!("phase {k}, field B"),
        )?);
        c.push(rows_to_matrix(
            &ph.c,
            (p, n),
            format!("phase {k}, field C"),
        )?);
        d.push(match &ph.d {
            Some(rows) => rows_to_matrix(rows, (p, m), format!("phase {k}, field D"))?,
            None => DMatrix::zeros(p, m),
        });
    }
    Ok(SystemFile {
        name: doc.name,
        system: LptvSystem::from_phases(a, b, c, d)?,
    })
}

pub fn parse_system(text: &str) -> Result<LptvSystem> {
    parse_system_file(text).map(|f| f.system)
}

pub fn read_system_file(path: &Path) -> Result<SystemFile> {
    parse_system_file(&std::fs::read_to_string(path)?)
}

/// Serializes a system; `D` is always written.
pub fn system_to_json(name: &str, sys: &LptvSystem) -> String {
    let doc = SystemDoc {
        name: name.to_string(),
        period: sys.period(),
        dims: Dims {
            n: sys.states(),
            m: sys.inputs(),
            p: sys.outputs(),
        },
        phases: (0..sys.period())
            .map(|k| PhaseDoc {
                a: matrix_to_rows(sys.a().at(k)),
                b: matrix_to_rows(sys.b().at(k)),
                c: matrix_to_rows(sys.c().at(k)),
                d: Some(matrix_to_rows(sys.d().at(k))),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("system documents always serialize")
}

/// Per-phase inverse matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversePhaseDoc {
    #[serde(rename = "Gamma")]
    pub gamma: Rows,
    #[serde(rename = "Lambda")]
    pub lambda: Rows,
    #[serde(rename = "Omega")]
    pub omega: Rows,
    #[serde(rename = "Pi")]
    pub pi: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InverseDoc {
    name: String,
    period: usize,
    delay: usize,
    dims: Dims,
    phases: Vec<InversePhaseDoc>,
}

fn inverse_phases(inv: &InverseSystem) -> Vec<InversePhaseDoc> {
    (0..inv.period())
        .map(|k| InversePhaseDoc {
            gamma: matrix_to_rows(inv.gamma.at(k)),
            lambda: matrix_to_rows(inv.lambda.at(k)),
            omega: matrix_to_rows(inv.omega.at(k)),
            pi: matrix_to_rows(inv.pi.at(k)),
        })
        .collect()
}

/// Serializes an inverse system. `dims` are those of the inverse: `n` states,
/// `m` reconstructed inputs, `p` consumed outputs.
pub fn inverse_to_json(name: &str, inv: &InverseSystem) -> String {
    let doc = InverseDoc {
        name: name.to_string(),
        period: inv.period(),
        delay: inv.delay,
        dims: Dims {
            n: inv.states(),
            m: inv.inputs(),
            p: inv.outputs(),
        },
        phases: inverse_phases(inv),
    };
    serde_json::to_string_pretty(&doc).expect("inverse documents always serialize")
}

pub fn parse_inverse(text: &str) -> Result<InverseSystem> {
    let doc: InverseDoc = parse_json(text)?;
    if doc.period == 0 || doc.phases.len() != doc.period {
        return Err(Error::Dimension(format!(
            "phases has {} entries, period is {}",
            doc.phases.len(),
            doc.period
        )));
    }
    let Dims { n, m, p } = doc.dims;
    let mut seqs: [Vec<DMatrix<f64>>; 4] = Default::default();
    for (k, ph) in doc.phases.iter().enumerate() {
        let fields = [
            (&ph.gamma, (n, n), "Gamma"),
            (&ph.lambda, (n, p), "Lambda"),
            (&ph.omega, (m, n), "Omega"),
            (&ph.pi, (m, p), "Pi"),
        ];
        for (slot, (rows, shape, field)) in seqs.iter_mut().zip(fields) {
            slot.push(rows_to_matrix(
                rows,
                shape,
                format!("phase {k}, field {field}"),
            )?);
        }
    }
    let [g, l, o, pi] = seqs;
    InverseSystem::new(
        doc.delay,
        PhaseSequence::new(g)?,
        PhaseSequence::new(l)?,
        PhaseSequence::new(o)?,
        PhaseSequence::new(pi)?,
    )
}

/// Tolerances recorded in an analysis report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ToleranceSet {
    pub sv_tol: f64,
    pub stab_tol: f64,
    pub extract_tol: f64,
    pub drop_tol: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            sv_tol: crate::DEFAULT_SV_TOL,
            stab_tol: crate::DEFAULT_STAB_TOL,
            extract_tol: crate::DEFAULT_EXTRACT_TOL,
            drop_tol: crate::DEFAULT_DROP_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InverseSection {
    pub delay: usize,
    pub phases: Vec<InversePhaseDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StabilitySection {
    pub spectral_radius: f64,
    pub monodromy: Rows,
    pub monodromy_eigenvalues: Vec<(f64, f64)>,
    pub cycled_zeros: Vec<(f64, f64)>,
    pub delay_modes: usize,
    pub root_relation_residual: f64,
    pub verdict: Verdict,
    pub minimum_phase: bool,
    pub verdicts_agree: bool,
    pub non_finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleSection {
    pub max_deviation: Option<f64>,
    pub error: Option<String>,
}

/// Full analysis document.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub name: String,
    pub period: usize,
    pub dims: Dims,
    pub relative_degree: RelativeDegree,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_checks: Option<Vec<ZeroCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    pub tolerances: ToleranceSet,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn pairs(values: &[Complex64]) -> Vec<(f64, f64)> {
    values.iter().map(|z| (z.re, z.im)).collect()
}

pub fn inverse_section(inv: &InverseSystem) -> InverseSection {
    InverseSection {
        delay: inv.delay,
        phases: inverse_phases(inv),
    }
}

pub fn stability_section(report: &StabilityReport) -> StabilitySection {
    StabilitySection {
        spectral_radius: report.spectral_radius,
        monodromy: matrix_to_rows(&report.monodromy_inv),
        monodromy_eigenvalues: pairs(&report.monodromy_eigs),
        cycled_zeros: pairs(&report.cycled_zeros),
        delay_modes: report.delay_modes,
        root_relation_residual: report.root_relation_residual,
        verdict: report.verdict(),
        minimum_phase: report.minimum_phase,
        verdicts_agree: report.verdicts_agree(),
        non_finite: report.non_finite,
    }
}

/// Runs relative-degree detection, inversion, stability analysis and the
/// zero probe for `sys` and collects the results into a report. Unsupported
/// structures still produce a report, with `error` set.
pub fn analysis_report(
    name: &str,
    sys: &LptvSystem,
    tolerances: ToleranceSet,
    with_oracle: bool,
) -> Result<AnalysisReport> {
    let relative_degree = crate::markov::detect_relative_degree(sys, None, tolerances.sv_tol)?;
    let mut report = AnalysisReport {
        name: name.to_string(),
        period: sys.period(),
        dims: Dims {
            n: sys.states(),
            m: sys.inputs(),
            p: sys.outputs(),
        },
        relative_degree,
        error: None,
        inverse: None,
        stability: None,
        zero_checks: None,
        oracle: None,
        tolerances,
    };
    let inv = match crate::inversion::invert_with(sys, tolerances.sv_tol) {
        Ok(inv) => inv,
        Err(e @ Error::UnsupportedStructure { .. }) => {
            report.error = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let stability = crate::analysis::stability_report(&inv, tolerances.stab_tol);
    let (zeros, _) = crate::analysis::split_delay_modes(&stability);
    let checks = crate::analysis::verify_zeros_pencil(sys, &zeros, None, tolerances.drop_tol)?;
    if with_oracle {
        report.oracle = Some(
            match crate::inversion::oracle_invert_cycled_with(
                sys,
                tolerances.sv_tol,
                tolerances.extract_tol,
            ) {
                Ok(oracle) => OracleSection {
                    max_deviation: Some(inv.max_deviation(&oracle)),
                    error: None,
                },
                Err(e) => OracleSection {
                    max_deviation: None,
                    error: Some(e.to_string()),
                },
            },
        );
    }
    report.inverse = Some(inverse_section(&inv));
    report.stability = Some(stability_section(&stability));
    report.zero_checks = Some(checks);
    Ok(report)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a trace as CSV: `k, phase`, then `u*`, `y*`, `uhat*`, `err*` for
/// the series that are present, one row per step of the horizon.
pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let m = trace.u.first().map_or(0, |v| v.len());
    let p = trace.y.first().map_or(0, |v| v.len());
    let err = trace.reconstruction_error();
    let mut out = String::new();
    let mut header = vec!["k".to_string(), "phase".to_string()];
    header.extend((0..m).map(|i| format!("u{i}")));
    header.extend((0..p).map(|i| format!("y{i}")));
    if trace.uhat.is_some() {
        header.extend((0..m).map(|i| format!("uhat{i}")));
        header.extend((0..m).map(|i| format!("err{i}")));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..trace.horizon {
        let mut row = vec![k.to_string(), trace.phase(k).to_string()];
        row.extend(trace.u[k].iter().map(|v| fmt17(*v)));
        row.extend(trace.y[k].iter().map(|v| fmt17(*v)));
        if let (Some(uhat), Some(err)) = (&trace.uhat, &err) {
            row.extend(uhat[k].iter().map(|v| fmt17(*v)));
            row.extend(err[k].iter().map(|v| fmt17(*v)));
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
