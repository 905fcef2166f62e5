//! Periodic Markov parameters and relative-degree detection.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cyclic::ShiftBlockCirculant;
use crate::cyclic::{build_cycled, shift_matrix, structured_power, structured_product};
use crate::error::{Error, Result};
use crate::linalg;
use crate::system::{LptvSystem, PhaseSequence};

/// `M_k^{(r)}` for every phase `k`. Order 0 holds `D_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTable {
    pub order: usize,
    pub values: PhaseSequence,
}

impl MarkovTable {
    pub fn at(&self, k: usize) -> &DMatrix<f64> {
        self.values.at(k)
    }

    pub fn as_block_diagonal(&self) -> ShiftBlockCirculant {
        ShiftBlockCirculant::from_sequence(0, &self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseStatus {
    Nonsingular,
    Zero,
    Singular,
}

impl fmt::Display for PhaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseStatus::Nonsingular => "nonsingular",
            PhaseStatus::Zero => "zero",
            PhaseStatus::Singular => "singular",
        })
    }
}

/// Outcome of relative-degree detection.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RelativeDegree {
    /// Every `D_k` nonsingular.
    Zero,
    /// Uniform periodic relative degree `order >= 1`.
    Uniform { order: usize },
    /// Non-uniform structure at Markov order `order` (0 means the `D_k`).
    Mixed {
        order: usize,
        phases: Vec<(usize, PhaseStatus)>,
    },
    /// All Markov parameters up to `cap` vanish.
    Undetected { cap: usize },
}

impl RelativeDegree {
    /// The inverse delay, when the structure is supported.
    pub fn order(&self) -> Option<usize> {
        match self {
            RelativeDegree::Zero => Some(0),
            RelativeDegree::Uniform { order } => Some(*order),
            _ => None,
        }
    }
}

impl fmt::Display for RelativeDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelativeDegree::Zero => write!(f, "relative degree 0"),
            RelativeDegree::Uniform { order } => write!(f, "uniform relative degree {order}"),
            RelativeDegree::Mixed { order, phases } => {
                write!(f, "non-uniform relative degree at order {order} (")?;
                for (i, (k, s)) in phases.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "phase {k}: {s}")?;
                }
                write!(f, ")")
            }
            RelativeDegree::Undetected { cap } => {
                write!(f, "no nonzero Markov parameter up to order {cap}")
            }
        }
    }
}

/// `M_k^{(j)} = C_{k+j} Φ(k+j, k+1) B_k` for `j >= 1`; `j = 0` returns `D_k`.
pub fn periodic_markov(sys: &LptvSystem, k: usize, order: usize) -> DMatrix<f64> {
    let k = k % sys.period();
    if order == 0 {
        return sys.d().at(k).clone();
    }
    let phi = sys
        .transition_product(k + order, k + 1)
        .expect("k + order >= k + 1");
    sys.c().at(k + order) * phi * sys.b().at(k)
}

pub fn markov_table(sys: &LptvSystem, order: usize) -> MarkovTable {
    let values = PhaseSequence::from_fn(sys.period(), |k| periodic_markov(sys, k, order))
        .expect("period >= 1 and uniform shapes");
    MarkovTable { order, values }
}

fn classify(m: &DMatrix<f64>, sv_tol: f64) -> PhaseStatus {
    if linalg::is_zero(m, sv_tol) {
        PhaseStatus::Zero
    } else if linalg::is_nonsingular(m, sv_tol) {
        PhaseStatus::Nonsingular
    } else {
        PhaseStatus::Singular
    }
}

/// Default search cap: the cycled state dimension `N·n`.
pub fn default_cap(sys: &LptvSystem) -> usize {
    (sys.period() * sys.states()).max(1)
}

/// Classifies the periodic relative degree.
///
/// A matrix counts as nonsingular when `σ_min > sv_tol · max(1, σ_max)` and
/// as zero when every entry is at most `sv_tol` in magnitude.
pub fn detect_relative_degree(
    sys: &LptvSystem,
    cap: Option<usize>,
    sv_tol: f64,
) -> Result<RelativeDegree> {
    sys.check_square()?;
    let cap = cap.unwrap_or_else(|| default_cap(sys));
    let status_at = |order: usize| -> Vec<(usize, PhaseStatus)> {
        (0..sys.period())
            .map(|k| (k, classify(&periodic_markov(sys, k, order), sv_tol)))
            .collect()
    };

    let d_status = status_at(0);
    if d_status.iter().all(|(_, s)| *s == PhaseStatus::Nonsingular) {
        return Ok(RelativeDegree::Zero);
    }
    if !d_status.iter().all(|(_, s)| *s == PhaseStatus::Zero) {
        return Ok(RelativeDegree::Mixed {
            order: 0,
            phases: d_status,
        });
    }
    for order in 1..=cap {
        let status = status_at(order);
        if status.iter().all(|(_, s)| *s == PhaseStatus::Zero) {
            continue;
        }
        if status.iter().all(|(_, s)| *s == PhaseStatus::Nonsingular) {
            return Ok(RelativeDegree::Uniform { order });
        }
        return Ok(RelativeDegree::Mixed {
            order,
            phases: status,
        });
    }
    Ok(RelativeDegree::Undetected { cap })
}

/// Splits `Č Ǎ^{r-1} B̌` into the shift `Š_p^r` and the block-diagonal table of
/// `M_k^{(r)}`, after checking that the lower-order cycled Markov parameters
/// vanish. Both identities are verified against dense products.
pub fn markov_factorization(
    sys: &LptvSystem,
    order: usize,
) -> Result<(ShiftBlockCirculant, MarkovTable)> {
    if order == 0 {
        return Err(Error::Dimension(
            "Markov factorization needs order >= 1".into(),
        ));
    }
    sys.check_square()?;
    let cyc = build_cycled(sys);
    let a_dense = cyc.a.dense();
    let c_dense = cyc.c.dense();
    let b_dense = cyc.b.dense();

    let mut deviation = 0.0_f64;
    let mut a_pow = DMatrix::identity(a_dense.nrows(), a_dense.ncols());
    for _ in 1..order {
        let lower = &c_dense * &a_pow * &b_dense;
        deviation = deviation.max(linalg::max_abs(&lower));
        a_pow = &a_dense * a_pow;
    }
    let markov_dense = &c_dense * &a_pow * &b_dense;

    let shift = shift_matrix(sys.period(), sys.outputs(), order);
    let table = markov_table(sys, order);

    // the structured route must agree with the table as well
    let structured = structured_product(
        &structured_product(&cyc.c, &structured_power(&cyc.a, order - 1)?)?,
        &cyc.b,
    )?;
    if structured.shift() != order % sys.period() {
        return Err(Error::FactorizationMismatch {
            deviation: f64::INFINITY,
        });
    }
    for (blk, m) in structured.blocks().iter().zip(table.values.iter()) {
        deviation = deviation.max(linalg::max_abs_diff(blk, m));
    }

    let factored = shift.dense() * table.as_block_diagonal().dense();
    deviation = deviation.max(linalg::max_abs_diff(&markov_dense, &factored));

    let scale = 1.0 + linalg::max_abs(&markov_dense);
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let mismatch = !(deviation <= 1e-12 * scale);
    if mismatch {
        return Err(Error::FactorizationMismatch { deviation });
    }
    Ok((shift, table))
}
