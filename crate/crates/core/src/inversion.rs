//! Closed-form periodic inverses and the dense cycled oracle.
//!
//! The closed-form path works phase by phase and never forms `N·n`-sized
//! matrices. The oracle path builds the dense cycled plant, applies the LTI
//! inverse formulas to it and reads the periodic matrices back out of the
//! block structure; it exists to cross-check the closed form.

use nalgebra::DMatrix;

use crate::cyclic::{build_cycled, extract_blocks, shift_matrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::markov::{detect_relative_degree, periodic_markov, RelativeDegree};
use crate::system::{InverseSystem, LptvSystem, PhaseSequence};
use crate::{DEFAULT_EXTRACT_TOL, DEFAULT_SV_TOL};

fn require(sys: &LptvSystem, expected: usize, sv_tol: f64) -> Result<()> {
    let found = detect_relative_degree(sys, None, sv_tol)?;
    if found.order() == Some(expected) {
        Ok(())
    } else {
        Err(Error::RelativeDegreeMismatch {
            expected: if expected == 0 {
                "relative degree 0".into()
            } else {
                format!("uniform relative degree {expected}")
            },
            found,
        })
    }
}

/// Causal inverse of a plant whose feedthrough `D_k` is nonsingular at every
/// phase:
///
/// ```text
/// Γ_k = A_k − B_k D_k⁻¹ C_k    Λ_k = B_k D_k⁻¹
/// Ω_k = −D_k⁻¹ C_k             Π_k = D_k⁻¹
/// ```
pub fn invert_rd0(sys: &LptvSystem) -> Result<InverseSystem> {
    invert_rd0_with(sys, DEFAULT_SV_TOL)
}

pub fn invert_rd0_with(sys: &LptvSystem, sv_tol: f64) -> Result<InverseSystem> {
    require(sys, 0, sv_tol)?;
    let period = sys.period();
    let mut d_inv = Vec::with_capacity(period);
    for k in 0..period {
        d_inv.push(linalg::inverse(sys.d().at(k)).ok_or(Error::SingularMarkov { phase: k })?);
    }
    let gamma = PhaseSequence::from_fn(period, |k| {
        sys.a().at(k) - sys.b().at(k) * &d_inv[k] * sys.c().at(k)
    })?;
    let lambda = PhaseSequence::from_fn(period, |k| sys.b().at(k) * &d_inv[k])?;
    let omega = PhaseSequence::from_fn(period, |k| -(&d_inv[k] * sys.c().at(k)))?;
    let pi = PhaseSequence::new(d_inv)?;
    InverseSystem::new(0, gamma, lambda, omega, pi)
}

/// `r`-step-delayed inverse for uniform periodic relative degree `r >= 1`.
pub fn invert_rdr(sys: &LptvSystem, order: usize) -> Result<InverseSystem> {
    invert_rdr_with(sys, order, DEFAULT_SV_TOL)
}

pub fn invert_rdr_with(sys: &LptvSystem, order: usize, sv_tol: f64) -> Result<InverseSystem> {
    if order == 0 {
        return Err(Error::RelativeDegreeMismatch {
            expected: "uniform relative degree >= 1".into(),
            found: detect_relative_degree(sys, None, sv_tol)?,
        });
    }
    require(sys, order, sv_tol)?;
    periodic_inverse_formula(sys, order)
}

/// Evaluates
///
/// ```text
/// Γ_k = A_k − B_k [M_k^(r)]⁻¹ C_{k+r} Φ(k+r, k)
/// Λ_k = B_k [M_k^(r)]⁻¹
/// Ω_k = −[M_k^(r)]⁻¹ C_{k+r} Φ(k+r, k)
/// Π_k = [M_k^(r)]⁻¹
/// ```
///
/// for any `r >= 0` with `M_k^(0) = D_k` and `Φ(k, k) = I`, without checking
/// the relative-degree structure first.
pub fn periodic_inverse_formula(sys: &LptvSystem, order: usize) -> Result<InverseSystem> {
    sys.check_square()?;
    let period = sys.period();
    let mut m_inv = Vec::with_capacity(period);
    let mut output_map = Vec::with_capacity(period);
    for k in 0..period {
        let markov = periodic_markov(sys, k, order);
        m_inv.push(linalg::inverse(&markov).ok_or(Error::SingularMarkov { phase: k })?);
        output_map.push(sys.c().at(k + order) * sys.transition_product(k + order, k)?);
    }
    let gamma = PhaseSequence::from_fn(period, |k| {
        sys.a().at(k) - sys.b().at(k) * &m_inv[k] * &output_map[k]
    })?;
    let lambda = PhaseSequence::from_fn(period, |k| sys.b().at(k) * &m_inv[k])?;
    let omega = PhaseSequence::from_fn(period, |k| -(&m_inv[k] * &output_map[k]))?;
    let pi = PhaseSequence::new(m_inv)?;
    InverseSystem::new(order, gamma, lambda, omega, pi)
}

/// Dispatches on the detected relative degree.
pub fn invert(sys: &LptvSystem) -> Result<InverseSystem> {
    invert_with(sys, DEFAULT_SV_TOL)
}

pub fn invert_with(sys: &LptvSystem, sv_tol: f64) -> Result<InverseSystem> {
    match detect_relative_degree(sys, None, sv_tol)? {
        RelativeDegree::Zero => invert_rd0_with(sys, sv_tol),
        RelativeDegree::Uniform { order } => invert_rdr_with(sys, order, sv_tol),
        found => Err(unsupported(found)),
    }
}

fn unsupported(found: RelativeDegree) -> Error {
    let message = match &found {
        RelativeDegree::Mixed { .. } => "non-uniform relative degree across phases is not \
             supported; D_k must be nonsingular at every phase or zero at every phase with \
             nonsingular Markov parameters of a common order"
            .to_string(),
        RelativeDegree::Undetected { cap } => format!(
            "all periodic Markov parameters vanish up to order {cap}; the plant is likely \
             not invertible"
        ),
        _ => unreachable!("supported structures are dispatched"),
    };
    Error::UnsupportedStructure { found, message }
}

/// Dense cross-check: inverts the cycled LTI plant and extracts the periodic
/// matrices from the block structure of the result.
pub fn oracle_invert_cycled(sys: &LptvSystem) -> Result<InverseSystem> {
    oracle_invert_cycled_with(sys, DEFAULT_SV_TOL, DEFAULT_EXTRACT_TOL)
}

pub fn oracle_invert_cycled_with(
    sys: &LptvSystem,
    sv_tol: f64,
    extract_tol: f64,
) -> Result<InverseSystem> {
    let order = match detect_relative_degree(sys, None, sv_tol)? {
        RelativeDegree::Zero => 0,
        RelativeDegree::Uniform { order } => order,
        found => return Err(unsupported(found)),
    };
    let period = sys.period();
    let (n, m, p) = (sys.states(), sys.inputs(), sys.outputs());
    let (a, b, c, d) = build_cycled(sys).dense();

    let singular = || Error::SingularMarkov { phase: 0 };
    let (a_inv, b_inv, c_inv, d_inv) = if order == 0 {
        let d_inv = linalg::inverse(&d).ok_or_else(singular)?;
        (&a - &b * &d_inv * &c, &b * &d_inv, -(&d_inv * &c), d_inv)
    } else {
        let mut a_pow = DMatrix::identity(a.nrows(), a.ncols());
        for _ in 1..order {
            a_pow = &a * a_pow;
        }
        let markov = &c * &a_pow * &b;
        let markov_inv = linalg::inverse(&markov).ok_or_else(singular)?;
        let c_ar = &c * (&a * a_pow);
        let a_inv = &a - &b * &markov_inv * &c_ar;
        let c_inv = -(&markov_inv * &c_ar);
        // absorb Š^r so the inverse is driven by the phase-aligned output
        let s_r = shift_matrix(period, p, order).dense();
        (a_inv, &b * &markov_inv * &s_r, c_inv, markov_inv * s_r)
    };

    let gamma = extract_blocks(&a_inv, period, 1, n, n, extract_tol)?;
    let lambda = extract_blocks(&b_inv, period, 1, n, p, extract_tol)?;
    let omega = extract_blocks(&c_inv, period, 0, m, n, extract_tol)?;
    let pi = extract_blocks(&d_inv, period, 0, m, p, extract_tol)?;
    InverseSystem::new(order, gamma, lambda, omega, pi)
}
