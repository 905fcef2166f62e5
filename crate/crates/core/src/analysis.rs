//! Stability of periodic inverses and zeros of the cycled plant.
//!
//! The inverse is stable when `Φ_inv = Γ_{N-1} ⋯ Γ_0` is Schur stable. The
//! eigenvalues of the dense 1-shift embedding `Ǎ_inv` of the `Γ_k` are the
//! poles of the cycled inverse; both verdicts are computed independently
//! and compared.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::cyclic::{build_cycled, ShiftBlockCirculant};
use crate::error::Result;
use crate::inversion::invert_with;
use crate::linalg::{self, Complex64};
use crate::system::{InverseSystem, LptvSystem};
use crate::{DEFAULT_DROP_TOL, DEFAULT_SV_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub monodromy_inv: DMatrix<f64>,
    /// Sorted by modulus descending, then argument ascending.
    pub monodromy_eigs: Vec<Complex64>,
    pub spectral_radius: f64,
    pub is_schur_stable: bool,
    /// `ρ` lies within `stab_tol` of the unit circle.
    pub marginal: bool,
    /// Eigenvalues of dense `Ǎ_inv`, same ordering as `monodromy_eigs`.
    pub cycled_zeros: Vec<Complex64>,
    pub minimum_phase: bool,
    /// `|ρ(Ǎ_inv) − ρ(Φ_inv)^{1/N}|`.
    pub root_relation_residual: f64,
    /// Number of cycled eigenvalues at the origin contributed by the output
    /// preview (`N·m·r`); zero for causal inverses.
    pub delay_modes: usize,
    /// Any NaN or infinite entry among the inverse matrices.
    pub non_finite: bool,
    pub stab_tol: f64,
}

impl StabilityReport {
    pub fn verdict(&self) -> Verdict {
        if self.is_schur_stable {
            Verdict::Stable
        } else if self.marginal || self.non_finite {
            Verdict::Marginal
        } else {
            Verdict::Unstable
        }
    }

    /// Both routes to the stability verdict agree.
    pub fn verdicts_agree(&self) -> bool {
        self.is_schur_stable == self.minimum_phase
    }
}

/// Builds the full stability report for `inv`.
pub fn stability_report(inv: &InverseSystem, stab_tol: f64) -> StabilityReport {
    let period = inv.period();
    let non_finite = [&inv.gamma, &inv.lambda, &inv.omega, &inv.pi]
        .iter()
        .any(|seq| seq.iter().any(|m| !linalg::is_finite(m)));

    let monodromy_inv = inv.monodromy();
    let mut monodromy_eigs = linalg::eigenvalues(&monodromy_inv);
    linalg::sort_complex(&mut monodromy_eigs);
    let spectral_radius = linalg::spectral_radius_of(&monodromy_eigs);

    let a_inv = ShiftBlockCirculant::from_sequence(1, &inv.gamma).dense();
    let mut cycled_zeros = linalg::eigenvalues(&a_inv);
    linalg::sort_complex(&mut cycled_zeros);
    let cycled_radius = linalg::spectral_radius_of(&cycled_zeros);

    let marginal = (spectral_radius - 1.0).abs() <= stab_tol;
    let is_schur_stable = spectral_radius < 1.0 - stab_tol;
    let minimum_phase = cycled_zeros.iter().all(|z| z.norm() < 1.0 - stab_tol);
    let root_relation_residual = (cycled_radius - spectral_radius.powf(1.0 / period as f64)).abs();

    StabilityReport {
        monodromy_inv,
        monodromy_eigs,
        spectral_radius,
        is_schur_stable,
        marginal,
        cycled_zeros,
        minimum_phase,
        root_relation_residual,
        delay_modes: period * inv.inputs() * inv.delay,
        non_finite,
        stab_tol,
    }
}

/// Result of the pencil rank-drop probe for one candidate zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCheck {
    pub candidate: (f64, f64),
    pub probe: (f64, f64),
    pub sigma_at_candidate: f64,
    pub sigma_at_probe: f64,
    pub passed: bool,
    /// The pencil is rank deficient at the probe point as well, so the
    /// candidate cannot be classified.
    pub degenerate: bool,
}

/// Smallest singular value of `[[zI − Ǎ, −B̌], [Č, Ď]]`.
pub fn pencil_min_singular_value(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    z: Complex64,
) -> f64 {
    let n = a.nrows();
    let m = b.ncols();
    let p = c.nrows();
    let mut pencil = DMatrix::<Complex64>::zeros(n + p, n + m);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { z } else { Complex::new(0.0, 0.0) };
            pencil[(i, j)] = diag - Complex::new(a[(i, j)], 0.0);
        }
        for j in 0..m {
            pencil[(i, n + j)] = Complex::new(-b[(i, j)], 0.0);
        }
    }
    for i in 0..p {
        for j in 0..n {
            pencil[(n + i, j)] = Complex::new(c[(i, j)], 0.0);
        }
        for j in 0..m {
            pencil[(n + i, n + j)] = Complex::new(d[(i, j)], 0.0);
        }
    }
    pencil
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Probe point `z₀ + δ·e^{iθ}` whose direction stays furthest from the other
/// candidates.
fn probe_point(z0: Complex64, others: &[Complex64], delta: f64) -> Complex64 {
    const DIRECTIONS: usize = 16;
    let mut best = z0 + Complex::new(delta, 0.0);
    let mut best_gap = f64::NEG_INFINITY;
    for i in 0..DIRECTIONS {
        // offset keeps the probe off the real axis and off ± symmetric pairs
        let theta = std::f64::consts::TAU * (i as f64 + 0.3) / DIRECTIONS as f64;
        let candidate = z0 + Complex::from_polar(delta, theta);
        let gap = others
            .iter()
            .map(|o| (candidate - o).norm())
            .fold(f64::INFINITY, f64::min);
        if gap > best_gap {
            best_gap = gap;
            best = candidate;
        }
    }
    best
}

/// Confirms that each candidate is a point where the cycled system matrix
/// loses rank: `σ_min(z₀) <= drop_tol · σ_min(z₀ + δ)`.
///
/// `delta = None` uses `0.1 · (1 + |z₀|)`.
pub fn verify_zeros_pencil(
    sys: &LptvSystem,
    candidates: &[Complex64],
    delta: Option<f64>,
    drop_tol: f64,
) -> Result<Vec<ZeroCheck>> {
    sys.check_square()?;
    let (a, b, c, d) = build_cycled(sys).dense();
    let scale = 1.0
        + [&a, &b, &c, &d]
            .iter()
            .map(|m| linalg::max_abs(m))
            .fold(0.0, f64::max);
    Ok(candidates
        .iter()
        .enumerate()
        .map(|(i, &z0)| {
            let others: Vec<Complex64> = candidates
                .iter()
                .enumerate()
                .filter(|(j, o)| *j != i && (*o - z0).norm() > 1e-9)
                .map(|(_, o)| *o)
                .collect();
            let step = delta.unwrap_or(0.1 * (1.0 + z0.norm()));
            let probe = probe_point(z0, &others, step);
            let sigma_at_candidate = pencil_min_singular_value(&a, &b, &c, &d, z0);
            let sigma_at_probe = pencil_min_singular_value(&a, &b, &c, &d, probe);
            let degenerate = sigma_at_probe <= 1e-12 * scale;
            ZeroCheck {
                candidate: (z0.re, z0.im),
                probe: (probe.re, probe.im),
                sigma_at_candidate,
                sigma_at_probe,
                passed: !degenerate && sigma_at_candidate <= drop_tol * sigma_at_probe,
                degenerate,
            }
        })
        .collect())
}

/// Convenience wrapper with the default probe settings.
pub fn verify_zeros(sys: &LptvSystem, candidates: &[Complex64]) -> Result<Vec<ZeroCheck>> {
    verify_zeros_pencil(sys, candidates, None, DEFAULT_DROP_TOL)
}

/// Inverts `sys` and reports whether the inverse is stable, i.e. whether the
/// plant is periodically minimum phase.
pub fn check_minimum_phase(sys: &LptvSystem) -> Result<(bool, StabilityReport)> {
    check_minimum_phase_with(sys, DEFAULT_SV_TOL, crate::DEFAULT_STAB_TOL)
}

pub fn check_minimum_phase_with(
    sys: &LptvSystem,
    sv_tol: f64,
    stab_tol: f64,
) -> Result<(bool, StabilityReport)> {
    let inv = invert_with(sys, sv_tol)?;
    let report = stability_report(&inv, stab_tol);
    Ok((report.is_schur_stable, report))
}

/// Splits the cycled zeros into genuine transmission-zero candidates and the
/// `delay_modes` eigenvalues nearest the origin that the output preview adds.
pub fn split_delay_modes(report: &StabilityReport) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut by_modulus = report.cycled_zeros.clone();
    by_modulus.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let cut = report.delay_modes.min(by_modulus.len());
    let delay = by_modulus[..cut].to_vec();
    let mut zeros = by_modulus[cut..].to_vec();
    linalg::sort_complex(&mut zeros);
    (zeros, delay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::Example;
    use crate::inversion::invert;
    use crate::DEFAULT_STAB_TOL;

    fn s(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    fn scalar_plant(a: f64, b: f64, c: f64, d: f64) -> LptvSystem {
        LptvSystem::from_phases(vec![s(a)], vec![s(b)], vec![s(c)], vec![s(d)]).unwrap()
    }

    #[test]
    fn scalar_example_report() {
        let inv = invert(&Example::Scalar.system()).unwrap();
        let r = stability_report(&inv, DEFAULT_STAB_TOL);
        assert!((r.monodromy_inv[(0, 0)] - 1.0 / 150.0).abs() < 1e-15);
        assert!(r.is_schur_stable && r.minimum_phase && r.verdicts_agree());
        let root = (1.0_f64 / 150.0).sqrt();
        assert_eq!(r.cycled_zeros.len(), 2);
        assert!(r
            .cycled_zeros
            .iter()
            .all(|z| (z.norm() - root).abs() < 1e-12));
        assert!(r.cycled_zeros.iter().any(|z| (z.re - root).abs() < 1e-12));
        assert!(r.cycled_zeros.iter().any(|z| (z.re + root).abs() < 1e-12));
        assert!(r.root_relation_residual < 1e-12);
        assert_eq!(r.verdict(), Verdict::Stable);
    }

    #[test]
    fn two_state_example_report() {
        let inv = invert(&Example::TwoState.system()).unwrap();
        let r = stability_report(&inv, DEFAULT_STAB_TOL);
        assert!((r.spectral_radius - 0.032).abs() < 2e-3);
        let mut re: Vec<f64> = r.monodromy_eigs.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 0.032).abs() < 2e-3);
        assert!((re[1] - 0.001).abs() < 2e-3);
    }

    #[test]
    fn unit_delay_example_report() {
        let inv = invert(&Example::RelativeDegreeOne.system()).unwrap();
        let r = stability_report(&inv, DEFAULT_STAB_TOL);
        assert_eq!(r.delay_modes, 3);
        assert!((r.spectral_radius - 0.0498).abs() < 1e-3);
        let expected = [
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.368, 0.0),
            Complex::new(-0.184, 0.319),
            Complex::new(-0.184, -0.319),
        ];
        assert!(linalg::multiset_distance(&expected, &r.cycled_zeros) < 1e-3);
        let (zeros, delay) = split_delay_modes(&r);
        assert_eq!(zeros.len(), 3);
        assert!(delay.iter().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn pencil_probe_on_examples() {
        let sys = Example::Scalar.system();
        let root = (1.0_f64 / 150.0).sqrt();
        let checks = verify_zeros(
            &sys,
            &[
                Complex::new(root, 0.0),
                Complex::new(-root, 0.0),
                Complex::new(10.0, 0.0),
            ],
        )
        .unwrap();
        assert!(checks[0].passed && checks[1].passed);
        assert!(!checks[2].passed);

        let sys = Example::RelativeDegreeOne.system();
        let r = stability_report(&invert(&sys).unwrap(), DEFAULT_STAB_TOL);
        let (zeros, _) = split_delay_modes(&r);
        let real_zero = zeros.iter().find(|z| z.im.abs() < 1e-9).copied().unwrap();
        assert!((real_zero.re - 0.368).abs() < 1e-3);
        assert!(verify_zeros(&sys, &zeros).unwrap().iter().all(|c| c.passed));
    }

    #[test]
    fn scalar_minimum_phase_oracle() {
        // Γ = A − B D⁻¹ C
        let (ok, r) = check_minimum_phase(&scalar_plant(2.0, 1.0, 1.0, 0.5)).unwrap();
        assert!(ok);
        assert!(r.spectral_radius.abs() < 1e-15);

        let (ok, r) = check_minimum_phase(&scalar_plant(0.5, 1.0, 1.0, 0.25)).unwrap();
        assert!(!ok);
        assert!((r.monodromy_inv[(0, 0)] + 3.5).abs() < 1e-15);
        assert_eq!(r.verdict(), Verdict::Unstable);
        assert!(!r.minimum_phase);
    }

    #[test]
    fn unit_radius_is_marginal() {
        let (ok, r) = check_minimum_phase(&scalar_plant(2.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(!ok);
        assert!(r.marginal);
        assert!(!r.minimum_phase);
        assert_eq!(r.verdict(), Verdict::Marginal);
    }

    #[test]
    fn non_finite_inverse_is_flagged() {
        let inv = InverseSystem::new(
            0,
            crate::PhaseSequence::new(vec![s(f64::NAN)]).unwrap(),
            crate::PhaseSequence::new(vec![s(1.0)]).unwrap(),
            crate::PhaseSequence::new(vec![s(1.0)]).unwrap(),
            crate::PhaseSequence::new(vec![s(1.0)]).unwrap(),
        )
        .unwrap();
        let r = stability_report(&inv, DEFAULT_STAB_TOL);
        assert!(r.non_finite);
        assert!(!r.is_schur_stable);
        assert_eq!(r.verdict(), Verdict::Marginal);
    }

    #[test]
    fn degenerate_pencil_is_reported() {
        // two inputs that act identically make the plant non-invertible
        let sys = LptvSystem::from_phases(
            vec![DMatrix::identity(1, 1) * 0.5],
            vec![DMatrix::from_row_slice(1, 2, &[1.0, 1.0])],
            vec![DMatrix::from_column_slice(2, 1, &[1.0, 1.0])],
            vec![DMatrix::zeros(2, 2)],
        )
        .unwrap();
        let checks = verify_zeros(&sys, &[Complex::new(0.3, 0.0)]).unwrap();
        assert!(checks[0].degenerate);
        assert!(!checks[0].passed);
    }
}
