//! Periodic state-space data model.
//!
//! Phases are labelled `0..N`; every accessor takes an absolute time index
//! and reduces it modulo the period.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `N` matrices of identical shape, indexed modulo `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    entries: Vec<DMatrix<f64>>,
}

impl PhaseSequence {
    pub fn new(entries: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Dimension("phase sequence must have period >= 1".into()))?;
        let shape = first.shape();
        if let Some((k, m)) = entries.iter().enumerate().find(|(_, m)| m.shape() != shape) {
            return Err(Error::Dimension(format!(
                "phase {k} has shape {:?}, expected {shape:?}",
                m.shape()
            )));
        }
        Ok(Self { entries })
    }

    /// Builds a sequence by evaluating `f` at every phase.
    pub fn from_fn(period: usize, f: impl FnMut(usize) -> DMatrix<f64>) -> Result<Self> {
        Self::new((0..period).map(f).collect())
    }

    pub fn period(&self) -> usize {
        self.entries.len()
    }

    pub fn rows(&self) -> usize {
        self.entries[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].ncols()
    }

    /// Entry for absolute time `k`, i.e. `entries[k mod N]`.
    pub fn at(&self, k: usize) -> &DMatrix<f64> {
        &self.entries[k % self.entries.len()]
    }

    pub fn entries(&self) -> &[DMatrix<f64>] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DMatrix<f64>> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> Vec<DMatrix<f64>> {
        self.entries
    }
}

impl std::ops::Index<usize> for PhaseSequence {
    type Output = DMatrix<f64>;

    fn index(&self, k: usize) -> &DMatrix<f64> {
        self.at(k)
    }
}

/// Product `entries[N-1] · … · entries[0]` over one period.
pub fn monodromy(seq: &PhaseSequence) -> Result<DMatrix<f64>> {
    if seq.rows() != seq.cols() {
        return Err(Error::Dimension(format!(
            "monodromy needs square entries, got {}x{}",
            seq.rows(),
            seq.cols()
        )));
    }
    let mut acc = DMatrix::identity(seq.rows(), seq.rows());
    for m in seq.iter() {
        acc = m * acc;
    }
    Ok(acc)
}

/// An `N`-periodic plant
///
/// ```text
/// x(k+1) = A_k x(k) + B_k u(k)
/// y(k)   = C_k x(k) + D_k u(k)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct LptvSystem {
    a: PhaseSequence,
    b: PhaseSequence,
    c: PhaseSequence,
    d: PhaseSequence,
}

impl LptvSystem {
    pub fn new(
        a: PhaseSequence,
        b: PhaseSequence,
        c: PhaseSequence,
        d: PhaseSequence,
    ) -> Result<Self> {
        let period = a.period();
        for (name, seq) in [("B", &b), ("C", &c), ("D", &d)] {
            if seq.period() != period {
                return Err(Error::Dimension(format!(
                    "{name} has period {}, A has period {period}",
                    seq.period()
                )));
            }
        }
        let n = a.rows();
        let m = b.cols();
        let p = c.rows();
        let expect = [
            ("A", &a, (n, n)),
            ("B", &b, (n, m)),
            ("C", &c, (p, n)),
            ("D", &d, (p, m)),
        ];
        for (name, seq, shape) in expect {
            if (seq.rows(), seq.cols()) != shape {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {}x{}",
                    seq.rows(),
                    seq.cols(),
                    shape.0,
                    shape.1
                )));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Convenience constructor from per-phase matrix lists.
    pub fn from_phases(
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        c: Vec<DMatrix<f64>>,
        d: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        Self::new(
            PhaseSequence::new(a)?,
            PhaseSequence::new(b)?,
            PhaseSequence::new(c)?,
            PhaseSequence::new(d)?,
        )
    }

    pub fn period(&self) -> usize {
        self.a.period()
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn a(&self) -> &PhaseSequence {
        &self.a
    }

    pub fn b(&self) -> &PhaseSequence {
        &self.b
    }

    pub fn c(&self) -> &PhaseSequence {
        &self.c
    }

    pub fn d(&self) -> &PhaseSequence {
        &self.d
    }

    /// State transition product `Φ(j, i) = A_{j-1} ⋯ A_i`, identity for `j = i`.
    pub fn transition_product(&self, j: usize, i: usize) -> Result<DMatrix<f64>> {
        if j < i {
            return Err(Error::InvalidTransition { j, i });
        }
        let n = self.states();
        let mut acc = DMatrix::identity(n, n);
        for t in i..j {
            acc = self.a.at(t) * acc;
        }
        Ok(acc)
    }

    pub fn check_square(&self) -> Result<()> {
        if self.inputs() != self.outputs() {
            return Err(Error::NonSquare {
                inputs: self.inputs(),
                outputs: self.outputs(),
            });
        }
        Ok(())
    }

    /// Applies the state coordinate change `x → T x` at every phase.
    pub fn similarity(&self, t: &DMatrix<f64>) -> Result<Self> {
        let t_inv = crate::linalg::inverse(t)
            .ok_or_else(|| Error::Dimension("similarity transform is singular".into()))?;
        let period = self.period();
        Self::new(
            PhaseSequence::from_fn(period, |k| t * self.a.at(k) * &t_inv)?,
            PhaseSequence::from_fn(period, |k| t * self.b.at(k))?,
            PhaseSequence::from_fn(period, |k| self.c.at(k) * &t_inv)?,
            self.d.clone(),
        )
    }
}

/// Periodic inverse
///
/// ```text
/// ζ(k+1) = Γ_k ζ(k) + Λ_k y(k+r)
/// û(k)   = Ω_k ζ(k) + Π_k y(k+r)
/// ```
///
/// with preview `r = delay`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseSystem {
    pub delay: usize,
    pub gamma: PhaseSequence,
    pub lambda: PhaseSequence,
    pub omega: PhaseSequence,
    pub pi: PhaseSequence,
}

impl InverseSystem {
    pub fn new(
        delay: usize,
        gamma: PhaseSequence,
        lambda: PhaseSequence,
        omega: PhaseSequence,
        pi: PhaseSequence,
    ) -> Result<Self> {
        let period = gamma.period();
        if [&lambda, &omega, &pi].iter().any(|s| s.period() != period) {
            return Err(Error::Dimension(
                "inverse sequences differ in period".into(),
            ));
        }
        let n = gamma.rows();
        let p = lambda.cols();
        let m = omega.rows();
        if gamma.cols() != n
            || lambda.rows() != n
            || omega.cols() != n
            || (pi.rows(), pi.cols()) != (m, p)
        {
            return Err(Error::Dimension(
                "inverse matrices are not conformable".into(),
            ));
        }
        Ok(Self {
            delay,
            gamma,
            lambda,
            omega,
            pi,
        })
    }

    pub fn period(&self) -> usize {
        self.gamma.period()
    }

    pub fn states(&self) -> usize {
        self.gamma.rows()
    }

    /// Dimension of the reconstructed input.
    pub fn inputs(&self) -> usize {
        self.omega.rows()
    }

    /// Dimension of the consumed plant output.
    pub fn outputs(&self) -> usize {
        self.lambda.cols()
    }

    /// `Φ_inv = Γ_{N-1} ⋯ Γ_0`.
    pub fn monodromy(&self) -> DMatrix<f64> {
        monodromy(&self.gamma).expect("Γ blocks are square by construction")
    }

    /// Largest entry-wise difference over all four sequences.
    pub fn max_deviation(&self, other: &InverseSystem) -> f64 {
        if self.delay != other.delay || self.period() != other.period() {
            return f64::INFINITY;
        }
        let pairs = [
            (&self.gamma, &other.gamma),
            (&self.lambda, &other.lambda),
            (&self.omega, &other.omega),
            (&self.pi, &other.pi),
        ];
        let mut worst = 0.0_f64;
        for (l, r) in pairs {
            for (x, y) in l.iter().zip(r.iter()) {
                if x.shape() != y.shape() {
                    return f64::INFINITY;
                }
                worst = worst.max(crate::linalg::max_abs_diff(x, y));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::Example;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn access_is_periodic() {
        let seq = PhaseSequence::new(vec![scalar(1.0), scalar(2.0), scalar(3.0)]).unwrap();
        for k in 0..10 {
            assert_eq!(seq.at(k), seq.at(k + 3));
        }
        assert_eq!(seq[4][(0, 0)], 2.0);
    }

    #[test]
    fn rejects_empty_and_ragged_sequences() {
        assert!(matches!(
            PhaseSequence::new(vec![]),
            Err(Error::Dimension(_))
        ));
        let ragged = vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 1)];
        assert!(matches!(
            PhaseSequence::new(ragged),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_mismatched_system() {
        let a = vec![DMatrix::zeros(2, 2)];
        let b = vec![DMatrix::zeros(2, 1)];
        let c = vec![DMatrix::zeros(1, 2)];
        let bad_d = vec![DMatrix::zeros(2, 1)];
        assert!(LptvSystem::from_phases(a.clone(), b.clone(), c.clone(), bad_d).is_err());
        let short_b = vec![DMatrix::zeros(2, 1), DMatrix::zeros(2, 1)];
        assert!(LptvSystem::from_phases(a, short_b, c, vec![DMatrix::zeros(1, 1)]).is_err());
    }

    #[test]
    fn transition_identity_and_scalar_product() {
        let sys = Example::Scalar.system();
        for i in 0..4 {
            assert_eq!(
                sys.transition_product(i, i).unwrap(),
                DMatrix::identity(1, 1)
            );
        }
        let phi = sys.transition_product(2, 0).unwrap();
        assert!((phi[(0, 0)] - (-0.06)).abs() < 1e-15);
        assert!(matches!(
            sys.transition_product(0, 1),
            Err(Error::InvalidTransition { j: 0, i: 1 })
        ));
    }

    #[test]
    fn transition_single_step_is_a0() {
        let sys = Example::RelativeDegreeOne.system();
        let phi = sys.transition_product(1, 0).unwrap();
        let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -0.5, 0.8]);
        assert_eq!(phi, a0);
    }

    #[test]
    fn monodromy_examples() {
        let single = PhaseSequence::new(vec![scalar(0.7)]).unwrap();
        assert_eq!(monodromy(&single).unwrap(), scalar(0.7));

        let gamma = PhaseSequence::new(vec![scalar(-0.2), scalar(-1.0 / 30.0)]).unwrap();
        assert!((monodromy(&gamma).unwrap()[(0, 0)] - 1.0 / 150.0).abs() < 1e-15);

        let ids = PhaseSequence::from_fn(5, |_| DMatrix::identity(3, 3)).unwrap();
        assert_eq!(monodromy(&ids).unwrap(), DMatrix::identity(3, 3));

        let rect = PhaseSequence::new(vec![DMatrix::zeros(2, 1)]).unwrap();
        assert!(monodromy(&rect).is_err());
    }

    #[test]
    fn monodromy_matches_fold_oracle() {
        let seq = PhaseSequence::from_fn(4, |k| {
            DMatrix::from_fn(2, 2, |i, j| {
                ((k * 7 + i * 3 + j * 5) % 11) as f64 / 10.0 - 0.4
            })
        })
        .unwrap();
        let mut oracle = DMatrix::identity(2, 2);
        for k in 0..4 {
            oracle = seq.entries()[k].clone() * oracle;
        }
        assert!(crate::linalg::max_abs_diff(&monodromy(&seq).unwrap(), &oracle) == 0.0);
    }
}
