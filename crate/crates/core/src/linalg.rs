//! Small dense helpers shared by the structured and oracle paths.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix};

pub type Complex64 = Complex<f64>;

/// Largest absolute entry, `0` for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn is_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Scale-aware nonsingularity test: `σ_min > tol · max(1, σ_max)`.
pub fn is_nonsingular(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() || !is_finite(m) {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min > tol * max.max(1.0)
}

/// Entry-wise zero test used for `D_k = 0` and vanishing Markov parameters.
pub fn is_zero(m: &DMatrix<f64>, tol: f64) -> bool {
    max_abs(m) <= tol
}

/// Inverse via LU with partial pivoting.
pub fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if !m.is_square() {
        return None;
    }
    let inv = m.clone().lu().try_inverse()?;
    is_finite(&inv).then_some(inv)
}

/// Eigenvalues of a real square matrix through the real Schur form.
///
/// Non-finite input yields a vector of NaNs rather than entering the QR
/// iteration.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    if !is_finite(m) {
        return vec![Complex64::new(f64::NAN, f64::NAN); m.nrows()];
    }
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().complex_eigenvalues().iter().cloned().collect()
}

pub fn spectral_radius_of(eigs: &[Complex64]) -> f64 {
    eigs.iter().fold(0.0_f64, |acc, z| {
        let r = z.norm();
        if r.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(r)
        }
    })
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    spectral_radius_of(&eigenvalues(m))
}

/// Sorts by modulus descending, then argument ascending.
///
/// Moduli are compared on a 1e-12 grid so that conjugate pairs and roots of
/// unity, whose moduli differ only by rounding, are ordered by argument.
pub fn sort_complex(values: &mut [Complex64]) {
    fn key(z: &Complex64) -> (i64, f64) {
        let q = (z.norm() * 1e12).round();
        let q = if q.is_finite() { q as i64 } else { i64::MAX };
        (q, z.arg())
    }
    values.sort_by(|a, b| {
        let (ma, pa) = key(a);
        let (mb, pb) = key(b);
        mb.cmp(&ma)
            .then_with(|| pa.partial_cmp(&pb).unwrap_or(Ordering::Equal))
    });
}

/// Minimum-cost matching distance between two multisets of complex values
/// of equal size (greedy on sorted candidates, adequate for well-separated
/// clusters). Returns the largest pairwise distance used.
pub fn multiset_distance(expected: &[Complex64], actual: &[Complex64]) -> f64 {
    if expected.len() != actual.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; actual.len()];
    let mut worst = 0.0_f64;
    for e in expected {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, a) in actual.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (e - a).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        match best {
            Some(j) => {
                used[j] = true;
                worst = worst.max(best_d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}
