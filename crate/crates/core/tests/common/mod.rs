//! Randomized corpus of invertible, minimum-phase plants with a planted
//! relative degree.
//!
//! Systems are drawn at random with the structure needed for the requested
//! relative degree, then `A_k` and `B_k` are scaled by a common factor `s`.
//! That scaling multiplies every `Γ_k` by `s` for any relative degree, so it
//! places `ρ(Φ_inv)` at a chosen target inside `[0.5, 0.9]`. Draws whose plant
//! is unstable or whose Markov parameters are badly conditioned are redrawn.

#![allow(dead_code)]

use lptv::{linalg, DMatrix, LptvSystem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub system: LptvSystem,
    pub order: usize,
    pub seed: u64,
}

fn uniform(rng: &mut StdRng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

/// Plain loop oracle for `M_k^{(j)}`, kept separate from the library.
pub fn markov_oracle(
    a: &[DMatrix<f64>],
    b: &[DMatrix<f64>],
    c: &[DMatrix<f64>],
    k: usize,
    j: usize,
) -> DMatrix<f64> {
    let n = a.len();
    let mut acc = b[k % n].clone();
    for t in (k + 1)..(k + j) {
        acc = &a[t % n] * acc;
    }
    &c[(k + j) % n] * acc
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Projector onto the orthogonal complement of the column space of `b`.
fn complement_projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let gram_inv = (b.transpose() * b)
        .try_inverse()
        .expect("random B has full column rank");
    DMatrix::identity(n, n) - b * gram_inv * b.transpose()
}

type Phases = Vec<DMatrix<f64>>;

fn draw(
    rng: &mut StdRng,
    period: usize,
    n: usize,
    m: usize,
    order: usize,
) -> (Phases, Phases, Phases, Phases) {
    let a: Vec<_> = (0..period).map(|_| uniform(rng, n, n, 1.0)).collect();
    let b: Vec<_> = (0..period).map(|_| uniform(rng, n, m, 1.0)).collect();
    let d: Vec<_> = (0..period)
        .map(|_| {
            if order == 0 {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                uniform(rng, m, m, 0.5) + DMatrix::identity(m, m) * (1.5 * sign)
            } else {
                DMatrix::zeros(m, m)
            }
        })
        .collect();
    let c: Vec<_> = (0..period)
        .map(|k| {
            let raw = uniform(rng, m, n, 1.0);
            if order == 2 {
                // C_k must annihilate B_{k-1}
                raw * complement_projector(&b[(k + period - 1) % period])
            } else {
                raw
            }
        })
        .collect();
    (a, b, c, d)
}

fn try_entry(
    rng: &mut StdRng,
    period: usize,
    n: usize,
    m: usize,
    order: usize,
) -> Option<LptvSystem> {
    let (mut a, mut b, c, d) = draw(rng, period, n, m, order);
    for (k, dk) in d.iter().enumerate() {
        let markov = if order == 0 {
            dk.clone()
        } else {
            markov_oracle(&a, &b, &c, k, order)
        };
        if condition(&markov) > 50.0 {
            return None;
        }
    }
    let sys = LptvSystem::from_phases(a.clone(), b.clone(), c.clone(), d.clone()).ok()?;
    let inv = lptv::inversion::periodic_inverse_formula(&sys, order).ok()?;
    let rho = linalg::spectral_radius(&inv.monodromy());
    if !(rho > 1e-6 && rho.is_finite()) {
        return None;
    }
    let target = rng.random_range(0.5..0.9);
    let s = (target / rho).powf(1.0 / period as f64);
    for k in 0..period {
        a[k] *= s;
        b[k] *= s;
    }
    let sys = LptvSystem::from_phases(a, b, c, d).ok()?;
    let plant_rho = linalg::spectral_radius(&lptv::system::monodromy(sys.a()).ok()?);
    if plant_rho > 0.95 {
        return None;
    }
    let found = lptv::detect_relative_degree(&sys, None, lptv::DEFAULT_SV_TOL).ok()?;
    (found.order() == Some(order)).then_some(sys)
}

/// Draws a supported system with the given shape and relative degree.
pub fn sample(seed: u64, period: usize, n: usize, m: usize, order: usize) -> LptvSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..10_000 {
        if let Some(sys) = try_entry(&mut rng, period, n, m, order) {
            return sys;
        }
    }
    panic!("no admissible system for N={period} n={n} m={m} r={order} (seed {seed})");
}

/// The 50-system corpus: periods 1..=5, state dimensions 1..=4, relative
/// degree 0, 1 or 2, input/output dimension up to 2.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut rng = StdRng::seed_from_u64(0x1ca7_2026);
    let mut out = Vec::with_capacity(50);
    let mut i = 0u64;
    while out.len() < 50 {
        let order = out.len() % 3;
        let period = rng.random_range(1..=5);
        // a positive number of zeros requires n > m·r
        let (n, m) = match order {
            0 => {
                let n = rng.random_range(1..=4);
                (n, rng.random_range(1..=2))
            }
            1 => {
                let n = rng.random_range(2..=4);
                (n, rng.random_range(1..=(n - 1).min(2)))
            }
            _ => (rng.random_range(3..=4), 1),
        };
        let seed = 1000 + i;
        i += 1;
        out.push(CorpusEntry {
            system: sample(seed, period, n, m, order),
            order,
            seed,
        });
    }
    out
}
