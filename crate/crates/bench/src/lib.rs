//! Workload generators shared by the benchmarks.

use lptv::{DMatrix, LptvSystem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Random square plant with nonsingular, diagonally dominant feedthrough.
pub fn feedthrough_plant(period: usize, states: usize, io: usize, seed: u64) -> LptvSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut mat = |r: usize, c: usize, scale: f64| {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale))
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    let mut d = Vec::new();
    for _ in 0..period {
        a.push(mat(states, states, 0.5 / states as f64));
        b.push(mat(states, io, 1.0));
        c.push(mat(io, states, 1.0));
        d.push(mat(io, io, 0.2) + DMatrix::identity(io, io) * 2.0);
    }
    LptvSystem::from_phases(a, b, c, d).expect("generated shapes are consistent")
}
