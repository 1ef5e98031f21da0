//! Dense vector helpers shared by every solver.
//!
//! Reductions are plain left-to-right folds so that two code paths performing
//! the same reduction produce bit-identical results.

use ndarray::{Array1, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Vector = Array1<f64>;

/// Random state handed to stochastic oracles. ChaCha is portable across
/// platforms, which keeps seeded traces reproducible.
pub type SolverRng = ChaCha8Rng;

/// Stream used for oracle draws inside a run.
pub const ORACLE_STREAM: u64 = 0;
/// Stream used to draw the starting point.
pub const INIT_STREAM: u64 = 1;

pub fn rng_for(seed: u64, stream: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[inline]
pub fn norm_sq(a: ArrayView1<f64>) -> f64 {
    a.iter().fold(0.0, |acc, x| acc + x * x)
}

#[inline]
pub fn norm(a: ArrayView1<f64>) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| {
        let d = x - y;
        acc + d * d
    })
}

pub fn all_finite(a: ArrayView1<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub fn standard_normal(dim: usize, rng: &mut SolverRng) -> Vector {
    Array1::from_iter((0..dim).map(|_| StandardNormal.sample(rng)))
}

/// Starting point `z ~ N(0, I/d)` drawn from the init stream of `seed`.
pub fn random_start(dim: usize, seed: u64) -> Vector {
    let mut rng = rng_for(seed, INIT_STREAM);
    let scale = 1.0 / (dim.max(1) as f64).sqrt();
    standard_normal(dim, &mut rng) * scale
}
