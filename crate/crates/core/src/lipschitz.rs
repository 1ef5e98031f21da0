//! Lipschitz-constant estimation for saddle fields.
//!
//! For `B = (∇_u ℒ, −∇_v ℒ)` the matrix `M = S·DB` (with `S` flipping the sign
//! of the `v` rows) is the Hessian of `ℒ`, hence symmetric, and
//! `‖DB‖ = ‖M‖`. Power iteration on `M²` with finite-difference Jacobian
//! products therefore estimates the local Lipschitz constant of `B`.

use ndarray::{s, Array1};

use crate::error::{Error, Result};
use crate::linalg::{norm, rng_for, standard_normal, Vector};
use crate::operators::LipschitzMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Number of random base points `z ~ N(0, I/D)`.
    pub points: usize,
    /// Multiplier applied to the largest local estimate.
    pub safety: f64,
    pub max_steps: usize,
    /// Relative change of the eigenvalue estimate that counts as converged.
    pub tolerance: f64,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            points: 20,
            safety: 1.5,
            max_steps: 500,
            tolerance: 1e-6,
            fd_step: 1e-6,
            seed: 0x5eed,
        }
    }
}

/// `S·DB(z)·v` by central differences; rows from `flip_from` on are negated.
fn hessian_product(field: &dyn LipschitzMap, z: &Vector, v: &Vector, h: f64, flip_from: usize) -> Vector {
    let plus = field.eval((z + &(v * h)).view());
    let minus = field.eval((z - &(v * h)).view());
    let mut out = (plus - minus) / (2.0 * h);
    out.slice_mut(s![flip_from..]).mapv_inplace(|x| -x);
    out
}

/// Largest singular value of `DB(z)`.
pub fn local_spectral_norm(
    field: &dyn LipschitzMap,
    z: &Vector,
    flip_from: usize,
    start: &Vector,
    opts: &EstimatorOptions,
) -> Result<f64> {
    let mut v = start / norm(start.view());
    let mut previous = f64::NAN;
    for _ in 0..opts.max_steps {
        let mv = hessian_product(field, z, &v, opts.fd_step, flip_from);
        let u = hessian_product(field, z, &mv, opts.fd_step, flip_from);
        let lambda = norm(u.view());
        if !lambda.is_finite() {
            return Err(Error::Estimation("non-finite Jacobian product".into()));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        if (lambda - previous).abs() <= opts.tolerance * lambda {
            return Ok(lambda.sqrt());
        }
        previous = lambda;
        v = u / lambda;
    }
    Err(Error::Estimation(format!(
        "power iteration did not converge in {} steps",
        opts.max_steps
    )))
}

/// `safety · max_z ‖DB(z)‖` over random base points. `flip_from` is the first
/// coordinate of the maximising block.
pub fn estimate_lipschitz(field: &dyn LipschitzMap, flip_from: usize, opts: &EstimatorOptions) -> Result<f64> {
    let dim = field.dim();
    if flip_from > dim {
        return Err(Error::Index {
            index: flip_from,
            len: dim,
        });
    }
    if opts.points == 0 || opts.max_steps == 0 {
        return Err(Error::invalid("estimator needs at least one point and one step"));
    }
    if !(opts.safety >= 1.0 && opts.fd_step > 0.0 && opts.tolerance > 0.0) {
        return Err(Error::invalid(
            "estimator safety must be >= 1 and step/tolerance positive",
        ));
    }
    let mut rng = rng_for(opts.seed, 0);
    let scale = 1.0 / (dim.max(1) as f64).sqrt();
    let mut best: f64 = 0.0;
    for _ in 0..opts.points {
        let z: Array1<f64> = standard_normal(dim, &mut rng) * scale;
        let start = standard_normal(dim, &mut rng);
        best = best.max(local_spectral_norm(field, &z, flip_from, &start, opts)?);
    }
    if best == 0.0 {
        return Err(Error::Estimation(
            "field has zero Jacobian at every sampled point".into(),
        ));
    }
    Ok(opts.safety * best)
}
