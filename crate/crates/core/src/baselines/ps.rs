use std::time::Instant;

use super::BaselineRun;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::Problem;
use crate::sps::{
    apply_update, attach_trace, compute_pairs, hyperplane_eval, hyperplane_gradient, residual_o, residual_r,
    ExtendedPoint, OperatorPairs, RunOptions, TraceRecord,
};

/// Forward stepsize of deterministic projective splitting as a fraction of `1/L`.
pub const PS_STEP_FACTOR: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct PsStep {
    pub next: ExtendedPoint,
    pub pairs: OperatorPairs,
    /// `φ(p)` before the projection.
    pub phi: f64,
    /// Set when `φ(p) ≤ 0`, i.e. no separation was found and `p` is kept.
    pub converged: bool,
}

/// Builds the pairs with the exact field and projects `p` onto
/// `{φ ≤ 0}`: `p⁺ = p − (φ(p)/‖∇φ‖²)∇φ` when `φ(p) > 0`.
pub fn deterministic_ps_iterate(problem: &Problem, p: &ExtendedPoint, rho: f64, tau: f64) -> Result<PsStep> {
    for (name, v) in [("rho", rho), ("tau", tau)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Error::check_dim(problem.n() + 1, p.w.len())?;
    Error::check_dim(problem.dim(), p.dim())?;
    let pairs = compute_pairs(problem, p, tau, rho, None);
    let phi = hyperplane_eval(p, &pairs)?;
    let grad_sq = hyperplane_gradient(&pairs).norm_sq();
    if phi > 0.0 && grad_sq > 0.0 {
        let next = apply_update(p, &pairs, phi / grad_sq);
        Ok(PsStep {
            next,
            pairs,
            phi,
            converged: false,
        })
    } else {
        Ok(PsStep {
            next: p.clone(),
            pairs,
            phi,
            converged: true,
        })
    }
}

/// Deterministic projective splitting with `ρ = 0.9/L` from `(start, 0, ..., 0)`.
pub fn run_ps(problem: &Problem, start: &Vector, tau: f64, opts: &RunOptions) -> Result<BaselineRun> {
    opts.validate()?;
    Error::check_dim(problem.dim(), start.len())?;
    let rho = PS_STEP_FACTOR / problem.lipschitz();
    let mut p = ExtendedPoint::from_primal(start.clone(), problem.n());
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let started = Instant::now();
        let step = deterministic_ps_iterate(problem, &p, rho, tau).and_then(|s| s.next.check_diverged(k).map(|_| s));
        elapsed += started.elapsed().as_secs_f64();
        let step = step.map_err(|e| attach_trace(e, trace.clone()))?;
        if opts.traces(k) {
            let bz = problem.field().eval(p.z.view());
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: residual_r(&p.z, &step.pairs, &bz),
                residual_o: Some(residual_o(&p, &step.pairs, &bz)),
                seed: opts.seed,
            });
        }
        p = step.next;
    }
    Ok(BaselineRun { trace, z: p.z })
}
