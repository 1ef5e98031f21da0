use std::time::Instant;

use ndarray::Array1;

use super::{check_bounded, BaselineRun};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, rng_for, SolverRng, Vector, ORACLE_STREAM};
use crate::operators::Problem;
use crate::sps::{attach_trace, RunOptions, StepSchedule, TraceRecord};

fn require_no_operators(problem: &Problem) -> Result<()> {
    if problem.n() == 0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "DSEG handles only B, but the problem has {} set-valued operators",
            problem.n()
        )))
    }
}

/// `z⁺ = z − α B̃₂(z − ρ B̃₁(z))` with two independent oracle draws.
pub fn dseg_step(problem: &Problem, z: &Vector, alpha: f64, rho: f64, rng: &mut SolverRng) -> Result<Vector> {
    require_no_operators(problem)?;
    Error::check_dim(problem.dim(), z.len())?;
    let field = problem.field();
    let r = field.sample(z.view(), rng);
    let mut x = z.clone();
    x.zip_mut_with(&r, |x, &r| *x -= rho * r);
    let y = field.sample(x.view(), rng);
    let mut y_sum = Array1::zeros(z.len());
    y_sum += &y;
    let mut next = z.clone();
    next.zip_mut_with(&y_sum, |z, &y| *z += -alpha * y);
    Ok(next)
}

/// DSEG with the SPS stepsize schedule, tracing `‖B(z)‖²`.
pub fn dseg_run(problem: &Problem, schedule: &StepSchedule, start: &Vector, opts: &RunOptions) -> Result<BaselineRun> {
    opts.validate()?;
    require_no_operators(problem)?;
    Error::check_dim(problem.dim(), start.len())?;
    let mut rng = rng_for(opts.seed, ORACLE_STREAM);
    let mut z = start.clone();
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let started = Instant::now();
        let next = schedule
            .steps(k)
            .and_then(|(alpha, rho)| dseg_step(problem, &z, alpha, rho, &mut rng))
            .and_then(|next| check_bounded(next.view(), k).map(|_| next));
        elapsed += started.elapsed().as_secs_f64();
        let next = next.map_err(|e| attach_trace(e, trace.clone()))?;
        if opts.traces(k) {
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: norm_sq(problem.field().eval(z.view()).view()),
                residual_o: None,
                seed: opts.seed,
            });
        }
        z = next;
    }
    Ok(BaselineRun { trace, z })
}

/// Simultaneous gradient descent-ascent `z⁺ = z − ηB(z)` with the exact
/// field. Returns `z¹ = start, z², ..., z^count`.
pub fn gda_iterates(problem: &Problem, start: &Vector, eta: f64, count: usize) -> Result<Vec<Vector>> {
    require_no_operators(problem)?;
    Error::check_dim(problem.dim(), start.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("GDA stepsize must be positive, got {eta}")));
    }
    let mut out: Vec<Vector> = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(start.clone());
    let mut bz = Array1::zeros(start.len());
    for _ in 1..count {
        let z = out.last().expect("nonempty");
        problem.field().eval_into(z.view(), bz.view_mut());
        out.push(z - &(&bz * eta));
    }
    Ok(out)
}
