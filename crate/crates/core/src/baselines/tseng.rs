use std::time::Instant;

use super::{below_resolution, check_bounded, BaselineRun, Linesearch, ProductSpace, MAX_REDUCTIONS};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, Vector};
use crate::operators::Problem;
use crate::sps::{attach_trace, RunOptions, TraceRecord};

/// One accepted Tseng step.
#[derive(Debug, Clone)]
pub struct TsengStep {
    pub next: Vector,
    pub bar: Vector,
    pub alpha: f64,
    pub reductions: usize,
}

/// `q̄ = J_{α𝒜}(q − αℬq)`, `q⁺ = q̄ + α(ℬq − ℬq̄)`, with `α` backtracked from
/// `ls.initial` until `α‖ℬq̄ − ℬq‖ ≤ θ‖q̄ − q‖`.
pub fn tseng_iterate(problem: &Problem, q: &Vector, ls: &Linesearch) -> Result<TsengStep> {
    ls.validate()?;
    let space = ProductSpace::new(problem);
    Error::check_dim(space.dim(), q.len())?;
    let bq = space.field(q);
    let mut alpha = ls.initial;
    for reductions in 0..=MAX_REDUCTIONS {
        let bar = space.resolvent(alpha, &(q - &(&bq * alpha)));
        let bbar = space.field(&bar);
        let lhs = alpha * dist_sq(bbar.view(), bq.view()).sqrt();
        let step = dist_sq(bar.view(), q.view()).sqrt();
        if lhs <= ls.theta * step || below_resolution(step, q) {
            let next = &bar + &((&bq - &bbar) * alpha);
            return Ok(TsengStep {
                next,
                bar,
                alpha,
                reductions,
            });
        }
        alpha *= ls.shrink;
    }
    Err(Error::StalledLinesearch(MAX_REDUCTIONS))
}

/// `‖q − q⁺‖²/α²`, the squared norm of the certificate `(q − q⁺)/α ∈ 𝒯(q̄)`.
pub fn tseng_residual(q_prev: &Vector, q_next: &Vector, alpha: f64) -> f64 {
    dist_sq(q_prev.view(), q_next.view()) / (alpha * alpha)
}

/// Tseng from `q = (0, ..., 0, start)`.
pub fn run_tseng(problem: &Problem, start: &Vector, ls: &Linesearch, opts: &RunOptions) -> Result<BaselineRun> {
    opts.validate()?;
    let space = ProductSpace::new(problem);
    Error::check_dim(problem.dim(), start.len())?;
    let mut q = space.from_primal(start.view());
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let started = Instant::now();
        let step = tseng_iterate(problem, &q, ls).and_then(|s| check_bounded(s.next.view(), k).map(|_| s));
        elapsed += started.elapsed().as_secs_f64();
        let step = step.map_err(|e| attach_trace(e, trace.clone()))?;
        if opts.traces(k) {
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: tseng_residual(&q, &step.next, step.alpha),
                residual_o: None,
                seed: opts.seed,
            });
        }
        q = step.next;
    }
    Ok(BaselineRun {
        trace,
        z: space.primal(&q).to_owned(),
    })
}
