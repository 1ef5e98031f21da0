use std::time::Instant;

use super::{below_resolution, check_bounded, BaselineRun, Linesearch, ProductSpace, MAX_REDUCTIONS};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm_sq, Vector};
use crate::operators::Problem;
use crate::sps::{attach_trace, RunOptions, TraceRecord};

/// FRB state: the current point, `ℬ` at the current and previous points and
/// the previously accepted stepsize.
#[derive(Debug, Clone)]
pub struct FrbState {
    pub q: Vector,
    pub field: Vector,
    pub prev_field: Vector,
    pub alpha: f64,
}

impl FrbState {
    /// Starts with `q⁻¹ = q⁰`, so the reflected term vanishes at the first step.
    pub fn new(problem: &Problem, q: Vector, ls: &Linesearch) -> Result<Self> {
        ls.validate()?;
        let space = ProductSpace::new(problem);
        Error::check_dim(space.dim(), q.len())?;
        let field = space.field(&q);
        Ok(FrbState {
            prev_field: field.clone(),
            field,
            q,
            alpha: ls.initial,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FrbStep {
    pub state: FrbState,
    /// `‖v‖²` with `v ∈ 𝒯(q⁺)` the certificate of the step.
    pub residual: f64,
    pub reductions: usize,
}

/// `q⁺ = J_{α𝒜}[q − αℬq − α'(ℬq − ℬq_prev)]` where `α'` is the previous
/// stepsize and `α ≤ α'` is backtracked until `α‖ℬq⁺ − ℬq‖ ≤ (θ/2)‖q⁺ − q‖`.
/// With `α = α'` this is `J_{α𝒜}[q − α(2ℬq − ℬq_prev)]`.
pub fn frb_iterate(problem: &Problem, state: &FrbState, ls: &Linesearch) -> Result<FrbStep> {
    ls.validate()?;
    let space = ProductSpace::new(problem);
    Error::check_dim(space.dim(), state.q.len())?;
    let prev_alpha = state.alpha;
    let reflection = &state.field - &state.prev_field;
    let mut alpha = prev_alpha;
    for reductions in 0..=MAX_REDUCTIONS {
        let arg = &state.q - &(&state.field * alpha) - &(&reflection * prev_alpha);
        let next = space.resolvent(alpha, &arg);
        let next_field = space.field(&next);
        let lhs = alpha * dist_sq(next_field.view(), state.field.view()).sqrt();
        let step = dist_sq(next.view(), state.q.view()).sqrt();
        if lhs <= 0.5 * ls.theta * step || below_resolution(step, &state.q) {
            let v = (&state.q - &next) / alpha - &state.field - &(&reflection * (prev_alpha / alpha)) + &next_field;
            return Ok(FrbStep {
                residual: norm_sq(v.view()),
                state: FrbState {
                    q: next,
                    prev_field: state.field.clone(),
                    field: next_field,
                    alpha,
                },
                reductions,
            });
        }
        alpha *= ls.shrink;
    }
    Err(Error::StalledLinesearch(MAX_REDUCTIONS))
}

/// FRB from `q⁰ = q⁻¹ = (0, ..., 0, start)`.
pub fn run_frb(problem: &Problem, start: &Vector, ls: &Linesearch, opts: &RunOptions) -> Result<BaselineRun> {
    opts.validate()?;
    Error::check_dim(problem.dim(), start.len())?;
    let space = ProductSpace::new(problem);
    let mut state = FrbState::new(problem, space.from_primal(start.view()), ls)?;
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let started = Instant::now();
        let step = frb_iterate(problem, &state, ls).and_then(|s| check_bounded(s.state.q.view(), k).map(|_| s));
        elapsed += started.elapsed().as_secs_f64();
        let step = step.map_err(|e| attach_trace(e, trace.clone()))?;
        if opts.traces(k) {
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: step.residual,
                residual_o: None,
                seed: opts.seed,
            });
        }
        state = step.state;
    }
    Ok(BaselineRun {
        trace,
        z: space.primal(&state.q).to_owned(),
    })
}
