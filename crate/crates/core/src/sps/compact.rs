//! Memory-saving SPS.
//!
//! Instead of materialising every pair `(x_i, y_i)`, each resolvent output is
//! folded into running sums `x̄ = Σ x_i`, `ȳ = Σ y_i` and the dual block is
//! partially updated on the spot (`w_i ← w_i − α x_i`). Once all operators
//! are processed the duals are completed with `w_i ← w_i + α x̄/(n+1)` and
//! `z ← z − α ȳ`. Working storage is `z`, `w_1..w_{n+1}`, `t`, `x`, `y`,
//! `x̄`, `ȳ`: `(n + 7)·d` floats.

use std::time::Instant;

use ndarray::Array1;

use super::kernels::{accumulate, axpy, forward_point, norm_sq_of_sum, resolvent_input, resolvent_output};
use super::{attach_trace, ExtendedPoint, RunOptions, SpsRun, StepSchedule, TraceRecord, DIVERGENCE_NORM};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm_sq, rng_for, SolverRng, Vector, ORACLE_STREAM};
use crate::operators::Problem;

#[derive(Debug, Clone)]
pub struct CompactSps {
    z: Vector,
    w: Vec<Vector>,
    t: Vector,
    x: Vector,
    y: Vector,
    x_sum: Vector,
    y_sum: Vector,
}

/// Outcome of one compact step.
#[derive(Debug, Clone, Copy)]
pub struct CompactStep {
    /// `(R_k, O_k)` when requested.
    pub residuals: Option<(f64, f64)>,
    /// Time spent on residual diagnostics inside the step.
    pub diagnostics_s: f64,
}

impl CompactSps {
    pub fn new(start: &Vector, n: usize) -> Self {
        let d = start.len();
        let zeros = || Array1::zeros(d);
        CompactSps {
            z: start.clone(),
            w: vec![zeros(); n + 1],
            t: zeros(),
            x: zeros(),
            y: zeros(),
            x_sum: zeros(),
            y_sum: zeros(),
        }
    }

    /// Total number of floats held in working vectors.
    pub fn working_floats(&self) -> usize {
        let fixed = [&self.z, &self.t, &self.x, &self.y, &self.x_sum, &self.y_sum];
        fixed.iter().map(|v| v.len()).sum::<usize>() + self.w.iter().map(|v| v.len()).sum::<usize>()
    }

    pub fn point(&self) -> ExtendedPoint {
        ExtendedPoint {
            z: self.z.clone(),
            w: self.w.clone(),
        }
    }

    pub fn step(
        &mut self,
        problem: &Problem,
        schedule: &StepSchedule,
        k: usize,
        rng: &mut SolverRng,
        with_residuals: bool,
    ) -> Result<CompactStep> {
        Error::check_dim(problem.n() + 1, self.w.len())?;
        Error::check_dim(problem.dim(), self.z.len())?;
        let (alpha, rho) = schedule.steps(k)?;
        let tau = schedule.tau;
        let n = problem.n();
        let field = problem.field();
        let mut diagnostics_s = 0.0;

        self.x_sum.fill(0.0);
        self.y_sum.fill(0.0);
        let mut dual_gap = 0.0;
        let mut primal_gap = 0.0;
        for (op, wi) in problem.operators().iter().zip(self.w.iter_mut()) {
            resolvent_input(self.z.view(), wi.view(), tau, self.t.view_mut());
            op.resolvent_into(tau, self.t.view(), self.x.view_mut());
            resolvent_output(self.t.view(), self.x.view(), tau, self.y.view_mut());
            accumulate(self.x_sum.view_mut(), self.x.view());
            accumulate(self.y_sum.view_mut(), self.y.view());
            if with_residuals {
                let started = Instant::now();
                dual_gap += dist_sq(self.y.view(), wi.view());
                primal_gap += dist_sq(self.z.view(), self.x.view());
                diagnostics_s += started.elapsed().as_secs_f64();
            }
            axpy(wi.view_mut(), -alpha, self.x.view());
        }

        let mut residuals = None;
        if with_residuals {
            let started = Instant::now();
            field.eval_into(self.z.view(), self.t.view_mut());
            let r = primal_gap + norm_sq_of_sum(self.t.view(), self.y_sum.view());
            let o = dual_gap + primal_gap + dist_sq(self.t.view(), self.w[n].view());
            residuals = Some((r, o));
            diagnostics_s += started.elapsed().as_secs_f64();
        }

        field.sample_into(self.z.view(), rng, self.t.view_mut());
        forward_point(self.z.view(), self.t.view(), self.w[n].view(), rho, self.x.view_mut());
        field.sample_into(self.x.view(), rng, self.y.view_mut());
        accumulate(self.x_sum.view_mut(), self.x.view());
        accumulate(self.y_sum.view_mut(), self.y.view());
        axpy(self.w[n].view_mut(), -alpha, self.x.view());

        let mean_weight = alpha / (n + 1) as f64;
        for wi in &mut self.w {
            axpy(wi.view_mut(), mean_weight, self.x_sum.view());
        }
        axpy(self.z.view_mut(), -alpha, self.y_sum.view());

        let size = self
            .w
            .iter()
            .fold(norm_sq(self.z.view()), |acc, wi| acc + norm_sq(wi.view()));
        if !(size.is_finite() && size <= DIVERGENCE_NORM * DIVERGENCE_NORM) {
            return Err(Error::Diverged {
                last_finite: k,
                trace: Vec::new(),
            });
        }
        Ok(CompactStep {
            residuals,
            diagnostics_s,
        })
    }
}

/// Same iterate sequence and trace as [`super::run_sps`] using
/// `(n + 7)·d` working floats.
pub fn run_sps_compact(
    problem: &Problem,
    schedule: &StepSchedule,
    start: &Vector,
    opts: &RunOptions,
) -> Result<SpsRun> {
    opts.validate()?;
    Error::check_dim(problem.dim(), start.len())?;
    let mut rng = rng_for(opts.seed, ORACLE_STREAM);
    let mut state = CompactSps::new(start, problem.n());
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let traced = opts.traces(k);
        let started = Instant::now();
        let step = state.step(problem, schedule, k, &mut rng, traced);
        let total = started.elapsed().as_secs_f64();
        let step = step.map_err(|e| attach_trace(e, trace.clone()))?;
        elapsed += total - step.diagnostics_s;
        if let Some((r, o)) = step.residuals {
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: r,
                residual_o: Some(o),
                seed: opts.seed,
            });
        }
    }
    Ok(SpsRun {
        trace,
        point: state.point(),
    })
}
