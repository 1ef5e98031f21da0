//! Stochastic projective splitting.
//!
//! The iterate lives in the extended space `p = (z, w_1, ..., w_{n+1})` and
//! stays on the subspace `Σ w_i = 0`. Each iteration builds pairs
//! `(x_i, y_i)` (resolvent steps for the `A_i`, a two-draw forward step for
//! `B`) that define an affine function `φ(p) = Σ ⟨z − x_i, y_i − w_i⟩`, then
//! moves `p` along `−∇φ` with a predefined stepsize.

use std::time::Instant;

use ndarray::{Array1, Zip};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq, rng_for, SolverRng, Vector, ORACLE_STREAM};
use crate::operators::Problem;

pub mod compact;
mod kernels;
pub mod schedule;

pub use compact::{run_sps_compact, CompactSps};
pub use schedule::{schedule_decay, schedule_fixed, StepRule, StepSchedule};

use kernels::{accumulate, axpy, forward_point, norm_sq_of_sum, resolvent_input, resolvent_output};

/// Iterates whose norm exceeds this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// One traced iteration of any solver.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Cumulative solver time, excluding residual diagnostics.
    pub wall_time_s: f64,
    pub residual_r: f64,
    pub residual_o: Option<f64>,
    pub seed: u64,
}

/// `p = (z, w_1, ..., w_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    pub z: Vector,
    pub w: Vec<Vector>,
}

impl ExtendedPoint {
    pub fn new(z: Vector, w: Vec<Vector>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("extended point needs at least one dual block"));
        }
        for wi in &w {
            Error::check_dim(z.len(), wi.len())?;
        }
        Ok(ExtendedPoint { z, w })
    }

    /// `(z, 0, ..., 0)` with `n + 1` dual blocks.
    pub fn from_primal(z: Vector, n: usize) -> Self {
        let w = vec![Array1::zeros(z.len()); n + 1];
        ExtendedPoint { z, w }
    }

    pub fn n(&self) -> usize {
        self.w.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn dual_sum(&self) -> Vector {
        let mut s = Array1::zeros(self.dim());
        for wi in &self.w {
            s += wi;
        }
        s
    }

    /// `‖Σ w_i‖ / (1 + max_i ‖w_i‖)`; zero on the subspace.
    pub fn subspace_gap(&self) -> f64 {
        let max_w = self.w.iter().map(|wi| norm_sq(wi.view()).sqrt()).fold(0.0, f64::max);
        norm_sq(self.dual_sum().view()).sqrt() / (1.0 + max_w)
    }

    pub fn norm_sq(&self) -> f64 {
        self.w
            .iter()
            .fold(norm_sq(self.z.view()), |acc, wi| acc + norm_sq(wi.view()))
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().chain(self.w.iter().flatten()).all(|v| v.is_finite())
    }

    /// `self + h·dir`.
    pub fn moved(&self, h: f64, dir: &ExtendedPoint) -> ExtendedPoint {
        ExtendedPoint {
            z: &self.z + &(&dir.z * h),
            w: self.w.iter().zip(&dir.w).map(|(a, b)| a + &(b * h)).collect(),
        }
    }

    pub fn dot(&self, other: &ExtendedPoint) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .fold(dot(self.z.view(), other.z.view()), |acc, (a, b)| {
                acc + dot(a.view(), b.view())
            })
    }

    pub fn dist_sq(&self, other: &ExtendedPoint) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .fold(dist_sq(self.z.view(), other.z.view()), |acc, (a, b)| {
                acc + dist_sq(a.view(), b.view())
            })
    }

    pub(crate) fn check_diverged(&self, k: usize) -> Result<()> {
        if self.is_finite() && self.norm_sq() <= DIVERGENCE_NORM * DIVERGENCE_NORM {
            Ok(())
        } else {
            Err(Error::Diverged {
                last_finite: k,
                trace: Vec::new(),
            })
        }
    }
}

/// Pairs `(x_i, y_i)`, `i = 1..n+1`; the last one belongs to `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPairs {
    pub x: Vec<Vector>,
    pub y: Vec<Vector>,
}

impl OperatorPairs {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of set-valued operators covered (all pairs but the last).
    pub fn n(&self) -> usize {
        self.x.len().saturating_sub(1)
    }
}

/// Lines 3–8 of the method: resolvent steps for each `A_i` and the
/// two-evaluation forward step for `B`. `rng = None` uses exact `B`.
pub fn compute_pairs(
    problem: &Problem,
    p: &ExtendedPoint,
    tau: f64,
    rho: f64,
    mut rng: Option<&mut SolverRng>,
) -> OperatorPairs {
    let n = problem.n();
    let d = problem.dim();
    let field = problem.field();
    let mut xs = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    let mut t = Array1::zeros(d);
    for (op, wi) in problem.operators().iter().zip(&p.w) {
        let mut x = Array1::zeros(d);
        let mut y = Array1::zeros(d);
        resolvent_input(p.z.view(), wi.view(), tau, t.view_mut());
        op.resolvent_into(tau, t.view(), x.view_mut());
        resolvent_output(t.view(), x.view(), tau, y.view_mut());
        xs.push(x);
        ys.push(y);
    }
    let mut r = Array1::zeros(d);
    match rng.as_deref_mut() {
        Some(rng) => field.sample_into(p.z.view(), rng, r.view_mut()),
        None => field.eval_into(p.z.view(), r.view_mut()),
    }
    let mut x = Array1::zeros(d);
    forward_point(p.z.view(), r.view(), p.w[n].view(), rho, x.view_mut());
    let mut y = Array1::zeros(d);
    match rng {
        Some(rng) => field.sample_into(x.view(), rng, y.view_mut()),
        None => field.eval_into(x.view(), y.view_mut()),
    }
    xs.push(x);
    ys.push(y);
    OperatorPairs { x: xs, y: ys }
}

/// `z⁺ = z − α Σ y_i`, `w_i⁺ = w_i − α(x_i − mean(x))`.
pub(crate) fn apply_update(p: &ExtendedPoint, pairs: &OperatorPairs, alpha: f64) -> ExtendedPoint {
    let d = p.dim();
    let count = pairs.len();
    let mut x_sum = Array1::zeros(d);
    let mut y_sum = Array1::zeros(d);
    for (x, y) in pairs.x.iter().zip(&pairs.y) {
        accumulate(x_sum.view_mut(), x.view());
        accumulate(y_sum.view_mut(), y.view());
    }
    let mean_weight = alpha / count as f64;
    let w =
        p.w.iter()
            .zip(&pairs.x)
            .map(|(wi, xi)| {
                let mut next = wi.clone();
                axpy(next.view_mut(), -alpha, xi.view());
                axpy(next.view_mut(), mean_weight, x_sum.view());
                next
            })
            .collect();
    let mut z = p.z.clone();
    axpy(z.view_mut(), -alpha, y_sum.view());
    ExtendedPoint { z, w }
}

fn check_point(problem: &Problem, p: &ExtendedPoint) -> Result<()> {
    Error::check_dim(problem.n() + 1, p.w.len())?;
    Error::check_dim(problem.dim(), p.dim())
}

/// One SPS iteration at counter `k ≥ 1`. Returns `p^{k+1}` and the pairs
/// built at `p^k`.
pub fn sps_iterate(
    problem: &Problem,
    schedule: &StepSchedule,
    p: &ExtendedPoint,
    k: usize,
    rng: &mut SolverRng,
) -> Result<(ExtendedPoint, OperatorPairs)> {
    check_point(problem, p)?;
    let (alpha, rho) = schedule.steps(k)?;
    let pairs = compute_pairs(problem, p, schedule.tau, rho, Some(rng));
    let next = apply_update(p, &pairs, alpha);
    next.check_diverged(k)?;
    Ok((next, pairs))
}

fn check_pairs(p: &ExtendedPoint, pairs: &OperatorPairs) -> Result<()> {
    Error::check_dim(p.w.len(), pairs.len())?;
    for (x, y) in pairs.x.iter().zip(&pairs.y) {
        Error::check_dim(p.dim(), x.len())?;
        Error::check_dim(p.dim(), y.len())?;
    }
    Ok(())
}

/// `φ(p) = Σ_{i=1}^{n+1} ⟨z − x_i, y_i − w_i⟩`.
pub fn hyperplane_eval(p: &ExtendedPoint, pairs: &OperatorPairs) -> Result<f64> {
    check_pairs(p, pairs)?;
    let mut total = 0.0;
    for ((x, y), w) in pairs.x.iter().zip(&pairs.y).zip(&p.w) {
        let mut term = 0.0;
        Zip::from(&p.z)
            .and(x)
            .and(y)
            .and(w)
            .for_each(|&z, &x, &y, &w| term += (z - x) * (y - w));
        total += term;
    }
    Ok(total)
}

/// Gradient of `φ` relative to the subspace: `(Σ y_i, x_1 − x̄, ..., x_{n+1} − x̄)`
/// with `x̄` the mean of the `x_i`. The dual components sum to zero.
pub fn hyperplane_gradient(pairs: &OperatorPairs) -> ExtendedPoint {
    let d = pairs.x.first().map_or(0, |x| x.len());
    let mut y_sum = Array1::zeros(d);
    let mut x_mean = Array1::zeros(d);
    for (x, y) in pairs.x.iter().zip(&pairs.y) {
        y_sum += y;
        x_mean += x;
    }
    x_mean /= pairs.len() as f64;
    let w = pairs.x.iter().map(|x| x - &x_mean).collect();
    ExtendedPoint { z: y_sum, w }
}

/// `O = Σ_{i≤n} ‖y_i − w_i‖² + Σ_{i≤n} ‖z − x_i‖² + ‖B(z) − w_{n+1}‖²`.
pub fn residual_o(p: &ExtendedPoint, pairs: &OperatorPairs, exact_bz: &Vector) -> f64 {
    let n = pairs.n();
    let mut dual_gap = 0.0;
    let mut primal_gap = 0.0;
    for i in 0..n {
        dual_gap += dist_sq(pairs.y[i].view(), p.w[i].view());
        primal_gap += dist_sq(p.z.view(), pairs.x[i].view());
    }
    dual_gap + primal_gap + dist_sq(exact_bz.view(), p.w[n].view())
}

/// `R = Σ_{i≤n} ‖z − x_i‖² + ‖B(z) + Σ_{i≤n} y_i‖²`.
pub fn residual_r(z: &Vector, pairs: &OperatorPairs, exact_bz: &Vector) -> f64 {
    let n = pairs.n();
    let mut primal_gap = 0.0;
    let mut y_sum = Array1::zeros(z.len());
    for i in 0..n {
        primal_gap += dist_sq(z.view(), pairs.x[i].view());
        accumulate(y_sum.view_mut(), pairs.y[i].view());
    }
    primal_gap + norm_sq_of_sum(exact_bz.view(), y_sum.view())
}

/// Run length, seed and trace cadence shared by every solver runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub iterations: usize,
    pub seed: u64,
    pub trace_every: usize,
}

impl RunOptions {
    pub fn new(iterations: usize, seed: u64) -> Self {
        RunOptions {
            iterations,
            seed,
            trace_every: 10,
        }
    }

    pub fn trace_every(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if self.trace_every == 0 {
            return Err(Error::invalid("trace cadence must be at least 1"));
        }
        Ok(())
    }

    /// First, last and every `trace_every`-th iteration are traced.
    pub fn traces(&self, k: usize) -> bool {
        k == 1 || k == self.iterations || k.is_multiple_of(self.trace_every)
    }
}

#[derive(Debug, Clone)]
pub struct SpsRun {
    pub trace: Vec<TraceRecord>,
    /// `p^{K+1}`.
    pub point: ExtendedPoint,
}

pub(crate) fn attach_trace(err: Error, trace: Vec<TraceRecord>) -> Error {
    match err {
        Error::Diverged { last_finite, .. } => Error::Diverged { last_finite, trace },
        other => other,
    }
}

/// Runs SPS from `(start, 0, ..., 0)`. Residuals use exact `B(z)` and are
/// excluded from the recorded wall time.
pub fn run_sps(problem: &Problem, schedule: &StepSchedule, start: &Vector, opts: &RunOptions) -> Result<SpsRun> {
    opts.validate()?;
    Error::check_dim(problem.dim(), start.len())?;
    let mut rng = rng_for(opts.seed, ORACLE_STREAM);
    let mut p = ExtendedPoint::from_primal(start.clone(), problem.n());
    let mut trace = Vec::new();
    let mut elapsed = 0.0;
    for k in 1..=opts.iterations {
        let started = Instant::now();
        let step = sps_iterate(problem, schedule, &p, k, &mut rng);
        elapsed += started.elapsed().as_secs_f64();
        let (next, pairs) = step.map_err(|e| attach_trace(e, trace.clone()))?;
        if opts.traces(k) {
            let bz = problem.field().eval(p.z.view());
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: elapsed,
                residual_r: residual_r(&p.z, &pairs, &bz),
                residual_o: Some(residual_o(&p, &pairs, &bz)),
                seed: opts.seed,
            });
        }
        p = next;
    }
    Ok(SpsRun { trace, point: p })
}

#[cfg(test)]
mod tests;
