//! Self-checks run by `sps bench`: closed-form prox maps against brute-force
//! minimisers, the solution characterisation of the approximation residual,
//! oracle unbiasedness by enumeration and exact-equivalence checks between
//! solver variants.

use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::baselines::dseg_step;
use crate::error::Result;
use crate::linalg::{dist_sq, norm, rng_for, standard_normal, Vector, ORACLE_STREAM};
use crate::operators::{project_linf_ball, project_scaled_soc, soft_threshold};
use crate::problems::{make_noisy_bilinear_game, synthetic_dataset, DrslrParams, DrslrProblem, KnownSolution};
use crate::sps::{
    compute_pairs, residual_o, run_sps, run_sps_compact, sps_iterate, ExtendedPoint, RunOptions, StepSchedule,
};

pub mod oracles;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

fn timed(name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> CheckReport {
    let started = Instant::now();
    let (passed, detail) = match check() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckReport {
        name,
        passed,
        detail,
        elapsed_s: started.elapsed().as_secs_f64(),
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-6;
pub const ORACLE_SAMPLES: usize = 500;

/// Soft thresholding (`impl_fn(t, κ)`) against golden-section minimisation.
pub fn check_soft_threshold(impl_fn: impl Fn(ArrayView1<f64>, f64) -> Result<Vector>) -> CheckReport {
    timed("prox: soft threshold", || {
        let mut rng = rng_for(101, ORACLE_STREAM);
        let mut worst: f64 = 0.0;
        for _ in 0..ORACLE_SAMPLES {
            let t: Vector = standard_normal(4, &mut rng) * 3.0;
            let kappa = rng.random_range(0.0..3.0);
            let got = impl_fn(t.view(), kappa)?;
            for (g, &ti) in got.iter().zip(&t) {
                worst = worst.max((g - oracles::prox_abs_golden(ti, kappa)).abs());
            }
        }
        Ok((worst <= ORACLE_TOLERANCE, format!("max deviation {worst:.2e}")))
    })
}

pub fn check_linf_projection() -> CheckReport {
    timed("prox: l-infinity ball", || {
        let mut rng = rng_for(102, ORACLE_STREAM);
        let mut worst: f64 = 0.0;
        for _ in 0..ORACLE_SAMPLES {
            let g: Vector = standard_normal(4, &mut rng) * 2.0;
            let radius = rng.random_range(0.1..2.0);
            let got = project_linf_ball(g.view(), radius)?;
            for (p, &gi) in got.iter().zip(&g) {
                worst = worst.max((p - oracles::project_interval_golden(gi, -radius, radius)).abs());
            }
        }
        Ok((worst <= ORACLE_TOLERANCE, format!("max deviation {worst:.2e}")))
    })
}

pub fn check_soc_projection() -> CheckReport {
    timed("prox: scaled second-order cone", || {
        let mut rng = rng_for(103, ORACLE_STREAM);
        let mut worst: f64 = 0.0;
        for _ in 0..ORACLE_SAMPLES {
            let lambda = rng.random_range(-2.0..2.0);
            let beta: Vector = standard_normal(3, &mut rng);
            let s = rng.random_range(0.5..3.0);
            let (l, b) = project_scaled_soc(lambda, beta.view(), s)?;
            let (lo, bo) = oracles::project_scaled_soc_search(lambda, beta.view(), s);
            worst = worst.max((l - lo).abs()).max(dist_sq(b.view(), bo.view()).sqrt());
        }
        Ok((worst <= ORACLE_TOLERANCE, format!("max deviation {worst:.2e}")))
    })
}

/// `O = 0` at a known extended solution and `O > 0` around it.
pub fn check_residual_characterisation() -> CheckReport {
    timed("residual vanishes exactly on the solution set", || {
        let inst = KnownSolution::generate(12, 0.05, 7)?;
        let problem = &inst.problem;
        let o_at = |p: &ExtendedPoint| {
            let pairs = compute_pairs(problem, p, 1.0, 0.5, None);
            residual_o(p, &pairs, &problem.field().eval(p.z.view()))
        };
        let at_solution = o_at(&inst.solution);
        let mut rng = rng_for(104, ORACLE_STREAM);
        let mut smallest = f64::INFINITY;
        for _ in 0..100 {
            let dir = ExtendedPoint {
                z: standard_normal(12, &mut rng),
                w: (0..3).map(|_| standard_normal(12, &mut rng)).collect(),
            };
            let scale = rng.random_range(0.01..0.5) / dir.norm_sq().sqrt();
            smallest = smallest.min(o_at(&inst.solution.moved(scale, &dir)));
        }
        Ok((
            at_solution <= 1e-18 && smallest >= 1e-8,
            format!("O(p*) = {at_solution:.2e}, min perturbed O = {smallest:.2e}"),
        ))
    })
}

/// Averages the minibatch oracle over every batch of size 1 and 2.
pub fn check_oracle_unbiasedness() -> CheckReport {
    timed("minibatch oracle is unbiased", || {
        let data = synthetic_dataset(5, 4, 0.7, 105)?;
        let p = DrslrProblem::new(Arc::new(data), DrslrParams::default())?;
        let mut rng = rng_for(105, ORACLE_STREAM);
        let z = standard_normal(p.dim(), &mut rng);
        let full = p.full_field(z.view())?;
        let m = p.m();
        let mut single = Array1::zeros(p.dim());
        let mut pairs = Array1::zeros(p.dim());
        for i in 0..m {
            single += &p.batch_field(&[i], z.view())?;
            for j in 0..m {
                pairs += &p.batch_field(&[i, j], z.view())?;
            }
        }
        single /= m as f64;
        pairs /= (m * m) as f64;
        let scale = norm(full.view());
        let err = dist_sq(single.view(), full.view())
            .sqrt()
            .max(dist_sq(pairs.view(), full.view()).sqrt())
            / scale;
        Ok((err <= 1e-14, format!("relative deviation {err:.2e}")))
    })
}

/// SPS with no set-valued operators and DSEG produce identical iterates.
pub fn check_dseg_equivalence() -> CheckReport {
    timed("dseg coincides with sps when n = 0", || {
        let problem = make_noisy_bilinear_game(3, 3, 1.0, 0.1)?;
        let schedule = StepSchedule::decay(1.0)?;
        let start = crate::linalg::random_start(6, 106);
        let mut rng_a = rng_for(106, ORACLE_STREAM);
        let mut rng_b = rng_for(106, ORACLE_STREAM);
        let mut p = ExtendedPoint::from_primal(start.clone(), 0);
        let mut z = start;
        for k in 1..=100 {
            p = sps_iterate(&problem, &schedule, &p, k, &mut rng_a)?.0;
            let (alpha, rho) = schedule.steps(k)?;
            z = dseg_step(&problem, &z, alpha, rho, &mut rng_b)?;
            if p.z.iter().zip(&z).any(|(a, b)| a.to_bits() != b.to_bits()) {
                return Ok((false, format!("iterates differ at step {k}")));
            }
        }
        Ok((true, "100 identical iterates".into()))
    })
}

/// The memory-saving variant reproduces the standard trace and iterate.
pub fn check_compact_equivalence() -> CheckReport {
    timed("memory-saving sps matches standard sps", || {
        let data = synthetic_dataset(100, 20, 0.3, 107)?;
        let drslr = DrslrProblem::new(Arc::new(data), DrslrParams::default())?;
        let problem = drslr.into_problem(Some(10), drslr.lipschitz_bound()?)?;
        let schedule = StepSchedule::decay(1.0)?;
        let start = crate::linalg::random_start(problem.dim(), 107);
        let opts = RunOptions::new(300, 107).trace_every(7);
        let a = run_sps(&problem, &schedule, &start, &opts)?;
        let b = run_sps_compact(&problem, &schedule, &start, &opts)?;
        let same = crate::experiment::traces_match(&a.trace, &b.trace) && a.point == b.point;
        Ok((same, format!("{} traced iterations compared", a.trace.len())))
    })
}

/// Every bench check with the library's own soft threshold.
pub fn run_bench() -> Vec<CheckReport> {
    vec![
        check_soft_threshold(soft_threshold),
        check_linf_projection(),
        check_soc_projection(),
        check_residual_characterisation(),
        check_oracle_unbiasedness(),
        check_dseg_equivalence(),
        check_compact_equivalence(),
    ]
}
