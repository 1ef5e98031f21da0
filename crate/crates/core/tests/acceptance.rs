//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::sync::Arc;
use std::time::Instant;

use ndarray::{s, Array1};
use rand::Rng;

use sps_core::baselines::{dseg_run, dseg_step, gda_iterates, run_frb, run_ps, run_tseng, Linesearch};
use sps_core::linalg::{dist_sq, norm, random_start, rng_for, standard_normal, ORACLE_STREAM};
use sps_core::operators::{project_linf_ball, project_scaled_soc, soft_threshold};
use sps_core::problems::{
    make_bilinear_game, make_noisy_bilinear_game, synthetic_dataset, DrslrParams, DrslrProblem, KnownSolution,
};
use sps_core::sps::{
    compute_pairs, hyperplane_eval, residual_o, run_sps, run_sps_compact, sps_iterate, ExtendedPoint, RunOptions,
    StepSchedule, TraceRecord,
};
use sps_core::verify::oracles;
use sps_core::{Problem, Vector};

type Outcome = (bool, String);

/// Traces of every SPS run with at least one set-valued operator, tagged
/// with `n`.
#[derive(Default)]
struct SpsTraces(Vec<(usize, &'static str, Vec<TraceRecord>)>);

impl SpsTraces {
    fn push(&mut self, n: usize, name: &'static str, trace: &[TraceRecord]) {
        if n >= 1 {
            self.0.push((n, name, trace.to_vec()));
        }
    }
}

fn drslr(m: usize, d: usize, seed: u64) -> DrslrProblem {
    let data = synthetic_dataset(m, d, 0.5, seed).expect("dataset");
    DrslrProblem::new(Arc::new(data), DrslrParams::default()).expect("problem")
}

fn residual_at(problem: &Problem, p: &ExtendedPoint) -> f64 {
    let pairs = compute_pairs(problem, p, 1.0, 0.5, None);
    residual_o(p, &pairs, &problem.field().eval(p.z.view()))
}

fn residual_characterisation() -> Outcome {
    let started = Instant::now();
    let inst = KnownSolution::generate(10, 0.05, 1).expect("instance");
    let at_solution = residual_at(&inst.problem, &inst.solution);
    let mut rng = rng_for(11, ORACLE_STREAM);
    let mut smallest = f64::INFINITY;
    for _ in 0..100 {
        let dir = ExtendedPoint {
            z: standard_normal(10, &mut rng),
            w: (0..3).map(|_| standard_normal(10, &mut rng)).collect(),
        };
        let length = rng.random_range(1e-2..1.0) / dir.norm_sq().sqrt();
        smallest = smallest.min(residual_at(&inst.problem, &inst.solution.moved(length, &dir)));
    }
    let elapsed = started.elapsed().as_secs_f64();
    (
        at_solution <= 1e-18 && smallest >= 1e-8 && elapsed < 1.0,
        format!("O at solution {at_solution:.1e} (<= 1e-18), min O over 100 perturbations {smallest:.1e} (>= 1e-8), {elapsed:.3} s (< 1 s)"),
    )
}

fn subspace_invariance(traces: &mut SpsTraces) -> Outcome {
    let started = Instant::now();
    let p = drslr(100, 20, 2);
    let problem = p
        .into_problem(Some(10), p.lipschitz_bound().expect("bound"))
        .expect("problem");
    let start = random_start(problem.dim(), 2);
    let run = run_sps(
        &problem,
        &StepSchedule::decay(1.0).expect("schedule"),
        &start,
        &RunOptions::new(10_000, 2).trace_every(100),
    )
    .expect("run");
    traces.push(problem.n(), "subspace", &run.trace);
    let gap = run.point.subspace_gap();
    let elapsed = started.elapsed().as_secs_f64();
    (
        gap <= 1e-8 && elapsed < 10.0,
        format!("|sum w| / (1 + max |w_i|) = {gap:.1e} (<= 1e-8), {elapsed:.2} s (< 10 s)"),
    )
}

fn zero_noise_separation(traces: &mut SpsTraces) -> Outcome {
    let inst = KnownSolution::generate(10, 0.05, 3).expect("instance");
    let problem = inst.problem.with_exact_oracle();
    let lipschitz = problem.lipschitz();
    let schedule = StepSchedule::decay(0.9 / lipschitz).expect("schedule");
    let mut rng = rng_for(3, ORACLE_STREAM);
    let mut p = ExtendedPoint::from_primal(random_start(10, 3), 2);
    let mut min_at_iterate = f64::INFINITY;
    let mut max_at_solution = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    for k in 1..=10_000 {
        let (next, pairs) = sps_iterate(&problem, &schedule, &p, k, &mut rng).expect("iterate");
        min_at_iterate = min_at_iterate.min(hyperplane_eval(&p, &pairs).expect("phi"));
        max_at_solution = max_at_solution.max(hyperplane_eval(&inst.solution, &pairs).expect("phi"));
        if k % 100 == 0 {
            let bz = problem.field().eval(p.z.view());
            trace.push(TraceRecord {
                iteration: k,
                wall_time_s: 0.0,
                residual_r: sps_core::sps::residual_r(&p.z, &pairs, &bz),
                residual_o: Some(residual_o(&p, &pairs, &bz)),
                seed: 3,
            });
        }
        p = next;
    }
    traces.push(problem.n(), "separation", &trace);
    (
        min_at_iterate >= -1e-12 && max_at_solution <= 1e-12,
        format!("min phi_k(p^k) = {min_at_iterate:.2e} (>= -1e-12), max phi_k(p*) = {max_at_solution:.2e} (<= 1e-12), rho_1 = {:.3} (<= 0.9/L = {:.3})", schedule.steps(1).expect("steps").1, 0.9 / lipschitz),
    )
}

fn oracle_unbiasedness() -> Outcome {
    let p = drslr(5, 4, 4);
    let z = standard_normal(p.dim(), &mut rng_for(4, ORACLE_STREAM));
    let full = p.full_field(z.view()).expect("field");
    let m = p.m();
    let mut worst: f64 = 0.0;
    for batch in 1..=3usize {
        let draws = m.pow(batch as u32);
        let mut total = Array1::zeros(p.dim());
        for code in 0..draws {
            let indices: Vec<usize> = (0..batch).map(|j| code / m.pow(j as u32) % m).collect();
            total += &p.batch_field(&indices, z.view()).expect("batch");
        }
        total /= draws as f64;
        worst = worst.max(dist_sq(total.view(), full.view()).sqrt() / norm(full.view()));
    }
    (
        worst <= 1e-14,
        format!("relative deviation over all draws of batch size 1..3: {worst:.1e} (<= 1e-14)"),
    )
}

fn prox_oracles() -> Outcome {
    let mut rng = rng_for(5, ORACLE_STREAM);
    let (mut soft, mut linf, mut soc): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..500 {
        let t = rng.random_range(-5.0..5.0);
        let kappa = rng.random_range(0.0..3.0);
        let got = soft_threshold(Array1::from(vec![t]).view(), kappa).expect("prox")[0];
        soft = soft.max((got - oracles::prox_abs_golden(t, kappa)).abs());

        let g = rng.random_range(-4.0..4.0);
        let radius = rng.random_range(0.05..3.0);
        let got = project_linf_ball(Array1::from(vec![g]).view(), radius).expect("proj")[0];
        linf = linf.max((got - oracles::project_interval_golden(g, -radius, radius)).abs());

        let lambda = rng.random_range(-3.0..3.0);
        let beta: Vector = standard_normal(4, &mut rng) * rng.random_range(0.1..3.0);
        let scale = rng.random_range(0.5..4.0);
        let (l, b) = project_scaled_soc(lambda, beta.view(), scale).expect("proj");
        let (lo, bo) = oracles::project_scaled_soc_search(lambda, beta.view(), scale);
        soc = soc.max((l - lo).abs()).max(dist_sq(b.view(), bo.view()).sqrt());
    }
    (
        soft <= 1e-6 && linf <= 1e-6 && soc <= 1e-6,
        format!("max deviation over 500 inputs: soft threshold {soft:.1e}, l-inf ball {linf:.1e}, scaled cone {soc:.1e} (each <= 1e-6)"),
    )
}

fn dseg_reduction() -> Outcome {
    let problem = make_noisy_bilinear_game(2, 2, 1.0, 0.1).expect("game");
    let schedule = StepSchedule::decay(1.0).expect("schedule");
    let start = random_start(4, 6);
    let mut rng_sps = rng_for(6, ORACLE_STREAM);
    let mut rng_dseg = rng_for(6, ORACLE_STREAM);
    let mut p = ExtendedPoint::from_primal(start.clone(), 0);
    let mut z = start.clone();
    let mut first_mismatch = None;
    for k in 1..=100 {
        p = sps_iterate(&problem, &schedule, &p, k, &mut rng_sps).expect("sps").0;
        let (alpha, rho) = schedule.steps(k).expect("steps");
        z = dseg_step(&problem, &z, alpha, rho, &mut rng_dseg).expect("dseg");
        if first_mismatch.is_none() && p.z.iter().zip(&z).any(|(a, b)| a.to_bits() != b.to_bits()) {
            first_mismatch = Some(k);
        }
    }
    let opts = RunOptions::new(100, 6);
    let a = run_sps(&problem, &schedule, &start, &opts).expect("sps");
    let b = dseg_run(&problem, &schedule, &start, &opts).expect("dseg");
    let runs_agree = a.point.z.iter().zip(&b.z).all(|(x, y)| x.to_bits() == y.to_bits());
    (
        first_mismatch.is_none() && runs_agree,
        match first_mismatch {
            None => format!("100 bit-identical z iterates; runners agree: {runs_agree}"),
            Some(k) => format!("iterates differ from step {k}"),
        },
    )
}

fn memory_saving_equivalence(traces: &mut SpsTraces) -> Outcome {
    let p = drslr(100, 20, 7);
    let problem = p
        .into_problem(Some(10), p.lipschitz_bound().expect("bound"))
        .expect("problem");
    let start = random_start(problem.dim(), 7);
    let schedule = StepSchedule::decay(1.0).expect("schedule");
    let opts = RunOptions::new(1000, 7).trace_every(1);
    let a = run_sps(&problem, &schedule, &start, &opts).expect("standard");
    let b = run_sps_compact(&problem, &schedule, &start, &opts).expect("compact");
    traces.push(problem.n(), "standard", &a.trace);
    traces.push(problem.n(), "compact", &b.trace);
    let traces_equal = sps_core::experiment::traces_match(&a.trace, &b.trace);
    let points_equal = a.point == b.point;
    (
        traces_equal && points_equal && problem.n() == 2,
        format!(
            "n = {}, {} trace records identical: {traces_equal}, final point identical: {points_equal}",
            problem.n(),
            a.trace.len()
        ),
    )
}

fn convergence_of_all_methods(traces: &mut SpsTraces) -> Outcome {
    let started = Instant::now();
    let p = drslr(50, 10, 8);
    let lipschitz = p.lipschitz_bound().expect("bound");
    let problem = p.into_problem(None, lipschitz).expect("problem");
    let start = random_start(problem.dim(), 8);
    let iterations = 20_000;
    let opts = RunOptions::new(iterations, 8).trace_every(100);
    let ls = Linesearch::default();
    let mut finals: Vec<(&str, f64, Vector)> = Vec::new();

    let decay = run_sps(&problem, &StepSchedule::decay(1.0).expect("schedule"), &start, &opts).expect("sps-decay");
    traces.push(problem.n(), "sps-decay", &decay.trace);
    finals.push((
        "sps-decay",
        decay.trace.last().expect("trace").residual_r,
        decay.point.z,
    ));
    let fixed_schedule = StepSchedule::fixed(1.0, iterations, lipschitz).expect("schedule");
    let fixed = run_sps(&problem, &fixed_schedule, &start, &opts).expect("sps-fixed");
    traces.push(problem.n(), "sps-fixed", &fixed.trace);
    finals.push((
        "sps-fixed",
        fixed.trace.last().expect("trace").residual_r,
        fixed.point.z,
    ));
    let ps = run_ps(&problem, &start, 1.0, &opts).expect("ps");
    finals.push(("ps", ps.trace.last().expect("trace").residual_r, ps.z));
    let tseng = run_tseng(&problem, &start, &ls, &opts).expect("tseng");
    finals.push(("tseng", tseng.trace.last().expect("trace").residual_r, tseng.z));
    let frb = run_frb(&problem, &start, &ls, &opts).expect("frb");
    finals.push(("frb", frb.trace.last().expect("trace").residual_r, frb.z));

    let worst_r = finals.iter().map(|f| f.1).fold(0.0, f64::max);
    let gamma_from = 1 + p.d();
    let (mut worst_z, mut worst_primal): (f64, f64) = (0.0, 0.0);
    for (i, a) in finals.iter().enumerate() {
        for b in &finals[i + 1..] {
            worst_z = worst_z.max(dist_sq(a.2.view(), b.2.view()).sqrt());
            worst_primal = worst_primal.max(dist_sq(a.2.slice(s![..gamma_from]), b.2.slice(s![..gamma_from])).sqrt());
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let residuals: Vec<String> = finals.iter().map(|f| format!("{} {:.1e}", f.0, f.1)).collect();
    (
        worst_r <= 1e-5 && worst_z <= 1e-4 && elapsed < 60.0,
        format!(
            "final R [{}] (<= 1e-5); max pairwise |z - z'| = {worst_z:.1e} (<= 1e-4), of which (lambda, beta) block {worst_primal:.1e}; {elapsed:.2} s (< 60 s)",
            residuals.join(", ")
        ),
    )
}

fn rate_trend() -> Outcome {
    let budgets = [100usize, 1_000, 10_000];
    let seeds = 20u64;
    let problem = make_noisy_bilinear_game(1, 1, 1.0, 0.1).expect("game");
    let mut means = Vec::new();
    for &k in &budgets {
        let schedule = StepSchedule::fixed(1.0, k, problem.lipschitz()).expect("schedule");
        let mut total = 0.0;
        for seed in 0..seeds {
            let run = run_sps(
                &problem,
                &schedule,
                &random_start(2, seed),
                &RunOptions::new(k, seed).trace_every(1),
            )
            .expect("run");
            let sum: f64 = run.trace.iter().map(|r| r.residual_o.expect("O")).sum();
            total += sum / k as f64;
        }
        means.push(total / seeds as f64);
    }
    (
        means.windows(2).all(|w| w[1] < w[0]),
        format!(
            "mean running-average O over {seeds} seeds: K=1e2 {:.4}, K=1e3 {:.4}, K=1e4 {:.4} (strictly decreasing)",
            means[0], means[1], means[2]
        ),
    )
}

fn r_bounded_by_o(traces: &SpsTraces) -> Outcome {
    let mut checked = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut violation = None;
    for (n, name, trace) in &traces.0 {
        for rec in trace {
            let o = rec.residual_o.expect("O recorded");
            let bound = 2.0 * *n as f64 * o;
            checked += 1;
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(rec.residual_r / bound);
            }
            if rec.residual_r > bound * (1.0 + 1e-10) && violation.is_none() {
                violation = Some(format!("{name} at iteration {}", rec.iteration));
            }
        }
    }
    (
        violation.is_none() && checked > 0,
        match violation {
            None => format!(
                "{checked} traced iterates over {} runs, max R / (2nO) = {worst_ratio:.3}",
                traces.0.len()
            ),
            Some(at) => format!("violated in {at}"),
        },
    )
}

fn gda_contrast() -> Outcome {
    let problem = make_bilinear_game(1, 1, 1.0).expect("game");
    let start = random_start(2, 9);
    let gda = gda_iterates(&problem, &start, 0.1, 1000).expect("gda");
    let gda_ratio = norm(gda[999].view()) / norm(gda[0].view());
    let sps = run_sps(
        &problem,
        &StepSchedule::decay(1.0).expect("schedule"),
        &start,
        &RunOptions::new(999, 9),
    )
    .expect("sps");
    let sps_ratio = norm(sps.point.z.view()) / norm(start.view());
    (
        gda_ratio > 1.0 && sps_ratio < 1e-2,
        format!("|z^1000| / |z^1|: GDA {gda_ratio:.3e} (> 1), SPS-decay {sps_ratio:.3e} (< 1e-2)"),
    )
}

fn main() {
    let mut traces = SpsTraces::default();
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let outcome = f();
        results.push((name, outcome, started.elapsed().as_secs_f64()));
        let (name, (passed, detail), secs) = results.last().expect("just pushed");
        println!(
            "{} {name}: {detail} [{secs:.2} s]",
            if *passed { "PASS" } else { "FAIL" }
        );
    };
    run(
        "residual vanishes exactly on the solution set",
        &mut residual_characterisation,
    );
    run("iterates stay on the dual subspace", &mut || {
        subspace_invariance(&mut traces)
    });
    run("zero-noise hyperplanes separate iterate from solution", &mut || {
        zero_noise_separation(&mut traces)
    });
    run("minibatch oracle is unbiased", &mut oracle_unbiasedness);
    run(
        "prox and projection maps match brute-force minimisers",
        &mut prox_oracles,
    );
    run("dseg coincides with sps when n = 0", &mut dseg_reduction);
    run("memory-saving sps is bit-identical to standard sps", &mut || {
        memory_saving_equivalence(&mut traces)
    });
    run("all methods converge to the same point on drslr", &mut || {
        convergence_of_all_methods(&mut traces)
    });
    run("fixed-schedule residual average decreases with budget", &mut rate_trend);
    run("R <= 2n O on every traced sps iterate", &mut || r_bounded_by_o(&traces));
    run("gda diverges where sps converges", &mut gda_contrast);

    let failed: Vec<&str> = results.iter().filter(|r| !r.1 .0).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
