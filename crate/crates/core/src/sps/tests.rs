use std::sync::Arc;

use ndarray::array;
use proptest::prelude::*;

use super::*;
use crate::linalg::{random_start, standard_normal};
use crate::operators::{SetValuedOperator, ZeroOperator};
use crate::problems::{
    make_bilinear_game, make_noisy_bilinear_game, synthetic_dataset, BilinearGame, DrslrParams, DrslrProblem,
    KnownSolution,
};

fn zero_plus_bilinear() -> Problem {
    let ops: Vec<Arc<dyn SetValuedOperator>> = vec![Arc::new(ZeroOperator { dim: 2 })];
    Problem::new(ops, Arc::new(BilinearGame::new(1, 1, 1.0, 0.0).unwrap())).unwrap()
}

fn small_drslr(m: usize, d: usize, batch: usize) -> Problem {
    let data = synthetic_dataset(m, d, 0.4, 21).unwrap();
    let drslr = DrslrProblem::new(Arc::new(data), DrslrParams::default()).unwrap();
    drslr.into_problem(Some(batch), 4.0).unwrap()
}

#[test]
fn single_iteration_by_hand() {
    let problem = zero_plus_bilinear();
    let schedule = StepSchedule::decay(1.0).unwrap();
    let p = ExtendedPoint::from_primal(array![1.0, 0.0], 1);
    let (next, pairs) = sps_iterate(&problem, &schedule, &p, 1, &mut rng_for(0, 0)).unwrap();
    assert_eq!(pairs.x, vec![array![1.0, 0.0], array![1.0, 1.0]]);
    assert_eq!(pairs.y, vec![array![0.0, 0.0], array![1.0, -1.0]]);
    assert_eq!(next.z, array![0.0, 1.0]);
    assert_eq!(next.w, vec![array![0.0, 0.5], array![0.0, -0.5]]);
}

#[test]
fn iteration_counter_starts_at_one() {
    let problem = zero_plus_bilinear();
    let schedule = StepSchedule::decay(1.0).unwrap();
    let p = ExtendedPoint::from_primal(array![1.0, 0.0], 1);
    assert!(matches!(
        sps_iterate(&problem, &schedule, &p, 0, &mut rng_for(0, 0)),
        Err(Error::InvalidIteration(0))
    ));
    let wrong = ExtendedPoint::from_primal(array![1.0, 0.0], 2);
    assert!(sps_iterate(&problem, &schedule, &wrong, 1, &mut rng_for(0, 0)).is_err());
}

#[test]
fn residuals_by_hand() {
    let p = ExtendedPoint::new(array![1.0, 2.0], vec![array![0.5, 0.0], array![-0.5, 0.0]]).unwrap();
    let pairs = OperatorPairs {
        x: vec![array![0.0, 2.0], array![3.0, 3.0]],
        y: vec![array![1.5, 1.0], array![9.0, 9.0]],
    };
    let bz = array![-1.0, 1.0];
    // dual gap ‖(1, 1)‖², primal gap ‖(1, 0)‖², last ‖(-0.5, 1)‖²
    assert_eq!(residual_o(&p, &pairs, &bz), 2.0 + 1.0 + 1.25);
    // primal gap 1, ‖B(z) + y_1‖² = ‖(0.5, 2)‖²
    assert_eq!(residual_r(&p.z, &pairs, &bz), 1.0 + 4.25);
}

#[test]
fn hyperplane_by_hand() {
    let p = ExtendedPoint::new(array![1.0], vec![array![2.0], array![-2.0]]).unwrap();
    let pairs = OperatorPairs {
        x: vec![array![0.0], array![4.0]],
        y: vec![array![3.0], array![1.0]],
    };
    // (1 − 0)(3 − 2) + (1 − 4)(1 + 2)
    assert_eq!(hyperplane_eval(&p, &pairs).unwrap(), -8.0);
    let g = hyperplane_gradient(&pairs);
    assert_eq!(g.z, array![4.0]);
    assert_eq!(g.w, vec![array![-2.0], array![2.0]]);
}

#[test]
fn residual_vanishes_at_known_solution() {
    let inst = KnownSolution::generate(9, 0.1, 2).unwrap();
    let p = &inst.solution;
    let pairs = compute_pairs(&inst.problem, p, 1.0, 0.5, None);
    let bz = inst.problem.field().eval(p.z.view());
    assert!(residual_o(p, &pairs, &bz) <= 1e-28);
    assert!(residual_r(&p.z, &pairs, &bz) <= 1e-28);
    assert!(hyperplane_eval(p, &pairs).unwrap().abs() <= 1e-14);
}

#[test]
fn trace_cadence_and_determinism() {
    let problem = make_noisy_bilinear_game(2, 2, 1.0, 0.1).unwrap();
    let schedule = StepSchedule::decay(1.0).unwrap();
    let start = random_start(4, 1);
    let opts = RunOptions::new(35, 3);
    let a = run_sps(&problem, &schedule, &start, &opts).unwrap();
    let iters: Vec<usize> = a.trace.iter().map(|r| r.iteration).collect();
    assert_eq!(iters, vec![1, 10, 20, 30, 35]);
    let b = run_sps(&problem, &schedule, &start, &opts).unwrap();
    assert_eq!(a.point, b.point);
    let c = run_sps(&problem, &schedule, &start, &RunOptions::new(35, 4)).unwrap();
    assert_ne!(a.point, c.point);
}

#[test]
fn run_rejects_bad_options() {
    let problem = make_bilinear_game(1, 1, 1.0).unwrap();
    let schedule = StepSchedule::decay(1.0).unwrap();
    let start = array![1.0, 0.0];
    assert!(run_sps(&problem, &schedule, &start, &RunOptions::new(0, 0)).is_err());
    assert!(run_sps(&problem, &schedule, &start, &RunOptions::new(5, 0).trace_every(0)).is_err());
    assert!(run_sps(&problem, &schedule, &array![1.0], &RunOptions::new(5, 0)).is_err());
}

#[test]
fn divergence_keeps_partial_trace() {
    let problem = make_bilinear_game(1, 1, 1.0).unwrap();
    let schedule = StepSchedule::fixed(50.0, 200, 1.0).unwrap();
    let opts = RunOptions::new(200, 0).trace_every(1);
    match run_sps(&problem, &schedule, &array![1.0, 0.0], &opts) {
        Err(Error::Diverged { last_finite, trace }) => {
            assert!(last_finite > 1);
            assert_eq!(trace.len(), last_finite - 1);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
    match run_sps_compact(&problem, &schedule, &array![1.0, 0.0], &opts) {
        Err(Error::Diverged { trace, .. }) => assert!(!trace.is_empty()),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn bilinear_converges_with_decay() {
    let problem = make_bilinear_game(1, 1, 1.0).unwrap();
    let schedule = StepSchedule::decay(1.0).unwrap();
    let start = array![1.0, 0.0];
    let run = run_sps(&problem, &schedule, &start, &RunOptions::new(5000, 0)).unwrap();
    assert!(run.point.z.dot(&run.point.z) < 1e-10);
}

#[test]
fn compact_uses_n_plus_seven_vectors() {
    let state = CompactSps::new(&Vector::zeros(100), 2);
    assert_eq!(state.working_floats(), 900);
}

#[test]
fn compact_matches_standard_bit_for_bit() {
    let problem = small_drslr(30, 6, 5);
    let schedule = StepSchedule::decay(0.5).unwrap();
    let start = random_start(problem.dim(), 8);
    let opts = RunOptions::new(200, 8).trace_every(3);
    let a = run_sps(&problem, &schedule, &start, &opts).unwrap();
    let b = run_sps_compact(&problem, &schedule, &start, &opts).unwrap();
    assert_eq!(a.point, b.point);
    assert_eq!(a.trace.len(), b.trace.len());
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!(
            (x.iteration, x.residual_r.to_bits()),
            (y.iteration, y.residual_r.to_bits())
        );
        assert_eq!(x.residual_o.map(f64::to_bits), y.residual_o.map(f64::to_bits));
    }
}

#[test]
fn iterates_stay_on_the_subspace() {
    let problem = small_drslr(40, 8, 10);
    let schedule = StepSchedule::decay(1.0).unwrap();
    let start = random_start(problem.dim(), 2);
    let run = run_sps(&problem, &schedule, &start, &RunOptions::new(2000, 2)).unwrap();
    assert!(run.point.subspace_gap() <= 1e-12, "{}", run.point.subspace_gap());
}

fn random_point(problem: &Problem, rng: &mut SolverRng) -> ExtendedPoint {
    let d = problem.dim();
    let z = standard_normal(d, rng);
    let mut w: Vec<Vector> = (0..problem.n()).map(|_| standard_normal(d, rng)).collect();
    let sum = w.iter().fold(Vector::zeros(d), |acc, wi| acc + wi);
    w.push(-sum);
    ExtendedPoint::new(z, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyperplane_is_affine_with_stated_gradient(seed in 0u64..10_000, h in -3.0..3.0f64) {
        let inst = KnownSolution::generate(5, 0.1, seed % 7).unwrap();
        let mut rng = rng_for(seed, 0);
        let p = random_point(&inst.problem, &mut rng);
        let dir = random_point(&inst.problem, &mut rng);
        let pairs = compute_pairs(&inst.problem, &p, 1.0, 0.3, None);
        let g = hyperplane_gradient(&pairs);
        let lhs = hyperplane_eval(&p.moved(h, &dir), &pairs).unwrap() - hyperplane_eval(&p, &pairs).unwrap();
        let rhs = h * g.dot(&dir);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        let gsum = g.dual_sum();
        prop_assert!(gsum.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn r_is_bounded_by_two_n_o(seed in 0u64..10_000, tau in 0.1..3.0f64, rho in 0.01..1.0f64) {
        let inst = KnownSolution::generate(6, 0.2, seed % 5).unwrap();
        let mut rng = rng_for(seed, 0);
        let p = random_point(&inst.problem, &mut rng);
        let pairs = compute_pairs(&inst.problem, &p, tau, rho, None);
        let bz = inst.problem.field().eval(p.z.view());
        let r = residual_r(&p.z, &pairs, &bz);
        let o = residual_o(&p, &pairs, &bz);
        prop_assert!(r >= 0.0 && o >= 0.0);
        prop_assert!(r <= 2.0 * 2.0 * o * (1.0 + 1e-10));
    }

    #[test]
    fn update_preserves_subspace(seed in 0u64..10_000, alpha in 0.0..2.0f64) {
        let inst = KnownSolution::generate(5, 0.1, 1).unwrap();
        let mut rng = rng_for(seed, 0);
        let p = random_point(&inst.problem, &mut rng);
        let pairs = compute_pairs(&inst.problem, &p, 1.0, 0.5, Some(&mut rng));
        let next = apply_update(&p, &pairs, alpha);
        prop_assert!(next.subspace_gap() <= 1e-12);
    }
}
