//! Run configurations and the multi-solver, multi-seed experiment driver.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{dseg_run, run_frb, run_ps, run_tseng, BaselineRun, Linesearch};
use crate::data::{read_libsvm_file, TraceGroup};
use crate::error::{Error, Result};
use crate::linalg::{random_start, Vector};
use crate::operators::Problem;
use crate::problems::{make_noisy_bilinear_game, synthetic_dataset, DrslrParams, DrslrProblem, DEFAULT_BATCH};
use crate::sps::{run_sps, RunOptions, SpsRun, StepSchedule, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    SpsDecay,
    SpsFixed,
    Ps,
    Tseng,
    Frb,
    Dseg,
}

impl SolverId {
    pub const ALL: [SolverId; 6] = [
        SolverId::SpsDecay,
        SolverId::SpsFixed,
        SolverId::Ps,
        SolverId::Tseng,
        SolverId::Frb,
        SolverId::Dseg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::SpsDecay => "sps-decay",
            SolverId::SpsFixed => "sps-fixed",
            SolverId::Ps => "ps",
            SolverId::Tseng => "tseng",
            SolverId::Frb => "frb",
            SolverId::Dseg => "dseg",
        }
    }

    /// Solvers that consume oracle draws and are repeated per seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, SolverId::SpsDecay | SolverId::SpsFixed | SolverId::Dseg)
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown solver '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Compare,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    File {
        path: PathBuf,
    },
    Synthetic {
        m: usize,
        d: usize,
        density: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    Drslr {
        data: DataSource,
        delta: f64,
        kappa: f64,
        c: f64,
    },
    Bilinear {
        d_x: usize,
        d_y: usize,
        scale: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// `C_d` of the decaying rule.
    pub decay_scale: f64,
    /// `C_f` of the fixed rule.
    pub fixed_scale: f64,
    pub tau: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            decay_scale: 1.0,
            fixed_scale: 1.0,
            tau: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum LipschitzSource {
    /// Exact for bilinear games, power-iteration estimate for DRSLR.
    Default,
    Given {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trace: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesearchConfig {
    pub initial: f64,
    pub theta: f64,
    pub shrink: f64,
}

impl From<LinesearchConfig> for Linesearch {
    fn from(c: LinesearchConfig) -> Self {
        Linesearch {
            initial: c.initial,
            theta: c.theta,
            shrink: c.shrink,
        }
    }
}

impl Default for LinesearchConfig {
    fn default() -> Self {
        let d = Linesearch::default();
        LinesearchConfig {
            initial: d.initial,
            theta: d.theta,
            shrink: d.shrink,
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub solvers: Vec<SolverId>,
    pub iterations: usize,
    pub trace_every: usize,
    pub seeds: Vec<u64>,
    pub batch: usize,
    /// Replace the minibatch oracle by exact evaluation.
    pub exact_oracle: bool,
    pub problem: ProblemSpec,
    pub schedule: ScheduleConfig,
    pub linesearch: LinesearchConfig,
    pub lipschitz: LipschitzSource,
    pub output: OutputConfig,
}

pub const DEFAULT_SEEDS: usize = 10;

impl RunConfig {
    /// Compare run with every default filled in.
    pub fn new(problem: ProblemSpec, solvers: Vec<SolverId>) -> Self {
        RunConfig {
            command: Command::Compare,
            solvers,
            iterations: 1000,
            trace_every: 10,
            seeds: (0..DEFAULT_SEEDS as u64).collect(),
            batch: DEFAULT_BATCH,
            exact_oracle: false,
            problem,
            schedule: ScheduleConfig::default(),
            linesearch: LinesearchConfig::default(),
            lipschitz: LipschitzSource::Default,
            output: OutputConfig {
                trace: PathBuf::from("trace.csv"),
                manifest: PathBuf::from("manifest.toml"),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if self.command == Command::Solve && self.solvers.len() != 1 {
            return bad("solve runs exactly one solver".into());
        }
        for (i, s) in self.solvers.iter().enumerate() {
            if self.solvers[..i].contains(s) {
                return bad(format!("solver {s} listed twice"));
            }
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.trace_every == 0 {
            return bad("trace_every must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be positive, got {v}")))
            }
        };
        positive("decay_scale", self.schedule.decay_scale)?;
        positive("fixed_scale", self.schedule.fixed_scale)?;
        positive("tau", self.schedule.tau)?;
        Linesearch::from(self.linesearch)
            .validate()
            .map_err(|e| Error::Validation(e.to_string()))?;
        if let LipschitzSource::Given { value } = self.lipschitz {
            positive("lipschitz", value)?;
        }
        match &self.problem {
            ProblemSpec::Drslr { data, delta, kappa, c } => {
                for (name, v) in [("delta", *delta), ("kappa", *kappa), ("c", *c)] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return bad(format!("{name} must be nonnegative, got {v}"));
                    }
                }
                if let DataSource::Synthetic { m, d, density, .. } = data {
                    if *m == 0 || *d == 0 || !(*density > 0.0 && *density <= 1.0) {
                        return bad("synthetic data needs m, d >= 1 and density in (0, 1]".into());
                    }
                }
                if self.solvers.contains(&SolverId::Dseg) {
                    return bad("dseg applies only to problems without set-valued operators".into());
                }
            }
            ProblemSpec::Bilinear { d_x, d_y, scale, sigma } => {
                if *d_x == 0 || *d_y == 0 {
                    return bad("bilinear block sizes must be positive".into());
                }
                positive("scale", *scale)?;
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return bad(format!("sigma must be nonnegative, got {sigma}"));
                }
            }
        }
        Ok(())
    }
}

/// A problem ready for the solvers, with the Lipschitz bound it was built
/// with.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: Problem,
    pub lipschitz: f64,
}

pub fn build_problem(config: &RunConfig) -> Result<BuiltProblem> {
    config.validate()?;
    let given = match config.lipschitz {
        LipschitzSource::Given { value } => Some(value),
        LipschitzSource::Default => None,
    };
    match &config.problem {
        ProblemSpec::Bilinear { d_x, d_y, scale, sigma } => {
            let sigma = if config.exact_oracle { 0.0 } else { *sigma };
            let game = crate::problems::BilinearGame::new(*d_x, *d_y, *scale, sigma)?;
            let problem = match given {
                Some(l) => Problem::new(Vec::new(), Arc::new(ScaledBound(game, l)))?,
                None => make_noisy_bilinear_game(*d_x, *d_y, *scale, sigma)?,
            };
            Ok(BuiltProblem {
                lipschitz: problem.lipschitz(),
                problem,
            })
        }
        ProblemSpec::Drslr { data, delta, kappa, c } => {
            let dataset = match data {
                DataSource::File { path } => read_libsvm_file(path)?,
                DataSource::Synthetic { m, d, density, seed } => synthetic_dataset(*m, *d, *density, *seed)?,
            };
            let params = DrslrParams {
                delta: *delta,
                kappa: *kappa,
                c: *c,
            };
            let drslr = DrslrProblem::new(Arc::new(dataset), params)?;
            let batch = if config.exact_oracle { None } else { Some(config.batch) };
            let lipschitz = match given {
                Some(l) => l,
                None => drslr.lipschitz_bound()?,
            };
            Ok(BuiltProblem {
                problem: drslr.into_problem(batch, lipschitz)?,
                lipschitz,
            })
        }
    }
}

/// Bilinear game with a caller-supplied Lipschitz bound.
#[derive(Debug)]
struct ScaledBound(crate::problems::BilinearGame, f64);

impl crate::operators::LipschitzMap for ScaledBound {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval_into(&self, z: ndarray::ArrayView1<f64>, out: ndarray::ArrayViewMut1<f64>) {
        self.0.eval_into(z, out)
    }

    fn sample_into(&self, z: ndarray::ArrayView1<f64>, rng: &mut crate::SolverRng, out: ndarray::ArrayViewMut1<f64>) {
        self.0.sample_into(z, rng, out)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.1
    }
}

/// One finished `(solver, seed)` job.
#[derive(Debug, Clone)]
pub struct JobResult {
    pub solver: SolverId,
    pub seed: u64,
    pub trace: Vec<TraceRecord>,
    /// Final primal iterate, absent when the run failed.
    pub z: Option<Vector>,
    pub error: Option<String>,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub jobs: Vec<JobResult>,
    pub lipschitz: f64,
}

impl ExperimentOutput {
    pub fn groups(&self) -> Vec<TraceGroup> {
        self.jobs
            .iter()
            .map(|j| TraceGroup {
                solver: j.solver.to_string(),
                records: j.trace.clone(),
            })
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &JobResult> {
        self.jobs.iter().filter(|j| j.error.is_some())
    }
}

/// Stochastic solvers run once per seed, deterministic ones once with the
/// first seed. Every job starts from the same point drawn from the first seed.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    let built = build_problem(config)?;
    let start = random_start(built.problem.dim(), config.seeds[0]);
    let jobs: Vec<(SolverId, u64)> = config
        .solvers
        .iter()
        .flat_map(|&s| {
            let seeds: &[u64] = if s.is_stochastic() {
                &config.seeds
            } else {
                &config.seeds[..1]
            };
            seeds.iter().map(move |&seed| (s, seed))
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(solver, seed)| run_job(config, &built, &start, solver, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        jobs: results,
        lipschitz: built.lipschitz,
    })
}

fn run_job(config: &RunConfig, built: &BuiltProblem, start: &Vector, solver: SolverId, seed: u64) -> Result<JobResult> {
    let opts = RunOptions::new(config.iterations, seed).trace_every(config.trace_every);
    let problem = &built.problem;
    let tau = config.schedule.tau;
    let ls = Linesearch::from(config.linesearch);
    let sps = |schedule: StepSchedule| -> Result<BaselineRun> {
        let SpsRun { trace, point } = run_sps(problem, &schedule.with_tau(tau)?, start, &opts)?;
        Ok(BaselineRun { trace, z: point.z })
    };
    let outcome = match solver {
        SolverId::SpsDecay => StepSchedule::decay(config.schedule.decay_scale).and_then(sps),
        SolverId::SpsFixed => {
            StepSchedule::fixed(config.schedule.fixed_scale, config.iterations, built.lipschitz).and_then(sps)
        }
        SolverId::Ps => run_ps(problem, start, tau, &opts),
        SolverId::Tseng => run_tseng(problem, start, &ls, &opts),
        SolverId::Frb => run_frb(problem, start, &ls, &opts),
        SolverId::Dseg => {
            StepSchedule::decay(config.schedule.decay_scale).and_then(|s| dseg_run(problem, &s, start, &opts))
        }
    };
    match outcome {
        Ok(run) => Ok(JobResult {
            solver,
            seed,
            trace: run.trace,
            z: Some(run.z),
            error: None,
            diverged: false,
        }),
        Err(Error::Diverged { last_finite, trace }) => Ok(JobResult {
            solver,
            seed,
            trace,
            z: None,
            error: Some(format!("diverged after iteration {last_finite}")),
            diverged: true,
        }),
        Err(Error::StalledLinesearch(n)) => Ok(JobResult {
            solver,
            seed,
            trace: Vec::new(),
            z: None,
            error: Some(format!("linesearch stalled after {n} reductions")),
            diverged: false,
        }),
        Err(e) => Err(e),
    }
}

/// Traces agree in everything except wall time.
pub fn traces_match(a: &[TraceRecord], b: &[TraceRecord]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.iteration == y.iteration
                && x.seed == y.seed
                && x.residual_r.to_bits() == y.residual_r.to_bits()
                && x.residual_o.map(f64::to_bits) == y.residual_o.map(f64::to_bits)
        })
}
