//! `sps`: run, compare and self-check the splitting solvers.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure (or failed bench check),
//! 2 invalid usage, 3 divergence (the partial trace is still written).

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sps_core::data::{read_manifest, read_trace_csv, write_manifest, write_trace_csv};
use sps_core::experiment::{
    run_experiment, traces_match, Command, DataSource, ExperimentOutput, LinesearchConfig, LipschitzSource,
    OutputConfig, ProblemSpec, RunConfig, ScheduleConfig, SolverId,
};
use sps_core::verify::run_bench;
use sps_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sps",
    version,
    about = "Stochastic projective splitting and baseline solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solver and write its trace and manifest.
    Solve(RunArgs),
    /// Run several solvers (stochastic ones over several seeds) into one trace file.
    Compare(RunArgs),
    /// Run the built-in correctness checks.
    Bench,
    /// Re-run a manifest and compare against a recorded trace.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Drslr,
    Bilinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    Decay,
    Fixed,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// LIBSVM file; without it a synthetic dataset is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1e-3)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    dx: usize,
    #[arg(long, default_value_t = 1)]
    dy: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Standard deviation of Gaussian oracle noise for the bilinear game.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Solver ids: sps, sps-decay, sps-fixed, ps, tseng, frb, dseg. Comma
    /// separated or repeated.
    #[arg(long, required = true, value_delimiter = ',')]
    solver: Vec<String>,
    /// Schedule used when a solver is given as plain `sps`.
    #[arg(long, value_enum, default_value_t = ScheduleKind::Decay)]
    schedule: ScheduleKind,
    #[arg(long, default_value_t = 1.0)]
    cd: f64,
    #[arg(long, default_value_t = 1.0)]
    cf: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    #[arg(long)]
    exact_oracle: bool,
    /// Lipschitz bound to use instead of the default (exact or estimated).
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    ls_initial: f64,
    #[arg(long, default_value_t = 0.8)]
    ls_theta: f64,
    #[arg(long, default_value_t = 0.7)]
    ls_shrink: f64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds for stochastic solvers (compare only).
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 10)]
    trace_every: usize,
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    /// Defaults to the trace path with a `.toml` extension.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn parse_solvers(names: &[String], schedule: ScheduleKind) -> Result<Vec<SolverId>, Error> {
    names
        .iter()
        .map(|name| match name.as_str() {
            "sps" => Ok(match schedule {
                ScheduleKind::Decay => SolverId::SpsDecay,
                ScheduleKind::Fixed => SolverId::SpsFixed,
            }),
            other => other.parse(),
        })
        .collect()
}

fn build_config(command: Command, args: &RunArgs) -> Result<RunConfig, Error> {
    let problem = match args.problem {
        ProblemKind::Drslr => ProblemSpec::Drslr {
            data: match &args.data {
                Some(path) => DataSource::File { path: path.clone() },
                None => DataSource::Synthetic {
                    m: args.m,
                    d: args.d,
                    density: args.density,
                    seed: args.data_seed,
                },
            },
            delta: args.delta,
            kappa: args.kappa,
            c: args.c,
        },
        ProblemKind::Bilinear => ProblemSpec::Bilinear {
            d_x: args.dx,
            d_y: args.dy,
            scale: args.scale,
            sigma: args.sigma,
        },
    };
    let seeds = match command {
        Command::Compare => (args.seed..args.seed.saturating_add(args.seeds)).collect(),
        _ => vec![args.seed],
    };
    let config = RunConfig {
        command,
        solvers: parse_solvers(&args.solver, args.schedule)?,
        iterations: args.iters,
        trace_every: args.trace_every,
        seeds,
        batch: args.batch,
        exact_oracle: args.exact_oracle,
        problem,
        schedule: ScheduleConfig {
            decay_scale: args.cd,
            fixed_scale: args.cf,
            tau: args.tau,
        },
        linesearch: LinesearchConfig {
            initial: args.ls_initial,
            theta: args.ls_theta,
            shrink: args.ls_shrink,
        },
        lipschitz: match args.lipschitz {
            Some(value) => LipschitzSource::Given { value },
            None => LipschitzSource::Default,
        },
        output: OutputConfig {
            trace: args.out.clone(),
            manifest: args.manifest.clone().unwrap_or_else(|| args.out.with_extension("toml")),
        },
    };
    if command == Command::Compare && config.solvers.len() < 2 {
        return Err(Error::Validation("compare needs at least two solvers".into()));
    }
    config.validate()?;
    Ok(config)
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter(_) | Error::Validation(_) | Error::Shape { .. }
    )
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if is_usage_error(e) { EXIT_USAGE } else { EXIT_FAILURE })
}

fn write_outputs(config: &RunConfig, output: &ExperimentOutput) -> Result<(), Error> {
    write_trace_csv(&output.groups(), BufWriter::new(File::create(&config.output.trace)?))?;
    write_manifest(config, BufWriter::new(File::create(&config.output.manifest)?))
}

fn run(command: Command, args: &RunArgs) -> ExitCode {
    let config = match build_config(command, args) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let output = match run_experiment(&config) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = write_outputs(&config, &output) {
        return fail(&e);
    }
    println!("lipschitz bound: {:.6e}", output.lipschitz);
    for job in &output.jobs {
        let last = job.trace.last().map_or(f64::NAN, |r| r.residual_r);
        match &job.error {
            None => println!("{} seed {}: final R = {last:.6e}", job.solver, job.seed),
            Some(msg) => println!("{} seed {}: {msg}", job.solver, job.seed),
        }
    }
    println!("trace written to {}", config.output.trace.display());
    println!("manifest written to {}", config.output.manifest.display());
    if output.jobs.iter().any(|j| j.diverged) {
        ExitCode::from(EXIT_DIVERGED)
    } else if output.failures().next().is_some() {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}

fn bench() -> ExitCode {
    let reports = run_bench();
    for r in &reports {
        println!(
            "{} {} ({:.3} s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed_s,
            r.detail
        );
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", reports.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        ExitCode::from(EXIT_FAILURE)
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    Ok(BufReader::new(File::open(path)?))
}

fn replay(manifest: &Path, trace: &Path) -> ExitCode {
    let config = match open(manifest).and_then(read_manifest) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let recorded = match open(trace).and_then(read_trace_csv) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let output = match run_experiment(&config) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let fresh = output.groups();
    let same = fresh.len() == recorded.len()
        && fresh
            .iter()
            .zip(&recorded)
            .all(|(a, b)| a.solver == b.solver && traces_match(&a.records, &b.records));
    if same {
        println!("replay matches {} trace groups", fresh.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("replay differs from the recorded trace");
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Cmd::Solve(args) => run(Command::Solve, args),
        Cmd::Compare(args) => run(Command::Compare, args),
        Cmd::Bench => bench(),
        Cmd::Replay { manifest, trace } => replay(manifest, trace),
    }
}
