//! `cle`: command-line front end for constrained linear optimisation experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cle_core::bounds::{ea_runtime_bound, feasibility_time_bound, multiplicative_drift_bound};
use cle_core::check::run_suite;
use cle_core::harness::{
    run_sweep, write_outputs, AlgoKind, BoundSpec, InstanceFamily, StartMode, StopMode, SweepConfig,
    DEFAULT_RANDOM_W_MAX,
};
use cle_core::heuristics::{run_trial_until, StopAt, DEFAULT_MAX_ITERS};
use cle_core::oracle::exact_expected_time;
use cle_core::potential::{build_profile, drift_lower_bound, estimate_ea_drift, exact_rls_drift};
use cle_core::rng::{derive_seed, rng_from_seed};
use cle_core::{Algorithm, BitString, Instance, Variant};

#[derive(Parser)]
#[command(name = "cle", version, about = "RLS and (1+1) EA on linear functions under a cardinality constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and print it as JSON.
    Run(RunArgs),
    /// Run an experiment grid and write raw.csv and summary.csv.
    Sweep(SweepArgs),
    /// Estimate the one-step potential drift at a state.
    Drift(DriftArgs),
    /// Exact expected optimisation time from the Markov chain (small n).
    Oracle(OracleArgs),
    /// Evaluate the runtime bounds for an instance.
    Bounds(BoundsArgs),
    /// Run the invariant suite on random instances.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Rls,
    Ea,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    General,
    Modified,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Uniform,
    Zeros,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Optimum,
    Feasible,
}

#[derive(Args)]
struct InstanceArgs {
    /// iota, lower-bound, onemax-like, random or file:<path>.
    #[arg(long, default_value = "iota")]
    instance: InstanceFamily,
    #[arg(long)]
    n: Option<usize>,
    /// Constraint bound: an integer or frac:<x>.
    #[arg(long = "b")]
    b: Option<BoundSpec>,
    /// Largest weight of the random family.
    #[arg(long, default_value_t = DEFAULT_RANDOM_W_MAX)]
    w_max: u64,
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, value_enum, default_value = "ea")]
    algo: AlgoArg,
    /// Mutation rate numerator c (rate c/n); EA only, default 1.
    #[arg(long)]
    rate_num: Option<u32>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    start: StartArg,
    #[arg(long, value_enum, default_value = "optimum")]
    stop: StopArg,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment design; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance: Option<InstanceFamily>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Bounds: `7`, `1,5,10`, `0..floor(n/3)` or `frac:<x>`.
    #[arg(long = "b")]
    b: Option<BoundSpec>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    /// Comma-separated mutation rate numerators (EA only).
    #[arg(long, value_delimiter = ',')]
    rate_num: Vec<u32>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    w_max: Option<u64>,
    #[arg(long, value_enum)]
    start: Option<StartArg>,
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    #[arg(long, env = "CLE_JOBS")]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DriftArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, value_enum, default_value = "general")]
    variant: VariantArg,
    /// Feasible state, most significant bit first; random non-optimal if absent.
    #[arg(long)]
    state: Option<BitString>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Failures printed per check.
    #[arg(long, default_value_t = 5)]
    max_failures: usize,
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

impl InstanceArgs {
    fn resolve(&self, seed: u64) -> Result<Instance, Box<dyn std::error::Error>> {
        if let InstanceFamily::File(_) = self.instance {
            if self.n.is_some() || self.b.is_some() {
                usage(ErrorKind::ArgumentConflict, "--n and --b cannot be combined with a file instance");
            }
            return Ok(self.instance.build(0, 0, self.w_max, seed)?);
        }
        let Some(n) = self.n else {
            usage(ErrorKind::MissingRequiredArgument, "--n is required");
        };
        let bound = match (&self.instance, &self.b) {
            (InstanceFamily::LowerBound, None) => n / 4,
            (InstanceFamily::LowerBound, Some(_)) => {
                usage(ErrorKind::ArgumentConflict, "the lower-bound family fixes B = n/4; drop --b")
            }
            (_, None) => usage(ErrorKind::MissingRequiredArgument, "--b is required"),
            (_, Some(spec)) => match spec.values(n).as_slice() {
                [b] => *b,
                _ => usage(ErrorKind::InvalidValue, "--b must name a single bound here"),
            },
        };
        Ok(self.instance.build(n, bound, self.w_max, seed)?)
    }
}

impl AlgoArgs {
    fn resolve(&self) -> Algorithm {
        match (self.algo, self.rate_num) {
            (AlgoArg::Rls, Some(_)) => usage(ErrorKind::ArgumentConflict, "--rate-num applies to --algo ea only"),
            (AlgoArg::Rls, None) => Algorithm::Rls,
            (AlgoArg::Ea, c) => Algorithm::Ea { rate_num: c.unwrap_or(1) },
        }
    }
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::General => Variant::General,
        VariantArg::Modified => Variant::Modified,
    }
}

fn print_json<S: Serialize>(value: &S) -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(args: RunArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let algo = args.algo.resolve();
    let inst = args.instance.resolve(args.seed)?;
    let zeros = BitString::zeros(inst.n());
    let start = match args.start {
        StartArg::Uniform => None,
        StartArg::Zeros => Some(&zeros),
    };
    let stop = match args.stop {
        StopArg::Optimum => StopAt::Optimum,
        StopArg::Feasible => StopAt::Feasible,
    };
    let trial = run_trial_until(&inst, algo, args.seed, args.max_iters, start, stop)?;
    print_json(&json!({
        "n": inst.n(),
        "B": inst.bound(),
        "algo": algo.name(),
        "rate_num": algo.rate_num(),
        "instance": args.instance.instance.label(),
        "seed": trial.seed,
        "iterations": trial.iterations,
        "feasibility_hit": trial.feasibility_hit,
        "hit_cap": trial.hit_cap,
    }))?;
    Ok(if trial.hit_cap { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn sweep(args: SweepArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_json_file(path)?,
        None => {
            let Some(instance) = args.instance.clone() else {
                usage(ErrorKind::MissingRequiredArgument, "--instance is required without --config");
            };
            let Some(algo) = args.algo else {
                usage(ErrorKind::MissingRequiredArgument, "--algo is required without --config");
            };
            let algo = match algo {
                AlgoArg::Rls => AlgoKind::Rls,
                AlgoArg::Ea => AlgoKind::Ea,
            };
            SweepConfig::new(instance, args.n.clone(), algo)
        }
    };
    if args.config.is_some() {
        if let Some(instance) = args.instance {
            config.instance = instance;
        }
        if !args.n.is_empty() {
            config.n = args.n;
        }
        if let Some(algo) = args.algo {
            config.algo = match algo {
                AlgoArg::Rls => AlgoKind::Rls,
                AlgoArg::Ea => AlgoKind::Ea,
            };
        }
    }
    if !args.rate_num.is_empty() {
        if config.algo == AlgoKind::Rls {
            usage(ErrorKind::ArgumentConflict, "--rate-num applies to --algo ea only");
        }
        config.rate_nums = args.rate_num;
    }
    if let Some(b) = args.b {
        if config.instance == InstanceFamily::LowerBound {
            usage(ErrorKind::ArgumentConflict, "the lower-bound family fixes B = n/4; drop --b");
        }
        config.bounds = b;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(m) = args.max_iters {
        config.max_iters = m;
    }
    if let Some(w) = args.w_max {
        config.w_max = w;
    }
    if let Some(s) = args.start {
        config.start = match s {
            StartArg::Uniform => StartMode::Uniform,
            StartArg::Zeros => StartMode::Zeros,
        };
    }
    if let Some(s) = args.stop {
        config.stop = match s {
            StopArg::Optimum => StopMode::Optimum,
            StopArg::Feasible => StopMode::Feasible,
        };
    }
    if let Some(j) = args.jobs {
        config.jobs = j;
    }
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    let Some(dir) = config.out.clone() else {
        usage(ErrorKind::MissingRequiredArgument, "--out is required");
    };

    let output = run_sweep(&config)?;
    std::fs::create_dir_all(&dir)?;
    let (raw, summary) = write_outputs(&output, &dir)?;
    eprintln!("wrote {} and {}", raw.display(), summary.display());
    if output.censored() {
        let cells = output.summary.iter().filter(|s| s.censored).count();
        eprintln!("warning: {cells} cell(s) hit max_iters; their statistics are censored");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn random_non_optimal_state(inst: &Instance, seed: u64) -> Option<BitString> {
    let n = inst.n();
    let mut rng = rng_from_seed(derive_seed(seed, &[0xd81f7]));
    for _ in 0..100_000 {
        let x = cle_core::heuristics::uniform_start(n, &mut rng);
        if inst.is_feasible(&x) && !inst.is_optimal(&x) {
            return Some(x);
        }
    }
    None
}

fn drift(args: DriftArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let algo = args.algo.resolve();
    let inst = args.instance.resolve(args.seed)?;
    let profile = build_profile::<f64>(&inst, variant(args.variant))?;
    let state = match args.state {
        Some(x) => x,
        None => random_non_optimal_state(&inst, args.seed).ok_or("no feasible non-optimal state found; pass --state")?,
    };
    let g = profile.value(&state);
    let bound = drift_lower_bound(variant(args.variant), g, inst.n(), inst.bound());
    let (mean, stderr, samples) = match algo {
        Algorithm::Rls => (exact_rls_drift(&inst, &profile, &state)?, 0.0, 0),
        Algorithm::Ea { rate_num } => {
            let mut rng = rng_from_seed(args.seed);
            let est = estimate_ea_drift(&inst, &profile, &state, rate_num, args.samples, &mut rng)?;
            (est.mean, est.stderr, est.samples)
        }
    };
    print_json(&json!({
        "state": state.to_string(),
        "g_value": g,
        "bound": bound,
        "mean": mean,
        "stderr": stderr,
        "samples": samples,
        "algo": algo.name(),
        "rate_num": algo.rate_num(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: OracleArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let algo = args.algo.resolve();
    let inst = args.instance.resolve(args.seed)?;
    let report = exact_expected_time::<f64>(&inst, algo)?;
    print_json(&json!({
        "from_uniform": report.from_uniform,
        "n": report.n,
        "B": report.bound,
        "algo": algo.name(),
        "rate_num": algo.rate_num(),
        "max_state_time": report.max_state_time,
        "residual": report.residual,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(args: BoundsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let inst = args.instance.resolve(args.seed)?;
    let (n, b) = (inst.n(), inst.bound());
    if b == 0 {
        usage(ErrorKind::InvalidValue, "bounds need B >= 1");
    }
    let general = ea_runtime_bound(&build_profile::<f64>(&inst, Variant::General)?)?;
    let modified = match build_profile::<f64>(&inst, Variant::Modified) {
        Ok(p) => Some(ea_runtime_bound(&p)?),
        Err(_) => None,
    };
    let nn = n as f64;
    let delta = 1.0 / (std::f64::consts::E * nn);
    let mult = multiplicative_drift_bound(delta, nn, (n - b + 1) as f64)?;
    let mut out = json!({
        "n": n,
        "B": b,
        "feasibility_bound": feasibility_time_bound::<f64>(n, b),
        "ea_bound_general": general,
        "multiplicative_example": {
            "delta": mult.delta,
            "x0": nn,
            "s_min": (n - b + 1) as f64,
            "expected": mult.expected,
        },
    });
    if let Some(m) = modified {
        out["ea_bound_modified"] = json!(m);
    }
    print_json(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn check(args: CheckArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut report = run_suite(args.seed, args.instances);
    for c in &report.checks {
        let status = if c.passed() { "ok" } else { "FAILED" };
        eprintln!("{status:>6}  {} ({} cases, {} failures)", c.name, c.cases, c.failures.len());
    }
    let passed = report.passed();
    for c in &mut report.checks {
        c.failures.truncate(args.max_failures);
    }
    print_json(&report)?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Drift(a) => drift(a),
        Command::Oracle(a) => oracle(a),
        Command::Bounds(a) => bounds(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
