//! `mtlb`: seeded regret experiments for multi-task low-rank linear
//! bandits.
//!
//! Subcommands: `run` (one configuration), `sweep` (vary one field over
//! a value list, one curve per value), `validate` (invariant suite).
//! Exit codes: 0 success, 1 validation/runtime failure, 2 bad arguments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use mtlb_core::error::Error;
use mtlb_core::harness::config::{ConfigDraft, ExperimentConfig, Sweep, SweepField};
use mtlb_core::harness::report::{emit_reports, execute};
use mtlb_core::validate;

#[derive(Parser)]
#[command(name = "mtlb", version, about = "Multi-task low-rank linear bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration and emit reports.
    Run(RunArgs),
    /// Vary one field over a list of values, one curve per value.
    Sweep(SweepArgs),
    /// Run the invariant and oracle-equivalence suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature dimension d.
    #[arg(long)]
    d: Option<usize>,
    /// Number of tasks T.
    #[arg(long)]
    t: Option<usize>,
    /// Shared-subspace rank r.
    #[arg(long)]
    r: Option<usize>,
    /// Exploration rounds N1.
    #[arg(long)]
    n1: Option<usize>,
    /// Total rounds N.
    #[arg(long)]
    n: Option<usize>,
    /// Candidate actions per round (default 20).
    #[arg(long)]
    k: Option<usize>,
    /// Reward noise standard deviation (default 0.1).
    #[arg(long)]
    sigma: Option<f64>,
    /// Ridge regularizer lambda (default 1).
    #[arg(long)]
    lambda: Option<f64>,
    /// Confidence level delta (default 1e-3).
    #[arg(long)]
    delta: Option<f64>,
    /// Agent: mtl_beta, mtl_beta_prime, independent_oful, random.
    #[arg(long)]
    agent: Option<String>,
    /// delta0 policy: measured_sd, schedule_inv_sqrt, fixed:<v>.
    #[arg(long)]
    delta0: Option<String>,
    /// Feature-norm bound policy: running_max, fixed:<v>.
    #[arg(long)]
    l_policy: Option<String>,
    /// beta-prime middle-term horizon: theorem, proof.
    #[arg(long)]
    beta_prime_horizon: Option<String>,
    /// Truncation multiplier override (default: oracle 9 kappa^2 mu^2).
    #[arg(long)]
    c_tilde: Option<f64>,
    /// Independent trials (default 10).
    #[arg(long)]
    trials: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit per-decision diagnostics.csv (radius, indices, containment).
    #[arg(long)]
    diagnostics: bool,
    /// Dump each trial's moment matrix and estimated basis as fixtures.
    #[arg(long)]
    dump_spectral: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Field to vary: d, r, t, n1, k, sigma.
    #[arg(long)]
    field: String,
    /// Comma-separated values, e.g. 2,4,8.
    #[arg(long)]
    values: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn build_config(common: &CommonArgs, sweep: Option<Sweep>) -> Result<ExperimentConfig, Error> {
    let file_draft = match &common.config {
        Some(path) => ConfigDraft::from_file(path)?,
        None => ConfigDraft::default(),
    };
    let flag_draft = ConfigDraft {
        d: common.d,
        t_count: common.t,
        r: common.r,
        n1: common.n1,
        n_total: common.n,
        k_actions: common.k,
        sigma: common.sigma,
        lambda: common.lambda,
        delta: common.delta,
        agent: common.agent.as_deref().map(FromStr::from_str).transpose()?,
        delta0_policy: common.delta0.as_deref().map(FromStr::from_str).transpose()?,
        l_policy: common.l_policy.as_deref().map(FromStr::from_str).transpose()?,
        beta_prime_horizon: common
            .beta_prime_horizon
            .as_deref()
            .map(FromStr::from_str)
            .transpose()?,
        c_tilde: common.c_tilde,
        trials: common.trials,
        seed: common.seed,
        output_dir: common.out.clone(),
        diagnostics: if common.diagnostics { Some(true) } else { None },
        dump_spectral: if common.dump_spectral { Some(true) } else { None },
    };
    flag_draft.over(file_draft).finish(sweep)
}

fn parse_sweep(args: &SweepArgs) -> Result<Sweep, Error> {
    let field: SweepField = args.field.parse()?;
    let values: Result<Vec<f64>, Error> = args
        .values
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad sweep value `{tok}`")))
        })
        .collect();
    let values = values?;
    Ok(Sweep { field, values })
}

const USAGE_HINT: &str = "run `mtlb run --help` for the flag list; required: --d --t --r --n1 --n --seed (or a --config file providing them)";

fn run_experiment(cfg: &ExperimentConfig, command: &str) -> Result<(), Error> {
    let started = Instant::now();
    let report = execute(cfg, command)?;
    let paths = emit_reports(&report)?;
    for arm in &report.arms {
        eprintln!(
            "{}: final per-task regret {:.3} ± {:.3} over {} trials",
            arm.label,
            arm.log.final_mean(),
            arm.log.final_stderr(),
            arm.log.trial_count
        );
    }
    for path in &paths {
        eprintln!("wrote {}", path.display());
    }
    eprintln!("wall time {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn run_validate(seed: u64) -> ExitCode {
    let results = validate::run_all(seed);
    let mut failed = 0;
    for check in &results {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {:44} {}", check.name, check.detail);
        if !check.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} checks failed", results.len());
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match build_config(&args.common, None) {
            Ok(cfg) => match run_experiment(&cfg, "run") {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            },
            Err(e) => {
                eprintln!("error: {e}\n{USAGE_HINT}");
                ExitCode::from(2)
            }
        },
        Command::Sweep(args) => {
            let sweep = match parse_sweep(&args) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}\n{USAGE_HINT}");
                    return ExitCode::from(2);
                }
            };
            match build_config(&args.common, Some(sweep)) {
                Ok(cfg) => match run_experiment(&cfg, "sweep") {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(1)
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}\n{USAGE_HINT}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Validate(args) => run_validate(args.seed),
    }
}
