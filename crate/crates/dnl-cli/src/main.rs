//! `dnl` — verification and experiment CLI for the dyadic nonlocal
//! Schrödinger toolkit.
//!
//! Exit codes: 0 when everything requested succeeded/passed, 1 when a
//! verification check failed, 2 on usage or configuration errors.

mod cmds;
mod config;
mod suites;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cmds::{ConvergeOpts, EvolveOpts, Method, Resolved, SampleKind};
use config::FileConfig;
use dyadic_nonlocal::BesovParams;
use suites::{run_verify_suite, Fault, SuiteParams};

#[derive(Parser)]
#[command(
    name = "dnl",
    version,
    about = "Dyadic nonlocal Schrödinger equation: verification suites and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every identity/inequality suite and emit a JSON report
    Verify(VerifyArgs),
    /// Check the two Besov seminorm routes and the norm-equivalence bracket
    Besov(BesovArgs),
    /// Apply the nonlocal operator; optionally cross-check its two forms
    Dbeta(DbetaArgs),
    /// Evolve initial data under the semigroup; emit snapshots or trajectories
    Evolve(EvolveArgs),
    /// Tabulate maximal functions and the pointwise rate bound per cell
    Maximal(MaximalArgs),
    /// Track u(t) -> u0 over a time grid and count rate-bound violations
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct Common {
    /// RNG seed for generated inputs
    #[arg(long)]
    seed: Option<u64>,
    /// Grid resolution J; cells have width 2^-J
    #[arg(long)]
    resolution: Option<u32>,
    /// Domain length L (a power of two)
    #[arg(long)]
    domain: Option<u32>,
    /// Write the report/CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Size of the global thread pool (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Optional key=value config file; command-line flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Regularity parameter; must satisfy 0 < beta < lambda < 1
    #[arg(long)]
    lambda: Option<f64>,
    /// Operator order
    #[arg(long)]
    beta: Option<f64>,
    /// Testing hook: corrupt a named constant so the guard suite must fail
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FaultArg {
    /// Miscalibrate the quadrature-route normalizing constant
    Prefactor,
}

#[derive(Args)]
struct BesovArgs {
    #[command(flatten)]
    common: Common,
    /// Regularity parameter in (0,1)
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of generated sample functions (ignored with --input)
    #[arg(long)]
    seeds: Option<u64>,
    /// Grid-function CSV to check instead of generated samples
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct DbetaArgs {
    #[command(flatten)]
    common: Common,
    /// Operator order in (0,1)
    #[arg(long)]
    beta: Option<f64>,
    /// Grid-function CSV to read (generated sample when omitted)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Where to write the resulting grid function CSV
    #[arg(long)]
    output: Option<PathBuf>,
    /// Which operator route to apply
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Compute both routes and report their max discrepancy
    #[arg(long)]
    check: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Spectral,
    Integral,
    Both,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    /// Operator order in (0,1)
    #[arg(long)]
    beta: Option<f64>,
    /// Regularity parameter; must satisfy 0 < beta < lambda < 1
    #[arg(long)]
    lambda: Option<f64>,
    /// Evolution time (t >= 0)
    #[arg(long)]
    t: Option<f64>,
    /// Grid-function CSV with the initial data (generated sample when omitted)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Where to write the evolved snapshot or trajectory CSV
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also print the discrete equation residual at time t
    #[arg(long)]
    residual: bool,
    /// Difference-quotient step for the residual
    #[arg(long)]
    h: Option<f64>,
    /// Emit a t,l2_norm,besov_norm,residual CSV over t0:t1:steps
    #[arg(long)]
    trajectory: Option<String>,
}

#[derive(Args)]
struct MaximalArgs {
    #[command(flatten)]
    common: Common,
    /// Regularity parameter; must satisfy 0 < beta < lambda < 1
    #[arg(long)]
    lambda: Option<f64>,
    /// Operator order
    #[arg(long)]
    beta: Option<f64>,
    /// Grid-function CSV to read (generated sample when omitted)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of uniform time samples in (0,1)
    #[arg(long)]
    tpoints: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Regularity parameter; must satisfy 0 < beta < lambda < 1
    #[arg(long)]
    lambda: Option<f64>,
    /// Operator order
    #[arg(long)]
    beta: Option<f64>,
    /// Time grid: lin:<a>:<b>:<n> or geo:<t0>:<n> (halving), all in (0,1)
    #[arg(long)]
    tgrid: Option<String>,
    /// Number of generated sample functions (ignored with --input)
    #[arg(long)]
    seeds: Option<u64>,
    /// Family of generated samples
    #[arg(long, value_enum)]
    sample: Option<SampleArg>,
    /// Grid-function CSV with the initial data instead of generated samples
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SampleArg {
    Besov,
    Lipschitz,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

/// Flag value if present, else config-file value, else the default.
fn pick<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    Ok(match flag {
        Some(v) => v,
        None => cfg.get(key)?.unwrap_or(default),
    })
}

/// Flag value if present, else config-file value.
fn pick_opt<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg.get(key)?,
    })
}

/// Enum flag with a config-file string fallback.
fn pick_enum<T: ValueEnum>(flag: Option<T>, cfg: &FileConfig, key: &str, default: T) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get::<String>(key)? {
        None => Ok(default),
        Some(s) => {
            T::from_str(&s, true).map_err(|e| anyhow::anyhow!("config key {key} = {s:?}: {e}"))
        }
    }
}

fn resolve(common: &Common) -> Result<(Resolved, FileConfig)> {
    let cfg = FileConfig::load(common.config.as_deref())?;
    let seed = pick(common.seed, &cfg, "seed", 7)?;
    let resolution = pick(common.resolution, &cfg, "resolution", 8)?;
    if !(1..=12).contains(&resolution) {
        bail!("resolution must lie in 1..=12, got {resolution}");
    }
    let domain = pick(common.domain, &cfg, "domain", 1)?;
    if domain == 0 || !domain.is_power_of_two() {
        bail!("domain length must be a positive power of two, got {domain}");
    }
    let out = pick_opt(common.out.clone(), &cfg, "out")?;
    if let Some(n) = pick_opt(common.threads, &cfg, "threads")? {
        if n == 0 {
            bail!("threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing the thread pool")?;
    }
    Ok((Resolved { seed, resolution, domain, out }, cfg))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let lambda = pick(a.lambda, &cfg, "lambda", 0.7)?;
            let beta = pick(a.beta, &cfg, "beta", 0.3)?;
            let params = BesovParams::new(lambda, beta)?;
            let fault = a.inject_fault.map(|f| match f {
                FaultArg::Prefactor => Fault::Prefactor,
            });
            let report = run_verify_suite(&SuiteParams {
                resolution: r.resolution,
                domain: r.domain,
                seed: r.seed,
                params,
                fault,
            });
            cmds::finish_report(&report, r.out.as_deref())
        }
        Command::Besov(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let lambda = pick(a.lambda, &cfg, "lambda", 0.5)?;
            let seeds = pick(a.seeds, &cfg, "seeds", 10)?;
            let input = pick_opt(a.input, &cfg, "input")?;
            cmds::cmd_besov(&r, lambda, seeds, input.as_deref())
        }
        Command::Dbeta(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let beta = pick(a.beta, &cfg, "beta", 0.5)?;
            let input = pick_opt(a.input, &cfg, "input")?;
            let output = pick_opt(a.output, &cfg, "output")?;
            let method = match pick_enum(a.method, &cfg, "method", MethodArg::Both)? {
                MethodArg::Spectral => Method::Spectral,
                MethodArg::Integral => Method::Integral,
                MethodArg::Both => Method::Both,
            };
            cmds::cmd_dbeta(&r, beta, input.as_deref(), output.as_deref(), method, a.check)
        }
        Command::Evolve(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let opts = EvolveOpts {
                beta: pick(a.beta, &cfg, "beta", 0.3)?,
                lambda: pick(a.lambda, &cfg, "lambda", 0.7)?,
                t: pick(a.t, &cfg, "t", 0.5)?,
                input: pick_opt(a.input, &cfg, "input")?,
                output: pick_opt(a.output, &cfg, "output")?,
                residual: a.residual,
                h: pick(a.h, &cfg, "h", 1e-6)?,
                trajectory: pick_opt(a.trajectory, &cfg, "tgrid")?,
            };
            cmds::cmd_evolve(&r, &opts)
        }
        Command::Maximal(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let lambda = pick(a.lambda, &cfg, "lambda", 0.7)?;
            let beta = pick(a.beta, &cfg, "beta", 0.3)?;
            let input = pick_opt(a.input, &cfg, "input")?;
            let tpoints = pick(a.tpoints, &cfg, "tpoints", 512)?;
            cmds::cmd_maximal(&r, lambda, beta, input.as_deref(), tpoints)
        }
        Command::Converge(a) => {
            let (r, cfg) = resolve(&a.common)?;
            let opts = ConvergeOpts {
                lambda: pick(a.lambda, &cfg, "lambda", 0.7)?,
                beta: pick(a.beta, &cfg, "beta", 0.3)?,
                tgrid: pick(a.tgrid, &cfg, "tgrid", "geo:0.5:20".into())?,
                seeds: pick(a.seeds, &cfg, "seeds", 20)?,
                sample: match pick_enum(a.sample, &cfg, "sample", SampleArg::Lipschitz)? {
                    SampleArg::Besov => SampleKind::Besov,
                    SampleArg::Lipschitz => SampleKind::Lipschitz,
                },
                input: pick_opt(a.input, &cfg, "input")?,
            };
            cmds::cmd_converge(&r, &opts)
        }
    }
}
