//! Command-line laboratory for modular-inverse torus point statistics.
//!
//! One subcommand per statistic; every report embeds the full configuration
//! that produced it, and repeated runs with the same configuration and
//! thread count emit byte-identical files. Exit codes: 0 ok, 2 usage,
//! 3 resource limit, 4 check failure, 5 I/O.

mod commands;
mod emit;
mod radius;
mod selfcheck;

use clap::{Args, Parser, Subcommand};

use radius::RadiusSpec;

const EXIT_USAGE: i32 = 2;
const EXIT_RESOURCE: i32 = 3;
const EXIT_CHECK_FAILED: i32 = 4;
const EXIT_IO: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "modtorus",
    version,
    about = "Exponential sums and equidistribution statistics of the modular-inverse \
             point sets {(d/q, d\u{0304}/q)} on the 2-torus"
)]
struct Cli {
    /// Worker threads (default: available parallelism; overridden by the
    /// MODTORUS_THREADS environment variable when the flag is absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the point set S_q as CSV and print phi(q)
    Gen(GenArgs),
    /// Kloosterman sums: single values, full tables, Weil-bound checks
    Kloosterman(KloostermanArgs),
    /// Variance of ball measures (geometric, spectral, Monte Carlo)
    Variance(VarianceArgs),
    /// Ball and box discrepancy lower bounds with witnesses
    Discrepancy(DiscrepancyArgs),
    /// Covering radius interval and covering exponents
    Covering(CoveringArgs),
    /// Measure of centers whose ball deviation exceeds a threshold
    Exceptional(ExceptionalArgs),
    /// Coset Weyl sums and the sparse-equidistribution bound
    Sparse(SparseArgs),
    /// Fourier coefficients of the multiplicative-translate pairing
    Mixing(MixingArgs),
    /// Run one statistic over a deterministic prime sweep
    Sweep(SweepArgs),
    /// Built-in verification suite; nonzero exit on any failure
    Selfcheck,
}

#[derive(Args, Debug, serde::Serialize)]
struct OutputArgs {
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = emit::Format::Json)]
    format: emit::Format,
    /// Include measured wall time in the report (breaks byte-for-byte
    /// reproducibility of report files; timing otherwise goes to stderr)
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug, serde::Serialize)]
struct GenArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct KloostermanArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Frequency m of a single sum S(m, n; q)
    #[arg(long, requires = "n")]
    m: Option<i64>,
    /// Frequency n of a single sum S(m, n; q)
    #[arg(long, requires = "m")]
    n: Option<i64>,
    /// Emit the full q x q table as CSV (columns m, n, S)
    #[arg(long, conflicts_with_all = ["m", "n"])]
    all: bool,
    /// Print max |S|/(tau sqrt(gcd q)) over all modes; for cubefree q the
    /// run fails (exit 4) when the ratio exceeds 1 + 1e-6
    #[arg(long)]
    check_weil: bool,
    /// Table size cap
    #[arg(long, default_value_t = modtorus::expsum::DEFAULT_TABLE_CAP)]
    cap: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct VarianceArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Ball radius: absolute ("0.05") or a q-power ("q^-0.75", "1.5*q^-0.5")
    #[arg(long)]
    radius: RadiusSpec,
    /// Which estimator to run
    #[arg(long, default_value = "all")]
    method: commands::VarianceMethodArg,
    /// Certified-error target for the spectral method
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    /// Monte Carlo seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct DiscrepancyArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Probe-center grid resolution per side
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Candidate radii per center: "full" or a subsample count
    #[arg(long, default_value = "full")]
    radii: commands::RadiiArg,
    /// Also compute the box-discrepancy lower bound
    #[arg(long)]
    with_box: bool,
    /// Coordinate-pool size for the box search
    #[arg(long, default_value_t = 16)]
    box_pool: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct CoveringArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Coverage-field grid resolution per side
    #[arg(long, default_value_t = 1024)]
    resolution: usize,
    /// Average-covering threshold exponent delta
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Sign of the threshold exponent: -1 compares the uncovered measure
    /// against R^(-delta) (vacuous for R < 1, flagged), +1 against R^delta
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    sign: i32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct ExceptionalArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Ball radius (absolute or q-power)
    #[arg(long)]
    radius: RadiusSpec,
    /// Deviation threshold; the result brackets vol{ y : |mu - vol| > t }
    #[arg(long)]
    threshold: f64,
    /// Classification grid resolution per side
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct SparseArgs {
    /// Modulus (prime for the Bourgain-condition report)
    #[arg(long)]
    q: u64,
    /// Subgroup index k: H is the unique index-k subgroup
    #[arg(long, default_value_t = 2)]
    index: u64,
    /// Coset representative a
    #[arg(long, default_value_t = 1)]
    rep: u64,
    /// Probe all nonzero modes with max(|m|, |n|) up to this cutoff
    #[arg(long, default_value_t = 5)]
    max_mode: i64,
    /// Delta for the subgroup-size condition #H >= q^delta
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct MixingArgs {
    /// Modulus
    #[arg(long)]
    q: u64,
    /// Multiplicative translate a (must be a unit mod q)
    #[arg(long)]
    a: u64,
    /// Probe all nonzero 4-modes with components up to this cutoff
    #[arg(long, default_value_t = 1)]
    max_mode: i64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct SweepArgs {
    /// Statistic to sweep
    #[arg(long)]
    stat: commands::SweepStat,
    /// Prime range "LO..HI"
    #[arg(long)]
    primes: commands::PrimeRange,
    /// Number of primes to select
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Prime selection: "log" spaces anchors geometrically over the range,
    /// "first" takes the count smallest primes at or above LO
    #[arg(long, default_value = "log")]
    spacing: commands::PrimeSpacing,
    /// Ball radius (absolute or q-power); default depends on the statistic
    #[arg(long)]
    radius: Option<RadiusSpec>,
    /// Grid resolution for discrepancy/covering statistics
    #[arg(long)]
    grid: Option<usize>,
    /// Certified-error target for spectral variance
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Average-covering delta (covering sweeps)
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Average-covering threshold sign (covering sweeps)
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    sign: i32,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("MODTORUS_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    if rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_err()
    {
        eprintln!("note: thread pool already initialized");
    }

    let code = match cli.command {
        Command::Gen(args) => commands::cmd_gen(&args, threads),
        Command::Kloosterman(args) => commands::cmd_kloosterman(&args, threads),
        Command::Variance(args) => commands::cmd_variance(&args, threads),
        Command::Discrepancy(args) => commands::cmd_discrepancy(&args, threads),
        Command::Covering(args) => commands::cmd_covering(&args, threads),
        Command::Exceptional(args) => commands::cmd_exceptional(&args, threads),
        Command::Sparse(args) => commands::cmd_sparse(&args, threads),
        Command::Mixing(args) => commands::cmd_mixing(&args, threads),
        Command::Sweep(args) => commands::cmd_sweep(&args, threads),
        Command::Selfcheck => selfcheck::run(),
    };
    std::process::exit(code);
}

fn exit_code_for(err: &modtorus::Error) -> i32 {
    match err {
        modtorus::Error::ResourceLimit(_) => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn fail(err: modtorus::Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(&err)
}

fn fail_io(err: std::io::Error) -> i32 {
    eprintln!("I/O error: {err}");
    EXIT_IO
}
