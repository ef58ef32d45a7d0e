//! One handler per subcommand. Handlers return the process exit code.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use modtorus::arith::{self, Modulus};
use modtorus::expsum::{self, KloostermanTable};
use modtorus::stats;
use modtorus::torusgeo::{generate_s_q, TorusPoint};

use crate::emit::{self, ConfigEcho, Report};
use crate::radius::RadiusSpec;
use crate::{
    fail, fail_io, CoveringArgs, DiscrepancyArgs, ExceptionalArgs, GenArgs, KloostermanArgs,
    MixingArgs, SparseArgs, SweepArgs, VarianceArgs, EXIT_CHECK_FAILED, EXIT_USAGE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMethodArg {
    Geometric,
    Spectral,
    Montecarlo,
    All,
}

/// Candidate-radii argument: `full` or a subsample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiiArg {
    Full,
    Subsample(usize),
}

impl FromStr for RadiiArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("full") {
            Ok(RadiiArg::Full)
        } else {
            s.parse::<usize>()
                .map(RadiiArg::Subsample)
                .map_err(|e| format!("radii must be 'full' or a count: {e}"))
        }
    }
}

impl fmt::Display for RadiiArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiiArg::Full => write!(f, "full"),
            RadiiArg::Subsample(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for RadiiArg {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl From<RadiiArg> for stats::RadiiMode {
    fn from(a: RadiiArg) -> stats::RadiiMode {
        match a {
            RadiiArg::Full => stats::RadiiMode::Full,
            RadiiArg::Subsample(k) => stats::RadiiMode::Subsample(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStat {
    Variance,
    Discrepancy,
    Covering,
    Smallscale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeSpacing {
    Log,
    First,
}

/// Prime range `LO..HI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeRange {
    pub lo: u64,
    pub hi: u64,
}

impl FromStr for PrimeRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("prime range must look like LO..HI, got {s:?}"))?;
        let lo = lo.trim().parse::<u64>().map_err(|e| e.to_string())?;
        let hi = hi.trim().parse::<u64>().map_err(|e| e.to_string())?;
        if hi < lo {
            return Err(format!("empty prime range {s:?}"));
        }
        Ok(PrimeRange { lo, hi })
    }
}

impl fmt::Display for PrimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl Serialize for PrimeRange {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub fn cmd_gen(args: &GenArgs, _threads: usize) -> i32 {
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let ps = generate_s_q(&modulus);
    let phi_line = format!("phi({}) = {}", args.q, modulus.phi());
    let write = || -> std::io::Result<()> {
        let mut w = emit::writer_for(&args.out)?;
        ps.write_csv(&mut w)?;
        w.flush()
    };
    if let Err(e) = write() {
        return fail_io(e);
    }
    if args.out.is_some() {
        println!("{phi_line}");
    } else {
        eprintln!("{phi_line}");
    }
    0
}

pub fn cmd_kloosterman(args: &KloostermanArgs, threads: usize) -> i32 {
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    if let (Some(m), Some(n)) = (args.m, args.n) {
        let value = expsum::kloosterman(m, n, &modulus);
        let write = || -> std::io::Result<()> {
            let mut w = emit::writer_for(&args.output.out)?;
            writeln!(w, "{value:.10}")?;
            w.flush()
        };
        return match write() {
            Ok(()) => 0,
            Err(e) => fail_io(e),
        };
    }
    if !args.all && !args.check_weil {
        eprintln!("error: pass --m/--n for a single value, --all for the table, or --check-weil");
        return EXIT_USAGE;
    }
    let started = Instant::now();
    let table = match KloostermanTable::build_with_cap(&modulus, args.cap) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    if args.all {
        let write = || -> std::io::Result<()> {
            let mut w = emit::writer_for(&args.output.out)?;
            writeln!(w, "m,n,S")?;
            for m in 0..args.q {
                for n in 0..args.q {
                    writeln!(w, "{m},{n},{:.16e}", table.entry_mod(m, n))?;
                }
            }
            w.flush()
        };
        if let Err(e) = write() {
            return fail_io(e);
        }
    }
    let mut code = 0;
    if args.check_weil {
        let (ratio, (am, an)) = table.max_weil_ratio();
        println!(
            "max |S(m,n;{})| / weil_rhs = {ratio:.12} at (m,n) = ({am},{an})",
            args.q
        );
        if modulus.is_cubefree() {
            if ratio > 1.0 + 1e-6 {
                eprintln!("Weil bound violated for cubefree q = {}", args.q);
                code = EXIT_CHECK_FAILED;
            }
        } else {
            println!("q = {} is not cubefree: ratio reported, not asserted", args.q);
        }
    }
    emit::timing_value(started, false, "kloosterman");
    let _ = threads;
    code
}

#[derive(Serialize)]
struct VarianceDeltas {
    geometric_vs_spectral: Option<f64>,
    geometric_vs_montecarlo: Option<f64>,
    spectral_vs_montecarlo: Option<f64>,
}

#[derive(Serialize)]
struct VarianceResult {
    radius: f64,
    reports: Vec<stats::VarianceReport>,
    random_baseline: f64,
    deltas: VarianceDeltas,
}

pub fn cmd_variance(args: &VarianceArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let radius = args.radius.eval(args.q);
    let ps = generate_s_q(&modulus);
    let mut reports = Vec::new();
    let run_geo = matches!(
        args.method,
        VarianceMethodArg::Geometric | VarianceMethodArg::All
    );
    let run_spec = matches!(
        args.method,
        VarianceMethodArg::Spectral | VarianceMethodArg::All
    );
    let run_mc = matches!(
        args.method,
        VarianceMethodArg::Montecarlo | VarianceMethodArg::All
    );
    if run_geo {
        match stats::variance_geometric(&ps, radius) {
            Ok(r) => reports.push(r),
            Err(e) => {
                if args.method == VarianceMethodArg::All {
                    eprintln!("note: geometric method skipped: {e}");
                } else {
                    return fail(e);
                }
            }
        }
    }
    if run_spec {
        match stats::variance_spectral(&modulus, radius, args.epsilon) {
            Ok(r) => reports.push(r),
            Err(e) => return fail(e),
        }
    }
    if run_mc {
        match stats::variance_montecarlo(&ps, radius, args.samples, args.seed) {
            Ok(r) => reports.push(r),
            Err(e) => return fail(e),
        }
    }
    let baseline = match stats::random_variance_baseline(modulus.phi(), radius) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let find = |m: stats::VarianceMethod| reports.iter().find(|r| r.method == m);
    let delta = |a: Option<&stats::VarianceReport>, b: Option<&stats::VarianceReport>| {
        match (a, b) {
            (Some(a), Some(b)) => {
                let d = (a.value - b.value).abs();
                println!(
                    "|{:?} - {:?}| = {d:.3e} (combined certified error {:.3e})",
                    a.method,
                    b.method,
                    a.certified_error + b.certified_error
                );
                Some(d)
            }
            _ => None,
        }
    };
    let deltas = VarianceDeltas {
        geometric_vs_spectral: delta(
            find(stats::VarianceMethod::Geometric),
            find(stats::VarianceMethod::Spectral),
        ),
        geometric_vs_montecarlo: delta(
            find(stats::VarianceMethod::Geometric),
            find(stats::VarianceMethod::Montecarlo),
        ),
        spectral_vs_montecarlo: delta(
            find(stats::VarianceMethod::Spectral),
            find(stats::VarianceMethod::Montecarlo),
        ),
    };
    let certified = reports
        .iter()
        .filter(|r| r.method != stats::VarianceMethod::Montecarlo)
        .map(|r| r.certified_error)
        .sum::<f64>();
    let result = VarianceResult {
        radius,
        reports,
        random_baseline: baseline,
        deltas,
    };
    let report = Report {
        config: ConfigEcho {
            command: "variance",
            threads,
            args,
        },
        result,
        certified_error: Some(certified),
        timing: emit::timing_value(started, args.output.timing, "variance"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

#[derive(Serialize)]
struct DiscrepancyResult {
    ball: stats::DiscrepancyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    boxes: Option<stats::BoxDiscrepancyReport>,
}

pub fn cmd_discrepancy(args: &DiscrepancyArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let ps = generate_s_q(&modulus);
    let ball = match stats::discrepancy_estimate(&ps, args.grid, args.radii.into()) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let boxes = if args.with_box {
        match stats::box_discrepancy_estimate(&ps, args.box_pool) {
            Ok(r) => Some(r),
            Err(e) => return fail(e),
        }
    } else {
        None
    };
    let report = Report {
        config: ConfigEcho {
            command: "discrepancy",
            threads,
            args,
        },
        result: DiscrepancyResult { ball, boxes },
        certified_error: None,
        timing: emit::timing_value(started, args.output.timing, "discrepancy"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

pub fn cmd_covering(args: &CoveringArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let ps = generate_s_q(&modulus);
    let result = match stats::covering_report(&ps, args.resolution, args.delta, args.sign) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!(
        "covering radius of S_{} in [{:.6}, {:.6}]; exponent estimates [{:.4}, {:.4}]",
        args.q,
        result.radius_lo,
        result.radius_hi,
        result.exponent_from_lo.unwrap_or(f64::NAN),
        result.exponent_from_hi.unwrap_or(f64::NAN),
    );
    let report = Report {
        config: ConfigEcho {
            command: "covering",
            threads,
            args,
        },
        result,
        certified_error: None,
        timing: emit::timing_value(started, args.output.timing, "covering"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

#[derive(Serialize)]
struct ExceptionalResult {
    radius: f64,
    threshold: f64,
    measure_lo: f64,
    measure_hi: f64,
}

pub fn cmd_exceptional(args: &ExceptionalArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let radius = args.radius.eval(args.q);
    let (lo, hi) =
        match stats::exceptional_set_measure(&modulus, radius, args.threshold, args.grid) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
    let report = Report {
        config: ConfigEcho {
            command: "exceptional",
            threads,
            args,
        },
        result: ExceptionalResult {
            radius,
            threshold: args.threshold,
            measure_lo: lo,
            measure_hi: hi,
        },
        certified_error: Some(hi - lo),
        timing: emit::timing_value(started, args.output.timing, "exceptional"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

pub fn cmd_sparse(args: &SparseArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let coset = match arith::subgroup_by_index(&modulus, args.index, args.rep) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = match stats::sparse_report(&coset, args.max_mode, args.delta) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!(
        "max nonzero-mode |Weyl sum| = {:.6e} at mode {:?}; bound tau*sqrt(q)/#H = {:.6e}",
        result.max_abs, result.argmax, result.theoretical_bound
    );
    let report = Report {
        config: ConfigEcho {
            command: "sparse",
            threads,
            args,
        },
        result,
        certified_error: None,
        timing: emit::timing_value(started, args.output.timing, "sparse"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

pub fn cmd_mixing(args: &MixingArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let modulus = match Modulus::new(args.q) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let result = match stats::mixing_report(&modulus, args.a, args.max_mode) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for row in result.rows.iter().filter(|r| r.degenerate) {
        println!(
            "degenerate mode ({}, {}, {}, {}): |coefficient| = {:.9}",
            row.mode.m, row.mode.n, row.mode.m_prime, row.mode.n_prime, row.abs
        );
    }
    let report = Report {
        config: ConfigEcho {
            command: "mixing",
            threads,
            args,
        },
        result,
        certified_error: None,
        timing: emit::timing_value(started, args.output.timing, "mixing"),
    };
    match emit::write_json(&args.output.out, &report) {
        Ok(()) => 0,
        Err(e) => fail_io(e),
    }
}

fn sweep_primes(args: &SweepArgs) -> Vec<u64> {
    match args.spacing {
        PrimeSpacing::Log => arith::log_spaced_primes(args.primes.lo, args.primes.hi, args.count),
        PrimeSpacing::First => arith::first_primes_from(args.primes.lo, args.count)
            .into_iter()
            .filter(|&p| p <= args.primes.hi.max(args.primes.lo))
            .collect(),
    }
}

fn sweep_row(
    stat: SweepStat,
    q: u64,
    radius_spec: Option<RadiusSpec>,
    grid: Option<usize>,
    epsilon: f64,
    delta: f64,
    sign: i32,
) -> modtorus::Result<stats::SweepRow> {
    let modulus = Modulus::new(q)?;
    match stat {
        SweepStat::Variance => {
            let radius = radius_spec
                .unwrap_or(RadiusSpec::Power {
                    coeff: 1.0,
                    exponent: -0.75,
                })
                .eval(q);
            let ps = generate_s_q(&modulus);
            let rep = if radius < 0.25 {
                stats::variance_geometric(&ps, radius)?
            } else {
                stats::variance_spectral(&modulus, radius, epsilon)?
            };
            let vol = std::f64::consts::PI * radius * radius;
            let phi = modulus.phi() as f64;
            Ok(stats::SweepRow {
                q,
                value: rep.value,
                aux: vec![
                    ("radius".into(), radius),
                    ("ratio_var_phi_over_vol".into(), rep.value * phi / vol),
                    (
                        "random_baseline".into(),
                        stats::random_variance_baseline(modulus.phi(), radius)?,
                    ),
                    ("certified_error".into(), rep.certified_error),
                ],
            })
        }
        SweepStat::Discrepancy => {
            let ps = generate_s_q(&modulus);
            let rep = stats::discrepancy_estimate(&ps, grid.unwrap_or(64), stats::RadiiMode::Full)?;
            Ok(stats::SweepRow {
                q,
                value: rep.estimate,
                aux: vec![
                    ("bound_qpow".into(), (q as f64).powf(-1.0 / 3.0 + 0.1)),
                    ("witness_radius".into(), rep.witness.radius),
                ],
            })
        }
        SweepStat::Covering => {
            let ps = generate_s_q(&modulus);
            let rep = stats::covering_report(&ps, grid.unwrap_or(1024), delta, sign)?;
            Ok(stats::SweepRow {
                q,
                value: rep.radius_hi,
                aux: vec![
                    ("radius_lo".into(), rep.radius_lo),
                    (
                        "exponent_hi".into(),
                        rep.exponent_from_hi.unwrap_or(f64::NAN),
                    ),
                    (
                        "avg_exponent_hi".into(),
                        rep.avg_exponent_from_hi.unwrap_or(f64::NAN),
                    ),
                    ("avg_radius_hi".into(), rep.avg.radius_hi),
                ],
            })
        }
        SweepStat::Smallscale => {
            let radius = radius_spec
                .unwrap_or(RadiusSpec::Power {
                    coeff: 1.0,
                    exponent: -0.2,
                })
                .eval(q);
            let ps = generate_s_q(&modulus);
            let dev = stats::small_scale_deviation(&ps, TorusPoint::new(0.0, 0.0), radius)?;
            let bound = 10.0 * radius.powf(2.0 / 3.0) * (q as f64).powf(-1.0 / 3.0 + 0.05);
            Ok(stats::SweepRow {
                q,
                value: dev,
                aux: vec![("radius".into(), radius), ("bound_thm_small".into(), bound)],
            })
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs, threads: usize) -> i32 {
    let started = Instant::now();
    let primes = sweep_primes(args);
    if primes.len() < 3 {
        eprintln!(
            "error: sweep needs at least 3 primes, selection produced {}",
            primes.len()
        );
        return EXIT_USAGE;
    }
    let rows: Vec<modtorus::Result<stats::SweepRow>> = primes
        .par_iter()
        .map(|&q| {
            sweep_row(
                args.stat,
                q,
                args.radius,
                args.grid,
                args.epsilon,
                args.delta,
                args.sign,
            )
        })
        .collect();
    let mut ordered = Vec::with_capacity(rows.len());
    for r in rows {
        match r {
            Ok(row) => ordered.push(row),
            Err(e) => return fail(e),
        }
    }
    let stat_name = format!("{:?}", args.stat).to_lowercase();
    let result = stats::SweepResult::from_rows(stat_name.clone(), ordered);
    if let Some(fit) = &result.fit {
        eprintln!(
            "{stat_name} fit: slope = {:.4} (stderr {:.4}), intercept = {:.4}",
            fit.slope, fit.slope_stderr, fit.intercept
        );
    }
    let code = match args.output.format {
        emit::Format::Csv => {
            let write = || -> std::io::Result<()> {
                let mut w = emit::writer_for(&args.output.out)?;
                let aux_names: Vec<&str> = result
                    .rows
                    .first()
                    .map(|r| r.aux.iter().map(|(k, _)| k.as_str()).collect())
                    .unwrap_or_default();
                write!(w, "q,value")?;
                for name in &aux_names {
                    write!(w, ",{name}")?;
                }
                writeln!(w)?;
                for row in &result.rows {
                    write!(w, "{},{:.16e}", row.q, row.value)?;
                    for (_, v) in &row.aux {
                        write!(w, ",{v:.16e}")?;
                    }
                    writeln!(w)?;
                }
                w.flush()
            };
            match write() {
                Ok(()) => 0,
                Err(e) => fail_io(e),
            }
        }
        emit::Format::Json => {
            let report = Report {
                config: ConfigEcho {
                    command: "sweep",
                    threads,
                    args,
                },
                result: &result,
                certified_error: None,
                timing: None,
            };
            match emit::write_json(&args.output.out, &report) {
                Ok(()) => 0,
                Err(e) => fail_io(e),
            }
        }
    };
    emit::timing_value(started, false, "sweep");
    code
}
