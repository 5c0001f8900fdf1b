//! Command-line front end for recurrence-matrix analysis pipelines.
//!
//! One binary with subcommands so a whole run (generate, build, verify,
//! reconstruct, analyze) stays scriptable. Every randomized step draws from
//! the global `--seed` (default 0), so repeating a pipeline with the same
//! arguments produces byte-identical output files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 insufficient data for a statistical answer.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use recur_core::{
    build_matrix, calibrate_epsilon, check_separation, correlation_sum, d2_slope,
    diagonal_histogram, estimate_k2, reconstruct, recurrence_rate, return_times, sync_index,
    test_exponential, test_independence, test_poisson_counts, twin_surrogate, Error, Metric,
    RecurrenceMatrix, SurrogateSpec, SystemKind, SystemSpec, Trajectory,
};

#[derive(Parser)]
#[command(
    name = "recur",
    version,
    about = "Recurrence-matrix analysis: build, verify, reconstruct, quantify",
    propagate_version = true
)]
struct Cli {
    /// Seed for every randomized step; the fixed default keeps runs reproducible
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Cap the worker thread pool (default: all available cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a trajectory from a built-in map or flow
    Generate(GenerateArgs),
    /// Build a recurrence matrix from a trajectory file
    Recmat(RecmatArgs),
    /// Check the separation condition and list twin columns
    Verify(VerifyArgs),
    /// Reconstruct a trajectory from a recurrence matrix alone
    Reconstruct(ReconstructArgs),
    /// Recurrence-time statistics for one reference point
    Stats(StatsArgs),
    /// Recurrence rate, diagonal histogram, K2 and D2 estimates
    Invariants(InvariantsArgs),
    /// Twin surrogates of a trajectory
    Surrogate(SurrogateArgs),
    /// Synchronization index of two recurrence matrices
    Sync(SyncArgs),
}

fn parse_metric(s: &str) -> Result<Metric, Error> {
    s.parse()
}

fn parse_system(s: &str) -> Result<SystemKind, Error> {
    s.parse()
}

#[derive(Args)]
struct GenerateArgs {
    /// System name: bernoulli, logistic, henon, lorenz or roessler
    #[arg(long, value_parser = parse_system)]
    system: SystemKind,

    /// Number of samples to record
    #[arg(long)]
    n: usize,

    /// Integration step for flows
    #[arg(long)]
    dt: Option<f64>,

    /// Iterations to discard before recording
    #[arg(long)]
    transient: Option<usize>,

    /// Initial condition as comma-separated reals, e.g. "0.3" or "1,1,20"
    #[arg(long)]
    x0: Option<String>,

    /// Override a system parameter, e.g. --param r=3.99 (repeatable)
    #[arg(long, value_name = "NAME=VALUE")]
    param: Vec<String>,

    /// Output trajectory CSV
    #[arg(long)]
    out: PathBuf,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("threshold").required(true).args(["epsilon", "rate"]))]
struct RecmatArgs {
    /// Input trajectory CSV
    #[arg(long = "in")]
    input: PathBuf,

    /// Fixed recurrence threshold
    #[arg(long)]
    epsilon: Option<f64>,

    /// Calibrate the threshold to this target recurrence rate instead
    #[arg(long)]
    rate: Option<f64>,

    /// Distance metric: euclidean, maximum or manhattan
    #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
    metric: Metric,

    /// Output matrix file
    #[arg(long)]
    out: PathBuf,

    /// Also export the matrix as a PGM image
    #[arg(long)]
    plot: Option<PathBuf>,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input matrix file
    #[arg(long = "in")]
    input: PathBuf,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Input matrix file
    #[arg(long = "in")]
    input: PathBuf,

    /// Embedding dimension of the reconstructed trajectory
    #[arg(long, default_value_t = 2)]
    m: usize,

    /// Output trajectory CSV
    #[arg(long)]
    out: PathBuf,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Input matrix file
    #[arg(long = "in")]
    input: PathBuf,

    /// Reference point index
    #[arg(long, default_value_t = 0)]
    index: usize,

    /// Window length for the Poisson count test (skipped when absent)
    #[arg(long)]
    window: Option<usize>,

    /// Export the raw return-time sample as single-column CSV
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("threshold").required(true).args(["epsilon", "rate"]))]
struct InvariantsArgs {
    /// Input trajectory CSV
    #[arg(long = "in")]
    input: PathBuf,

    /// Fixed recurrence threshold
    #[arg(long)]
    epsilon: Option<f64>,

    /// Calibrate the threshold to this target recurrence rate instead
    #[arg(long)]
    rate: Option<f64>,

    /// Distance metric: euclidean, maximum or manhattan
    #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
    metric: Metric,

    /// Shortest diagonal length entering the K2 fit
    #[arg(long, default_value_t = 2)]
    lmin: usize,

    /// Longest diagonal length entering the K2 fit
    #[arg(long, default_value_t = 12)]
    lmax: usize,

    /// Export the diagonal length histogram as CSV
    #[arg(long)]
    hist: Option<PathBuf>,

    /// Export the correlation-sum curve as CSV
    #[arg(long)]
    curve: Option<PathBuf>,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("threshold").required(true).args(["epsilon", "rate"]))]
struct SurrogateArgs {
    /// Input trajectory CSV
    #[arg(long = "in")]
    input: PathBuf,

    /// Fixed recurrence threshold
    #[arg(long)]
    epsilon: Option<f64>,

    /// Calibrate the threshold to this target recurrence rate instead
    #[arg(long)]
    rate: Option<f64>,

    /// Distance metric: euclidean, maximum or manhattan
    #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
    metric: Metric,

    /// Number of surrogates to generate
    #[arg(long, default_value_t = 1)]
    count: usize,

    /// Warn when fewer nontrivial twin classes are available
    #[arg(long, default_value_t = 1)]
    min_twin_classes: usize,

    /// Output path stem; surrogate k is written to <stem>_<k>.csv
    #[arg(long)]
    out: PathBuf,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SyncArgs {
    /// First matrix file
    #[arg(long = "in")]
    input: PathBuf,

    /// Second matrix file
    #[arg(long = "with")]
    with: PathBuf,

    /// Also write the report lines to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Collects `key: value` lines, echoing each to stdout as it arrives, and
/// optionally persists the whole report to a file at the end of the run.
struct Report {
    lines: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new() }
    }

    fn line(&mut self, key: &str, value: impl Display) {
        let rendered = format!("{key}: {value}");
        println!("{rendered}");
        self.lines.push(rendered);
    }

    fn save(&self, path: Option<&Path>) -> Result<(), Error> {
        if let Some(path) = path {
            let mut w = BufWriter::new(File::create(path)?);
            for line in &self.lines {
                writeln!(w, "{line}")?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_ok = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if usage_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    if let Some(threads) = cli.threads {
        // Ignore a second initialization; the pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InsufficientData(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let seed = cli.seed;
    match cli.command {
        Command::Generate(args) => cmd_generate(args, seed),
        Command::Recmat(args) => cmd_recmat(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reconstruct(args) => cmd_reconstruct(args, seed),
        Command::Stats(args) => cmd_stats(args, seed),
        Command::Invariants(args) => cmd_invariants(args),
        Command::Surrogate(args) => cmd_surrogate(args, seed),
        Command::Sync(args) => cmd_sync(args),
    }
}

fn cmd_generate(args: GenerateArgs, seed: u64) -> Result<(), Error> {
    let mut spec = SystemSpec::new(args.system).with_n(args.n).with_seed(seed);
    if let Some(dt) = args.dt {
        spec = spec.with_dt(dt);
    }
    if let Some(transient) = args.transient {
        spec = spec.with_transient(transient);
    }
    if let Some(x0) = &args.x0 {
        let parsed: Result<Vec<f64>, Error> = x0
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("invalid x0 component '{c}'")))
            })
            .collect();
        spec = spec.with_x0(parsed?);
    }
    for p in &args.param {
        let (name, value) = p.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("parameter '{p}' is not of the form NAME=VALUE"))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("invalid value in parameter '{p}'")))?;
        spec = spec.with_param(name.trim(), value);
    }

    let traj = spec.generate()?;
    traj.save_csv(&args.out)?;

    let mut report = Report::new();
    report.line("system", args.system);
    report.line("n", traj.len());
    report.line("dim", traj.dim());
    report.line("dt", traj.dt());
    report.line("seed", seed);
    report.line("out", args.out.display());
    report.save(args.report.as_deref())
}

/// Resolves the threshold group: a fixed epsilon passes through, a target
/// rate goes through calibration.
fn resolve_threshold(
    traj: &Trajectory,
    epsilon: Option<f64>,
    rate: Option<f64>,
    metric: Metric,
) -> Result<f64, Error> {
    match (epsilon, rate) {
        (Some(e), None) => Ok(e),
        (None, Some(r)) => Ok(calibrate_epsilon(traj, r, metric)?.epsilon),
        _ => unreachable!("clap enforces the threshold group"),
    }
}

fn cmd_recmat(args: RecmatArgs) -> Result<(), Error> {
    let traj = Trajectory::load_csv(&args.input)?;
    let epsilon = resolve_threshold(&traj, args.epsilon, args.rate, args.metric)?;
    let r = build_matrix(&traj, epsilon, args.metric)?;
    r.save(&args.out)?;
    if let Some(plot) = &args.plot {
        r.export_pgm(plot)?;
    }

    let mut report = Report::new();
    report.line("n", r.n());
    report.line("metric", r.metric().name());
    report.line("epsilon", r.epsilon());
    if let Some(rate) = args.rate {
        report.line("target_rate", rate);
    }
    report.line("recurrence_rate", recurrence_rate(&r)?);
    report.line("off_diagonal_ones", r.off_diagonal_ones());
    report.line("out", args.out.display());
    report.save(args.report.as_deref())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Error> {
    let r = RecurrenceMatrix::load(&args.input)?;
    let separation = check_separation(&r);

    let mut report = Report::new();
    report.line("n", r.n());
    report.line("epsilon", r.epsilon());
    report.line("satisfied", separation.satisfied);
    report.line("violating_pairs", separation.violating_pairs.len());
    for (i, j) in separation.violating_pairs.iter().take(10) {
        report.line("twin_pair", format_args!("{i},{j}"));
    }
    if separation.violating_pairs.len() > 10 {
        report.line("twin_pairs_omitted", separation.violating_pairs.len() - 10);
    }
    report.save(args.report.as_deref())
}

fn cmd_reconstruct(args: ReconstructArgs, seed: u64) -> Result<(), Error> {
    let r = RecurrenceMatrix::load(&args.input)?;
    let result = reconstruct(&r, args.m, seed)?;
    result.embedded.save_csv(&args.out)?;

    let mut report = Report::new();
    report.line("n", r.n());
    report.line("m", args.m);
    report.line("seed", seed);
    report.line("stress", result.stress);
    report.line("iterations", result.stress_trace.len());
    report.line("matched_epsilon", result.matched_epsilon);
    report.line("bit_agreement", result.bit_agreement);
    report.line("distance_rank_correlation", result.distance_rank_correlation);
    report.line("out", args.out.display());
    report.save(args.report.as_deref())
}

fn cmd_stats(args: StatsArgs, seed: u64) -> Result<(), Error> {
    let r = RecurrenceMatrix::load(&args.input)?;
    let sample = return_times(&r, args.index)?;
    if let Some(out) = &args.out {
        sample.save_csv(out)?;
    }

    let mut report = Report::new();
    report.line("index", args.index);
    report.line("epsilon", sample.epsilon);
    report.line("returns", sample.len());
    report.line("seed", seed);

    let exponential = test_exponential(&sample, seed)?;
    report.line("mean_return_time", exponential.mean);
    report.line("exponential_ks_statistic", exponential.statistic);
    report.line("exponential_p", exponential.p_value);

    let independence = test_independence(&sample, seed)?;
    match independence.autocorrelation {
        Some(r1) => report.line("lag1_autocorrelation", r1),
        None => report.line("lag1_autocorrelation", "undefined"),
    }
    match independence.p_value {
        Some(p) => report.line("independence_p", p),
        None => report.line("independence_p", "undefined"),
    }

    if let Some(window) = args.window {
        let poisson = test_poisson_counts(&r, args.index, window)?;
        report.line("window", window);
        report.line("windows", poisson.windows);
        report.line("mean_count", poisson.mean_count);
        report.line("dispersion", poisson.dispersion);
        report.line("poisson_p", poisson.p_value);
    }
    report.save(args.report.as_deref())
}

fn cmd_invariants(args: InvariantsArgs) -> Result<(), Error> {
    let traj = Trajectory::load_csv(&args.input)?;
    let epsilon = resolve_threshold(&traj, args.epsilon, args.rate, args.metric)?;
    let r = build_matrix(&traj, epsilon, args.metric)?;

    let mut report = Report::new();
    report.line("n", r.n());
    report.line("metric", r.metric().name());
    report.line("epsilon", epsilon);
    report.line("recurrence_rate", recurrence_rate(&r)?);

    let hist = diagonal_histogram(&r, args.lmin.max(1))?;
    report.line("diagonal_segments", hist.total());
    if let Some(path) = &args.hist {
        hist.save_csv(path)?;
        report.line("hist", path.display());
    }

    let k2 = estimate_k2(&traj, epsilon, args.metric, args.lmin..=args.lmax)?;
    report.line("k2", k2);

    // Half-decade sweep around the working threshold for the dimension fit.
    let epsilons: Vec<f64> = (-6..=2).map(|k| epsilon * (k as f64 / 2.0).exp2()).collect();
    let curve = correlation_sum(&traj, &epsilons, args.metric)?;
    if let Some(path) = &args.curve {
        save_curve_csv(path, &curve)?;
        report.line("curve", path.display());
    }
    let (d2, rms) = d2_slope(&curve)?;
    report.line("d2", d2);
    report.line("d2_fit_rms", rms);
    report.save(args.report.as_deref())
}

fn save_curve_csv(path: &Path, curve: &[(f64, f64)]) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "epsilon,correlation_sum")?;
    for (e, c) in curve {
        writeln!(w, "{e},{c}")?;
    }
    w.flush()?;
    Ok(())
}

/// Surrogate k goes to `<stem>_<k>.csv` next to the requested output path.
fn surrogate_path(out: &Path, k: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("surrogate");
    let name = format!("{stem}_{k}.csv");
    out.with_file_name(name)
}

fn cmd_surrogate(args: SurrogateArgs, seed: u64) -> Result<(), Error> {
    let traj = Trajectory::load_csv(&args.input)?;
    let epsilon = resolve_threshold(&traj, args.epsilon, args.rate, args.metric)?;
    let r = build_matrix(&traj, epsilon, args.metric)?;
    let spec = SurrogateSpec {
        count: args.count,
        seed,
        min_twin_classes: args.min_twin_classes,
    };
    let set = twin_surrogate(&traj, &r, &spec)?;

    let mut report = Report::new();
    report.line("n", traj.len());
    report.line("epsilon", epsilon);
    report.line("count", args.count);
    report.line("seed", seed);
    report.line("nontrivial_twin_classes", set.nontrivial_twin_classes);
    if let Some(warning) = &set.warning {
        report.line("warning", warning);
    }
    for (k, surrogate) in set.surrogates.iter().enumerate() {
        let path = surrogate_path(&args.out, k);
        surrogate.save_csv_with_comments(
            &path,
            &[
                ("seed", seed.to_string()),
                ("surrogate", k.to_string()),
                ("epsilon", epsilon.to_string()),
            ],
        )?;
        report.line("file", path.display());
    }
    report.save(args.report.as_deref())
}

fn cmd_sync(args: SyncArgs) -> Result<(), Error> {
    let a = RecurrenceMatrix::load(&args.input)?;
    let b = RecurrenceMatrix::load(&args.with)?;
    let value = sync_index(&a, &b)?;

    let mut report = Report::new();
    report.line("n", a.n());
    report.line("sync_index", value);
    report.save(args.report.as_deref())
}
