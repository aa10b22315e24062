use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use zonetsp::sweep::{filter_report, format_entry_line, format_matching, SweepOutcome};
use zonetsp::zoning::{auto_zone, load_zone_plan};
use zonetsp::{
    oracle, run_sweep, svg, tsplib, Instance, OracleBudget, SweepError, SweepOptions, ZonePlan,
};

#[derive(Parser)]
#[command(
    name = "zonetsp",
    version,
    about = "TSP solving by lengthwise zone decomposition",
    after_help = "Exit codes: 0 success, 1 usage error, 2 parse error, 3 infeasible plan."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print the tour report
    Solve(SolveArgs),
    /// Recompute and validate a tour file's length
    Verify(VerifyArgs),
    /// Render an instance, its zones and optionally a tour as SVG
    Plot(PlotArgs),
    /// Time repeated solves
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ZoneSource {
    /// Zone config file (zone/boundary/crossings lines)
    #[arg(long, value_name = "FILE")]
    zones: Option<PathBuf>,
    /// Build zones automatically with this many vertices per zone
    #[arg(long, value_name = "SIZE")]
    auto_zones: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    source: ZoneSource,
    /// Cap on crossing-edge counts per boundary (even, >= 2)
    #[arg(long, default_value_t = 4, value_name = "N")]
    max_n: usize,
    /// Retain all co-minimal candidates per boundary choice
    #[arg(long)]
    keep_ties: bool,
    /// Print per-zone candidate lines and filtering summaries
    #[arg(long)]
    trace: bool,
    /// Write an SVG of the zones and the tour
    #[arg(long, value_name = "FILE")]
    svg_out: Option<PathBuf>,
    /// Compare against the exact subset-DP solver (small instances)
    #[arg(long)]
    oracle_check: bool,
    /// Rotate coordinates before auto-zoning (sweep direction only;
    /// distances and reported coordinates stay unrotated)
    #[arg(long, value_name = "DEG")]
    rotate_degrees: Option<f64>,
    /// Worker threads for the per-zone fan-out (env: ZONETSP_THREADS)
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    tour: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    instance: PathBuf,
    #[command(flatten)]
    source: ZoneSource,
    /// Tour file to draw as a closed polyline
    #[arg(long, value_name = "FILE")]
    tour: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4, value_name = "N")]
    max_n: usize,
    #[arg(long, value_name = "DEG")]
    rotate_degrees: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    instance: PathBuf,
    #[command(flatten)]
    source: ZoneSource,
    #[arg(long, default_value_t = 4, value_name = "N")]
    max_n: usize,
    /// Solve repetitions
    #[arg(long, default_value_t = 5, value_name = "R")]
    runs: usize,
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

enum CliError {
    Usage(String),
    Parse(String),
    Infeasible(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Infeasible(m) => m,
        }
    }
}

impl From<tsplib::ParseError> for CliError {
    fn from(e: tsplib::ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<zonetsp::ZoneError> for CliError {
    fn from(e: zonetsp::ZoneError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Plan(inner) => CliError::Parse(inner.to_string()),
            SweepError::Metric(inner) => CliError::Parse(inner.to_string()),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(tsplib::parse_instance(&read_file(path)?)?)
}

/// Rotate around the coordinate centroid. Only the sweep direction changes;
/// callers keep using the original instance for distances.
fn rotated(inst: &Instance, degrees: f64) -> Instance {
    let n = inst.dimension() as f64;
    let (mut cx, mut cy) = (0.0, 0.0);
    for id in inst.vertex_ids() {
        let (x, y) = inst.coord(id);
        cx += x;
        cy += y;
    }
    cx /= n;
    cy /= n;
    let (s, c) = degrees.to_radians().sin_cos();
    let coords = inst
        .vertex_ids()
        .map(|id| {
            let (x, y) = inst.coord(id);
            let (dx, dy) = (x - cx, y - cy);
            (cx + dx * c - dy * s, cy + dx * s + dy * c)
        })
        .collect();
    Instance::new(inst.name.clone(), inst.metric, coords)
}

fn build_plan(
    inst: &Instance,
    source: &ZoneSource,
    max_n: usize,
    rotate_degrees: Option<f64>,
) -> Result<ZonePlan, CliError> {
    if max_n < 2 || !max_n.is_multiple_of(2) {
        return Err(CliError::Usage(format!("--max-n must be even and >= 2, got {max_n}")));
    }
    let mut plan = match (&source.zones, source.auto_zones) {
        (Some(path), None) => load_zone_plan(&read_file(path)?, inst)?,
        (None, Some(size)) => {
            let zoning_view = match rotate_degrees {
                Some(deg) => rotated(inst, deg),
                None => inst.clone(),
            };
            auto_zone(&zoning_view, size, max_n)?
        }
        _ => unreachable!("clap group enforces exactly one zone source"),
    };
    for zone in &mut plan.zones {
        zone.allowed_crossings.retain(|&n| n <= max_n);
    }
    plan.validate(inst)?;
    Ok(plan)
}

fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("ZONETSP_THREADS").ok().and_then(|v| v.parse().ok()))
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("rayon pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

fn seq_to_string(seq: &[tsplib::VertexId]) -> String {
    seq.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn print_report(inst: &Instance, plan: &ZonePlan, out: &SweepOutcome, trace: bool) {
    println!("instance: {}", inst.name);
    println!("dimension: {}", inst.dimension());
    println!("metric: {}", inst.metric);
    println!("zones: {}", plan.len());
    let report = filter_report(&out.states);
    for (i, (zone, count)) in out.stage_counts.iter().enumerate() {
        println!("zone {zone} candidates: {count}");
        if !trace {
            continue;
        }
        let state = &out.states[i];
        for entry in &state.entries {
            println!("{}", format_entry_line(&state.choices[entry.choice_idx], entry));
        }
        if i > 0 {
            let prev = &out.states[i - 1];
            let t = &report.transitions[i - 1];
            let labels = |ids: &[usize]| -> String {
                if ids.is_empty() {
                    return "-".to_string();
                }
                ids.iter()
                    .map(|&idx| {
                        format_matching(&prev.choices[prev.entries[idx].choice_idx])
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            println!("zone {zone} survivors: {}", labels(&t.referenced));
            println!("zone {zone} filtered: {}", labels(&t.filtered));
        }
    }
    println!("tour length: {}", out.tour.length);
    println!("tour: {}", seq_to_string(&out.tour.seq));
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let plan = build_plan(&inst, &args.source, args.max_n, args.rotate_degrees)?;
    let opts = SweepOptions { keep_ties: args.keep_ties, record_states: args.trace };
    let started = Instant::now();
    let outcome = with_threads(resolve_threads(args.threads), || run_sweep(&inst, &plan, &opts))?;
    let elapsed = started.elapsed();
    print_report(&inst, &plan, &outcome, args.trace);
    if args.oracle_check {
        let budget = OracleBudget::default();
        match oracle::held_karp(&inst, &budget) {
            Ok(exact) if exact.length == outcome.tour.length => println!("oracle: MATCH"),
            Ok(exact) => println!(
                "oracle: MISMATCH (sweep {} vs exact {})",
                outcome.tour.length, exact.length
            ),
            Err(oracle::OracleError::BudgetExceeded { size, limit }) => {
                println!("oracle: SKIPPED (dimension {size} exceeds budget {limit})")
            }
            Err(e) => return Err(CliError::Infeasible(e.to_string())),
        }
    }
    if let Some(path) = &args.svg_out {
        write_file(path, &svg::render(&inst, Some(&plan), Some(&outcome.tour.seq)))?;
    }
    eprintln!("elapsed ms: {:.1}", elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let seq = tsplib::parse_tour(&read_file(&args.tour)?)?;
    let length = inst.tour_length(&seq)?;
    println!("tour length: {length}");
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let plan = build_plan(&inst, &args.source, args.max_n, args.rotate_degrees)?;
    let tour_seq = match &args.tour {
        Some(path) => {
            let seq = tsplib::parse_tour(&read_file(path)?)?;
            inst.tour_length(&seq)?;
            Some(seq)
        }
        None => None,
    };
    let svg = svg::render(&inst, Some(&plan), tour_seq.as_deref());
    match &args.out {
        Some(path) => write_file(path, &svg)?,
        None => print!("{svg}"),
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be positive".into()));
    }
    let inst = load_instance(&args.instance)?;
    let plan = build_plan(&inst, &args.source, args.max_n, None)?;
    let opts = SweepOptions::default();
    let threads = resolve_threads(args.threads);
    println!("instance: {}", inst.name);
    println!("zones: {}", plan.len());
    println!("runs: {}", args.runs);
    let mut best_ms = f64::INFINITY;
    let mut outcome = None;
    for run in 1..=args.runs {
        let started = Instant::now();
        let result = with_threads(threads, || run_sweep(&inst, &plan, &opts))?;
        let ms = started.elapsed().as_secs_f64() * 1e3;
        best_ms = best_ms.min(ms);
        println!("run {run} ms: {ms:.2}");
        outcome = Some(result);
    }
    let outcome = outcome.unwrap();
    println!("best ms: {best_ms:.2}");
    println!(
        "combinations: {}",
        outcome
            .stage_counts
            .iter()
            .map(|(_, c)| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("tour length: {}", outcome.tour.length);
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                eprint!("{e}");
                std::process::exit(1);
            }
        },
    };
    let result = match &cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Plot(args) => cmd_plot(args),
        Cmd::Bench(args) => cmd_bench(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
