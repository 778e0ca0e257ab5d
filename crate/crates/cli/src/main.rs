use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use whtrim_core::automata::{
    build_compressed_with_budget, build_isomorphic_with_budget, build_minimal_with_budget, state_count, Automaton,
    AutomatonSpec, StateBudget,
};
use whtrim_core::jsr::{
    synthetic_pair, verify_stability, ClosedLoopPair, GeneratorOptions, JsrOptions, JsrResult, MissStrategy,
    Representation, Verdict, DEFAULT_DELTA, DEFAULT_ENTRY_BUDGET, DEFAULT_MAX_ITERATIONS,
};
use whtrim_core::language::growth;
use whtrim_core::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 10;
const EXIT_LOWER_ONE: u8 = 11;

const RESULT_HEADER: [&str; 10] = [
    "name",
    "constraint",
    "states",
    "verdict",
    "lower",
    "upper",
    "iterations",
    "stored_entries",
    "representation",
    "delta",
];

#[derive(Parser)]
#[command(name = "whtrim", version, about = "Weakly-hard constraint automata and stability verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an automaton and write it as CSV or DOT.
    Build(BuildArgs),
    /// Closed-form state counts of Trim(m,k,c) over a range of c.
    Stats(StatsArgs),
    /// Growth constants a, lambda of the language cardinality.
    Growth(GrowthArgs),
    /// Verify stability of a closed-loop pair under a constraint.
    Verify(VerifyArgs),
    /// Verify one pair under Trim(m,k,c) for a range of c.
    Sweep(SweepArgs),
    /// Generate a synthetic closed-loop pair.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Minimal,
    Isomorphic,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepArg {
    Factored,
    Explicit,
}

impl From<RepArg> for Representation {
    fn from(r: RepArg) -> Self {
        match r {
            RepArg::Factored => Representation::Factored,
            RepArg::Explicit => Representation::Explicit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Hold,
    Zero,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: u32,
    /// Compression factor; builds Trim(m,k,c) when given.
    #[arg(long)]
    c: Option<u32>,
    /// Construction used when no compression factor is given.
    #[arg(long, value_enum, default_value = "minimal")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; CSV output also writes a `.labels.csv` sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    c_min: u32,
    /// Defaults to k - m.
    #[arg(long)]
    c_max: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GrowthArgs {
    /// Constraints as anymiss:m:k, anyhit:h:k or trim:m:k:c.
    #[arg(required = true)]
    constraints: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct JsrArgs {
    #[arg(long, value_enum, default_value = "factored")]
    representation: RepArg,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, default_value_t = DEFAULT_ENTRY_BUDGET)]
    entry_budget: u128,
}

impl JsrArgs {
    fn options(&self) -> JsrOptions {
        JsrOptions {
            delta: self.delta,
            max_iterations: self.max_iterations,
            entry_budget: self.entry_budget,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Closed-loop pair JSON file.
    #[arg(long)]
    pair: PathBuf,
    /// anymiss:m:k, anyhit:h:k or trim:m:k:c.
    #[arg(long)]
    constraint: String,
    #[command(flatten)]
    jsr: JsrArgs,
    /// Result CSV file (in addition to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration bounds CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// `iter,space,time` summary CSV; time is wall clock and not reproducible.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    pair: PathBuf,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    c_min: u32,
    #[arg(long)]
    c_max: Option<u32>,
    #[command(flatten)]
    jsr: JsrArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Spectral radius of phi_hit.
    #[arg(long, default_value_t = 0.6)]
    sr: f64,
    /// Spectral radius of the open-loop block of phi_miss.
    #[arg(long, default_value_t = 1.1)]
    open_loop_sr: f64,
    #[arg(long, value_enum, default_value = "hold")]
    strategy: StrategyArg,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StateBudgetExceeded { .. } | Error::SizeBudgetExceeded { .. } | Error::LimitExceeded { .. } => {
                Failure::Budget(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Growth(a) => cmd_growth(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}

fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink))
}

/// `x` with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

fn state_budget() -> Result<StateBudget, Failure> {
    Ok(StateBudget::from_env()?)
}

fn compression_range(m: u32, k: u32, c_min: u32, c_max: Option<u32>) -> Result<std::ops::RangeInclusive<u32>, Failure> {
    whtrim_core::constraints::WeaklyHardConstraint::any_miss(m, k)?;
    let c_max = c_max.unwrap_or(k - m);
    if c_min == 0 || c_min > c_max || c_max > k - m {
        return Err(Failure::Input(format!(
            "compression range [{c_min}, {c_max}] must lie within [1, {}]",
            k - m
        )));
    }
    Ok(c_min..=c_max)
}

fn cmd_build(args: &BuildArgs) -> CmdResult {
    let budget = state_budget()?;
    match (args.c, args.kind) {
        (Some(c), _) => {
            AutomatonSpec::trim(args.m, args.k, c)?;
            emit_automaton(&build_compressed_with_budget(args.m, args.k, c, budget)?, args)
        }
        (None, Kind::Minimal) => emit_automaton(&build_minimal_with_budget(args.m, args.k, budget)?, args),
        (None, Kind::Isomorphic) => emit_automaton(&build_isomorphic_with_budget(args.m, args.k, budget)?, args),
    }
}

fn emit_automaton<L: std::fmt::Display>(a: &Automaton<L>, args: &BuildArgs) -> CmdResult {
    if let Some(path) = &args.out {
        match args.format {
            Format::Csv => {
                let mut w = csv_writer(Some(path))?;
                w.write_record(["src", "symbol", "dst"])?;
                for (src, sym, dst) in a.transitions() {
                    w.write_record([src.to_string(), sym.to_string(), dst.to_string()])?;
                }
                w.flush()?;
                let mut l = csv_writer(Some(&sidecar_path(path)))?;
                l.write_record(["index", "label"])?;
                for (i, label) in a.labels().iter().enumerate() {
                    l.write_record([i.to_string(), label.to_string()])?;
                }
                l.flush()?;
            }
            Format::Dot => {
                let mut f = io::BufWriter::new(fs::File::create(path)?);
                writeln!(f, "digraph \"{}\" {{", a.params())?;
                writeln!(f, "  rankdir=LR;")?;
                writeln!(f, "  start [shape=point];")?;
                for (i, label) in a.labels().iter().enumerate() {
                    writeln!(f, "  {i} [label=\"{label}\"];")?;
                }
                writeln!(f, "  start -> {};", a.initial())?;
                for (src, sym, dst) in a.transitions() {
                    writeln!(f, "  {src} -> {dst} [label=\"{sym}\"];")?;
                }
                writeln!(f, "}}")?;
                f.flush()?;
            }
        }
    }
    println!("states={}", a.len());
    println!("transitions={}", a.transition_count());
    Ok(0)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.labels.csv"))
}

fn cmd_stats(args: &StatsArgs) -> CmdResult {
    let range = compression_range(args.m, args.k, args.c_min, args.c_max)?;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["c", "states"])?;
    for c in range {
        w.write_record([c.to_string(), state_count(args.m, args.k, c)?.to_string()])?;
    }
    w.flush()?;
    Ok(0)
}

fn cmd_growth(args: &GrowthArgs) -> CmdResult {
    let budget = state_budget()?;
    let specs: Vec<AutomatonSpec> = args
        .constraints
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, Error>>()?;
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["constraint", "states", "a", "lambda"])?;
    for spec in specs {
        let a = spec.build(budget)?;
        let g = growth(&a)?;
        w.write_record([
            spec.to_string(),
            a.len().to_string(),
            format!("{:.3}", g.a),
            format!("{:.3}", g.lambda),
        ])?;
    }
    w.flush()?;
    Ok(0)
}

fn load_pair(path: &Path) -> Result<ClosedLoopPair, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    ClosedLoopPair::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn result_record(pair: &ClosedLoopPair, spec: &AutomatonSpec, states: usize, r: &JsrResult) -> [String; 10] {
    [
        pair.name.clone(),
        spec.to_string(),
        states.to_string(),
        r.verdict.to_string(),
        sig12(r.lower),
        sig12(r.upper),
        r.iterations.to_string(),
        r.stored_entries.to_string(),
        r.representation.to_string(),
        format!("{}", r.delta),
    ]
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::CertifiedStable => 0,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::LowerBoundAtLeastOne => EXIT_LOWER_ONE,
    }
}

fn validate_jsr(args: &JsrArgs) -> Result<(), Failure> {
    if !(args.delta > 0.0) || !args.delta.is_finite() {
        return Err(Failure::Input(format!("--delta must be positive, got {}", args.delta)));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    validate_jsr(&args.jsr)?;
    let spec: AutomatonSpec = args.constraint.parse()?;
    let pair = load_pair(&args.pair)?;
    let a = spec.build(state_budget()?)?;
    let start = Instant::now();
    let r = verify_stability(&pair, &a, args.jsr.representation.into(), &args.jsr.options())?;
    let elapsed = start.elapsed().as_secs_f64();
    let record = result_record(&pair, &spec, a.len(), &r);

    let mut w = csv_writer(None)?;
    w.write_record(RESULT_HEADER)?;
    w.write_record(&record)?;
    w.flush()?;
    if let Some(path) = &args.out {
        let mut w = csv_writer(Some(path))?;
        w.write_record(RESULT_HEADER)?;
        w.write_record(&record)?;
        w.flush()?;
    }
    if let Some(path) = &args.history {
        let mut w = csv_writer(Some(path))?;
        w.write_record(["iteration", "lower", "upper", "stored_entries", "frontier"])?;
        for s in &r.history {
            w.write_record([
                s.iteration.to_string(),
                sig12(s.lower),
                sig12(s.upper),
                s.stored_entries.to_string(),
                s.frontier.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.table {
        let mut w = csv_writer(Some(path))?;
        w.write_record(["iter", "space", "time"])?;
        w.write_record([r.iterations.to_string(), r.stored_entries.to_string(), format!("{elapsed:.3}")])?;
        w.flush()?;
    }
    Ok(verdict_code(r.verdict))
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    validate_jsr(&args.jsr)?;
    let range = compression_range(args.m, args.k, args.c_min, args.c_max)?;
    let pair = load_pair(&args.pair)?;
    let budget = state_budget()?;
    let opts = args.jsr.options();
    let rep: Representation = args.jsr.representation.into();
    let cs: Vec<u32> = range.collect();
    let rows: Vec<[String; 8]> = cs
        .par_iter()
        .map(|&c| {
            let states = state_count(args.m, args.k, c).map(|n| n.to_string()).unwrap_or_default();
            let run = AutomatonSpec::trim(args.m, args.k, c)
                .and_then(|spec| spec.build(budget))
                .and_then(|a| verify_stability(&pair, &a, rep, &opts));
            match run {
                Ok(r) => [
                    c.to_string(),
                    states,
                    r.verdict.to_string(),
                    sig12(r.lower),
                    sig12(r.upper),
                    r.iterations.to_string(),
                    r.stored_entries.to_string(),
                    String::new(),
                ],
                Err(e) => [
                    c.to_string(),
                    states,
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ],
            }
        })
        .collect();
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["c", "states", "verdict", "lower", "upper", "iterations", "stored_entries", "error"])?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(0)
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    if !(args.sr > 0.0 && args.sr < 1.1) {
        return Err(Failure::Input(format!("--sr must lie in (0, 1.1), got {}", args.sr)));
    }
    if args.dim == 0 || args.dim > 10 {
        return Err(Failure::Input(format!("--dim must lie in [1, 10], got {}", args.dim)));
    }
    let strategy = match args.strategy {
        StrategyArg::Hold => MissStrategy::Hold,
        StrategyArg::Zero => MissStrategy::Zero,
    };
    let mut pair = synthetic_pair(&GeneratorOptions {
        seed: args.seed,
        dim: args.dim,
        strategy,
        hit_radius: args.sr,
        open_loop_radius: args.open_loop_sr,
    })?;
    if let Some(name) = &args.name {
        pair.name = name.clone();
    }
    let mut text = pair.to_json();
    text.push('\n');
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(0)
}
