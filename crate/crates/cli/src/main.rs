//! `oblsynth` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; realizable; strategy verified; no oracle mismatch |
//! | 1 | unrealizable; strategy rejected; oracle mismatch; benchmark disagreement |
//! | 2 | usage, syntax, fragment or format error |
//! | 3 | state budget, encoding or BDD node cap exceeded |
//! | 4 | file system error |
//! | 5 | internal error, including a synthesized strategy failing verification |

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use oblsynth::automata::hoa::{export_hoa, parse_hoa};
use oblsynth::automata::{compile_obligation, compute_ranks, minimize_dwa, Dwa, MinMode};
use oblsynth::bench::{cross_check, emit_plot, run_job, write_csv, Family, Job, Row, Status};
use oblsynth::config::RunConfig;
use oblsynth::logic::{parse_spec, ObligationFormula, VariablePartition};
use oblsynth::oracle::{run_campaign, CampaignOptions, Fault};
use oblsynth::solve::SolverKind;
use oblsynth::strategy::{export_strategy, import_strategy, strategy_to_dot, verify_strategy};
use oblsynth::synth::synthesize;
use oblsynth::Error;

#[derive(Parser)]
#[command(name = "oblsynth", version, about = "Reactive synthesis for obligation properties over finite-trace prefixes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a specification (or re-minimize a HOA automaton) to a minimal weak automaton.
    Translate(TranslateArgs),
    /// Decide realizability and write a verified strategy.
    Synth(SynthArgs),
    /// Decide realizability only.
    Solve(SolveArgs),
    /// Check a strategy file against a specification.
    Verify(VerifyArgs),
    /// Run the benchmark families, one subprocess per cell.
    Bench(BenchArgs),
    /// Differential checks against brute-force oracles on random instances.
    OracleCheck(OracleArgs),
    /// One benchmark cell; used by `bench`.
    #[command(hide = true)]
    BenchCell(CellArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Hoa,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    FlipAccepting,
}

#[derive(Args, Clone)]
struct Tuning {
    /// Minimization mode.
    #[arg(long, default_value = "component")]
    min_mode: MinMode,
    /// Products are minimized while they have at most this many states.
    #[arg(long, default_value_t = oblsynth::automata::pipeline::DEFAULT_TAU)]
    min_threshold: usize,
    /// Per-component automaton state budget.
    #[arg(long)]
    state_budget: Option<usize>,
    /// BDD node cap.
    #[arg(long)]
    node_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat for more detail on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct SpecInput {
    /// Formula file.
    spec: PathBuf,
    /// Partition file; defaults to the spec path with extension `.part`.
    #[arg(long)]
    part: Option<PathBuf>,
}

#[derive(Args)]
struct TranslateArgs {
    /// Formula file, or a HOA automaton to re-minimize.
    input: PathBuf,
    #[arg(long)]
    part: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hoa")]
    format: Format,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    input: SpecInput,
    #[arg(long, default_value = "buchi")]
    solver: SolverKind,
    /// Strategy file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `hoa` writes the strategy text format, `dot` a graph.
    #[arg(long, value_enum, default_value = "hoa")]
    format: Format,
    /// Skip strategy verification.
    #[arg(long)]
    no_verify: bool,
    /// Seconds; exceeding it is reported after the run.
    #[arg(long)]
    time_limit: Option<f64>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: SpecInput,
    #[arg(long, default_value = "buchi")]
    solver: SolverKind,
    /// JSON result record.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: SpecInput,
    /// Strategy file written by `synth`.
    #[arg(long)]
    strategy: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct BenchArgs {
    /// Families to run; all benchmark families by default.
    #[arg(long = "family", value_delimiter = ',')]
    families: Vec<Family>,
    #[arg(long = "solver", value_delimiter = ',')]
    solvers: Vec<SolverKind>,
    /// Minimization modes; both by default.
    #[arg(long = "mode", value_delimiter = ',')]
    modes: Vec<MinMode>,
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    /// Largest size; each family's desk default when absent.
    #[arg(long)]
    max_size: Option<usize>,
    /// Seconds per cell.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Also write `<out>.svg` and `<out>.aggregated.csv`.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    no_verify: bool,
    #[arg(long, default_value_t = oblsynth::automata::pipeline::DEFAULT_TAU)]
    min_threshold: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CellArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    solver: SolverKind,
    #[arg(long)]
    min_mode: MinMode,
    /// Full run configuration as JSON.
    #[arg(long)]
    config: String,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random LTLf formulas checked against their traces.
    #[arg(long, default_value_t = 500)]
    ltlf: usize,
    /// Random obligation formulas checked against their lassos.
    #[arg(long, default_value_t = 200)]
    obligations: usize,
    /// Random weak games solved by every solver.
    #[arg(long, default_value_t = 1000)]
    games: usize,
    /// Largest component automaton in a random game.
    #[arg(long, default_value_t = 8)]
    game_states: usize,
    #[arg(long, default_value_t = 6)]
    trace_len: usize,
    /// Corrupt the automata under test to check that the checks fire.
    #[arg(long, value_enum)]
    fault: Option<FaultArg>,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command: either a pipeline error or a plain exit status.
enum Failure {
    Err(Error),
    Code(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

impl From<oblsynth::logic::LogicError> for Failure {
    fn from(e: oblsynth::logic::LogicError) -> Self {
        Failure::Err(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Translate(a) => translate(a),
        Cmd::Synth(a) => synth(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Bench(a) => bench(a),
        Cmd::OracleCheck(a) => oracle_check(a),
        Cmd::BenchCell(a) => bench_cell(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Code(c)) => ExitCode::from(c),
        Err(Failure::Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(command: &str, t: &Tuning, out: &Option<PathBuf>) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        command: command.into(),
        min_mode: t.min_mode,
        min_threshold: t.min_threshold,
        state_budget: t.state_budget.unwrap_or(d.state_budget),
        node_cap: t.node_cap.unwrap_or(d.node_cap),
        seed: t.seed,
        verbosity: t.verbose,
        out: out.clone(),
        ..d
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes through a temporary sibling and renames, so a failed command never
/// leaves a truncated file behind.
fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, path)).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_spec(input: &SpecInput) -> Result<(ObligationFormula, VariablePartition), Failure> {
    let formula = read(&input.spec)?;
    let part = input.part.clone().unwrap_or_else(|| input.spec.with_extension("part"));
    Ok(parse_spec(&formula, &read(&part)?)?)
}

fn hash_lines(cfg: &RunConfig, prefix: &str) -> String {
    cfg.echo_lines().iter().map(|l| format!("{prefix}{l}\n")).collect()
}

fn rank_histogram(d: &Dwa) -> String {
    let ranked = compute_ranks(d);
    let ranks = ranked.rank.unwrap_or_default();
    let mut counts = std::collections::BTreeMap::new();
    for r in ranks {
        *counts.entry(r).or_insert(0usize) += 1;
    }
    counts.iter().map(|(r, c)| format!("{r}:{c}")).collect::<Vec<_>>().join(" ")
}

fn translate(a: TranslateArgs) -> Outcome {
    let mut cfg = config("translate", &a.tuning, &a.out);
    cfg.verify = false;
    let text = read(&a.input)?;
    let (dwa, name) = if text.trim_start().starts_with("HOA:") {
        (minimize_dwa(&Dwa::new(parse_hoa(&text)?)), a.input.display().to_string())
    } else {
        let part = a.part.clone().unwrap_or_else(|| a.input.with_extension("part"));
        let (psi, partition) = parse_spec(&text, &read(&part)?)?;
        let compiled = compile_obligation(&psi, &partition.alphabet(), &cfg.compile_options())?;
        (compiled.minimal(), psi.to_string())
    };
    let body = match a.format {
        Format::Hoa => export_hoa(&dwa.aut, &name, Some(&cfg.echo_lines().join("\n"))),
        Format::Dot => format!("{}{}", hash_lines(&cfg, "// "), dwa.aut.to_dot(&name)),
    };
    emit(&a.out, &body)?;
    let summary = format!("states: {}\nranks: {}", dwa.len(), rank_histogram(&dwa));
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn over_limit(limit: Option<f64>, took: Duration) -> bool {
    limit.is_some_and(|l| took.as_secs_f64() > l)
}

fn synth(a: SynthArgs) -> Outcome {
    let mut cfg = config("synth", &a.tuning, &a.out);
    cfg.solver = a.solver;
    cfg.verify = !a.no_verify;
    if let Some(l) = a.time_limit {
        cfg.time_limit = l;
    }
    let (psi, part) = load_spec(&a.input)?;
    let clock = Instant::now();
    let s = synthesize(&psi, &part, &cfg, true)?;
    let took = clock.elapsed();
    if over_limit(a.time_limit, took) {
        eprintln!("error: time limit of {}s exceeded ({:.3}s)", cfg.time_limit, took.as_secs_f64());
        return Err(Failure::Code(3));
    }
    if cfg.verbosity > 0 {
        eprintln!(
            "solved in {:.3}s: {} outer, {} inner iterations, {} BDD ops",
            took.as_secs_f64(),
            s.result.stats.outer_iters,
            s.result.stats.inner_iters,
            s.result.stats.bdd_ops
        );
    }
    if !s.result.realizable {
        println!("UNREALIZABLE");
        return Err(Failure::Code(1));
    }
    let strategy = s.strategy.as_ref().expect("realizable runs extract a strategy");
    let mut header = cfg.echo_lines();
    if let Some(v) = &s.verification {
        if !v.verdict.passed() {
            println!("REALIZABLE");
            return Err(Error::Internal(format!("synthesized strategy failed verification: {}", v.verdict.name())).into());
        }
        header.push(format!("verification {}", v.to_json()));
    }
    let body = match a.format {
        Format::Hoa => export_strategy(strategy, &header),
        Format::Dot => format!("{}{}", header.iter().map(|h| format!("// {h}\n")).collect::<String>(), strategy_to_dot(strategy)),
    };
    if a.out.is_some() {
        emit(&a.out, &body)?;
    }
    println!("REALIZABLE");
    if let Some(v) = &s.verification {
        println!("verification: {}", v.verdict.name());
    }
    if a.out.is_none() {
        print!("{body}");
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Outcome {
    let mut cfg = config("solve", &a.tuning, &a.out);
    cfg.solver = a.solver;
    cfg.verify = false;
    if let Some(l) = a.time_limit {
        cfg.time_limit = l;
    }
    let (psi, part) = load_spec(&a.input)?;
    let clock = Instant::now();
    let s = synthesize(&psi, &part, &cfg, false)?;
    let took = clock.elapsed();
    if over_limit(a.time_limit, took) {
        eprintln!("error: time limit of {}s exceeded ({:.3}s)", cfg.time_limit, took.as_secs_f64());
        return Err(Failure::Code(3));
    }
    let record = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&cfg.to_json()).expect("valid json"),
        "realizable": s.result.realizable,
        "wall_ms": took.as_secs_f64() * 1000.0,
        "arena_bits": s.arena.num_state_bits(),
        "outer_iters": s.result.stats.outer_iters,
        "inner_iters": s.result.stats.inner_iters,
        "bdd_ops": s.result.stats.bdd_ops,
    });
    if a.out.is_some() {
        emit(&a.out, &format!("{record:#}\n"))?;
    }
    println!("{}", if s.result.realizable { "REALIZABLE" } else { "UNREALIZABLE" });
    if s.result.realizable {
        Ok(())
    } else {
        Err(Failure::Code(1))
    }
}

fn verify(a: VerifyArgs) -> Outcome {
    let cfg = config("verify", &a.tuning, &None);
    let (psi, part) = load_spec(&a.input)?;
    let strategy = import_strategy(&read(&a.strategy)?)?;
    if strategy.inputs != part.inputs || strategy.outputs != part.outputs {
        return Err(Error::Format("strategy variables do not match the partition".into()).into());
    }
    let compiled = compile_obligation(&psi, &part.alphabet(), &cfg.compile_options())?;
    let v = verify_strategy(&compiled.dwas, &compiled.combiner, &strategy, &cfg.verify_options());
    println!("{}", v.verdict.name());
    if cfg.verbosity > 0 {
        eprintln!("{}", v.to_json());
    }
    if v.verdict.passed() {
        Ok(())
    } else {
        Err(Failure::Code(1))
    }
}

/// Runs one cell in a child process and kills it at the time limit.
fn run_cell(job: &Job, cfg: &RunConfig) -> Row {
    let exe = std::env::current_exe().expect("own executable");
    let clock = Instant::now();
    let child = Command::new(exe)
        .args(["bench-cell", "--family", job.family.name(), "--size", &job.size.to_string()])
        .args(["--solver", job.solver.name(), "--min-mode", job.min_mode.name()])
        .args(["--config", &cfg.to_json()])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(_) => return Row::empty(job, Status::Error, 0.0),
    };
    let limit = Duration::from_secs_f64(cfg.time_limit);
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break Some(s),
            Ok(None) if clock.elapsed() > limit => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(_) => break None,
        }
    };
    let wall_ms = clock.elapsed().as_secs_f64() * 1000.0;
    let Some(status) = status else {
        return Row::empty(job, Status::Timeout, wall_ms);
    };
    let mut out = String::new();
    if let Some(mut s) = child.stdout.take() {
        let _ = s.read_to_string(&mut out);
    }
    match serde_json::from_str::<Row>(out.trim()) {
        Ok(r) if status.success() => r,
        _ if status.code() == Some(3) => Row::empty(job, Status::Memout, wall_ms),
        _ => Row::empty(job, Status::Error, wall_ms),
    }
}

fn bench_cell(a: CellArgs) -> Outcome {
    let cfg: RunConfig =
        serde_json::from_str(&a.config).map_err(|e| Error::Format(format!("config: {e}")))?;
    let job = Job {
        family: a.family,
        size: a.size,
        solver: a.solver,
        min_mode: a.min_mode,
    };
    let row = run_job(&job, &cfg);
    println!("{}", serde_json::to_string(&row).expect("row serializes"));
    Ok(())
}

fn bench(a: BenchArgs) -> Outcome {
    let cfg = RunConfig {
        command: "bench".into(),
        min_threshold: a.min_threshold,
        time_limit: a.time_limit,
        verify: !a.no_verify,
        seed: a.seed,
        out: Some(a.out.clone()),
        ..Default::default()
    };
    let families = if a.families.is_empty() { Family::MAIN.to_vec() } else { a.families.clone() };
    let solvers = if a.solvers.is_empty() {
        vec![SolverKind::Buchi, SolverKind::CoBuchi, SolverKind::SafeReach, SolverKind::Scc]
    } else {
        a.solvers.clone()
    };
    let modes = if a.modes.is_empty() { vec![MinMode::Component, MinMode::Incremental] } else { a.modes.clone() };
    let mut jobs = Vec::new();
    for &family in &families {
        for size in a.min_size..=a.max_size.unwrap_or(family.desk_max()) {
            for &min_mode in &modes {
                for &solver in &solvers {
                    jobs.push(Job { family, size, solver, min_mode });
                }
            }
        }
    }
    let mut rows = Vec::new();
    for job in &jobs {
        let r = run_cell(job, &cfg);
        eprintln!(
            "{} n={} {} {}: {:?} {:.1}ms",
            job.family,
            job.size,
            job.solver,
            job.min_mode.name(),
            r.status,
            r.wall_ms
        );
        rows.push(r);
    }
    let echo = hash_lines(&cfg, "# ");
    let csv = write_csv(&rows)?;
    write_atomic(&a.out, &format!("{echo}{csv}"))?;
    if a.plot {
        let p = emit_plot(&csv)?;
        let svg = format!("{}{}", cfg.echo_lines().iter().map(|l| format!("<!-- {} -->\n", l.replace("--", "- -"))).collect::<String>(), p.svg);
        write_atomic(&a.out.with_extension("svg"), &svg)?;
        write_atomic(&a.out.with_extension("aggregated.csv"), &format!("{echo}{}", p.aggregated))?;
    }
    let issues = cross_check(&rows);
    for i in &issues {
        println!("disagreement: {i}");
    }
    let done = rows.iter().filter(|r| r.status == Status::Ok).count();
    println!("{} cells, {done} finished, {} disagreements", rows.len(), issues.len());
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Failure::Code(1))
    }
}

fn oracle_check(a: OracleArgs) -> Outcome {
    let cfg = RunConfig {
        command: "oracle-check".into(),
        seed: a.seed,
        out: a.out.clone(),
        ..Default::default()
    };
    let opts = CampaignOptions {
        seed: a.seed,
        ltlf: a.ltlf,
        obligations: a.obligations,
        games: a.games,
        game_states: a.game_states,
        trace_len: a.trace_len,
        fault: a.fault.map(|FaultArg::FlipAccepting| Fault::FlipAccepting),
        ..Default::default()
    };
    let rep = run_campaign(&opts);
    let mut text = hash_lines(&cfg, "# ");
    text.push_str(&format!("# campaign {opts:?}\n"));
    text.push_str(&rep.text());
    emit(&a.out, &text)?;
    if rep.ok() {
        Ok(())
    } else {
        if a.out.is_some() {
            eprintln!("{} mismatch(es), see {}", rep.mismatches.len(), a.out.as_ref().unwrap().display());
        }
        Err(Failure::Code(1))
    }
}
