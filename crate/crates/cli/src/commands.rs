use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chr_engine::{compile, run, Options, Status};
use chr_interp::{
    canonical_store, goal_vars, la_run, reachable_finals_la, reachable_finals_wp, wp_run, ExecState, InterpError,
    TieBreak, WpProgram,
};
use chr_lang::{parse_chrrp, parse_la, pretty_print_chrrp, pretty_print_la, BodyItem, ChrProgram, LaAtom, LaProgram};
use chr_translate::{
    check_chr2la, check_la2chr, chrtola, initial_database, mutate_chr, mutate_la, normalize_program,
    translate_chrrp_program, translate_la_goal, translate_la_program, ModeTable, Mutation, TranslateError, Verdict,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bench::{cmd_bench, BenchError, Example};
use crate::conformance::{conform, show_goal, Outcome};
use crate::gen;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "chrrp", version, about = "Run, translate, check and benchmark CHR^rp and Logical Algorithms programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a program on its goal and print the final state.
    Run(RunArgs),
    /// Translate between LA and CHR^rp.
    Translate(TranslateArgs),
    /// Check translation correspondence or engine conformance on random goals.
    Check(CheckArgs),
    /// Measure counter growth of a shipped example and print JSON.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Engine,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    La,
    Chrrp,
}

impl Lang {
    pub fn of(path: &Path) -> Result<Lang, CliError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("la") => Ok(Lang::La),
            Some("chrrp") | Some("chr") => Ok(Lang::Chrrp),
            _ => Err(CliError::Input(format!("{}: expected a .la or .chrrp file", path.display()))),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "engine")]
    pub mode: Mode,
    /// Engine tasks or oracle steps before giving up.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Write trace lines to standard error.
    #[arg(long)]
    pub trace: bool,
    /// Write engine counters as a JSON object to this file.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Random tie-breaking for the oracle (lexicographic when absent).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the compiled program as plain CHR before running.
    #[arg(long)]
    pub emit_chr: bool,
    /// State bound when `both` has to search the reachable final states.
    #[arg(long, default_value_t = 200_000)]
    pub states: usize,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    pub input: PathBuf,
    /// Target language; defaults to the other one.
    #[arg(long, value_enum)]
    pub to: Option<Lang>,
    /// Write the translation here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write the generated-name table as tab-separated text.
    #[arg(long)]
    pub name_map: Option<PathBuf>,
    /// Check correspondence on this many random small goals.
    #[arg(long)]
    pub check: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckDirection {
    La2chr,
    Chr2la,
    Oracle,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub program: PathBuf,
    /// la2chr for .la input, chr2la for .chrrp input by default.
    #[arg(long, value_enum)]
    pub direction: Option<CheckDirection>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Goals have 1..=N constraints.
    #[arg(long, default_value_t = 6)]
    pub goal_size: usize,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// State bound for the reachable-final-state search.
    #[arg(long, default_value_t = 100_000)]
    pub states: usize,
    /// Corrupt the translation first: priority:I, alldiff:I or token:I.
    #[arg(long, value_parser = parse_mutation)]
    pub mutate: Option<Mutation>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub example: Example,
    /// Comma-separated sizes (n, or e for dijkstra).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn parse_mutation(s: &str) -> Result<Mutation, String> {
    let (kind, i) = s.split_once(':').ok_or("expected KIND:INDEX")?;
    let i: usize = i.parse().map_err(|e| format!("bad rule index: {e}"))?;
    match kind {
        "priority" => Ok(Mutation::PriorityPlusOne(i)),
        "alldiff" => Ok(Mutation::DropAlldiff(i)),
        "token" => Ok(Mutation::DropTokenRule(i)),
        _ => Err(format!("unknown mutation {kind}")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}:{err}")]
    Parse { path: String, err: String },
    #[error("{0}")]
    Translate(#[from] TranslateError),
    #[error("budget of {0} exhausted")]
    Budget(u64),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Parse { .. } => EXIT_PARSE,
            CliError::Translate(TranslateError::Interp(InterpError::BudgetExhausted { .. })) => EXIT_BUDGET,
            CliError::Translate(TranslateError::Interp(_)) => EXIT_FAILURE,
            CliError::Translate(_) => EXIT_PARSE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

fn interp_err(e: InterpError) -> CliError {
    match e {
        InterpError::BudgetExhausted { budget, .. } => CliError::Budget(budget as u64),
        e => CliError::Other(e.to_string()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Other(e.to_string())
}

pub fn load_chr(path: &Path) -> Result<(ChrProgram, Vec<BodyItem>), CliError> {
    parse_chrrp(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), err: e.to_string() })
}

pub fn load_la(path: &Path) -> Result<(LaProgram, Vec<LaAtom>), CliError> {
    parse_la(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), err: e.to_string() })
}

/// Parse the command line and run it; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Translate(a) => cmd_translate(&a, out, err),
        Command::Check(a) => cmd_check(&a, out, err),
        Command::Bench(a) => bench(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_metrics(path: &Path, map: &std::collections::BTreeMap<String, u64>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(map).map_err(|e| CliError::Other(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

fn tie(seed: Option<u64>) -> TieBreak {
    seed.map(TieBreak::seeded).unwrap_or_default()
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match Lang::of(&a.input)? {
        Lang::Chrrp => {
            let (p, goal) = load_chr(&a.input)?;
            run_chr(a, &p, &goal, out, err)
        }
        Lang::La => {
            let (p, goal) = load_la(&a.input)?;
            run_la(a, &p, &goal, out, err)
        }
    }
}

struct EngineRun {
    store: Vec<(u64, chr_terms::Term)>,
    builtins: chr_terms::BuiltinStore,
    failed: bool,
}

fn engine_run(
    a: &RunArgs,
    p: &ChrProgram,
    goal: &[BodyItem],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<EngineRun, CliError> {
    let compiled = compile(p).map_err(|e| CliError::Input(e.to_string()))?;
    if a.emit_chr {
        write!(out, "{}", compiled.emit_chr()).map_err(io)?;
        writeln!(out).map_err(io)?;
    }
    let r = run(goal, &compiled, Options { budget: a.budget, trace: a.trace })
        .map_err(|e| CliError::Other(e.to_string()))?;
    for line in &r.trace {
        writeln!(err, "{line}").map_err(io)?;
    }
    if let Some(path) = &a.metrics {
        write_metrics(path, &r.metrics.to_map())?;
    }
    if r.status == Status::BudgetExhausted {
        return Err(CliError::Budget(a.budget));
    }
    Ok(EngineRun { store: r.store, builtins: r.builtins, failed: r.status == Status::Failed })
}

fn run_chr(
    a: &RunArgs,
    p: &ChrProgram,
    goal: &[BodyItem],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let gv = goal_vars(goal);
    let engine = if a.mode == Mode::Oracle {
        None
    } else {
        let r = engine_run(a, p, goal, out, err)?;
        Some(canonical_store(r.store.iter().map(|(_, t)| t), &r.builtins, &gv, r.failed))
    };
    let wp = WpProgram::new(p);
    let oracle = if a.mode == Mode::Engine {
        None
    } else {
        let r = wp_run(goal, &wp, a.budget as usize, &mut tie(a.seed), a.trace).map_err(interp_err)?;
        if a.mode == Mode::Oracle {
            for line in &r.trace {
                writeln!(err, "{line}").map_err(io)?;
            }
            if let Some(path) = &a.metrics {
                write_metrics(path, &[("steps".to_string(), r.steps as u64)].into_iter().collect())?;
            }
        }
        Some(r.state.canonical(&gv))
    };
    match (engine, oracle) {
        (Some(e), Some(o)) if e != o => {
            let finals = reachable_finals_wp(goal, &wp, a.states).map_err(|x| CliError::Other(x.to_string()))?;
            if !finals.contains(&e) {
                writeln!(out, "% engine\n{e}% oracle\n{o}").map_err(io)?;
                return Err(CliError::Mismatch("engine final state is not reachable under the oracle".into()));
            }
            writeln!(err, "note: engine and oracle chose differently; the engine state is reachable").map_err(io)?;
            write!(out, "{e}").map_err(io)?;
        }
        (Some(s), _) | (None, Some(s)) => write!(out, "{s}").map_err(io)?,
        (None, None) => unreachable!(),
    }
    Ok(EXIT_OK)
}

fn run_la(
    a: &RunArgs,
    p: &LaProgram,
    goal: &[LaAtom],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let engine = if a.mode == Mode::Oracle {
        None
    } else {
        let t = translate_la_program(p)?;
        let r = engine_run(a, &t.program, &translate_la_goal(goal), out, err)?;
        let state = ExecState::from_parts(r.store.into_iter().collect(), Default::default(), 0);
        Some(chrtola(&state, &ModeTable::new(&normalize_program(p)))?)
    };
    let oracle = if a.mode == Mode::Engine {
        None
    } else {
        let r = la_run(goal, p, a.budget as usize, &mut tie(a.seed), a.trace).map_err(interp_err)?;
        if a.mode == Mode::Oracle {
            for line in &r.trace {
                writeln!(err, "{line}").map_err(io)?;
            }
            if let Some(path) = &a.metrics {
                write_metrics(path, &[("steps".to_string(), r.steps as u64)].into_iter().collect())?;
            }
        }
        Some(r.state)
    };
    match (engine, oracle) {
        (Some(e), Some(o)) if e != o => {
            let finals = reachable_finals_la(goal, p, a.states).map_err(|x| CliError::Other(x.to_string()))?;
            if !finals.contains(&e) {
                writeln!(out, "% engine\n{e}% oracle\n{o}").map_err(io)?;
                return Err(CliError::Mismatch("engine final state is not reachable under the oracle".into()));
            }
            writeln!(err, "note: engine and oracle chose differently; the engine state is reachable").map_err(io)?;
            write!(out, "{e}").map_err(io)?;
        }
        (Some(s), _) | (None, Some(s)) => write!(out, "{s}").map_err(io)?,
        (None, None) => unreachable!(),
    }
    Ok(EXIT_OK)
}

/// Shipped example the file is named after, if any: picks a goal generator.
fn goal_kind(path: &Path) -> Option<&'static str> {
    let stem = path.file_stem()?.to_str()?;
    ["leq", "mergesort", "dijkstra", "boolean", "gcd", "closure", "unionfind"].into_iter().find(|k| *k == stem)
}

fn random_chr_goal(kind: Option<&str>, p: &ChrProgram, size: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
    match kind {
        Some(k) => gen::corpus_goal(k, size, rng),
        None => {
            let preds: Vec<(String, usize)> = p.predicates().into_iter().map(|(f, n)| (f.to_string(), n)).collect();
            gen::chr_goal(&preds, size, rng)
        }
    }
}

fn random_la_goal(kind: Option<&str>, p: &LaProgram, size: usize, rng: &mut ChaCha8Rng) -> Vec<LaAtom> {
    match kind {
        Some(k) => crate::conformance::la_atoms(&gen::corpus_goal(k, size, rng)),
        None => {
            let preds: Vec<(String, usize)> = p.predicates().into_iter().map(|(f, n)| (f.to_string(), n)).collect();
            gen::la_goal(&preds, size, rng)
        }
    }
}

/// Ground goal of a CHR program for the chr2la direction; generated goals
/// that leave the ground segment are replaced by generic ones.
fn ground_chr_goal(kind: Option<&str>, p: &ChrProgram, size: usize, rng: &mut ChaCha8Rng) -> Vec<BodyItem> {
    let g = random_chr_goal(kind, p, size, rng);
    if initial_database(&g).is_ok() {
        return g;
    }
    random_chr_goal(None, p, size, rng)
}

pub fn cmd_translate(a: &TranslateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let from = Lang::of(&a.input)?;
    let to = a.to.unwrap_or(match from {
        Lang::La => Lang::Chrrp,
        Lang::Chrrp => Lang::La,
    });
    if to == from {
        return Err(CliError::Input(format!("{} is already in the target language", a.input.display())));
    }
    let kind = goal_kind(&a.input);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut checks: Vec<Verdict> = Vec::new();
    let (text, names) = match from {
        Lang::La => {
            let (p, goal) = load_la(&a.input)?;
            let t = translate_la_program(&p)?;
            let text = pretty_print_chrrp(&t.program, &translate_la_goal(&goal));
            parse_chrrp(&text).map_err(|e| CliError::Other(format!("translation does not re-parse: {e}")))?;
            for i in 0..a.check.unwrap_or(0) {
                let g = random_la_goal(kind, &p, 1 + i % 5, &mut rng);
                checks.push(check_la2chr(&p, &t.program, &g, 100_000, &mut TieBreak::seeded(a.seed + i as u64))?);
            }
            (text, t.name_map)
        }
        Lang::Chrrp => {
            let (p, goal) = load_chr(&a.input)?;
            let t = translate_chrrp_program(&p)?;
            let text = pretty_print_la(&t.program, &initial_database(&goal)?);
            parse_la(&text).map_err(|e| CliError::Other(format!("translation does not re-parse: {e}")))?;
            for i in 0..a.check.unwrap_or(0) {
                let g = ground_chr_goal(kind, &p, 1 + i % 5, &mut rng);
                checks.push(check_chr2la(&p, &t.program, &g, 100_000, &mut TieBreak::seeded(a.seed + i as u64))?);
            }
            (text, t.name_map)
        }
    };
    match &a.output {
        Some(path) => write_file(path, &text)?,
        None => write!(out, "{text}").map_err(io)?,
    }
    if let Some(path) = &a.name_map {
        write_file(path, &names.to_tsv())?;
    }
    if a.check.is_some() {
        return report_verdicts(&checks, err);
    }
    Ok(EXIT_OK)
}

fn report_verdicts(verdicts: &[Verdict], out: &mut dyn Write) -> Result<i32, CliError> {
    let mut bad = 0;
    for (i, v) in verdicts.iter().enumerate() {
        match v {
            Verdict::Pass { transitions } => writeln!(out, "goal {i}: pass ({transitions} transitions)"),
            Verdict::Mismatch { step, detail } => {
                bad += 1;
                writeln!(out, "goal {i}: MISMATCH at transition {step}: {detail}")
            }
            Verdict::Inconclusive(why) => writeln!(out, "goal {i}: inconclusive: {why}"),
        }
        .map_err(io)?;
    }
    let passed = verdicts.iter().filter(|v| v.passed()).count();
    writeln!(out, "{passed}/{} goals pass, {bad} mismatches", verdicts.len()).map_err(io)?;
    if bad > 0 {
        return Err(CliError::Mismatch(format!("{bad} goals do not correspond")));
    }
    Ok(EXIT_OK)
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, CliError> {
    let lang = Lang::of(&a.program)?;
    let dir = a.direction.unwrap_or(match lang {
        Lang::La => CheckDirection::La2chr,
        Lang::Chrrp => CheckDirection::Chr2la,
    });
    let kind = goal_kind(&a.program);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let size = |i: usize| 1 + i % a.goal_size.max(1);
    let tie = |i: usize| TieBreak::seeded(a.seed.wrapping_add(i as u64));
    let no_mutation = || CliError::Input("this mutation does not apply to that rule".into());
    match (dir, lang) {
        (CheckDirection::La2chr, Lang::La) => {
            let (p, goal) = load_la(&a.program)?;
            let mut t = translate_la_program(&p)?.program;
            if let Some(m) = a.mutate {
                t = mutate_chr(&t, m).ok_or_else(no_mutation)?;
            }
            let mut verdicts = Vec::new();
            let goals = std::iter::once(goal).chain((0..a.trials).map(|i| random_la_goal(kind, &p, size(i), &mut rng)));
            for (i, g) in goals.enumerate() {
                verdicts.push(check_la2chr(&p, &t, &g, a.budget as usize, &mut tie(i))?);
            }
            report_verdicts(&verdicts, out)
        }
        (CheckDirection::Chr2la, Lang::Chrrp) => {
            let (p, goal) = load_chr(&a.program)?;
            let mut t = translate_chrrp_program(&p)?.program;
            if let Some(m) = a.mutate {
                t = mutate_la(&t, m).ok_or_else(no_mutation)?;
            }
            let mut verdicts = Vec::new();
            let goals =
                std::iter::once(goal).chain((0..a.trials).map(|i| ground_chr_goal(kind, &p, size(i), &mut rng)));
            for (i, g) in goals.enumerate() {
                verdicts.push(check_chr2la(&p, &t, &g, a.budget as usize, &mut tie(i))?);
            }
            report_verdicts(&verdicts, out)
        }
        (CheckDirection::Oracle, _) => {
            if a.mutate.is_some() {
                return Err(CliError::Input("--mutate applies to translations only".into()));
            }
            let (p, goals): (ChrProgram, Vec<Vec<BodyItem>>) = match lang {
                Lang::Chrrp => {
                    let (p, goal) = load_chr(&a.program)?;
                    let mut goals = vec![goal];
                    goals.extend((0..a.trials).map(|i| random_chr_goal(kind, &p, size(i), &mut rng)));
                    (p, goals)
                }
                Lang::La => {
                    let (p, goal) = load_la(&a.program)?;
                    let mut goals = vec![translate_la_goal(&goal)];
                    goals.extend((0..a.trials).map(|i| translate_la_goal(&random_la_goal(kind, &p, size(i), &mut rng))));
                    (translate_la_program(&p)?.program, goals)
                }
            };
            let compiled = compile(&p).map_err(|e| CliError::Input(e.to_string()))?;
            let wp = WpProgram::new(&p);
            let mut bad = 0;
            let mut ok = 0;
            for (i, g) in goals.iter().enumerate() {
                let o = conform(&compiled, &wp, g, a.budget, a.states);
                match &o {
                    Outcome::Confluent => writeln!(out, "goal {i}: engine equals the deterministic oracle"),
                    Outcome::Member { finals } => {
                        writeln!(out, "goal {i}: engine state is one of {finals} reachable final states")
                    }
                    Outcome::Mismatch { engine, detail } => {
                        bad += 1;
                        writeln!(out, "goal {i}: MISMATCH on {}: {detail}\nengine state:\n{engine}", show_goal(g))
                    }
                    Outcome::Inconclusive(why) => writeln!(out, "goal {i}: inconclusive: {why}"),
                }
                .map_err(io)?;
                ok += o.ok() as usize;
            }
            writeln!(out, "{ok}/{} goals conform, {bad} mismatches", goals.len()).map_err(io)?;
            if bad > 0 {
                return Err(CliError::Mismatch(format!("{bad} goals do not conform")));
            }
            Ok(EXIT_OK)
        }
        (CheckDirection::La2chr, Lang::Chrrp) => Err(CliError::Input("la2chr needs an .la program".into())),
        (CheckDirection::Chr2la, Lang::La) => Err(CliError::Input("chr2la needs a .chrrp program".into())),
    }
}

fn bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let sizes = a.sizes.clone().unwrap_or_else(|| a.example.default_sizes());
    let report = cmd_bench(a.example, &sizes, a.seed).map_err(|e| match e {
        BenchError::TooFewSizes(_) | BenchError::BadSize(_) => CliError::Input(e.to_string()),
        BenchError::Run { status: Status::BudgetExhausted, .. } => CliError::Budget(Options::default().budget),
        e => CliError::Other(e.to_string()),
    })?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Other(e.to_string()))? + "\n";
    match &a.output {
        Some(path) => write_file(path, &text)?,
        None => write!(out, "{text}").map_err(io)?,
    }
    for c in report.envelope.iter().filter(|c| !c.ok) {
        writeln!(err, "envelope violated: {} (value {})", c.name, c.value).map_err(io)?;
    }
    Ok(if report.envelope_ok() { EXIT_OK } else { EXIT_FAILURE })
}
