//! The `aspomit` command line: parse, solve, abstract, check, debug,
//! refine, and benchmark ground answer-set programs.
//!
//! Program inputs are file paths, `-` for standard input, `fixture:NAME`
//! for a bundled example, or `gc:NODES:EDGES:COLORS:SEED[:unsat]` for a
//! generated graph-coloring instance. Exit codes: 0 success, 1 usage
//! error, 2 parse error, 3 solver error, 4 precondition violation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use aspomit::abstraction::{self, AbstractionError, Verdict};
use aspomit::debugger::{self, DebugError, DebugOptions};
use aspomit::driver::{self, AbsRefOptions, AbsRefOutcome, BadomitObjective, DriverError};
use aspomit::parser::{self, ParseError, SerializeStyle};
use aspomit::solver::{self, SolveError, SolveRequest};
use aspomit::{Atom, Interpretation, OmissionSet, Program};

use aspomit_cli::bench::{self, BenchConfig, BenchInstance, Mode};
use aspomit_cli::fixtures;
use aspomit_cli::gcolor::{self, GraphInstance, InstanceError};

type Groups = BTreeMap<String, Vec<Atom>>;

#[derive(Parser)]
#[command(
    name = "aspomit",
    version,
    about = "Omission-based abstraction for ground answer-set programs"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Parse a ground program and reprint it in canonical form.
    Parse(ParseArgs),
    /// Enumerate answer sets.
    Solve(SolveArgs),
    /// Apply the omission operator and print the abstract program.
    Omit(OmitArgs),
    /// Classify an abstract answer set as concrete or spurious.
    Check(CheckArgs),
    /// Build the debugging program for an abstract answer set.
    Debugprog(DebugProgArgs),
    /// Run the abstract-and-refine loop from an initial omission.
    Absref(AbsRefArgs),
    /// Compute a minimal put-back set for a spurious abstract answer set.
    Putback(PutbackArgs),
    /// Compute a minimal blocker set explaining unsatisfiability.
    Blocker(BlockerArgs),
    /// Generate a ground graph-coloring program.
    #[command(name = "gen-gc")]
    GenGc(GenGcArgs),
    /// Run blocker pipelines over instances and report a CSV table.
    Bench(BenchArgs),
}

/// Program input: a file path, `-` for standard input, `fixture:NAME`, or
/// `gc:NODES:EDGES:COLORS:SEED[:unsat]`.
#[derive(Args)]
struct InputArg {
    /// Program file, `-`, `fixture:NAME`, or `gc:...`.
    input: String,
}

#[derive(Args)]
struct OmissionOpts {
    /// Atoms to omit, comma or whitespace separated.
    #[arg(long, value_name = "ATOMS")]
    omit: Option<String>,
    /// File with atoms to omit (same format as --omit, `%` comments).
    #[arg(long, value_name = "FILE")]
    omit_file: Option<PathBuf>,
    /// Omit the constraint head too, dropping every constraint.
    #[arg(long)]
    bottom: bool,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    input: InputArg,
    /// Prepend a `% name:` comment to every rule.
    #[arg(long, conflicts_with = "json")]
    annotated: bool,
    /// Emit rules and universe as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArg,
    /// Stop after this many answer sets (0 = enumerate all).
    #[arg(long, default_value_t = 0)]
    limit: usize,
    /// Solver engine: builtin, bruteforce, or external.
    #[arg(long, default_value = "builtin")]
    engine: String,
    /// Emit the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OmitArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    omission: OmissionOpts,
    /// Emit the abstraction as JSON, with dropped/changed rule names.
    #[arg(long)]
    json: bool,
    /// Also write the abstract program to a file.
    #[arg(long, value_name = "FILE")]
    emit_program: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    omission: OmissionOpts,
    /// The abstract answer set over the kept atoms (may be empty: "").
    #[arg(long, value_name = "ATOMS")]
    interp: String,
    /// Blame omitted atoms of dropped rules for already-blamed heads too.
    #[arg(long)]
    type4: bool,
    /// Emit the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DebugProgArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    omission: OmissionOpts,
    /// The abstract answer set over the kept atoms (may be empty: "").
    #[arg(long, value_name = "ATOMS")]
    interp: String,
    /// Blame omitted atoms of dropped rules for already-blamed heads too.
    #[arg(long)]
    type4: bool,
    /// Emit rules, omitted atoms, and verdict markers as JSON.
    #[arg(long)]
    json: bool,
    /// Write the debugging program to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    emit_program: Option<PathBuf>,
}

#[derive(Args)]
struct AbsRefArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    omission: OmissionOpts,
    /// Per-iteration blame objective: minimize, bound2, bound5, or bound10.
    #[arg(long, default_value = "bound2")]
    objective: String,
    /// Blame omitted atoms of dropped rules for already-blamed heads too.
    #[arg(long)]
    type4: bool,
    /// Abort after this many refinements (default: no explicit cap).
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    /// Print the refinement trace as JSON.
    #[arg(long)]
    json: bool,
    /// Write the final abstract program to a file.
    #[arg(long, value_name = "FILE")]
    emit_program: Option<PathBuf>,
}

#[derive(Args)]
struct PutbackArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    omission: OmissionOpts,
    /// The spurious abstract answer set (may be empty: "").
    #[arg(long, value_name = "ATOMS")]
    interp: String,
    /// Emit the put-back set as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BlockerArgs {
    #[command(flatten)]
    input: InputArg,
    /// Probe order for the greedy search: input, least-occurring, or seed:N.
    #[arg(long, default_value = "input")]
    order: String,
    /// Top-down only: atoms treated as already omitted before the search.
    #[arg(long, value_name = "ATOMS", conflicts_with = "bottomup")]
    start: Option<String>,
    /// Refine an initial group omission to unsatisfiability first.
    #[arg(long)]
    bottomup: bool,
    /// Bottom-up: percentage of object groups omitted initially.
    #[arg(long, default_value_t = 50)]
    percent: u32,
    /// Bottom-up: initial-omission strategy, random or leastOccurring.
    #[arg(long, default_value = "random")]
    strategy: String,
    /// Bottom-up: seed for the random strategy.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Bottom-up: JSON file mapping group names to atom lists; defaults to
    /// the instance's own groups, else one group per atom.
    #[arg(long, value_name = "FILE")]
    groups: Option<PathBuf>,
    /// Bottom-up: per-iteration blame objective.
    #[arg(long, default_value = "bound2")]
    objective: String,
    /// Blame omitted atoms of dropped rules for already-blamed heads too.
    #[arg(long)]
    type4: bool,
    /// Emit the blocker as JSON, rule set included.
    #[arg(long)]
    json: bool,
    /// Write the blocker rule set to a file.
    #[arg(long, value_name = "FILE")]
    emit_program: Option<PathBuf>,
}

#[derive(Args)]
struct GenGcArgs {
    /// Named graph: non2col9, non3col8, triangle, or single.
    #[arg(long, conflicts_with_all = ["nodes", "edges", "seed", "require_unsat"])]
    preset: Option<String>,
    /// Number of nodes of a random graph.
    #[arg(long)]
    nodes: Option<u32>,
    /// Number of distinct random edges.
    #[arg(long)]
    edges: Option<usize>,
    /// Seed for edge sampling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of colors (preset default, else 2).
    #[arg(long)]
    colors: Option<usize>,
    /// Resample until the graph is not colorable, so the program is
    /// unsatisfiable.
    #[arg(long)]
    require_unsat: bool,
    /// Write the program here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the node-to-atoms group map as JSON.
    #[arg(long, value_name = "FILE")]
    groups_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instances (paths, `fixture:NAME`, or `gc:...`), comma separated or
    /// repeated.
    #[arg(long, value_name = "INPUT", value_delimiter = ',')]
    instances: Vec<String>,
    /// Modes: topdown[:ORDER] or bottomup:PERCENT:STRATEGY.
    #[arg(
        long,
        value_name = "MODE",
        value_delimiter = ',',
        default_value = "topdown"
    )]
    modes: Vec<String>,
    /// Seeds averaged into each row.
    #[arg(long, value_name = "SEED", value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// Refinement objective for bottom-up modes.
    #[arg(long, default_value = "bound2")]
    objective: String,
    /// Blame omitted atoms of dropped rules for already-blamed heads too.
    #[arg(long)]
    type4: bool,
    /// Parallel worker count.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() {
    // Die quietly when the output pipe closes (e.g. piped into `head`),
    // like any other filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// Maps library errors onto the documented exit codes by walking the cause
/// chain: parse errors 2, solver failures 3, violated preconditions 4,
/// everything else (bad flags, unknown names, I/O) 1.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ParseError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<SolveError>() {
            return solve_code(e);
        }
        if let Some(e) = cause.downcast_ref::<AbstractionError>() {
            return abstraction_code(e);
        }
        if let Some(e) = cause.downcast_ref::<DebugError>() {
            return debug_code(e);
        }
        if let Some(e) = cause.downcast_ref::<DriverError>() {
            return driver_code(e);
        }
        if cause.downcast_ref::<InstanceError>().is_some() {
            return 4;
        }
    }
    1
}

fn solve_code(err: &SolveError) -> i32 {
    match err {
        SolveError::UnknownEngine(_) => 1,
        SolveError::UniverseTooLarge { .. } => 4,
        SolveError::ExternalSolverFailure(_) => 3,
    }
}

fn abstraction_code(err: &AbstractionError) -> i32 {
    match err {
        AbstractionError::NotAnAbstractAnswerSet(_) => 4,
        AbstractionError::Solve(e) => solve_code(e),
    }
}

fn debug_code(err: &DebugError) -> i32 {
    match err {
        DebugError::NotAnAbstractAnswerSet(_) => 4,
        DebugError::Solve(e) => solve_code(e),
        DebugError::MalformedTagAtom(..) | DebugError::NoAnswerSet => 3,
    }
}

fn driver_code(err: &DriverError) -> i32 {
    match err {
        DriverError::UnknownStrategy(_) | DriverError::UnknownOrder(_) => 1,
        DriverError::Abstraction(e) => abstraction_code(e),
        DriverError::Debug(e) => debug_code(e),
        DriverError::Solve(e) => solve_code(e),
        DriverError::IterationLimitExceeded(_)
        | DriverError::PreconditionUnsat
        | DriverError::ProgramSatisfiable
        | DriverError::EmptyGroups
        | DriverError::NotSpurious(_) => 4,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Parse(args) => cmd_parse(args),
        Verb::Solve(args) => cmd_solve(args),
        Verb::Omit(args) => cmd_omit(args),
        Verb::Check(args) => cmd_check(args),
        Verb::Debugprog(args) => cmd_debugprog(args),
        Verb::Absref(args) => cmd_absref(args),
        Verb::Putback(args) => cmd_putback(args),
        Verb::Blocker(args) => cmd_blocker(args),
        Verb::GenGc(args) => cmd_gen_gc(args),
        Verb::Bench(args) => cmd_bench(args),
    }
}

fn read_input_text(input: &str) -> Result<String> {
    if input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read_to_string(input).with_context(|| format!("reading {input}"))
    }
}

/// Resolves any accepted input form to a program, with object groups when
/// the source defines them (fixtures and generated instances).
fn load_with_groups(input: &str) -> Result<(Program, Option<Groups>)> {
    if let Some(name) = input.strip_prefix("fixture:") {
        let f = fixtures::load(name).ok_or_else(|| {
            anyhow!(
                "unknown fixture `{name}`; available: {}",
                fixtures::names().join(", ")
            )
        })?;
        return Ok((f.program, f.groups));
    }
    if let Some(spec) = input.strip_prefix("gc:") {
        let g = parse_gc_spec(spec)?;
        let out = gcolor::generate_ground_coloring(&g);
        return Ok((out.program, Some(out.groups)));
    }
    let text = read_input_text(input)?;
    let program = parser::parse(&text)?;
    Ok((program, None))
}

fn load_program(input: &str) -> Result<Program> {
    Ok(load_with_groups(input)?.0)
}

/// `NODES:EDGES:COLORS:SEED[:unsat]`, e.g. `gc:8:13:2:5:unsat`.
fn parse_gc_spec(spec: &str) -> Result<GraphInstance> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (fixed, unsat) = match parts.as_slice() {
        [n, e, k, s] => ([*n, *e, *k, *s], false),
        [n, e, k, s, "unsat"] => ([*n, *e, *k, *s], true),
        _ => bail!("bad gc spec `gc:{spec}`; expected gc:NODES:EDGES:COLORS:SEED[:unsat]"),
    };
    let nodes: u32 = fixed[0].parse().context("gc spec: NODES")?;
    let edges: usize = fixed[1].parse().context("gc spec: EDGES")?;
    let colors: usize = fixed[2].parse().context("gc spec: COLORS")?;
    let seed: u64 = fixed[3].parse().context("gc spec: SEED")?;
    let g = if unsat {
        GraphInstance::random_unsatisfiable(nodes, edges, colors, seed)?
    } else {
        GraphInstance::random(nodes, edges, colors, seed)?
    };
    Ok(g)
}

fn build_omission(opts: &OmissionOpts) -> Result<OmissionSet> {
    let mut atoms: Vec<Atom> = Vec::new();
    if let Some(list) = &opts.omit {
        atoms.extend(parser::parse_atoms(list)?);
    }
    if let Some(path) = &opts.omit_file {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        atoms.extend(parser::parse_atoms(&text)?);
    }
    let set = OmissionSet::new(atoms);
    Ok(if opts.bottom { set.with_bottom() } else { set })
}

fn parse_interp(text: &str) -> Result<Interpretation> {
    Ok(Interpretation::from_atoms(parser::parse_atoms(text)?))
}

fn atom_texts<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<String> {
    atoms.into_iter().map(|a| a.text().to_string()).collect()
}

fn display_atoms<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> String {
    Interpretation::from_atoms(atoms.into_iter().cloned()).display()
}

fn write_program(path: &PathBuf, program: &Program) -> Result<()> {
    let text = format!(
        "{}\n",
        parser::serialize(program, SerializeStyle::Canonical)
    );
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_objective(text: &str) -> Result<BadomitObjective> {
    BadomitObjective::parse(text).ok_or_else(|| {
        anyhow!("unknown objective `{text}`; expected minimize, bound2, bound5, or bound10")
    })
}

fn cmd_parse(args: ParseArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    if args.json {
        let doc = json!({
            "rules": program
                .rules()
                .iter()
                .map(|r| json!({"name": r.name, "text": parser::rule_text(r)}))
                .collect::<Vec<_>>(),
            "universe": atom_texts(program.universe()),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let style = if args.annotated {
            SerializeStyle::Annotated
        } else {
            SerializeStyle::Canonical
        };
        println!("{}", parser::serialize(&program, style));
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let mut req = SolveRequest::new(program).with_engine(&args.engine);
    if args.limit > 0 {
        req = req.with_limit(args.limit);
    }
    let result = solver::solve(&req)?;
    if args.json {
        let doc = json!({
            "satisfiable": !result.answer_sets.is_empty(),
            "answerSets": result
                .answer_sets
                .iter()
                .map(|i| atom_texts(i.iter()))
                .collect::<Vec<_>>(),
            "exhausted": result.exhausted,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    for interp in &result.answer_sets {
        println!("{}", interp.display());
    }
    if result.answer_sets.is_empty() {
        println!("unsatisfiable");
    } else {
        let n = result.answer_sets.len();
        let plural = if n == 1 { "" } else { "s" };
        if result.exhausted {
            println!("satisfiable ({n} answer set{plural})");
        } else {
            println!("satisfiable ({n} answer set{plural}, limit reached)");
        }
    }
    Ok(())
}

fn cmd_omit(args: OmitArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let omission = build_omission(&args.omission)?;
    let outcome = abstraction::omit_program(&program, &omission);
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let abstracted = &outcome.abstract_program;
    if args.json {
        let name_of = |id: &usize| program.rule(*id).name.clone();
        let doc = json!({
            "rules": abstracted
                .rules()
                .iter()
                .map(parser::rule_text)
                .collect::<Vec<_>>(),
            "universe": atom_texts(abstracted.universe()),
            "dropped": outcome.omitted_rules.iter().map(name_of).collect::<Vec<_>>(),
            "changed": outcome.changed_rules.iter().map(name_of).collect::<Vec<_>>(),
            "warnings": outcome.warnings,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!(
            "{}",
            parser::serialize(abstracted, SerializeStyle::Canonical)
        );
    }
    if let Some(path) = &args.emit_program {
        write_program(path, abstracted)?;
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let omission = build_omission(&args.omission)?;
    let interp = parse_interp(&args.interp)?;
    let classification = abstraction::classify(&program, &omission, &interp)?;
    match classification.verdict {
        Verdict::Concrete => {
            let witness = classification
                .witness
                .expect("concrete verdicts carry a witness");
            if args.json {
                let doc = json!({
                    "verdict": "concrete",
                    "witness": atom_texts(witness.iter()),
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("concrete");
                println!("witness: {}", witness.display());
            }
        }
        Verdict::Spurious => {
            let report = debugger::debug(
                &program,
                &omission,
                &interp,
                DebugOptions { type4: args.type4 },
            )?;
            if args.json {
                let doc = json!({
                    "verdict": "spurious",
                    "badomits": report
                        .bad_omissions
                        .iter()
                        .map(|b| json!({"atom": b.atom.text(), "type": b.type_tag.label()}))
                        .collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("spurious");
                for b in &report.bad_omissions {
                    println!("badomit({}, {})", b.atom.text(), b.type_tag.label());
                }
            }
        }
    }
    Ok(())
}

fn cmd_debugprog(args: DebugProgArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let omission = build_omission(&args.omission)?;
    let interp = parse_interp(&args.interp)?;
    let dp = debugger::build_debug_program(
        &program,
        &omission,
        &interp,
        DebugOptions { type4: args.type4 },
    )?;
    if args.json {
        let doc = json!({
            "rules": dp
                .program
                .rules()
                .iter()
                .map(parser::rule_text)
                .collect::<Vec<_>>(),
            "omitted": atom_texts(&dp.omitted),
            "markers": atom_texts(&dp.markers),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    let text = parser::serialize(&dp.program, SerializeStyle::Annotated);
    match &args.emit_program {
        Some(path) => fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_absref(args: AbsRefArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let omission = build_omission(&args.omission)?;
    let opts = AbsRefOptions {
        objective: parse_objective(&args.objective)?,
        type4: args.type4,
        max_iterations: args.max_iter,
    };
    let result = driver::abs_ref(&program, &omission, &opts)?;
    if args.json {
        println!("{}", driver::trace_json(&result.trace));
    } else {
        for (i, step) in result.trace.iter().enumerate() {
            let n = i + 1;
            let omitted = step.omitted_count;
            let shown = step
                .interpretation
                .as_ref()
                .map(|interp| interp.display())
                .unwrap_or_default();
            match step.verdict {
                "spurious" => println!(
                    "iteration {n}: {omitted} omitted, {shown} spurious, put back {{{}}}",
                    step.badomits.join(", ")
                ),
                "concrete" => println!("iteration {n}: {omitted} omitted, {shown} concrete"),
                _ => println!("iteration {n}: {omitted} omitted, abstraction unsatisfiable"),
            }
        }
        match &result.outcome {
            AbsRefOutcome::UnsatReached => {
                println!("outcome: unsatisfiable (the program has no answer set)");
            }
            AbsRefOutcome::ConcreteFound {
                abstract_witness,
                concrete_witness,
            } => {
                println!("outcome: concrete");
                println!("abstract: {}", abstract_witness.display());
                println!("witness: {}", concrete_witness.display());
            }
        }
        println!("refinements: {}", result.refinement_steps);
        println!(
            "final omission: {} of {} atoms",
            result.final_omission.len(),
            program.universe().len()
        );
    }
    if let Some(path) = &args.emit_program {
        write_program(path, &result.final_program)?;
    }
    Ok(())
}

fn cmd_putback(args: PutbackArgs) -> Result<()> {
    let program = load_program(&args.input.input)?;
    let omission = build_omission(&args.omission)?;
    let interp = parse_interp(&args.interp)?;
    let put_back = driver::minimal_put_back(&program, &omission, &interp)?;
    if args.json {
        let doc = json!({ "putBack": atom_texts(&put_back) });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!(
            "put back {} of {} omitted atoms: {}",
            put_back.len(),
            omission.len(),
            display_atoms(&put_back)
        );
    }
    Ok(())
}

fn read_groups_file(path: &PathBuf) -> Result<Groups> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected a JSON object of atom lists", path.display()))?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().map(Atom::new).collect()))
        .collect())
}

fn singleton_groups(program: &Program) -> Groups {
    program
        .universe()
        .iter()
        .map(|a| (a.text().to_string(), vec![a.clone()]))
        .collect()
}

fn cmd_blocker(args: BlockerArgs) -> Result<()> {
    let (program, own_groups) = load_with_groups(&args.input.input)?;
    let order = driver::probe_order(&args.order)?;
    let mut bottom_up_info = None;
    let result = if args.bottomup {
        let groups = match &args.groups {
            Some(path) => read_groups_file(path)?,
            None => own_groups.unwrap_or_else(|| singleton_groups(&program)),
        };
        let strategy = driver::omission_strategy(&args.strategy)?;
        let opts = AbsRefOptions {
            objective: parse_objective(&args.objective)?,
            type4: args.type4,
            max_iterations: None,
        };
        let res = driver::bottom_up_blocker(
            &program,
            &groups,
            args.percent,
            strategy.as_ref(),
            args.seed,
            &opts,
            order.as_ref(),
        )?;
        bottom_up_info = Some((
            res.initial_omission.len(),
            res.absref.refinement_steps,
            res.absref.final_omission.len(),
        ));
        res.blocker
    } else {
        let start = match &args.start {
            Some(list) => OmissionSet::new(parser::parse_atoms(list)?),
            None => OmissionSet::default(),
        };
        driver::compute_min_blocker(&program, &start, order.as_ref())?
    };
    if args.json {
        let mut doc = json!({
            "blocker": atom_texts(&result.blocker),
            "probes": result.stats.probes,
            "minimal": result.minimal,
            "rules": result
                .blocker_rules
                .rules()
                .iter()
                .map(parser::rule_text)
                .collect::<Vec<_>>(),
        });
        if let Some((initial, refinements, fin)) = bottom_up_info {
            doc["bottomUp"] = json!({
                "initialOmitted": initial,
                "refinements": refinements,
                "finalOmitted": fin,
            });
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        if let Some((initial, refinements, fin)) = bottom_up_info {
            println!("initial omission: {initial} atoms");
            println!("refinements: {refinements}");
            println!("final omission: {fin} atoms");
        }
        println!(
            "blocker ({} of {} atoms): {}",
            result.blocker.len(),
            program.universe().len(),
            display_atoms(&result.blocker)
        );
        println!("probes: {}", result.stats.probes);
        println!("minimal: {}", result.minimal);
        println!("rules: {}", result.blocker_rules.rules().len());
    }
    if let Some(path) = &args.emit_program {
        write_program(path, &result.blocker_rules)?;
    }
    Ok(())
}

fn cmd_gen_gc(args: GenGcArgs) -> Result<()> {
    let instance = if let Some(name) = &args.preset {
        let g = gcolor::preset(name).ok_or_else(|| {
            anyhow!(
                "unknown preset `{name}`; available: {}",
                gcolor::PRESET_NAMES.join(", ")
            )
        })?;
        match args.colors {
            Some(k) => GraphInstance::new(g.nodes(), g.edges().iter().copied(), k, 0)?,
            None => g,
        }
    } else {
        let nodes = args
            .nodes
            .ok_or_else(|| anyhow!("either --preset or --nodes and --edges are required"))?;
        let edges = args
            .edges
            .ok_or_else(|| anyhow!("--edges is required with --nodes"))?;
        let colors = args.colors.unwrap_or(2);
        if args.require_unsat {
            GraphInstance::random_unsatisfiable(nodes, edges, colors, args.seed)?
        } else {
            GraphInstance::random(nodes, edges, colors, args.seed)?
        }
    };
    let out = gcolor::generate_ground_coloring(&instance);
    let text = format!(
        "{}\n",
        parser::serialize(&out.program, SerializeStyle::Canonical)
    );
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    if let Some(path) = &args.groups_out {
        let map: BTreeMap<&str, Vec<&str>> = out
            .groups
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|a| a.text()).collect()))
            .collect();
        let doc = format!("{}\n", serde_json::to_string_pretty(&map)?);
        fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Names a generated instance after its spec, e.g. `gc:8:13:2:5:unsat`.
fn resolve_bench_instance(input: &str) -> Result<BenchInstance> {
    let (program, groups) = load_with_groups(input)?;
    let name = input.strip_prefix("fixture:").unwrap_or(input).to_string();
    Ok(match groups {
        Some(groups) => BenchInstance {
            name,
            program,
            groups,
        },
        None => BenchInstance::with_singleton_groups(name, program),
    })
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let modes = args
        .modes
        .iter()
        .map(|m| Mode::parse(m))
        .collect::<Result<Vec<_>, String>>()
        .map_err(|e| anyhow!(e))?;
    if args.seeds.is_empty() {
        bail!("--seeds needs at least one seed");
    }
    let config = BenchConfig {
        modes,
        seeds: args.seeds.clone(),
        objective: parse_objective(&args.objective)?,
        type4: args.type4,
        jobs: args.jobs,
    };
    let instances = args
        .instances
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| resolve_bench_instance(s))
        .collect::<Result<Vec<_>>>()?;
    let report = bench::run_bench(&instances, &config);
    for row in &report.rows {
        let status = if row.errors.is_empty() { "ok" } else { "error" };
        eprintln!("{} {}: {}", row.instance, row.mode, status);
    }
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    let errored = report.errored_rows();
    if errored > 0 {
        bail!("{errored} of {} rows recorded errors", report.rows.len());
    }
    Ok(())
}
