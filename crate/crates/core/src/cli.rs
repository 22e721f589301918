//! `flucid` command line: `run`, `oracle` and `expand`.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::ast::Expr;
use crate::context::Context;
use crate::error::Error;
use crate::eval::{Evaluator, DEFAULT_MAX_DEPTH};
use crate::evidence::{Observation, ObservationSequence, Opt, Property};
use crate::forensic::{expand_sequence, ExpansionSet};
use crate::parser::{parse_expr, parse_source};
use crate::reconstruction::{
    oracle_enumerate, search, ClaimConfig, PrinterModel, PrinterRun, PrinterState, SearchStats,
};
use crate::value::{PropertySet, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_PROGRAM: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Overrides the evaluator's recursion limit.
pub const MAX_RECURSION_ENV: &str = "FLUCID_MAX_RECURSION";

#[derive(Debug, Parser)]
#[command(name = "flucid", version, about = "Forensic Lucid interpreter and event reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a program; claim programs report a verdict and explanations.
    Run(RunArgs),
    /// Enumerate printer runs forward by brute force.
    Oracle(OracleArgs),
    /// List every expansion of an observation sequence.
    Expand(ExpandArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    file: String,
    /// Context binding, e.g. `--at time=3`. Repeatable.
    #[arg(long = "at", value_name = "DIM=TAG", value_parser = parse_binding)]
    at: Vec<(String, u64)>,
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    #[arg(long)]
    include_noops: bool,
    #[arg(long)]
    json: bool,
    /// Add wall-clock time to the stats (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long = "final", value_name = "STATE", value_parser = parse_state)]
    final_state: PrinterState,
    #[arg(long, value_name = "STATE", value_parser = parse_state, default_value = "empty,empty")]
    initial: PrinterState,
    #[arg(long)]
    max_len: usize,
    /// Compare against the backward search and exit 1 on any difference.
    #[arg(long)]
    cross_check: bool,
    #[arg(long)]
    include_noops: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ExpandArgs {
    /// A `.fl` file or an inline sequence such as `(A,3,0)(B,2,0)`.
    sequence: String,
    /// Upper bound for `+inf` durations.
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    json: bool,
}

fn parse_binding(s: &str) -> Result<(String, u64), String> {
    let (dim, tag) = s
        .split_once('=')
        .ok_or_else(|| format!("expected DIM=TAG, got `{s}`"))?;
    let tag = tag
        .trim()
        .parse()
        .map_err(|_| format!("tag `{tag}` is not a non-negative integer"))?;
    Ok((dim.trim().to_owned(), tag))
}

fn parse_state(s: &str) -> Result<PrinterState, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What went wrong, and which exit code it maps to.
enum Failure {
    Usage(String),
    Program(String),
}

impl Failure {
    fn program(file: &str, e: &Error) -> Failure {
        match e.position() {
            Some(_) => Failure::Program(format!("{file}:{e}")),
            None => Failure::Program(format!("{file}: error: {e}")),
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Expand(a) => cmd_expand(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "flucid: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Program(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_PROGRAM
        }
    }
}

fn max_depth() -> Result<usize, Failure> {
    match std::env::var(MAX_RECURSION_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Usage(format!("{MAX_RECURSION_ENV} must be a positive integer, got `{v}`"))
        }),
        Err(_) => Ok(DEFAULT_MAX_DEPTH),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Program(format!("cannot write output: {e}")))
}

#[derive(Serialize)]
struct Stats {
    states_visited: usize,
    runs_enumerated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u64>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    program: &'a str,
    verdict: serde_json::Value,
    explanations: &'a [PrinterRun],
    stats: Stats,
}

pub fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Atom(a) => json!(a.as_str()),
        Value::Int(i) => json!(i),
        Value::Bool(b) => json!(b),
        Value::Set(s) => json!(s.iter().map(|a| a.as_str()).collect::<Vec<_>>()),
        Value::Array(items) => serde_json::Value::Array(items.iter().map(value_json).collect()),
        Value::Eod => json!("eod"),
        Value::Inf => json!("+inf"),
        Value::Any => json!("$"),
        Value::Observation(o) => json!(o.to_string()),
        Value::Sequence(os) => sequence_json(os),
        Value::Evidence(es) => json!({
            "name": es.name,
            "sequences": es.sequences.iter().map(sequence_json).collect::<Vec<_>>(),
        }),
        Value::Verdict(v) => json!(v.verdict),
    }
}

fn sequence_json(os: &ObservationSequence) -> serde_json::Value {
    json!({
        "name": os.name,
        "observations": os.observations.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
    })
}

pub fn format_run(run: &PrinterRun) -> String {
    let mut s = run.initial.to_string();
    for step in &run.steps {
        s.push_str(&format!(" -{}-> {}", step.event, step.state));
    }
    s
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let started = Instant::now();
    let source = std::fs::read_to_string(&a.file)
        .map_err(|e| Failure::Program(format!("{}: error: cannot read: {e}", a.file)))?;
    let program = parse_source(&source).map_err(|e| Failure::program(&a.file, &e))?;
    let cfg = ClaimConfig {
        max_len: a.max_len,
        include_noops: a.include_noops,
    };
    let ctx: Context = a.at.iter().map(|(d, t)| (d.clone(), *t)).collect();
    let ev = Evaluator::new(&program)
        .with_max_depth(max_depth()?)
        .with_claim_config(cfg)
        .with_warehouse(Default::default());
    let value = ev.eval(&ctx).map_err(|e| Failure::program(&a.file, &e))?;
    let wall_time_ms = a.timings.then(|| started.elapsed().as_millis() as u64);

    let (explanations, stats): (&[PrinterRun], SearchStats) = match &value {
        Value::Verdict(v) => (&v.explanations, v.stats),
        _ => (&[], SearchStats::default()),
    };
    if a.json {
        let report = RunReport {
            program: &a.file,
            verdict: value_json(&value),
            explanations,
            stats: Stats {
                states_visited: stats.states_visited,
                runs_enumerated: stats.runs_enumerated,
                wall_time_ms,
            },
        };
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        write_out(out, &format!("{text}\n"))?;
        return Ok(EXIT_OK);
    }

    let mut text = String::new();
    match &value {
        Value::Verdict(v) => {
            text.push_str(&format!("verdict: {}\n", v.verdict));
            text.push_str(&format!("explanations: {}\n", v.explanations.len()));
            for (i, r) in v.explanations.iter().enumerate() {
                text.push_str(&format!("  {}. [{}] {}\n", i + 1, r.len(), format_run(r)));
            }
            text.push_str(&format!(
                "states visited: {}, runs enumerated: {}\n",
                stats.states_visited, stats.runs_enumerated
            ));
        }
        other => text.push_str(&format!("{other}\n")),
    }
    if let Some(ms) = wall_time_ms {
        text.push_str(&format!("wall time: {ms} ms\n"));
    }
    write_out(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let runs = oracle_enumerate(&PrinterModel, &a.initial, |s| *s == a.final_state, a.max_len);

    let cross = a.cross_check.then(|| {
        let exact = |s: &PrinterState| Observation::fixed(Property::atom(&s.to_string()), 1);
        let es = crate::evidence::EvidentialStatement::new(
            "es",
            vec![
                ObservationSequence::new("printer", vec![Observation::any(), exact(&a.final_state)]),
                ObservationSequence::new("initial", vec![exact(&a.initial), Observation::any()]),
            ],
        );
        let cfg = ClaimConfig {
            max_len: a.max_len,
            include_noops: a.include_noops,
        };
        let explained = search(&PrinterModel, &es, &cfg).runs;
        let expected: Vec<&PrinterRun> = runs
            .iter()
            .filter(|r| a.include_noops || !r.has_noop())
            .collect();
        let equal = explained.iter().eq(expected.iter().copied());
        (equal, explained.len(), expected.len())
    });

    if a.json {
        let report = json!({
            "initial": a.initial,
            "final": a.final_state,
            "max_len": a.max_len,
            "runs": runs,
            "cross_check": cross.map(|(equal, explained, expected)| json!({
                "equal": equal,
                "explained": explained,
                "expected": expected,
            })),
        });
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        write_out(out, &format!("{text}\n"))?;
    } else {
        let mut text = format!(
            "{} run(s) from {} to {} within {} step(s)\n",
            runs.len(),
            a.initial,
            a.final_state,
            a.max_len
        );
        for r in &runs {
            text.push_str(&format!("  [{}] {}\n", r.len(), format_run(r)));
        }
        if let Some((equal, explained, expected)) = cross {
            text.push_str(&format!(
                "cross-check: {} (backward search {explained}, oracle {expected})\n",
                if equal { "equal" } else { "MISMATCH" }
            ));
        }
        write_out(out, &text)?;
    }
    Ok(match cross {
        Some((false, _, _)) => EXIT_MISMATCH,
        _ => EXIT_OK,
    })
}

/// Reads an inline sequence straight from its syntax: bare names are
/// property atoms.
fn inline_sequence(src: &str) -> Result<ObservationSequence, Failure> {
    let bad = |what: &str| Failure::Usage(format!("`{src}` is not an observation sequence: {what}"));
    let e = parse_expr(src).map_err(|e| Failure::Usage(format!("`{src}`: {e}")))?;
    let items = match e {
        Expr::Array(items) => items,
        other => vec![other],
    };
    let int = |e: &Expr| match e {
        Expr::Literal(Value::Int(n)) if *n >= 0 => Some(*n as u64),
        _ => None,
    };
    let mut observations = Vec::new();
    for item in &items {
        match item {
            Expr::Literal(Value::Observation(o)) => observations.push((**o).clone()),
            Expr::Tuple { property, min, opt } => {
                let property = match property.as_ref() {
                    Expr::Ident(n) => Property::atom(n),
                    Expr::Literal(Value::Atom(a)) => Property::Atom(a.clone()),
                    Expr::Unordered(xs) => {
                        let mut set = PropertySet::new();
                        for x in xs {
                            match x {
                                Expr::Ident(n) => set.insert(n.as_str().into()),
                                Expr::Literal(Value::Atom(a)) => set.insert(a.clone()),
                                _ => return Err(bad("set members must be names")),
                            };
                        }
                        Property::Events(set)
                    }
                    _ => return Err(bad("unsupported property")),
                };
                let min = int(min).ok_or_else(|| bad("min must be a non-negative integer"))?;
                let opt = match opt.as_ref() {
                    Expr::Literal(Value::Inf) => Opt::Inf,
                    o => Opt::Finite(int(o).ok_or_else(|| bad("opt must be an integer or +inf"))?),
                };
                observations.push(Observation::new(property, min, opt));
            }
            _ => return Err(bad("expected (P, min, opt) tuples")),
        }
    }
    Ok(ObservationSequence::new("os", observations))
}

/// Sequences named in a program file: its value if that is a sequence,
/// otherwise every observation sequence of its outermost `where`.
fn file_sequences(path: &str) -> Result<Vec<ObservationSequence>, Failure> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| Failure::Program(format!("{path}: error: cannot read: {e}")))?;
    let program = parse_source(&source).map_err(|e| Failure::program(path, &e))?;
    let ev = Evaluator::new(&program).with_max_depth(max_depth()?);
    if let Ok(Value::Sequence(os)) = ev.eval(&Context::new()) {
        return Ok(vec![(*os).clone()]);
    }
    let mut found = Vec::new();
    for d in program.decls() {
        if d.kind == crate::ast::DeclKind::ObservationSequence {
            match ev.eval_name(&d.name, &Context::new()) {
                Ok(Value::Sequence(os)) => found.push((*os).clone()),
                Ok(_) => {}
                Err(e) => return Err(Failure::program(path, &e)),
            }
        }
    }
    if found.is_empty() {
        return Err(Failure::Program(format!(
            "{path}: error: the program declares no observation sequence"
        )));
    }
    Ok(found)
}

fn property_label(p: &Property) -> String {
    match p {
        Property::Atom(a) => a.to_string(),
        Property::Events(s) => s.to_string(),
        Property::Any => "ANY".into(),
    }
}

fn render_expansion(name: &str, set: &ExpansionSet) -> String {
    let mut text = format!("{name}: {} stream(s)\n", set.len());
    for (i, s) in set.streams.iter().enumerate() {
        let labels: Vec<String> = s.properties.iter().map(property_label).collect();
        let width = labels
            .iter()
            .map(|l| l.chars().count())
            .chain((0..labels.len()).map(|k| k.to_string().len()))
            .max()
            .unwrap_or(1);
        let row = |cells: Vec<String>| {
            cells
                .iter()
                .map(|c| format!("{c:<width$}"))
                .collect::<Vec<_>>()
                .join(" ")
                .trim_end()
                .to_owned()
        };
        text.push_str(&format!("stream {}\n", i + 1));
        let props = format!("  Observed property (context): {}", row(labels.clone()));
        let index = format!(
            "  Sub-dimension index:         {}",
            row((0..labels.len()).map(|k| k.to_string()).collect())
        );
        text.push_str(&format!("{}\n{}\n", props.trim_end(), index.trim_end()));
    }
    text
}

fn cmd_expand(a: &ExpandArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let sequences = if Path::new(&a.sequence).is_file() {
        file_sequences(&a.sequence)?
    } else {
        vec![inline_sequence(&a.sequence)?]
    };
    let unbounded = sequences
        .iter()
        .flat_map(|os| &os.observations)
        .any(|o| o.opt == Opt::Inf);
    let cap = match (a.cap, unbounded) {
        (Some(c), _) => c,
        (None, true) => return Err(Failure::Usage("a +inf duration needs --cap".into())),
        (None, false) => 0,
    };
    let mut sets = Vec::new();
    for os in &sequences {
        let set = expand_sequence(os, cap).map_err(|e| Failure::Usage(e.to_string()))?;
        sets.push((os, set));
    }

    if a.json {
        let report: Vec<_> = sets
            .iter()
            .map(|(os, set)| {
                json!({
                    "sequence": os.to_string(),
                    "name": os.name,
                    "cap": a.cap,
                    "streams": set.streams.iter().map(|s| json!({
                        "properties": s.properties.iter().map(property_label).collect::<Vec<_>>(),
                        "indices": (0..s.len()).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let value = if report.len() == 1 {
            report.into_iter().next().unwrap()
        } else {
            serde_json::Value::Array(report)
        };
        let text = serde_json::to_string_pretty(&value).expect("expansion serializes");
        write_out(out, &format!("{text}\n"))?;
    } else {
        let text: String = sets
            .iter()
            .map(|(os, set)| render_expansion(&format!("{} = {os}", os.name), set))
            .collect();
        write_out(out, &text)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("flucid").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bindings() {
        assert_eq!(parse_binding("time=3"), Ok(("time".into(), 3)));
        assert!(parse_binding("time").is_err());
        assert!(parse_binding("time=-1").is_err());
    }

    #[test]
    fn inline_sequences() {
        let os = inline_sequence("(A,3,0)(B,2,0)").ok().unwrap();
        assert_eq!(os.observations.len(), 2);
        let os = inline_sequence("(unordered {add_B, take}, 0, +inf)").ok().unwrap();
        assert_eq!(os.observations[0].opt, Opt::Inf);
        assert!(inline_sequence("(A,B)").is_err());
    }

    #[test]
    fn in_process_exit_codes() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        let (code, _, err) = call(&["oracle", "--max-len", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--final"));
        let (code, out, _) = call(&["oracle", "--final", "A,empty", "--max-len", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("empty,empty -add_A-> A,empty"));
    }
}
