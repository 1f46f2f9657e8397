//! Command-line front-end: model checking, evaluation, simplification,
//! equivalence, the law suite and frame-rule application.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use strict_heap::algebra::{self, check_laws, normalize, push_inversion, AlgebraError, LAW_BUDGET};
use strict_heap::formula::{
    merge_defs, parse_defs, parse_document, print_formula, Defs, DefsError, Formula,
};
use strict_heap::heap::{parse_heap_text, validate_heap, Heap, HeapFormatError, StackEnv};
use strict_heap::oracle::{random_heap_with, OracleError, UniverseSpec, DEFAULT_BUDGET};
use strict_heap::semantics::{eval_ground, eval_ground_in, lint, match_formula, SemanticsError};
use strict_heap::verifier::{frame_apply, parse_specs, VerifierError};

#[derive(Debug, Parser)]
#[command(
    name = "strict-heap",
    version,
    about = "Strict points-to heap logic toolkit"
)]
struct Cli {
    /// File of `def` lines made available to every formula.
    #[arg(long, global = true, value_name = "FILE")]
    defs: Option<String>,
    /// Predicate unfolding depth.
    #[arg(long, global = true, default_value_t = strict_heap::DEFAULT_FUEL)]
    fuel: usize,
    /// Universe as `locations=a,b,c;labels=eps,f,g;atoms=nil;max_edges=4`, or
    /// a file holding such settings.
    #[arg(long, global = true, value_name = "SPEC")]
    universe: Option<String>,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print one JSON object instead of plain lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Does the heap satisfy each formula? Prints the bindings.
    Check { heap: String, formula: String },
    /// Ground evaluation: the resulting heap or `false`.
    Eval { formula: String },
    /// Prints the normal form of each formula.
    Simplify { formula: String },
    /// Decides equivalence over the universe; prints a witness if they differ.
    Equiv { first: String, second: String },
    /// Prints each formula with inversions pushed to the leaves.
    Invert { formula: String },
    /// Runs the algebraic law suite over the universe.
    Laws,
    /// Applies a named spec to a heap under the frame rule.
    Frame {
        heap: String,
        specs: String,
        name: String,
    },
    /// Prints random heaps over the universe, reproducible by `--seed`.
    Sample {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Defs(#[from] DefsError),
    #[error("heap file line {}: {}", .0.line, .0.message)]
    Heap(#[from] HeapFormatError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Semantics(#[from] SemanticsError),
    #[error("{0}")]
    Algebra(#[from] AlgebraError),
    #[error("{0}")]
    Verifier(#[from] VerifierError),
    #[error("{0}")]
    Input(String),
}

/// Structured result of one command.
#[derive(Debug, Default, Serialize)]
struct Report {
    command: &'static str,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bindings: Option<Vec<BTreeMap<String, String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessReport>,
    /// The plain-text output, one result per line.
    output: Vec<String>,
    diagnostics: Vec<String>,
    #[serde(skip)]
    negative: bool,
}

#[derive(Debug, Serialize)]
struct WitnessReport {
    heap: String,
    assignment: BTreeMap<String, String>,
    satisfies: &'static str,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            command,
            ..Report::default()
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.output.push(s.into());
    }

    fn warn_style(&mut self, f: &Formula) {
        self.diagnostics
            .extend(lint(f).into_iter().map(|w| format!("warning: {w}")));
    }
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit code: 0 for success,
/// sat or equivalent; 1 for unsat, inequivalent or a failed check; 2 for
/// unreadable input or bad configuration.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let name = command_name(&cli.command);
    let (report, code) = match run(&cli) {
        Ok(r) => {
            let code = i32::from(r.negative);
            (r, code)
        }
        Err(e) => {
            let mut r = Report::new(name);
            r.verdict = "error".into();
            r.diagnostics.push(e.to_string());
            (r, 2)
        }
    };
    if cli.json {
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string(&report).expect("serializable")
        );
    } else {
        for l in &report.output {
            let _ = writeln!(out, "{l}");
        }
        for d in &report.diagnostics {
            let _ = writeln!(err, "{d}");
        }
    }
    code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Eval { .. } => "eval",
        Command::Simplify { .. } => "simplify",
        Command::Equiv { .. } => "equiv",
        Command::Invert { .. } => "invert",
        Command::Laws => "laws",
        Command::Frame { .. } => "frame",
        Command::Sample { .. } => "sample",
    }
}

/// An argument naming an existing file yields the file's contents; any
/// other argument is taken as literal text.
fn read_arg(arg: &str) -> Result<String, CliError> {
    if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|source| CliError::Io {
            path: arg.to_string(),
            source,
        })
    } else {
        Ok(arg.to_string())
    }
}

struct Context {
    defs: Defs,
    universe: Option<UniverseSpec>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let defs = match &cli.defs {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_defs(&text)?
            }
            None => Defs::new(),
        };
        let universe = match &cli.universe {
            Some(u) => Some(UniverseSpec::parse(&read_arg(u)?)?),
            None => None,
        };
        Ok(Context { defs, universe })
    }

    fn universe(&self) -> UniverseSpec {
        self.universe.clone().unwrap_or_default()
    }

    /// The formulas of a formula file or literal, with its definitions
    /// merged into the global ones.
    fn formulas(&self, arg: &str) -> Result<(Vec<Formula>, Defs), CliError> {
        let doc = parse_document(&read_arg(arg)?)?;
        let mut defs = self.defs.clone();
        merge_defs(&mut defs, doc.defs)?;
        let fs: Vec<Formula> = doc.directives.iter().map(|d| d.formula().clone()).collect();
        if fs.is_empty() {
            return Err(CliError::Input(format!("no formula in `{arg}`")));
        }
        Ok((fs, defs))
    }

    fn formula(&self, arg: &str) -> Result<(Formula, Defs), CliError> {
        let (mut fs, defs) = self.formulas(arg)?;
        if fs.len() != 1 {
            return Err(CliError::Input(format!(
                "expected one formula in `{arg}`, found {}",
                fs.len()
            )));
        }
        Ok((fs.remove(0), defs))
    }
}

fn heap_arg(arg: &str) -> Result<(Heap, StackEnv), CliError> {
    Ok(parse_heap_text(&read_arg(arg)?.replace(';', "\n"))?)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let ctx = Context::new(cli)?;
    let fuel = cli.fuel;
    let mut r = Report::new(command_name(&cli.command));
    match &cli.command {
        Command::Check { heap, formula } => {
            let (h, s) = heap_arg(heap)?;
            let report = validate_heap(&h, &s);
            let structural: Vec<String> = report.structural().map(|v| v.to_string()).collect();
            if !structural.is_empty() {
                return Err(CliError::Input(format!(
                    "malformed heap: {}",
                    structural.join("; ")
                )));
            }
            if !s.is_empty() {
                r.diagnostics
                    .extend(report.violations.iter().map(|v| format!("warning: {v}")));
            }
            let (fs, defs) = ctx.formulas(formula)?;
            let mut all = Vec::new();
            for f in &fs {
                r.warn_style(f);
                let bindings = match_formula(f, &h, &s, &defs, fuel)?;
                if bindings.is_empty() {
                    r.negative = true;
                    r.line("unsat");
                    continue;
                }
                r.line("sat");
                for b in &bindings {
                    let env: BTreeMap<String, String> = b
                        .env
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_string()))
                        .collect();
                    let shown: Vec<String> =
                        env.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    r.line(format!("  binding {{{}}}", shown.join(", ")));
                    all.push(env);
                }
            }
            r.bindings = Some(all);
            r.verdict = if r.negative { "unsat" } else { "sat" }.into();
        }
        Command::Eval { formula } => {
            let (fs, defs) = ctx.formulas(formula)?;
            for f in &fs {
                r.warn_style(f);
                let res = match &ctx.universe {
                    Some(u) => eval_ground_in(f, &defs, fuel, &u.values(), &BTreeMap::new())?,
                    None => eval_ground(f, &defs, fuel)?,
                };
                r.line(res.to_string());
            }
            r.verdict = "ok".into();
        }
        Command::Simplify { formula } => {
            for f in ctx.formulas(formula)?.0 {
                r.line(print_formula(&normalize(&f)));
            }
            r.verdict = "ok".into();
        }
        Command::Invert { formula } => {
            for f in ctx.formulas(formula)?.0 {
                r.line(print_formula(&push_inversion(&f)));
            }
            r.verdict = "ok".into();
        }
        Command::Equiv { first, second } => {
            let (f1, mut defs) = ctx.formula(first)?;
            let (f2, defs2) = ctx.formula(second)?;
            for (name, d) in defs2 {
                defs.entry(name).or_insert(d);
            }
            let v = algebra::decide(&f1, &f2, &ctx.universe(), &defs, fuel, DEFAULT_BUDGET)?;
            match &v.witness {
                None => {
                    r.verdict = "equivalent".into();
                    r.line("equivalent");
                }
                Some(w) => {
                    r.negative = true;
                    r.verdict = "inequivalent".into();
                    r.line("inequivalent");
                    r.line(format!("witness {}", w.heap));
                    let assignment: BTreeMap<String, String> = w
                        .env
                        .iter()
                        .map(|(k, l)| (k.clone(), l.to_string()))
                        .collect();
                    if assignment.iter().any(|(k, v)| k != v) {
                        let shown: Vec<String> = assignment
                            .iter()
                            .map(|(k, v)| format!("{k} = {v}"))
                            .collect();
                        r.line(format!("assignment {{{}}}", shown.join(", ")));
                    }
                    let satisfies = if w.in_first { "first" } else { "second" };
                    r.line(format!("satisfies {satisfies} only"));
                    r.witness = Some(WitnessReport {
                        heap: w.heap.to_string(),
                        assignment,
                        satisfies,
                    });
                }
            }
            r.diagnostics
                .push(format!("decided by {:?}", v.method).to_lowercase());
        }
        Command::Laws => {
            let results = check_laws(&ctx.universe(), LAW_BUDGET)?;
            for law in &results {
                r.line(law.to_string());
            }
            r.negative = results.iter().any(|l| !l.passed());
            r.verdict = if r.negative { "fail" } else { "pass" }.into();
        }
        Command::Frame { heap, specs, name } => {
            let (h, s) = heap_arg(heap)?;
            let file = parse_specs(&read_arg(specs)?)?;
            let mut defs = ctx.defs.clone();
            merge_defs(&mut defs, file.defs.clone())?;
            let spec = file.get(name)?;
            match frame_apply(spec, &h, &s, &defs, fuel) {
                Ok(applied) => {
                    r.verdict = "ok".into();
                    r.line(format!("footprint {}", applied.split.footprint));
                    r.line(format!("frame {}", applied.split.frame));
                    r.line(format!("result {}", applied.result));
                }
                Err(VerifierError::VerificationFailure(cause)) => {
                    r.negative = true;
                    r.verdict = "failure".into();
                    r.line("failure");
                    r.diagnostics.push(format!("verification failed: {cause}"));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Sample { count } => {
            let u = ctx.universe();
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            for _ in 0..*count {
                r.line(random_heap_with(&u, &mut rng).to_string());
            }
            r.verdict = "ok".into();
        }
    }
    Ok(r)
}
