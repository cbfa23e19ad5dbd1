//! The `organon` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::comprehension::{abstract_term, eval_term, ConstEnv};
use crate::error::Error;
use crate::kernel::{apply_chain, Bounds, GraphElement, ModelSet};
use crate::lang::{parse_expr, Script};
use crate::oracle::{direct_eval, Structure};
use crate::session::{describe_env, parse_seed_flag, Failure, Options, RunReport, Session, Stage, DEFAULT_ORACLE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_EVAL: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;

/// Scripts shipped with the binary, addressable as `bundled:NAME`.
pub const BUNDLED: [(&str, &str); 3] = [
    ("fano", include_str!("../datasets/fano.org")),
    ("aristotle_family", include_str!("../datasets/aristotle_family.org")),
    ("syllogisms", include_str!("../datasets/syllogisms.org")),
];

#[derive(Parser, Debug)]
#[command(name = "organon", version, about = "Combinatory-logic semantics over finite relational data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Enumeration bounds as LEVEL,SET_SIZE,CAP.
    #[arg(long, env = "ORGANON_BOUNDS", value_name = "L,S,C")]
    pub bounds: Option<String>,
    /// Replace the seed of binders over NAME; repeatable.
    #[arg(long = "seed", value_name = "NAME=EXPR")]
    pub seeds: Vec<String>,
    /// Largest carrier the first-order oracle will enumerate.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
    /// JSON structure loaded before the script.
    #[arg(long, value_name = "FILE.json")]
    pub data: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run every query in a script.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Script path, or bundled:NAME.
        file: Option<String>,
    },
    /// Run every query and check it against the oracles.
    Compare {
        #[command(flatten)]
        common: Common,
        file: Option<String>,
    },
    /// Interactive session.
    Repl {
        #[command(flatten)]
        common: Common,
        /// Script to load first.
        file: Option<String>,
    },
    /// Print the S/K term for an applicative expression.
    Abstract {
        /// Variables to abstract, outermost first.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        /// Check the term against direct evaluation on N random argument tuples.
        #[arg(long, value_name = "N")]
        verify: Option<usize>,
        /// Script whose relations and definitions the expression may use.
        #[arg(long, value_name = "FILE")]
        script: Option<String>,
        #[arg(long, env = "ORGANON_BOUNDS", value_name = "L,S,C")]
        bounds: Option<String>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        expr: String,
    },
    /// Print a bundled script, or list them.
    Dataset { name: Option<String> },
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match cli.command {
        Command::Eval { common, file } => batch(&common, file.as_deref(), false, out, err),
        Command::Compare { common, file } => batch(&common, file.as_deref(), true, out, err),
        Command::Repl { common, file } => {
            let stdin = std::io::stdin();
            let mut input = stdin.lock();
            repl(&common, file.as_deref(), &mut input, out, err)
        }
        Command::Abstract { vars, verify, script, bounds, rng_seed, expr } => {
            cmd_abstract(&expr, &vars, verify, script.as_deref(), bounds.as_deref(), rng_seed, out, err)
        }
        Command::Dataset { name } => match name {
            None => {
                for (n, _) in BUNDLED {
                    let _ = writeln!(out, "{n}");
                }
                EXIT_OK
            }
            Some(n) => match BUNDLED.iter().find(|(k, _)| *k == n) {
                Some((_, text)) => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                None => {
                    let _ = writeln!(err, "no bundled dataset `{n}`");
                    EXIT_PARSE
                }
            },
        },
    }
}

fn read_source(file: &str) -> Result<String, String> {
    if let Some(name) = file.strip_prefix("bundled:") {
        return BUNDLED
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| format!("no bundled dataset `{name}`"));
    }
    std::fs::read_to_string(file).map_err(|e| format!("cannot read {file}: {e}"))
}

fn read_data(path: &Path) -> Result<Structure, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { stage: Stage::Parse, error: Error::Unsupported(format!("cannot read {}: {e}", path.display())) })?;
    Structure::from_json(&text).map_err(|error| Failure { stage: Stage::Parse, error })
}

fn options(common: &Common) -> Result<Options, Failure> {
    let parse = |error| Failure { stage: Stage::Parse, error };
    let bounds = match &common.bounds {
        Some(b) => Bounds::parse(b).map_err(parse)?,
        None => Bounds::default(),
    };
    let seeds = common.seeds.iter().map(|s| parse_seed_flag(s)).collect::<Result<_, _>>().map_err(parse)?;
    Ok(Options { bounds, seeds, oracle_cap: common.oracle_cap })
}

fn exit_for(f: &Failure) -> i32 {
    match f.stage {
        Stage::Parse => EXIT_PARSE,
        Stage::Eval => EXIT_EVAL,
    }
}

fn open_session(common: &Common, file: Option<&str>) -> Result<Session, Failure> {
    let opts = options(common)?;
    let data = common.data.as_deref().map(read_data).transpose()?;
    let text = match file {
        Some(f) => read_source(f).map_err(|m| Failure { stage: Stage::Parse, error: Error::Unsupported(m) })?,
        None => String::new(),
    };
    Session::load(&text, data.as_ref(), opts)
}

fn batch(common: &Common, file: Option<&str>, compare: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let session = match open_session(common, file) {
        Ok(s) => s,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            return exit_for(&f);
        }
    };
    let report: RunReport = match if compare { session.compare() } else { session.run() } {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "evaluation error: {e}");
            return EXIT_EVAL;
        }
    };
    if common.json {
        let _ = writeln!(out, "{}", report.to_json());
    } else {
        let _ = write!(out, "{}", report.render_text());
    }
    if compare && report.disagreements() > 0 {
        let _ = writeln!(err, "{} unexplained disagreement(s) with the oracle", report.disagreements());
        return EXIT_DISAGREE;
    }
    EXIT_OK
}

/// Line-oriented session. A line ending in `\` continues on the next one.
pub fn repl(common: &Common, file: Option<&str>, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut session = match open_session(common, file) {
        Ok(s) => s,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            return exit_for(&f);
        }
    };
    let mut pending = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if let Some(head) = trimmed.strip_suffix('\\') {
            pending.push_str(head);
            pending.push('\n');
            continue;
        }
        pending.push_str(trimmed);
        let text = std::mem::take(&mut pending);
        match text.trim() {
            "" => {}
            ":quit" | ":q" => break,
            ":bounds" => {
                let b = session.options.bounds;
                let _ = writeln!(out, "level_bound {} set_size_bound {} enum_cap {}", b.level_bound, b.set_size_bound, b.enum_cap);
            }
            ":env" => {
                let _ = write!(out, "{}", describe_env(&session.program));
            }
            ":help" => {
                let _ = writeln!(out, "declarations and queries as in a script; :env :bounds :quit");
            }
            cmd if cmd.starts_with(':') => {
                let _ = writeln!(err, "unknown command {cmd}");
            }
            src => match session.extend(src) {
                Ok(reports) => {
                    for r in reports {
                        if common.json {
                            let _ = writeln!(out, "{}", serde_json::to_string(&r).expect("report serializes"));
                        } else {
                            let _ = write!(out, "{}", r.render_text());
                        }
                    }
                }
                Err(f) => {
                    let _ = writeln!(err, "{f}");
                }
            },
        }
        let _ = out.flush();
    }
    EXIT_OK
}

#[allow(clippy::too_many_arguments)]
fn cmd_abstract(
    expr: &str,
    vars: &[String],
    verify: Option<usize>,
    script: Option<&str>,
    bounds: Option<&str>,
    rng_seed: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let fail = |err: &mut dyn Write, f: Failure| {
        let _ = writeln!(err, "{f}");
        exit_for(&f)
    };
    let bounds = match bounds.map(Bounds::parse).transpose() {
        Ok(b) => b.unwrap_or_default(),
        Err(error) => return fail(err, Failure { stage: Stage::Parse, error }),
    };
    let session = match script {
        Some(path) => {
            let text = match read_source(path) {
                Ok(t) => t,
                Err(m) => return fail(err, Failure { stage: Stage::Parse, error: Error::Unsupported(m) }),
            };
            match Session::load(&text, None, Options { bounds, ..Options::default() }) {
                Ok(s) => s,
                Err(f) => return fail(err, f),
            }
        }
        None => Session::new(Options { bounds, ..Options::default() }),
    };
    let known: &Script = &session.program.script;
    let e = match parse_expr(expr, known, vars) {
        Ok(e) => e,
        Err(error) => return fail(err, Failure { stage: Stage::Parse, error }),
    };
    let term = match abstract_term(&e, vars) {
        Ok(t) => t,
        Err(error) => return fail(err, Failure { stage: Stage::Eval, error }),
    };
    let _ = writeln!(out, "{term}");
    let Some(n) = verify else { return EXIT_OK };
    let env = &session.program.env.consts;
    let carrier: Vec<GraphElement> = session.program.env.carrier.iter().cloned().collect();
    match verify_term(&e, vars, env, &carrier, n, rng_seed, &bounds) {
        Ok(()) => {
            let _ = writeln!(out, "verified on {n} random argument tuples");
            EXIT_OK
        }
        Err(m) => {
            let _ = writeln!(err, "verification failed: {m}");
            EXIT_EVAL
        }
    }
}

/// Compares the abstracted term against direct evaluation of `e` on random
/// subsets of the carrier.
pub fn verify_term(
    e: &crate::expr::Expr,
    vars: &[String],
    env: &ConstEnv,
    carrier: &[GraphElement],
    n: usize,
    rng_seed: u64,
    bounds: &Bounds,
) -> Result<(), String> {
    let term = abstract_term(e, vars).map_err(|x| x.to_string())?;
    let compiled = eval_term(&term, env, bounds).map_err(|x| x.to_string())?;
    let mut rng = StdRng::seed_from_u64(rng_seed);
    let pool: Vec<GraphElement> =
        if carrier.is_empty() { ["a", "b", "c"].iter().map(|a| GraphElement::atom(a)).collect() } else { carrier.to_vec() };
    for i in 0..n {
        let args: Vec<ModelSet> = vars
            .iter()
            .map(|_| {
                let k = rng.gen_range(0..=pool.len().min(3));
                let picked: BTreeSet<GraphElement> = (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
                ModelSet::Extensional(picked)
            })
            .collect();
        let via_term = apply_chain(&compiled, &args, bounds).and_then(ModelSet::into_set).map_err(|x| x.to_string())?;
        let direct = direct_eval(e, env, vars, &args, bounds).and_then(ModelSet::into_set).map_err(|x| x.to_string())?;
        if via_term != direct {
            return Err(format!("sample {i}: term gives {} elements, direct evaluation {}", via_term.len(), direct.len()));
        }
    }
    Ok(())
}
