//! Running scripts: query evaluation, oracle comparison and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::factual::{Ctx, FixpointRecord, Predication, TruthValue, Tuple};
use crate::kernel::{Bounds, ElementSet};
use crate::lang::{elaborate_into, parse_expr, parse_script_with, structure_program, Decl, Program, Query, Script};
use crate::oracle::{fo_eval_capped, fo_relation, genealogy_oracle, FoFormula, GenealogyQuery, Structure};
use crate::relational::{LambdaCtx, PropFormula};

/// Carrier cap used by `compare` unless overridden; large enough for Fano.
pub const DEFAULT_ORACLE_CAP: usize = 16;

#[derive(Debug, Clone)]
pub struct Options {
    pub bounds: Bounds,
    /// `NAME=EXPR` seed overrides, parsed against the script.
    pub seeds: Vec<(String, String)>,
    pub oracle_cap: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { bounds: Bounds::default(), seeds: Vec::new(), oracle_cap: DEFAULT_ORACLE_CAP }
    }
}

/// Where a load failed, for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub stage: Stage,
    pub error: Error,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.stage {
            Stage::Parse => write!(f, "parse error: {}", self.error),
            Stage::Eval => write!(f, "evaluation error: {}", self.error),
        }
    }
}

fn parse_failure(error: Error) -> Failure {
    Failure { stage: Stage::Parse, error }
}

fn eval_failure(error: Error) -> Failure {
    Failure { stage: Stage::Eval, error }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Facts { elements: Vec<String> },
    Truth { verdict: TruthValue },
    Extension { slot: usize, elements: Vec<String> },
    Relation { tuples: Vec<Vec<String>> },
    Holds { verdict: TruthValue, formula: PropFormula },
    Categorical { verdict: TruthValue },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Agree,
    Disagree,
    /// △ explained by the truth rule or an indeterminate relational fact.
    Indeterminate,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub status: Status,
    pub oracle: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryReport {
    pub line: usize,
    pub query: String,
    pub outcome: Outcome,
    pub fixpoints: Vec<FixpointSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// All fixpoints computed for one binder variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixpointSummary {
    pub var: String,
    pub runs: usize,
    pub max_iterations: usize,
    pub max_size: usize,
    pub verified: bool,
    pub monotone: bool,
}

pub fn summarize(records: &[FixpointRecord]) -> Vec<FixpointSummary> {
    records.iter().fold(Vec::new(), summarize_into)
}

fn summarize_into(mut out: Vec<FixpointSummary>, r: &FixpointRecord) -> Vec<FixpointSummary> {
    match out.iter_mut().find(|s| s.var == r.var) {
        Some(s) => {
            s.runs += 1;
            s.max_iterations = s.max_iterations.max(r.iterations);
            s.max_size = s.max_size.max(r.size);
            s.verified &= r.verified;
            s.monotone &= r.monotone;
        }
        None => out.push(FixpointSummary {
            var: r.var.clone(),
            runs: 1,
            max_iterations: r.iterations,
            max_size: r.size,
            verified: r.verified,
            monotone: r.monotone,
        }),
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct DefinitionTrace {
    pub name: String,
    pub fixpoints: Vec<FixpointSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_us: u128,
    pub per_query_us: Vec<u128>,
}

/// Everything a run produced. Apart from `timing` the document is a pure
/// function of the script, seeds and bounds.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub bounds: Bounds,
    pub definitions: Vec<DefinitionTrace>,
    pub queries: Vec<QueryReport>,
    pub timing: Timing,
}

impl RunReport {
    pub fn disagreements(&self) -> usize {
        self.queries
            .iter()
            .filter(|q| matches!(&q.comparison, Some(c) if c.status == Status::Disagree))
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable form.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for d in &self.definitions {
            for f in &d.fixpoints {
                let _ = writeln!(out, "def {}: {}", d.name, render_summary(f));
            }
        }
        for q in &self.queries {
            out.push_str(&q.render_text());
        }
        out
    }
}

impl QueryReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[{}] {}", self.line, self.query);
        let _ = writeln!(out, "    {}", render_outcome(&self.outcome));
        for f in &self.fixpoints {
            let _ = writeln!(out, "    {}", render_summary(f));
        }
        if let Some(c) = &self.comparison {
            let status = match c.status {
                Status::Agree => "agree",
                Status::Disagree => "DISAGREE",
                Status::Indeterminate => "indeterminate",
                Status::NotApplicable => "n/a",
            };
            let _ = writeln!(out, "    oracle ({}): {status}, {}", c.oracle, c.detail);
        }
        out
    }
}

fn render_summary(f: &FixpointSummary) -> String {
    let runs = if f.runs == 1 { "1 run".to_string() } else { format!("{} runs", f.runs) };
    let checked = if f.verified { ", verified" } else { "" };
    format!(
        "fixpoint {}: {runs}, at most {} iterations and {} elements{checked}",
        f.var, f.max_iterations, f.max_size
    )
}

/// Formulas longer than this are summarized in text output.
const FORMULA_TEXT_LIMIT: usize = 40;

fn render_outcome(o: &Outcome) -> String {
    match o {
        Outcome::Facts { elements } | Outcome::Extension { elements, .. } => format!("{{{}}}", elements.join(", ")),
        Outcome::Truth { verdict } | Outcome::Categorical { verdict } => verdict.to_string(),
        Outcome::Relation { tuples } => {
            let ts: Vec<String> = tuples.iter().map(|t| format!("<{}>", t.join(","))).collect();
            format!("{} tuples: {{{}}}", tuples.len(), ts.join(", "))
        }
        Outcome::Holds { verdict, formula } => {
            if formula.size() <= FORMULA_TEXT_LIMIT {
                format!("{verdict}  {formula}")
            } else {
                format!("{verdict}  (formula with {} literals)", formula.size())
            }
        }
    }
}

fn strings(s: &ElementSet) -> Vec<String> {
    s.iter().map(ToString::to_string).collect()
}

fn tuple_strings(ts: &BTreeSet<Tuple>) -> BTreeSet<Vec<String>> {
    ts.iter().map(|t| t.iter().map(ToString::to_string).collect()).collect()
}

pub struct Session {
    pub program: Program,
    pub options: Options,
    seeds: BTreeMap<String, Expr>,
}

impl Session {
    pub fn new(options: Options) -> Self {
        Session { program: Program::default(), options, seeds: BTreeMap::new() }
    }

    /// Loads an optional data structure and then a script on top of it.
    pub fn load(text: &str, data: Option<&Structure>, options: Options) -> std::result::Result<Session, Failure> {
        let program = match data {
            Some(s) => structure_program(s).map_err(parse_failure)?,
            None => Program::default(),
        };
        let script = parse_script_with(text, &program.script).map_err(parse_failure)?;
        let mut known = program.script.clone();
        known.decls.extend(script.decls.iter().cloned());
        let mut seeds = BTreeMap::new();
        for (name, src) in &options.seeds {
            let e = parse_expr(src, &known, &[]).map_err(parse_failure)?;
            seeds.insert(name.clone(), e);
        }
        let mut s = Session { program, options, seeds };
        s.add(&script).map_err(eval_failure)?;
        Ok(s)
    }

    fn add(&mut self, script: &Script) -> Result<()> {
        elaborate_into(&mut self.program, script, &self.options.bounds, &self.seeds)
    }

    /// Adds more declarations (REPL input) and runs the queries among them.
    pub fn extend(&mut self, text: &str) -> std::result::Result<Vec<QueryReport>, Failure> {
        let script = parse_script_with(text, &self.program.script).map_err(parse_failure)?;
        let before = self.program.queries.len();
        let mut next = self.program.clone();
        elaborate_into(&mut next, &script, &self.options.bounds, &self.seeds).map_err(eval_failure)?;
        let fresh: Vec<_> = next.queries[before..].to_vec();
        self.program = next;
        fresh.iter().map(|(span, q)| self.run_query(span.line, q, false)).collect::<Result<_>>().map_err(eval_failure)
    }

    pub fn run(&self) -> Result<RunReport> {
        self.run_all(false)
    }

    /// Runs every query and classifies it against the oracles.
    pub fn compare(&self) -> Result<RunReport> {
        self.run_all(true)
    }

    fn run_all(&self, compare: bool) -> Result<RunReport> {
        let start = Instant::now();
        let mut queries = Vec::new();
        let mut per_query_us = Vec::new();
        for (span, q) in &self.program.queries {
            let t = Instant::now();
            queries.push(self.run_query(span.line, q, compare)?);
            per_query_us.push(t.elapsed().as_micros());
        }
        let mut definitions: Vec<DefinitionTrace> = Vec::new();
        for (name, r) in &self.program.trace {
            match definitions.last_mut() {
                Some(d) if &d.name == name => d.fixpoints = summarize_into(std::mem::take(&mut d.fixpoints), r),
                _ => definitions.push(DefinitionTrace { name: name.clone(), fixpoints: summarize(std::slice::from_ref(r)) }),
            }
        }
        Ok(RunReport {
            bounds: self.options.bounds,
            definitions,
            queries,
            timing: Timing { total_us: start.elapsed().as_micros(), per_query_us },
        })
    }

    pub fn run_query(&self, line: usize, q: &Query, compare: bool) -> Result<QueryReport> {
        let ctx = Ctx::new(&self.program.env, self.options.bounds);
        let empty = BTreeMap::new();
        let outcome = match q {
            Query::Facts(e) => Outcome::Facts { elements: strings(&ctx.term(e, &empty)?.into_set()?) },
            Query::Truth { pred, args } => {
                let p = Predication::named(pred, args.len());
                let sets = args.iter().map(|a| ctx.term(a, &empty)?.into_set()).collect::<Result<Vec<_>>>()?;
                Outcome::Truth { verdict: ctx.truth(&p, &sets)? }
            }
            Query::Ext { pred, slot } => {
                let n = self.program.env.arity(pred)?;
                let j = slot.unwrap_or(n);
                Outcome::Extension { slot: j, elements: strings(&ctx.ext(&Predication::named(pred, n), j - 1)?) }
            }
            Query::Relation(pred) => {
                Outcome::Relation { tuples: tuple_strings(&ctx.relation_of(pred)?).into_iter().collect() }
            }
            Query::Holds(e) => {
                let (formula, verdict) = LambdaCtx::new(&ctx, self.program.valuation.clone()).holds(e)?;
                Outcome::Holds { verdict, formula }
            }
            Query::Categorical { form, subject, predicate } => {
                Outcome::Categorical { verdict: ctx.categorical(*form, subject, predicate)? }
            }
        };
        let comparison = if compare { Some(self.classify(q, &outcome)) } else { None };
        Ok(QueryReport { line, query: q.to_string(), outcome, fixpoints: summarize(&ctx.take_trace()), comparison })
    }

    /// The atom an argument denotes, if it is a single atom or a constant.
    fn arg_atom(&self, e: &Expr) -> Option<String> {
        match e {
            Expr::Set(s) if s.len() == 1 => s.iter().next()?.as_atom().map(str::to_string),
            Expr::Const(c) => self.program.structure.constants.get(c).cloned(),
            _ => None,
        }
    }

    fn def_body(&self, name: &str) -> Option<(&[String], &Expr)> {
        self.program.script.decls.iter().rev().find_map(|d| match &d.node {
            Decl::Def { name: n, params, body } if n == name => Some((params.as_slice(), body)),
            _ => None,
        })
    }

    /// The relation `name` computed without the engine, if some oracle covers it.
    fn oracle_relation(&self, name: &str) -> Result<Option<(String, BTreeSet<Vec<String>>)>> {
        let s = &self.program.structure;
        if let Some(r) = s.relations.get(name) {
            return Ok(Some(("data".into(), r.tuples.clone())));
        }
        let genealogy = match name {
            "sibling" if s.relations.contains_key("mother") => Some(GenealogyQuery::Sibling),
            "mdesc" if ["father", "male"].iter().all(|r| s.relations.contains_key(*r)) => Some(GenealogyQuery::Mdesc),
            _ => None,
        };
        if let Some(g) = genealogy {
            let pairs = genealogy_oracle(g, s)?;
            return Ok(Some(("genealogy".into(), pairs.into_iter().map(|(a, b)| vec![a, b]).collect())));
        }
        let Some((params, body)) = self.def_body(name) else { return Ok(None) };
        match FoFormula::from_expr(body) {
            Ok(f) => Ok(Some(("first-order".into(), fo_relation(&f, params, s, self.options.oracle_cap)?))),
            Err(_) => Ok(None),
        }
    }

    fn classify(&self, q: &Query, outcome: &Outcome) -> Comparison {
        match self.try_classify(q, outcome) {
            Ok(Some(c)) => c,
            Ok(None) => Comparison {
                status: Status::NotApplicable,
                oracle: "none".into(),
                detail: "no oracle covers this query".into(),
            },
            Err(e) => Comparison { status: Status::NotApplicable, oracle: "none".into(), detail: e.to_string() },
        }
    }

    fn try_classify(&self, q: &Query, outcome: &Outcome) -> Result<Option<Comparison>> {
        let cmp = |status, oracle: &str, detail: String| Some(Comparison { status, oracle: oracle.to_string(), detail });
        Ok(match (q, outcome) {
            (Query::Holds(e), Outcome::Holds { verdict, formula }) => {
                let f = FoFormula::from_expr(e)?;
                let truth = fo_eval_capped(&f, &self.program.structure, self.options.oracle_cap)?;
                let status = match (verdict, truth) {
                    (TruthValue::True, true) | (TruthValue::False, false) => Status::Agree,
                    (TruthValue::Indeterminate, _) if formula.has_indet() => Status::Indeterminate,
                    _ => Status::Disagree,
                };
                cmp(status, "fo_eval", format!("engine {verdict}, oracle {truth}"))
            }
            (Query::Relation(name), Outcome::Relation { tuples }) => {
                let Some((oracle, expected)) = self.oracle_relation(name)? else { return Ok(None) };
                let got: BTreeSet<Vec<String>> = tuples.iter().cloned().collect();
                let status = if got == expected { Status::Agree } else { Status::Disagree };
                cmp(status, &oracle, set_diff_detail(&got, &expected))
            }
            (Query::Ext { pred, .. }, Outcome::Extension { slot, elements }) => {
                let Some((oracle, expected)) = self.oracle_relation(pred)? else { return Ok(None) };
                let expected: BTreeSet<Vec<String>> = expected.into_iter().map(|t| vec![t[slot - 1].clone()]).collect();
                let got: BTreeSet<Vec<String>> = elements.iter().map(|e| vec![e.clone()]).collect();
                let status = if got == expected { Status::Agree } else { Status::Disagree };
                cmp(status, &oracle, set_diff_detail(&got, &expected))
            }
            (Query::Truth { pred, args }, Outcome::Truth { verdict }) => {
                let Some(tuple) = args.iter().map(|a| self.arg_atom(a)).collect::<Option<Vec<String>>>() else {
                    return Ok(None);
                };
                let Some((oracle, rel)) = self.oracle_relation(pred)? else { return Ok(None) };
                let truth = rel.contains(&tuple);
                let status = match (verdict, truth) {
                    (TruthValue::True, true) | (TruthValue::False, false) => Status::Agree,
                    // an absent fact at singleton arguments is △ under the truth rule
                    (TruthValue::Indeterminate, false) => Status::Indeterminate,
                    _ => Status::Disagree,
                };
                cmp(status, &oracle, format!("engine {verdict}, oracle {truth}"))
            }
            (Query::Categorical { form, subject, predicate }, Outcome::Categorical { verdict }) => {
                let (Some((_, xs)), Some((_, ys))) = (self.oracle_relation(subject)?, self.oracle_relation(predicate)?) else {
                    return Ok(None);
                };
                let x = class_of(&xs);
                let y = class_of(&ys);
                let holds = form.class_condition(&x, &y);
                let status = match (verdict, holds) {
                    (TruthValue::True, true) | (TruthValue::False, false) => Status::Agree,
                    (TruthValue::Indeterminate, false) => Status::Indeterminate,
                    _ => Status::Disagree,
                };
                cmp(status, "classical", format!("engine {verdict}, {} {subject} {predicate} is {holds}", form.as_str()))
            }
            _ => None,
        })
    }
}

fn class_of(ts: &BTreeSet<Vec<String>>) -> ElementSet {
    ts.iter().filter_map(|t| t.first()).map(|a| crate::kernel::GraphElement::atom(a)).collect()
}


fn set_diff_detail(got: &BTreeSet<Vec<String>>, expected: &BTreeSet<Vec<String>>) -> String {
    let missing = expected.difference(got).count();
    let extra = got.difference(expected).count();
    if missing == 0 && extra == 0 {
        format!("{} tuples match", got.len())
    } else {
        format!("{missing} missing, {extra} extra")
    }
}

/// Parses `L,S,C`, falling back to defaults when `text` is absent.
pub fn bounds_from(text: Option<&str>) -> Result<Bounds> {
    match text {
        Some(t) => Bounds::parse(t),
        None => Ok(Bounds::default()),
    }
}

/// Splits `NAME=EXPR`.
pub fn parse_seed_flag(flag: &str) -> Result<(String, String)> {
    match flag.split_once('=') {
        Some((n, e)) if !n.trim().is_empty() => Ok((n.trim().to_string(), e.trim().to_string())),
        _ => Err(Error::Unsupported(format!("seed must look like NAME=EXPR, got `{flag}`"))),
    }
}

/// Used by `:env` in the REPL.
pub fn describe_env(p: &Program) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "atoms: {}", p.env.carrier.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
    for (name, arity) in &p.env.arities {
        let kind = if p.env.defs.contains_key(name) { "def" } else { "relation" };
        let _ = writeln!(out, "{kind} {name}/{arity}");
    }
    for (name, atom) in &p.structure.constants {
        let _ = writeln!(out, "const {name} = {atom}");
    }
    out
}
