//! The script language: declarations of data and definitions, and queries.
//!
//! The grammar is in `grammar.ebnf` at the crate root. Printing a parsed
//! script gives text that parses back to the same declarations.

mod elaborate;
mod parser;

use std::fmt;

use crate::error::SourceSpan;
use crate::expr::Expr;
use crate::factual::Categorical;
use crate::kernel::GraphElement;

pub use elaborate::{elaborate, elaborate_into, structure_program, Program};
pub use parser::{parse_expr, parse_script, parse_script_with, KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// `query facts EXPR`: the value of a closed term.
    Facts(Expr),
    /// `query truth P a₁ … aₙ`
    Truth { pred: String, args: Vec<Expr> },
    /// `query ext P [j]`, slot counted from 1 (default: last).
    Ext { pred: String, slot: Option<usize> },
    /// `query relation P`: all tuples of a predicate.
    Relation(String),
    /// `query holds SENTENCE` under the relational semantics.
    Holds(Expr),
    /// `query categorical FORM P Q`
    Categorical { form: Categorical, subject: String, predicate: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Universe(Vec<String>),
    Relation { name: String, arity: usize, tuples: Vec<Vec<String>> },
    Const { name: String, atom: String },
    Def { name: String, params: Vec<String>, body: Expr },
    Valuation { name: String, entries: Vec<(bool, Vec<String>)> },
    Query(Query),
}

#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub span: SourceSpan,
    pub node: T,
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    /// Positions are not part of a declaration's identity.
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Script {
    pub decls: Vec<Spanned<Decl>>,
}

impl Script {
    pub fn queries(&self) -> impl Iterator<Item = (&SourceSpan, &Query)> {
        self.decls.iter().filter_map(|d| match &d.node {
            Decl::Query(q) => Some((&d.span, q)),
            _ => None,
        })
    }
}

fn tuple_text(t: &[String]) -> String {
    format!("({})", t.join(", "))
}

/// Query arguments print as bare atoms when they are singletons.
fn arg_text(e: &Expr) -> String {
    if let Expr::Set(s) = e {
        if s.len() == 1 {
            if let Some(GraphElement::Atom(a)) = s.iter().next() {
                return a.to_string();
            }
        }
    }
    match e {
        Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => e.to_string(),
        _ => format!("({e})"),
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Facts(e) => write!(f, "facts {e}"),
            Query::Truth { pred, args } => {
                write!(f, "truth {pred}")?;
                for a in args {
                    write!(f, " {}", arg_text(a))?;
                }
                Ok(())
            }
            Query::Ext { pred, slot } => match slot {
                Some(j) => write!(f, "ext {pred} {j}"),
                None => write!(f, "ext {pred}"),
            },
            Query::Relation(p) => write!(f, "relation {p}"),
            Query::Holds(e) => write!(f, "holds {e}"),
            Query::Categorical { form, subject, predicate } => {
                write!(f, "categorical {} {subject} {predicate}", form.as_str())
            }
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Universe(atoms) => write!(f, "universe {}", atoms.join(" ")),
            Decl::Relation { name, arity, tuples } => {
                let ts: Vec<String> = tuples.iter().map(|t| tuple_text(t)).collect();
                write!(f, "relation {name}/{arity} = {}", ts.join(", "))
            }
            Decl::Const { name, atom } => write!(f, "const {name} = {atom}"),
            Decl::Def { name, params, body } => {
                write!(f, "def {name}")?;
                for p in params {
                    write!(f, " {p}")?;
                }
                write!(f, " := {body}")
            }
            Decl::Valuation { name, entries } => {
                write!(f, "valuation {name}:")?;
                for (pol, t) in entries {
                    write!(f, " {}{}", if *pol { '+' } else { '-' }, tuple_text(t))?;
                }
                Ok(())
            }
            Decl::Query(q) => write!(f, "query {q}"),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{}", d.node)?;
        }
        Ok(())
    }
}
