use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{Decl, Query, Script};
use crate::comprehension::comprehend;
use crate::error::{Error, Result, SourceSpan};
use crate::expr::{Expr, SeedSpec};
use crate::factual::{decode_relation, Closure, Ctx, Definition, Env, FixpointRecord, Tuple};
use crate::kernel::{Bounds, GraphElement, ModelSet};
use crate::oracle::{Relation, Structure};
use crate::relational::Valuation;

/// An elaborated script: the environment, valuation overrides, the data as
/// a plain structure for the oracle, and the queries in script order.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub env: Env,
    pub valuation: Valuation,
    pub structure: Structure,
    pub queries: Vec<(SourceSpan, Query)>,
    /// Fixpoints computed while compiling recursive definitions.
    pub trace: Vec<(String, FixpointRecord)>,
    /// Declarations seen so far, for name resolution in later input.
    pub script: Script,
}

/// Elaborates `script` from scratch. `seeds` replaces the seed of every
/// binder whose variable has that name.
pub fn elaborate(script: &Script, bounds: &Bounds, seeds: &BTreeMap<String, Expr>) -> Result<Program> {
    let mut p = Program::default();
    elaborate_into(&mut p, script, bounds, seeds)?;
    Ok(p)
}

/// Wraps a structure document as a program without queries.
pub fn structure_program(s: &Structure) -> Result<Program> {
    s.validate()?;
    let mut decls = vec![Decl::Universe(s.carrier.iter().cloned().collect())];
    for (name, rel) in &s.relations {
        decls.push(Decl::Relation { name: name.clone(), arity: rel.arity, tuples: rel.tuples.iter().cloned().collect() });
    }
    for (name, atom) in &s.constants {
        decls.push(Decl::Const { name: name.clone(), atom: atom.clone() });
    }
    let script = Script {
        decls: decls.into_iter().map(|node| super::Spanned { span: SourceSpan::default(), node }).collect(),
    };
    elaborate(&script, &Bounds::default(), &BTreeMap::new())
}

fn atom(name: &str) -> GraphElement {
    GraphElement::atom(name)
}

/// Replaces binder seeds named in `seeds`.
fn reseed(e: &Expr, seeds: &BTreeMap<String, Expr>) -> Expr {
    let r = |x: &Expr| Box::new(reseed(x, seeds));
    match e {
        Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => e.clone(),
        Expr::App(a, b) => Expr::App(r(a), r(b)),
        Expr::And(a, b) => Expr::And(r(a), r(b)),
        Expr::Or(a, b) => Expr::Or(r(a), r(b)),
        Expr::Not(a) => Expr::Not(r(a)),
        Expr::Eps { var, range, seed, body } => {
            let seed = match seeds.get(var) {
                Some(s) => SeedSpec::Expr(Box::new(s.clone())),
                None => match seed {
                    SeedSpec::Expr(s) => SeedSpec::Expr(r(s)),
                    other => other.clone(),
                },
            };
            Expr::Eps { var: var.clone(), range: range.clone(), seed, body: r(body) }
        }
        Expr::Alpha { var, range, body } => Expr::Alpha { var: var.clone(), range: range.clone(), body: r(body) },
        Expr::Rec { var, body } => Expr::Rec { var: var.clone(), body: r(body) },
    }
}

fn reseed_query(q: &Query, seeds: &BTreeMap<String, Expr>) -> Query {
    match q {
        Query::Facts(e) => Query::Facts(reseed(e, seeds)),
        Query::Holds(e) => Query::Holds(reseed(e, seeds)),
        Query::Truth { pred, args } => Query::Truth { pred: pred.clone(), args: args.iter().map(|a| reseed(a, seeds)).collect() },
        other => other.clone(),
    }
}

fn tuple_of(t: &[String]) -> Tuple {
    t.iter().map(|a| atom(a)).collect()
}

/// Adds `script`'s declarations to an existing program.
pub fn elaborate_into(p: &mut Program, script: &Script, bounds: &Bounds, seeds: &BTreeMap<String, Expr>) -> Result<()> {
    for d in &script.decls {
        match &d.node {
            Decl::Universe(atoms) => {
                for a in atoms {
                    p.env.carrier.insert(atom(a));
                    p.structure.carrier.insert(a.clone());
                }
            }
            Decl::Relation { name, arity, tuples } => {
                for a in tuples.iter().flatten() {
                    p.env.carrier.insert(atom(a));
                    p.structure.carrier.insert(a.clone());
                }
                let ts: BTreeSet<Tuple> = tuples.iter().map(|t| tuple_of(t)).collect();
                p.env.insert_relation(name, *arity, &ts);
                p.structure
                    .relations
                    .insert(name.clone(), Relation { arity: *arity, tuples: tuples.iter().cloned().collect() });
            }
            Decl::Const { name, atom: a } => {
                p.env.carrier.insert(atom(a));
                p.structure.carrier.insert(a.clone());
                p.env.consts.insert(name.clone(), ModelSet::of([atom(a)]));
                p.structure.constants.insert(name.clone(), a.clone());
            }
            Decl::Def { name, params, body } => {
                let body = reseed(body, seeds);
                define(p, name, params, &body, bounds, seeds).map_err(|e| match e {
                    Error::Unsupported(m) => Error::Unsupported(format!("in `{name}` at {}: {m}", d.span)),
                    other => other,
                })?;
            }
            Decl::Valuation { name, entries } => {
                let slot = p.valuation.entry(name.clone()).or_default();
                for (pol, t) in entries {
                    slot.insert(tuple_of(t), *pol);
                }
            }
            Decl::Query(q) => p.queries.push((d.span, reseed_query(q, seeds))),
        }
        p.script.decls.push(d.clone());
    }
    Ok(())
}

fn define(
    p: &mut Program,
    name: &str,
    params: &[String],
    body: &Expr,
    bounds: &Bounds,
    seeds: &BTreeMap<String, Expr>,
) -> Result<()> {
    let arity = params.len();
    if let Expr::Rec { var, body: inner } = body {
        let ctx = Ctx::new(&p.env, *bounds);
        let seed = match seeds.get(var) {
            Some(e) => {
                let set = ctx.term(e, &Default::default())?.into_set()?;
                decode_relation(&set, arity)
                    .ok_or_else(|| Error::Shape(format!("seed for `{var}` is not an encoded {arity}-ary relation")))?
            }
            None => BTreeSet::new(),
        };
        let tuples = ctx.rec_define(var, params, inner, seed)?;
        p.trace.extend(ctx.take_trace().into_iter().map(|r| (name.to_string(), r)));
        p.env.insert_relation(name, arity, &tuples);
        return Ok(());
    }
    if arity == 0 {
        let ctx = Ctx::new(&p.env, *bounds);
        let value = ctx.term(body, &Default::default())?;
        p.trace.extend(ctx.take_trace().into_iter().map(|r| (name.to_string(), r)));
        p.env.consts.insert(name.to_string(), value);
        p.env.arities.insert(name.to_string(), 0);
        return Ok(());
    }
    let def = Definition { params: params.to_vec(), body: body.clone() };
    let value = if body.is_applicative() {
        comprehend(body, params, &p.env.consts)?
    } else {
        Closure::model_set(Arc::new(p.env.clone()), name, def.clone(), *bounds)
    };
    p.env.consts.insert(name.to_string(), value);
    p.env.arities.insert(name.to_string(), arity);
    p.env.defs.insert(name.to_string(), def);
    Ok(())
}
