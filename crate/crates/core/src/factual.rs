//! Fact-set semantics: predications, ε/α by fixpoint iteration, connectives,
//! the three-valued truth rule, categorical forms and recursive definitions.
//!
//! Relations are stored in the nested form `{a₁} → (… ({aₙ} → aₙ))`, so a
//! predication applied to argument sets returns the admissible values of its
//! last slot. Formulas are evaluated relative to one output variable: the
//! result is the subset of that variable's current value on which the formula
//! is non-empty, which keeps `&`, `|` and `!` as plain `∩`, `∪` and relative
//! complement while making every slot's contribution explicit.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::comprehension::ConstEnv;
use crate::error::{Error, Result};
use crate::expr::{Expr, SeedSpec};
use crate::kernel::{apply, apply_chain, Bounds, ElementSet, Generator, GraphElement, ModelSet};

pub type Tuple = Vec<GraphElement>;
pub type Assignment = BTreeMap<String, ElementSet>;

/// Placeholder value of a closed formula: `{UNIT}` when it holds, `∅` otherwise.
pub fn unit() -> GraphElement {
    GraphElement::atom("*")
}

/// `{ {a₁} → (… ({aₙ} → aₙ)) : ⟨a₁, …, aₙ⟩ ∈ tuples }`.
pub fn encode_relation<'a, I: IntoIterator<Item = &'a Tuple>>(tuples: I) -> ElementSet {
    tuples
        .into_iter()
        .filter_map(|t| {
            let last = t.last()?.clone();
            let ants: Vec<ElementSet> = t.iter().map(|a| ElementSet::from([a.clone()])).collect();
            Some(GraphElement::chain(&ants, last))
        })
        .collect()
}

/// `{ {x} → x : x ∈ class }`.
pub fn encode_class(class: &ElementSet) -> ElementSet {
    class.iter().map(|x| GraphElement::arrow([x.clone()], x.clone())).collect()
}

/// A definition kept in source form for relation extraction.
#[derive(Debug, Clone)]
pub struct Definition {
    pub params: Vec<String>,
    pub body: Expr,
}

/// Named model sets over a finite carrier of atoms.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub consts: ConstEnv,
    pub arities: BTreeMap<String, usize>,
    pub defs: BTreeMap<String, Definition>,
    pub carrier: ElementSet,
}

impl Env {
    pub fn new(carrier: ElementSet) -> Self {
        Env { carrier, ..Default::default() }
    }

    /// Constants first, then atoms of the carrier as singletons.
    pub fn lookup(&self, name: &str) -> Result<ModelSet> {
        if let Some(m) = self.consts.get(name) {
            return Ok(m.clone());
        }
        let a = GraphElement::atom(name);
        if self.carrier.contains(&a) {
            return Ok(ModelSet::of([a]));
        }
        Err(Error::UnboundConst(name.to_string()))
    }

    pub fn arity(&self, name: &str) -> Result<usize> {
        self.arities.get(name).copied().ok_or_else(|| Error::UnboundConst(name.to_string()))
    }

    pub fn insert_relation(&mut self, name: &str, arity: usize, tuples: &BTreeSet<Tuple>) {
        self.consts.insert(name.to_string(), ModelSet::Extensional(encode_relation(tuples)));
        self.arities.insert(name.to_string(), arity);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthValue {
    True,
    False,
    Indeterminate,
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthValue::True => "⊤",
            TruthValue::False => "⊥",
            TruthValue::Indeterminate => "△",
        })
    }
}

/// One completed fixpoint iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixpointRecord {
    pub var: String,
    pub iterations: usize,
    pub size: usize,
    /// `step(F) = F` was checked on the returned value.
    pub verified: bool,
    /// Every link of the Kleene chain was an inclusion.
    pub monotone: bool,
}

/// Evaluation context: environment, bounds and a log of fixpoints.
pub struct Ctx<'a> {
    pub env: &'a Env,
    pub bounds: Bounds,
    trace: RefCell<Vec<FixpointRecord>>,
    ranges: RefCell<BTreeMap<String, ElementSet>>,
}

impl<'a> Ctx<'a> {
    pub fn new(env: &'a Env, bounds: Bounds) -> Self {
        Ctx { env, bounds, trace: RefCell::new(Vec::new()), ranges: RefCell::new(BTreeMap::new()) }
    }

    pub fn domain(&self) -> &ElementSet {
        &self.env.carrier
    }

    pub fn take_trace(&self) -> Vec<FixpointRecord> {
        std::mem::take(&mut self.trace.borrow_mut())
    }

    fn var<'s>(&self, sigma: &'s Assignment, v: &str) -> Result<&'s ElementSet> {
        sigma.get(v).ok_or_else(|| Error::Unsupported(format!("variable `{v}` has no value")))
    }

    /// Value of an expression used as a set.
    pub fn term(&self, e: &Expr, sigma: &Assignment) -> Result<ModelSet> {
        match e {
            Expr::Var(v) => Ok(ModelSet::Extensional(self.var(sigma, v)?.clone())),
            Expr::Const(c) => self.env.lookup(c),
            Expr::Set(s) => Ok(ModelSet::Extensional(s.clone())),
            Expr::App(f, x) => apply(&self.term(f, sigma)?, &self.term(x, sigma)?, &self.bounds),
            Expr::And(a, b) => {
                let l = self.finite_term(a, sigma)?;
                let r = self.finite_term(b, sigma)?;
                Ok(ModelSet::Extensional(l.intersection(&r).cloned().collect()))
            }
            Expr::Or(a, b) => {
                let mut l = self.finite_term(a, sigma)?;
                l.extend(self.finite_term(b, sigma)?);
                Ok(ModelSet::Extensional(l))
            }
            Expr::Eps { var, range, seed, body } => {
                self.eps_witness(var, range.as_deref(), seed, body, sigma).map(ModelSet::Extensional)
            }
            Expr::Alpha { var, range, body } => {
                let r = self.range(range.as_deref())?;
                let mut s = sigma.clone();
                s.insert(var.clone(), r);
                self.formula(body, &s, Some(var)).map(ModelSet::Extensional)
            }
            Expr::Not(_) => Err(Error::Unsupported(format!("negation of a set term: `{e}`"))),
            Expr::Rec { .. } => Err(Error::Unsupported(format!("recursion is only allowed as a definition body: `{e}`"))),
        }
    }

    fn finite_term(&self, e: &Expr, sigma: &Assignment) -> Result<ElementSet> {
        match self.term(e, sigma)? {
            ModelSet::Extensional(s) => Ok(s),
            ModelSet::Intensional(g) => {
                Err(Error::Unsupported(format!("`{e}` denotes {}, not a fact set; too few arguments?", g.describe())))
            }
        }
    }

    /// The part of `out`'s value on which `e` yields facts; for a closed
    /// reading (`out = None`) the result is `{UNIT}` or `∅`.
    pub fn formula(&self, e: &Expr, sigma: &Assignment, out: Option<&str>) -> Result<ElementSet> {
        let base = match out {
            Some(v) => self.var(sigma, v)?.clone(),
            None => ElementSet::from([unit()]),
        };
        match e {
            Expr::And(a, b) => {
                let l = self.formula(a, sigma, out)?;
                if l.is_empty() {
                    return Ok(l);
                }
                let r = self.formula(b, sigma, out)?;
                Ok(l.intersection(&r).cloned().collect())
            }
            Expr::Or(a, b) => {
                let mut l = self.formula(a, sigma, out)?;
                l.extend(self.formula(b, sigma, out)?);
                Ok(l)
            }
            Expr::Not(a) => {
                let inner = self.formula(a, sigma, out)?;
                Ok(base.difference(&inner).cloned().collect())
            }
            _ => self.pointwise(e, sigma, out, base, |ctx, s| ctx.holds_somewhere(e, s)),
        }
    }

    /// Filters `base` by a test on `σ[out := {a}]`, or tests once when `e`
    /// does not mention `out`.
    fn pointwise(
        &self,
        e: &Expr,
        sigma: &Assignment,
        out: Option<&str>,
        base: ElementSet,
        test: impl Fn(&Self, &Assignment) -> Result<bool>,
    ) -> Result<ElementSet> {
        match out {
            Some(v) if e.mentions(v) => {
                let mut s = sigma.clone();
                let mut kept = ElementSet::new();
                for a in base {
                    s.insert(v.to_string(), ElementSet::from([a.clone()]));
                    if test(self, &s)? {
                        kept.insert(a);
                    }
                }
                Ok(kept)
            }
            _ => Ok(if test(self, sigma)? { base } else { ElementSet::new() }),
        }
    }

    /// Non-emptiness of a formula leaf or quantifier under `σ`.
    fn holds_somewhere(&self, e: &Expr, sigma: &Assignment) -> Result<bool> {
        match e {
            Expr::Eps { var, range, seed, body } => {
                Ok(!self.eps_witness(var, range.as_deref(), seed, body, sigma)?.is_empty())
            }
            Expr::Alpha { var, range, body } => {
                let r = self.range(range.as_deref())?;
                let mut s = sigma.clone();
                s.insert(var.clone(), r.clone());
                Ok(self.formula(body, &s, Some(var))? == r)
            }
            Expr::Rec { .. } => Err(Error::Unsupported(format!("recursion is only allowed as a definition body: `{e}`"))),
            _ => Ok(!self.finite_term(e, sigma)?.is_empty()),
        }
    }

    /// Values a quantifier ranges over: the carrier, or the first slot of a
    /// unary predicate.
    pub fn range(&self, range: Option<&str>) -> Result<ElementSet> {
        match range {
            None => Ok(self.domain().clone()),
            Some(name) => {
                if let Some(r) = self.ranges.borrow().get(name) {
                    return Ok(r.clone());
                }
                let arity = self.env.arity(name)?;
                if arity != 1 {
                    return Err(Error::Arity { name: name.to_string(), expected: 1, found: arity });
                }
                let r: ElementSet = self.relation_of(name)?.into_iter().map(|mut t| t.remove(0)).collect();
                self.ranges.borrow_mut().insert(name.to_string(), r.clone());
                Ok(r)
            }
        }
    }

    /// Witness set of `eps var . body` under `σ`: the fixpoint of
    /// `F ↦ formula(body, σ[var := F], var)`, restricted to the range.
    pub fn eps_witness(
        &self,
        var: &str,
        range: Option<&str>,
        seed: &SeedSpec,
        body: &Expr,
        sigma: &Assignment,
    ) -> Result<ElementSet> {
        let within = match range {
            Some(_) => Some(self.range(range)?),
            None => None,
        };
        let step = |f: &ElementSet| -> Result<ElementSet> {
            let mut s = sigma.clone();
            s.insert(var.to_string(), f.clone());
            let r = self.formula(body, &s, Some(var))?;
            Ok(match &within {
                Some(w) => r.intersection(w).cloned().collect(),
                None => r,
            })
        };
        let f0 = match seed {
            SeedSpec::Default => ElementSet::new(),
            SeedSpec::Ext => step(within.as_ref().unwrap_or(self.domain()))?,
            SeedSpec::Expr(e) => {
                let mut outer = sigma.clone();
                outer.remove(var);
                self.finite_term(e, &outer)?
            }
        };
        self.fixpoint(var, f0, step)
    }

    /// Iterates `step` from a seed with `F₀ ⊆ step(F₀)` until it stabilises.
    pub fn fixpoint<T, F>(&self, var: &str, seed: BTreeSet<T>, step: F) -> Result<BTreeSet<T>>
    where
        T: Ord + Clone,
        F: Fn(&BTreeSet<T>) -> Result<BTreeSet<T>>,
    {
        let mut current = seed;
        let mut iterations = 0;
        loop {
            let next = step(&current)?;
            iterations += 1;
            if !current.is_subset(&next) {
                return Err(if iterations == 1 {
                    Error::SeedInvalid { var: var.to_string() }
                } else {
                    Error::NonMonotone(format!("iteration {iterations} for `{var}` lost elements"))
                });
            }
            if next == current {
                self.trace.borrow_mut().push(FixpointRecord {
                    var: var.to_string(),
                    iterations,
                    size: current.len(),
                    verified: true,
                    monotone: true,
                });
                return Ok(current);
            }
            if iterations >= self.bounds.enum_cap {
                return Err(Error::NoConvergence { var: var.to_string(), cap: self.bounds.enum_cap });
            }
            current = next;
        }
    }

    /// All tuples over the carrier satisfying the named predicate.
    pub fn relation_of(&self, name: &str) -> Result<BTreeSet<Tuple>> {
        let arity = self.env.arity(name)?;
        if let Some(def) = self.env.defs.get(name) {
            return self.relation_of_formula(&def.body, &def.params);
        }
        let m = self.env.lookup(name)?;
        if let ModelSet::Extensional(set) = &m {
            if let Some(tuples) = decode_relation(set, arity) {
                return Ok(tuples);
            }
        }
        self.relation_by_application(&m, arity)
    }

    /// `{ t ∈ Dⁿ : formula(body, params := t) }`, enumerating all but the
    /// last slot and reading the last one off the formula.
    pub fn relation_of_formula(&self, body: &Expr, params: &[String]) -> Result<BTreeSet<Tuple>> {
        let n = params.len();
        if n == 0 {
            let holds = !self.formula(body, &Assignment::new(), None)?.is_empty();
            return Ok(if holds { BTreeSet::from([Vec::new()]) } else { BTreeSet::new() });
        }
        let mut out = BTreeSet::new();
        for prefix in self.tuples(n - 1)? {
            let mut sigma: Assignment =
                params.iter().zip(&prefix).map(|(p, a)| (p.clone(), ElementSet::from([a.clone()]))).collect();
            sigma.insert(params[n - 1].clone(), self.domain().clone());
            for a in self.formula(body, &sigma, Some(&params[n - 1]))? {
                let mut t = prefix.clone();
                t.push(a);
                out.insert(t);
            }
        }
        Ok(out)
    }

    fn relation_by_application(&self, m: &ModelSet, arity: usize) -> Result<BTreeSet<Tuple>> {
        let mut out = BTreeSet::new();
        for t in self.tuples(arity)? {
            let args: Vec<ModelSet> = t.iter().map(|a| ModelSet::of([a.clone()])).collect();
            let r = apply_chain(m, &args, &self.bounds)?;
            let nonempty = match r {
                ModelSet::Extensional(s) => !s.is_empty(),
                ModelSet::Intensional(g) => {
                    return Err(Error::Unsupported(format!("arity {arity} leaves {} unsaturated", g.describe())))
                }
            };
            if nonempty {
                out.insert(t);
            }
        }
        Ok(out)
    }

    /// `Dⁿ`, refusing products beyond the enumeration cap.
    pub fn tuples(&self, n: usize) -> Result<Vec<Tuple>> {
        let d: Vec<&GraphElement> = self.domain().iter().collect();
        let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d.len().max(1)));
        match total {
            Some(t) if t <= self.bounds.enum_cap => {}
            _ => return Err(Error::bound(format!("{}^{n} candidate tuples", d.len()), self.bounds.enum_cap)),
        }
        let mut out: Vec<Tuple> = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|t| {
                    d.iter().map(move |a| {
                        let mut t = t.clone();
                        t.push((*a).clone());
                        t
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// Reads tuples back from the nested encoding when every antecedent is a
/// singleton and the consequent repeats the last component.
pub fn decode_relation(set: &ElementSet, arity: usize) -> Option<BTreeSet<Tuple>> {
    let mut out = BTreeSet::new();
    for e in set {
        let (ants, last) = e.unchain(arity)?;
        let mut t = Vec::with_capacity(arity);
        for a in ants {
            if a.len() != 1 {
                return None;
            }
            t.push(a.iter().next()?.clone());
        }
        if t.last() != Some(last) {
            return None;
        }
        out.insert(t);
    }
    Some(out)
}

/// `[P] · x₁ ⋯ xₙ` with `head` over `params`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predication {
    pub head: Expr,
    pub params: Vec<String>,
}

impl Predication {
    pub fn new(head: Expr, params: Vec<String>) -> Result<Self> {
        if let Some(v) = head.free_vars().into_iter().find(|v| !params.contains(v)) {
            return Err(Error::Unsupported(format!("free variable `{v}` is not a parameter")));
        }
        Ok(Predication { head, params })
    }

    /// `name x₁ ⋯ xₙ` for a named constant of arity `n`.
    pub fn named(name: &str, arity: usize) -> Self {
        let params: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
        let head = Expr::apps(Expr::constant(name), params.iter().map(|p| Expr::var(p)));
        Predication { head, params }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    fn check_args(&self, found: usize) -> Result<()> {
        if found != self.params.len() {
            return Err(Error::Arity { name: self.head.to_string(), expected: self.params.len(), found });
        }
        Ok(())
    }

    fn check_slot(&self, j: usize) -> Result<&str> {
        self.params
            .get(j)
            .map(String::as_str)
            .ok_or_else(|| Error::Unsupported(format!("slot {} out of range for arity {}", j + 1, self.params.len())))
    }

    fn assign(&self, args: &[ElementSet]) -> Assignment {
        self.params.iter().cloned().zip(args.iter().cloned()).collect()
    }

    /// Arguments for every slot but `j`, with `value` placed at `j`.
    fn assign_at(&self, j: usize, others: &[ElementSet], value: ElementSet) -> Result<Assignment> {
        if others.len() + 1 != self.params.len() {
            return Err(Error::Arity { name: self.head.to_string(), expected: self.params.len() - 1, found: others.len() });
        }
        let mut sigma = Assignment::new();
        let mut rest = others.iter();
        for (i, p) in self.params.iter().enumerate() {
            let v = if i == j { value.clone() } else { rest.next().expect("length checked").clone() };
            sigma.insert(p.clone(), v);
        }
        Ok(sigma)
    }
}

/// How the basis of a standalone ε-iteration is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seed {
    Empty,
    /// The slot's possible values given the other arguments.
    Ext,
    Value(ElementSet),
}

impl<'a> Ctx<'a> {
    /// Facts of `p` at `args`: the admissible values of its last slot.
    pub fn eval_factual(&self, p: &Predication, args: &[ElementSet]) -> Result<ElementSet> {
        p.check_args(args.len())?;
        let out = p.params.last().map(String::as_str);
        self.formula(&p.head, &p.assign(args), out)
    }

    pub fn relation(&self, p: &Predication) -> Result<BTreeSet<Tuple>> {
        self.relation_of_formula(&p.head, &p.params)
    }

    /// Possible values of slot `j` over all arguments.
    pub fn ext(&self, p: &Predication, j: usize) -> Result<ElementSet> {
        p.check_slot(j)?;
        Ok(self.relation(p)?.into_iter().map(|t| t[j].clone()).collect())
    }

    /// The ε-fixpoint of slot `j` with the other arguments fixed.
    pub fn eps(&self, p: &Predication, j: usize, seed: &Seed, others: &[ElementSet]) -> Result<ElementSet> {
        let var = p.check_slot(j)?;
        let step = |f: &ElementSet| -> Result<ElementSet> {
            let sigma = p.assign_at(j, others, f.clone())?;
            self.formula(&p.head, &sigma, Some(var))
        };
        let f0 = match seed {
            Seed::Empty => ElementSet::new(),
            Seed::Ext => step(self.domain())?,
            Seed::Value(v) => v.clone(),
        };
        self.fixpoint(var, f0, step)
    }

    /// `[φ_j] · others · ext_j`.
    pub fn alpha(&self, p: &Predication, j: usize, others: &[ElementSet]) -> Result<ElementSet> {
        let var = p.check_slot(j)?;
        let sigma = p.assign_at(j, others, self.ext(p, j)?)?;
        self.formula(&p.head, &sigma, Some(var))
    }

    /// Possible values of the last slot not produced at `args`.
    pub fn neg_factual(&self, p: &Predication, args: &[ElementSet]) -> Result<ElementSet> {
        p.check_args(args.len())?;
        if p.arity() == 0 {
            let r = self.eval_factual(p, args)?;
            return Ok(ElementSet::from([unit()]).difference(&r).cloned().collect());
        }
        let ext = self.ext(p, p.arity() - 1)?;
        let r = self.eval_factual(p, args)?;
        Ok(ext.difference(&r).cloned().collect())
    }

    /// ⊥ if some slot yields a proper non-empty part of its argument, ⊤ if
    /// every slot yields its whole non-empty argument, △ otherwise.
    pub fn truth(&self, p: &Predication, args: &[ElementSet]) -> Result<TruthValue> {
        p.check_args(args.len())?;
        if p.arity() == 0 {
            let r = self.formula(&p.head, &Assignment::new(), None)?;
            return Ok(if r.is_empty() { TruthValue::Indeterminate } else { TruthValue::True });
        }
        let sigma = p.assign(args);
        let mut all_full = true;
        for (j, var) in p.params.iter().enumerate() {
            let r = self.formula(&p.head, &sigma, Some(var))?;
            let x = &args[j];
            if !r.is_empty() && r.len() < x.len() {
                return Ok(TruthValue::False);
            }
            if r.is_empty() || &r != x {
                all_full = false;
            }
        }
        Ok(if all_full { TruthValue::True } else { TruthValue::Indeterminate })
    }

    /// The four categorical forms over unary predicates `P` and `Q`.
    ///
    /// `all P Q` is `[Q] · α(P)`, `some P Q` is `[Q] · ε(P)` seeded with
    /// `ε(P ∧ Q)`; the negative forms use `¬Q` in place of `Q`.
    pub fn categorical(&self, form: Categorical, p: &str, q: &str) -> Result<TruthValue> {
        for name in [p, q] {
            let a = self.env.arity(name)?;
            if a != 1 {
                return Err(Error::Arity { name: name.to_string(), expected: 1, found: a });
            }
        }
        let pp = Predication::named(p, 1);
        let q_head = Expr::app(Expr::constant(q), Expr::var("x1"));
        let negative = matches!(form, Categorical::No | Categorical::SomeNot);
        let qq = Predication { head: if negative { Expr::not(q_head) } else { q_head }, params: pp.params.clone() };
        let subject = match form {
            Categorical::All | Categorical::No => self.alpha(&pp, 0, &[])?,
            Categorical::Some | Categorical::SomeNot => {
                let both = Predication { head: Expr::and(pp.head.clone(), qq.head.clone()), params: pp.params.clone() };
                let seed = self.eps(&both, 0, &Seed::Ext, &[])?;
                self.eps(&pp, 0, &Seed::Value(seed), &[])?
            }
        };
        self.truth(&qq, &[subject])
    }

    /// Least fixpoint of `U ↦ { t : body(params := t, var := U) }` above
    /// `seed`, as a set of tuples.
    pub fn rec_define(&self, var: &str, params: &[String], body: &Expr, seed: BTreeSet<Tuple>) -> Result<BTreeSet<Tuple>> {
        if body.negates(var) {
            return Err(Error::NonMonotone(format!("`{var}` occurs under negation in `{body}`")));
        }
        let n = params.len();
        if n == 0 {
            return Err(Error::Unsupported("recursive definitions need at least one parameter".into()));
        }
        let prefixes = self.tuples(n - 1)?;
        let step = |u: &BTreeSet<Tuple>| -> Result<BTreeSet<Tuple>> {
            let encoded = encode_relation(u);
            let mut next = BTreeSet::new();
            for prefix in &prefixes {
                let mut sigma: Assignment =
                    params.iter().zip(prefix).map(|(p, a)| (p.clone(), ElementSet::from([a.clone()]))).collect();
                sigma.insert(params[n - 1].clone(), self.domain().clone());
                sigma.insert(var.to_string(), encoded.clone());
                for a in self.formula(body, &sigma, Some(&params[n - 1]))? {
                    let mut t = prefix.clone();
                    t.push(a);
                    next.insert(t);
                }
            }
            // Kleene iteration accumulates; the chain stays an inclusion chain
            // and the result is checked to be a fixpoint of the plain step.
            next.extend(u.iter().cloned());
            Ok(next)
        };
        let fixed = self.fixpoint(var, seed, step)?;
        let encoded = encode_relation(&fixed);
        let mut check = BTreeSet::new();
        for prefix in &prefixes {
            let mut sigma: Assignment =
                params.iter().zip(prefix).map(|(p, a)| (p.clone(), ElementSet::from([a.clone()]))).collect();
            sigma.insert(params[n - 1].clone(), self.domain().clone());
            sigma.insert(var.to_string(), encoded.clone());
            for a in self.formula(body, &sigma, Some(&params[n - 1]))? {
                let mut t = prefix.clone();
                t.push(a);
                check.insert(t);
            }
        }
        if !check.is_subset(&fixed) {
            return Err(Error::NonMonotone(format!("recursion on `{var}` is not closed under its body")));
        }
        Ok(fixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Categorical {
    All,
    Some,
    No,
    SomeNot,
}

impl Categorical {
    pub fn parse(word: &str) -> Option<Self> {
        match word {
            "all" => Some(Categorical::All),
            "some" => Some(Categorical::Some),
            "no" => Some(Categorical::No),
            "some-not" => Some(Categorical::SomeNot),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Categorical::All => "all",
            Categorical::Some => "some",
            Categorical::No => "no",
            Categorical::SomeNot => "some-not",
        }
    }

    /// Class semantics with existential import on the universal forms.
    pub fn class_condition(&self, x: &ElementSet, y: &ElementSet) -> bool {
        match self {
            Categorical::All => !x.is_empty() && x.is_subset(y),
            Categorical::Some => !x.is_disjoint(y),
            Categorical::No => !x.is_empty() && x.is_disjoint(y),
            Categorical::SomeNot => !x.is_subset(y),
        }
    }
}

/// A defined predicate whose body needs the formula evaluator; applied to
/// all of its arguments it yields the admissible values of the last one.
#[derive(Debug)]
pub struct Closure {
    env: Arc<Env>,
    name: String,
    def: Arc<Definition>,
    bounds: Bounds,
    bound: Vec<ModelSet>,
}

impl Closure {
    pub fn model_set(env: Arc<Env>, name: &str, def: Definition, bounds: Bounds) -> ModelSet {
        ModelSet::intensional(Closure { env, name: name.to_string(), def: Arc::new(def), bounds, bound: Vec::new() })
    }

    fn saturate(&self, args: Vec<ElementSet>, b: &Bounds) -> Result<ElementSet> {
        let ctx = Ctx::new(&self.env, *b);
        let sigma: Assignment = self.def.params.iter().cloned().zip(args).collect();
        ctx.formula(&self.def.body, &sigma, self.def.params.last().map(String::as_str))
    }
}

impl Generator for Closure {
    fn describe(&self) -> String {
        format!("[{}] applied to {} of {} arguments", self.name, self.bound.len(), self.def.params.len())
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let rest = self.def.params.len() - self.bound.len();
        let Some((alphas, a)) = e.unchain(rest) else { return Ok(false) };
        let mut args: Vec<ElementSet> = self.bound.iter().map(|m| m.finite().cloned()).collect::<Result<_>>()?;
        args.extend(alphas.into_iter().cloned());
        Ok(self.saturate(args, &self.bounds)?.contains(a))
    }

    fn fast_apply(&self, arg: &ModelSet, b: &Bounds) -> Option<Result<ModelSet>> {
        let mut bound = self.bound.clone();
        bound.push(arg.clone());
        if bound.len() < self.def.params.len() {
            return Some(Ok(ModelSet::intensional(Closure {
                env: self.env.clone(),
                name: self.name.clone(),
                def: self.def.clone(),
                bounds: self.bounds,
                bound,
            })));
        }
        Some(
            bound
                .iter()
                .map(|m| m.finite().cloned())
                .collect::<Result<Vec<_>>>()
                .and_then(|args| self.saturate(args, b))
                .map(ModelSet::Extensional),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{genealogy_oracle, GenealogyQuery, Relation, Structure};

    fn a(n: &str) -> GraphElement {
        GraphElement::atom(n)
    }

    fn set(names: &[&str]) -> ElementSet {
        names.iter().map(|n| a(n)).collect()
    }

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    fn c(n: &str) -> Expr {
        Expr::constant(n)
    }

    const PEOPLE: [&str; 7] = ["Niarchus1", "Phaestis", "Aristotle", "Arimnestus", "Arimneste", "Pythias", "Niarchus2"];
    const FATHER: [(&str, &str); 3] = [("Niarchus1", "Aristotle"), ("Niarchus1", "Arimnestus"), ("Aristotle", "Niarchus2")];
    const MOTHER: [(&str, &str); 4] =
        [("Phaestis", "Aristotle"), ("Phaestis", "Arimnestus"), ("Phaestis", "Arimneste"), ("Pythias", "Niarchus2")];
    const MALE: [&str; 4] = ["Niarchus1", "Aristotle", "Arimnestus", "Niarchus2"];

    fn pairs(p: &[(&str, &str)]) -> BTreeSet<Tuple> {
        p.iter().map(|(x, y)| vec![a(x), a(y)]).collect()
    }

    fn family() -> Env {
        let mut env = Env::new(set(&PEOPLE));
        env.insert_relation("father", 2, &pairs(&FATHER));
        env.insert_relation("mother", 2, &pairs(&MOTHER));
        env.insert_relation("male", 1, &MALE.iter().map(|m| vec![a(m)]).collect());
        env
    }

    fn structure() -> Structure {
        let rel = |arity, ts: Vec<Vec<&str>>| Relation {
            arity,
            tuples: ts.into_iter().map(|t| t.into_iter().map(String::from).collect()).collect(),
        };
        Structure {
            carrier: PEOPLE.iter().map(|s| s.to_string()).collect(),
            relations: BTreeMap::from([
                ("father".into(), rel(2, FATHER.iter().map(|(x, y)| vec![*x, *y]).collect())),
                ("mother".into(), rel(2, MOTHER.iter().map(|(x, y)| vec![*x, *y]).collect())),
                ("male".into(), rel(1, MALE.iter().map(|m| vec![*m]).collect())),
            ]),
            constants: BTreeMap::new(),
        }
    }

    fn as_tuples(p: BTreeSet<(String, String)>) -> BTreeSet<Tuple> {
        p.into_iter().map(|(x, y)| vec![a(&x), a(&y)]).collect()
    }

    fn params(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn mother_fact_is_nonempty() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let p = Predication::named("mother", 2);
        let r = ctx.eval_factual(&p, &[set(&["Phaestis"]), set(&["Aristotle"])]).unwrap();
        assert_eq!(r, set(&["Aristotle"]));
        assert!(ctx.eval_factual(&p, &[set(&["Pythias"]), set(&["Aristotle"])]).unwrap().is_empty());
    }

    #[test]
    fn connectives_are_set_operations() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let phi = Expr::app(c("male"), v("x"));
        let psi = Expr::apps(c("father"), [c("Niarchus1"), v("x")]);
        let all = ctx.domain().clone();
        let eval = |e: Expr| ctx.eval_factual(&Predication::new(e, params(&["x"])).unwrap(), &[all.clone()]).unwrap();
        let (l, r) = (eval(phi.clone()), eval(psi.clone()));
        assert_eq!(eval(Expr::and(phi.clone(), psi.clone())), l.intersection(&r).cloned().collect());
        assert_eq!(eval(Expr::or(phi.clone(), psi.clone())), l.union(&r).cloned().collect());
        assert_eq!(eval(Expr::and(phi.clone(), phi.clone())), l);
        assert_eq!(eval(Expr::not(Expr::not(phi.clone()))), l);
    }

    #[test]
    fn eps_seeds() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let male = Predication::named("male", 1);
        assert_eq!(ctx.eps(&male, 0, &Seed::Value(set(&MALE)), &[]).unwrap(), set(&MALE));
        assert!(ctx.eps(&male, 0, &Seed::Empty, &[]).unwrap().is_empty());
        assert_eq!(ctx.eps(&male, 0, &Seed::Ext, &[]).unwrap(), set(&MALE));
        assert!(matches!(
            ctx.eps(&male, 0, &Seed::Value(set(&["Phaestis"])), &[]),
            Err(Error::SeedInvalid { .. })
        ));
        let trace = ctx.take_trace();
        assert_eq!(trace.len(), 3);
        assert!(trace.iter().all(|r| r.verified && r.monotone));
    }

    #[test]
    fn sibling_matches_oracle() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let inner = Expr::Eps {
            var: "x".into(),
            range: None,
            seed: SeedSpec::Ext,
            body: Box::new(Expr::apps(c("mother"), [v("x"), v("y")])),
        };
        let p = Predication::new(Expr::apps(c("mother"), [inner, v("z")]), params(&["y", "z"])).unwrap();
        let want = as_tuples(genealogy_oracle(GenealogyQuery::Sibling, &structure()).unwrap());
        assert_eq!(ctx.relation(&p).unwrap(), want);
    }

    #[test]
    fn mdesc_matches_oracle() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let body = Expr::or(
            Expr::and(Expr::app(c("male"), v("y")), Expr::apps(c("father"), [v("x"), v("y")])),
            Expr::exists("z", Expr::and(Expr::apps(c("father"), [v("z"), v("y")]), Expr::apps(v("U"), [v("x"), v("z")]))),
        );
        let got = ctx.rec_define("U", &params(&["x", "y"]), &body, BTreeSet::new()).unwrap();
        let want = as_tuples(genealogy_oracle(GenealogyQuery::Mdesc, &structure()).unwrap());
        assert_eq!(got, want);
        assert!(got.contains(&vec![a("Niarchus1"), a("Niarchus2")]));
        let negated = Expr::not(Expr::apps(v("U"), [v("x"), v("y")]));
        assert!(matches!(ctx.rec_define("U", &params(&["x", "y"]), &negated, BTreeSet::new()), Err(Error::NonMonotone(_))));
    }

    #[test]
    fn rec_ignoring_its_variable_is_one_step() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let body = Expr::apps(c("father"), [v("x"), v("y")]);
        let got = ctx.rec_define("U", &params(&["x", "y"]), &body, BTreeSet::new()).unwrap();
        assert_eq!(got, pairs(&FATHER));
        assert_eq!(ctx.take_trace()[0].iterations, 2);
    }

    #[test]
    fn truth_values() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let male = Predication::named("male", 1);
        assert_eq!(ctx.truth(&male, &[set(&["Aristotle", "Niarchus2"])]).unwrap(), TruthValue::True);
        assert_eq!(ctx.truth(&male, &[set(&["Aristotle", "Pythias"])]).unwrap(), TruthValue::False);
        assert_eq!(ctx.truth(&male, &[set(&["Pythias"])]).unwrap(), TruthValue::Indeterminate);
        let mother = Predication::named("mother", 2);
        assert_eq!(ctx.truth(&mother, &[set(&["Phaestis"]), set(&["Aristotle"])]).unwrap(), TruthValue::True);
        assert_eq!(
            ctx.truth(&mother, &[set(&["Phaestis", "Pythias"]), set(&["Aristotle"])]).unwrap(),
            TruthValue::False
        );
    }

    #[test]
    fn ext_and_alpha() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        let male = Predication::named("male", 1);
        assert_eq!(ctx.ext(&male, 0).unwrap(), set(&MALE));
        assert_eq!(ctx.alpha(&male, 0, &[]).unwrap(), set(&MALE));
        let father = Predication::named("father", 2);
        assert_eq!(ctx.ext(&father, 0).unwrap(), set(&["Niarchus1", "Aristotle"]));
        let neg = ctx.neg_factual(&father, &[set(&["Niarchus1"]), ctx.domain().clone()]).unwrap();
        assert_eq!(neg, set(&["Niarchus2"]));
    }

    #[test]
    fn quantifiers_in_formulas_are_classical() {
        let env = family();
        let ctx = Ctx::new(&env, Bounds::default());
        // every male with a recorded father is a son of Niarchus1 or Aristotle
        let every = Expr::Alpha {
            var: "y".into(),
            range: Some("male".into()),
            body: Box::new(Expr::or(
                Expr::not(Expr::exists("f", Expr::apps(c("father"), [v("f"), v("y")]))),
                Expr::or(
                    Expr::apps(c("father"), [c("Niarchus1"), v("y")]),
                    Expr::apps(c("father"), [c("Aristotle"), v("y")]),
                ),
            )),
        };
        let p = Predication::new(every, vec![]).unwrap();
        assert_eq!(ctx.truth(&p, &[]).unwrap(), TruthValue::True);
        let some_female_father = Expr::exists(
            "f",
            Expr::and(Expr::not(Expr::app(c("male"), v("f"))), Expr::exists("y", Expr::apps(c("father"), [v("f"), v("y")]))),
        );
        let q = Predication::new(some_female_father, vec![]).unwrap();
        assert_eq!(ctx.truth(&q, &[]).unwrap(), TruthValue::Indeterminate);
    }

    #[test]
    fn categorical_forms_follow_class_semantics() {
        let atoms = ["a", "b", "c"];
        let mut env = Env::new(set(&atoms));
        let classes: Vec<ElementSet> = (0..8u8)
            .map(|bits| atoms.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, n)| a(n)).collect())
            .collect();
        for x in &classes {
            for y in &classes {
                env.insert_relation("P", 1, &x.iter().map(|e| vec![e.clone()]).collect());
                env.insert_relation("Q", 1, &y.iter().map(|e| vec![e.clone()]).collect());
                let ctx = Ctx::new(&env, Bounds::default());
                for form in [Categorical::All, Categorical::Some, Categorical::No, Categorical::SomeNot] {
                    let got = ctx.categorical(form, "P", "Q").unwrap() == TruthValue::True;
                    assert_eq!(got, form.class_condition(x, y), "{} {x:?} {y:?}", form.as_str());
                }
            }
        }
    }

    #[test]
    fn closures_apply_like_relations() {
        let env = family();
        let def = Definition {
            params: params(&["x", "y"]),
            body: Expr::and(Expr::apps(c("father"), [v("x"), v("y")]), Expr::app(c("male"), v("y"))),
        };
        let m = Closure::model_set(Arc::new(env.clone()), "son", def, Bounds::default());
        let r = apply_chain(&m, &[ModelSet::of([a("Niarchus1")]), ModelSet::Extensional(env.carrier.clone())], &Bounds::default())
            .unwrap();
        assert_eq!(r.as_set().unwrap(), &set(&["Aristotle", "Arimnestus"]));
        let member = GraphElement::chain(&[set(&["Aristotle"]), set(&["Niarchus2"])], a("Niarchus2"));
        assert!(m.member(&member).unwrap());
    }
}
