//! Relational predications: facts become valued tuples and formulas become
//! propositional combinations of them.
//!
//! A constant `C` of arity `n` is read as
//! `[C]^Λ = { {a₁} → (… ({aₙ} → ⟨a₁, …, aₙ⟩)) : ⟨a₁, …, aₙ⟩ ∈ D_C }` where the
//! fact domain `D_C` is the product of the possible values of each slot.
//! Tuples listed in the data are verifying (`⊤`), the rest of `D_C` is
//! falsifying (`⊥`) unless a valuation declaration says otherwise.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::factual::{Assignment, Ctx, Predication, TruthValue, Tuple};
use crate::kernel::{display_set, ElementSet, GraphElement, ModelSet};

/// Explicit polarities overriding the closed-world default.
pub type Valuation = BTreeMap<String, BTreeMap<Tuple, bool>>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuedTuple {
    pub predicate: String,
    pub tuple: Tuple,
    pub polarity: bool,
}

impl fmt::Display for ValuedTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuple.iter().map(ToString::to_string).collect();
        write!(f, "{}<{}>^{}", self.predicate, parts.join(","), if self.polarity { "T" } else { "F" })
    }
}

/// Propositional fact formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropFormula {
    Lit(ValuedTuple),
    IndetMark,
    Conj(Vec<PropFormula>),
    Disj(Vec<PropFormula>),
}

impl PropFormula {
    /// Flips every polarity and swaps conjunction with disjunction.
    pub fn negate(&self) -> PropFormula {
        match self {
            PropFormula::Lit(v) => PropFormula::Lit(ValuedTuple { polarity: !v.polarity, ..v.clone() }),
            PropFormula::IndetMark => PropFormula::IndetMark,
            PropFormula::Conj(xs) => PropFormula::Disj(xs.iter().map(PropFormula::negate).collect()),
            PropFormula::Disj(xs) => PropFormula::Conj(xs.iter().map(PropFormula::negate).collect()),
        }
    }

    pub fn has_indet(&self) -> bool {
        match self {
            PropFormula::Lit(_) => false,
            PropFormula::IndetMark => true,
            PropFormula::Conj(xs) | PropFormula::Disj(xs) => xs.iter().any(PropFormula::has_indet),
        }
    }

    pub fn literals(&self) -> Vec<&ValuedTuple> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a ValuedTuple>) {
        match self {
            PropFormula::Lit(v) => out.push(v),
            PropFormula::IndetMark => {}
            PropFormula::Conj(xs) | PropFormula::Disj(xs) => xs.iter().for_each(|x| x.collect(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PropFormula::Lit(_) | PropFormula::IndetMark => 1,
            PropFormula::Conj(xs) | PropFormula::Disj(xs) => 1 + xs.iter().map(PropFormula::size).sum::<usize>(),
        }
    }

    fn classical(&self) -> bool {
        match self {
            PropFormula::Lit(v) => v.polarity,
            PropFormula::IndetMark => unreachable!("checked by has_indet"),
            PropFormula::Conj(xs) => xs.iter().all(PropFormula::classical),
            PropFormula::Disj(xs) => xs.iter().any(PropFormula::classical),
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[PropFormula], op: &str, empty: &str| {
            if xs.is_empty() {
                return f.write_str(empty);
            }
            if xs.len() == 1 {
                return write!(f, "{}", xs[0]);
            }
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            PropFormula::Lit(v) => write!(f, "{v}"),
            PropFormula::IndetMark => f.write_str("△"),
            PropFormula::Conj(xs) => join(f, xs, "&", "⊤"),
            PropFormula::Disj(xs) => join(f, xs, "|", "⊥"),
        }
    }
}

impl Serialize for PropFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `△` anywhere makes the formula indeterminate; otherwise classical, with
/// `Conj[] = ⊤` and `Disj[] = ⊥`.
pub fn formula_truth(f: &PropFormula) -> TruthValue {
    if f.has_indet() {
        TruthValue::Indeterminate
    } else if f.classical() {
        TruthValue::True
    } else {
        TruthValue::False
    }
}

/// Tuple extraction from a model set of nested arrows ending in tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalPredication {
    pub arity: usize,
    entries: Vec<(BTreeSet<Arc<str>>, Tuple)>,
    by_tuple: BTreeMap<Tuple, Vec<usize>>,
}

impl RelationalPredication {
    /// Produces `⟨a₁, …, aₙ⟩` iff every `aᵢ ∈ Xᵢ` and every `aᵢ` occurs among
    /// the atoms of the member's antecedents.
    pub fn apply(&self, args: &[ElementSet]) -> Result<BTreeSet<Tuple>> {
        if args.len() != self.arity {
            return Err(Error::Arity { name: "relational predication".into(), expected: self.arity, found: args.len() });
        }
        let admits = |(atoms, t): &(BTreeSet<Arc<str>>, Tuple)| {
            t.iter().zip(args).all(|(a, x)| x.contains(a) && a.as_atom().map_or(true, |name| atoms.contains(name)))
        };
        if args.iter().all(|x| x.len() == 1) {
            let key: Tuple = args.iter().map(|x| x.iter().next().expect("singleton").clone()).collect();
            let hits = self.by_tuple.get(&key).map(Vec::as_slice).unwrap_or(&[]);
            return Ok(hits.iter().map(|i| &self.entries[*i]).filter(|e| admits(e)).map(|e| e.1.clone()).collect());
        }
        Ok(self.entries.iter().filter(|e| admits(e)).map(|e| e.1.clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn to_relational(p: &ModelSet, arity: usize) -> Result<RelationalPredication> {
    let set = p.finite().map_err(|_| Error::Shape(format!("{} is not a finite relational predication", p.describe())))?;
    let mut entries = Vec::new();
    for e in set {
        let mut atoms = BTreeSet::new();
        let mut cur = e;
        let tuple = loop {
            if let Some(t) = cur.as_tuple() {
                if t.len() == arity && !atoms.is_empty() {
                    break t.to_vec();
                }
                return Err(Error::Shape(format!("{e} does not end in a {arity}-tuple")));
            }
            match cur.as_arrow() {
                Some(arrow) if !arrow.antecedent.is_empty() => {
                    arrow.antecedent.iter().for_each(|x| x.collect_atoms(&mut atoms));
                    cur = &arrow.consequent;
                }
                Some(_) => return Err(Error::Shape(format!("empty antecedent in {e}"))),
                None if arity == 1 && !atoms.is_empty() => break vec![cur.clone()],
                None => return Err(Error::Shape(format!("{e} is not an arrow ending in a {arity}-tuple"))),
            }
        };
        entries.push((atoms, tuple));
    }
    let mut by_tuple: BTreeMap<Tuple, Vec<usize>> = BTreeMap::new();
    for (i, (_, t)) in entries.iter().enumerate() {
        by_tuple.entry(t.clone()).or_default().push(i);
    }
    Ok(RelationalPredication { arity, entries, by_tuple })
}

/// `{a₁} → (… ({aₙ} → ⟨a₁, …, aₙ⟩))`, with a bare atom for arity one.
pub fn lambda_element(t: &Tuple) -> GraphElement {
    let ants: Vec<ElementSet> = t.iter().map(|a| ElementSet::from([a.clone()])).collect();
    let head = if t.len() == 1 { t[0].clone() } else { GraphElement::tuple(t.iter().cloned()) };
    GraphElement::chain(&ants, head)
}

/// Everything needed to value one constant.
#[derive(Debug, Clone)]
pub struct ValuedConstant {
    pub arity: usize,
    pub domain: BTreeSet<Tuple>,
    pub lambda: ElementSet,
    pub relational: RelationalPredication,
    pub polarity: BTreeMap<Tuple, bool>,
}

/// Λ-evaluation over a factual context.
pub struct LambdaCtx<'c, 'e> {
    pub ctx: &'c Ctx<'e>,
    overrides: Valuation,
    cache: RefCell<BTreeMap<String, Rc<ValuedConstant>>>,
}

impl<'c, 'e> LambdaCtx<'c, 'e> {
    pub fn new(ctx: &'c Ctx<'e>, overrides: Valuation) -> Self {
        LambdaCtx { ctx, overrides, cache: RefCell::new(BTreeMap::new()) }
    }

    /// `D_C`: the product of the possible values of each slot of `C`.
    pub fn fact_domain(&self, name: &str) -> Result<BTreeSet<Tuple>> {
        Ok(self.constant(name)?.domain.clone())
    }

    pub fn constant(&self, name: &str) -> Result<Rc<ValuedConstant>> {
        if let Some(c) = self.cache.borrow().get(name) {
            return Ok(c.clone());
        }
        let arity = self.ctx.env.arity(name)?;
        let facts = self.ctx.relation_of(name)?;
        let slots: Vec<ElementSet> =
            (0..arity).map(|j| facts.iter().map(|t| t[j].clone()).collect()).collect();
        let size = slots.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()));
        if size.is_none_or(|s| s > self.ctx.bounds.enum_cap) {
            return Err(Error::bound(format!("fact domain of `{name}`"), self.ctx.bounds.enum_cap));
        }
        let mut domain: BTreeSet<Tuple> = if facts.is_empty() { BTreeSet::new() } else { BTreeSet::from([Vec::new()]) };
        for s in &slots {
            domain = domain
                .into_iter()
                .flat_map(|t| {
                    s.iter().map(move |a| {
                        let mut t = t.clone();
                        t.push(a.clone());
                        t
                    })
                })
                .collect();
        }
        let overrides = self.overrides.get(name);
        if let Some(o) = overrides {
            if let Some(t) = o.keys().find(|t| !domain.contains(*t)) {
                let shown: Vec<String> = t.iter().map(ToString::to_string).collect();
                return Err(Error::Shape(format!("valuation of `{name}` lists <{}> outside its fact domain", shown.join(","))));
            }
        }
        let polarity: BTreeMap<Tuple, bool> = domain
            .iter()
            .map(|t| {
                let p = overrides.and_then(|o| o.get(t)).copied().unwrap_or_else(|| facts.contains(t));
                (t.clone(), p)
            })
            .collect();
        let lambda: ElementSet = domain.iter().map(lambda_element).collect();
        let relational = to_relational(&ModelSet::Extensional(lambda.clone()), arity)?;
        let c = Rc::new(ValuedConstant { arity, domain, lambda, relational, polarity });
        self.cache.borrow_mut().insert(name.to_string(), c.clone());
        Ok(c)
    }

    /// The propositional fact formula of `e` under `σ`.
    pub fn eval_lambda(&self, e: &Expr, sigma: &Assignment) -> Result<PropFormula> {
        match e {
            Expr::And(a, b) => Ok(conj(self.eval_lambda(a, sigma)?, self.eval_lambda(b, sigma)?)),
            Expr::Or(a, b) => Ok(disj(self.eval_lambda(a, sigma)?, self.eval_lambda(b, sigma)?)),
            Expr::Not(a) => Ok(self.eval_lambda(a, sigma)?.negate()),
            Expr::Eps { var, range, body, .. } => {
                let cases = self.instances(var, range.as_deref(), body, sigma)?;
                Ok(exists_clause(cases))
            }
            Expr::Alpha { var, range, body } => {
                let cases = self.instances(var, range.as_deref(), body, sigma)?;
                Ok(PropFormula::Conj(cases))
            }
            _ => self.leaf(e, sigma),
        }
    }

    fn instances(&self, var: &str, range: Option<&str>, body: &Expr, sigma: &Assignment) -> Result<Vec<PropFormula>> {
        let r = self.ctx.range(range)?;
        let mut s = sigma.clone();
        r.into_iter()
            .map(|c| {
                s.insert(var.to_string(), ElementSet::from([c]));
                self.eval_lambda(body, &s)
            })
            .collect()
    }

    fn leaf(&self, e: &Expr, sigma: &Assignment) -> Result<PropFormula> {
        let (head, args) = e.spine();
        let Expr::Const(name) = head else {
            return Err(Error::Unsupported(format!("relational reading needs a named predicate, found `{e}`")));
        };
        let values: Vec<ElementSet> = args
            .iter()
            .map(|a| self.ctx.term(a, sigma)?.into_set())
            .collect::<Result<_>>()?;
        if let Some(def) = self.ctx.env.defs.get(name) {
            if values.len() != def.params.len() {
                return Err(Error::Arity { name: name.clone(), expected: def.params.len(), found: values.len() });
            }
            let inner: Assignment = def.params.iter().cloned().zip(values).collect();
            return self.eval_lambda(&def.body, &inner);
        }
        let c = match self.constant(name) {
            Ok(c) => c,
            Err(Error::UnboundConst(_)) if self.ctx.env.consts.contains_key(name) => {
                return Err(Error::MissingValuation(name.clone()))
            }
            Err(err) => return Err(err),
        };
        if values.len() != c.arity {
            return Err(Error::Arity { name: name.clone(), expected: c.arity, found: values.len() });
        }
        let produced = c.relational.apply(&values)?;
        if produced.is_empty() {
            return Ok(PropFormula::IndetMark);
        }
        Ok(PropFormula::Conj(
            produced
                .into_iter()
                .map(|t| {
                    let polarity = c.polarity[&t];
                    PropFormula::Lit(ValuedTuple { predicate: name.clone(), tuple: t, polarity })
                })
                .collect(),
        ))
    }

    /// `∃ x_j` over slot `j` of `p` with the other arguments fixed.
    pub fn exists(&self, p: &Predication, j: usize, others: &[ElementSet]) -> Result<PropFormula> {
        let (var, sigma) = slot_assignment(p, j, others)?;
        self.eval_lambda(&Expr::exists(&var, p.head.clone()), &sigma)
    }

    /// `∀ x_j` over slot `j` of `p` with the other arguments fixed.
    pub fn forall(&self, p: &Predication, j: usize, others: &[ElementSet]) -> Result<PropFormula> {
        let (var, sigma) = slot_assignment(p, j, others)?;
        self.eval_lambda(&Expr::alpha(&var, p.head.clone()), &sigma)
    }

    pub fn holds(&self, e: &Expr) -> Result<(PropFormula, TruthValue)> {
        if let Some(v) = e.free_vars().into_iter().next() {
            return Err(Error::Unsupported(format!("sentence has free variable `{v}`")));
        }
        let f = self.eval_lambda(e, &Assignment::new())?;
        let t = formula_truth(&f);
        Ok((f, t))
    }
}

fn slot_assignment(p: &Predication, j: usize, others: &[ElementSet]) -> Result<(String, Assignment)> {
    let var = p
        .params
        .get(j)
        .cloned()
        .ok_or_else(|| Error::Unsupported(format!("slot {} out of range for arity {}", j + 1, p.arity())))?;
    if others.len() + 1 != p.arity() {
        return Err(Error::Arity { name: p.head.to_string(), expected: p.arity() - 1, found: others.len() });
    }
    let sigma = p.params.iter().filter(|x| **x != var).cloned().zip(others.iter().cloned()).collect();
    Ok((var, sigma))
}

/// ⊤-instances if there are any; otherwise `△` if some instance is
/// indeterminate, else the (false) disjunction of all instances.
fn exists_clause(cases: Vec<PropFormula>) -> PropFormula {
    let (yes, rest): (Vec<_>, Vec<_>) = cases.into_iter().partition(|f| formula_truth(f) == TruthValue::True);
    if !yes.is_empty() {
        PropFormula::Conj(yes)
    } else if rest.iter().any(PropFormula::has_indet) {
        PropFormula::IndetMark
    } else {
        PropFormula::Disj(rest)
    }
}

fn conj(a: PropFormula, b: PropFormula) -> PropFormula {
    PropFormula::Conj(vec![a, b])
}

fn disj(a: PropFormula, b: PropFormula) -> PropFormula {
    PropFormula::Disj(vec![a, b])
}

/// Short text for a set of tuples.
pub fn display_tuples(ts: &BTreeSet<Tuple>) -> String {
    let parts: Vec<String> = ts
        .iter()
        .map(|t| {
            let xs: Vec<String> = t.iter().map(ToString::to_string).collect();
            format!("<{}>", xs.join(","))
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Short text for an element set, re-exported for reports.
pub fn display_elements(s: &ElementSet) -> String {
    display_set(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factual::Env;
    use crate::kernel::Bounds;
    use crate::oracle::{fo_eval_capped, FoFormula, Relation, Structure};

    const LINES: [[usize; 3]; 7] = [[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 5, 6]];

    fn a(n: &str) -> GraphElement {
        GraphElement::atom(n)
    }

    fn incidences() -> Vec<(String, String)> {
        LINES
            .iter()
            .enumerate()
            .flat_map(|(l, pts)| pts.iter().map(move |p| (format!("p{p}"), format!("l{}", l + 1))))
            .collect()
    }

    fn fano(inc: &[(String, String)]) -> (Env, Structure) {
        let points: Vec<String> = (1..=7).map(|i| format!("p{i}")).collect();
        let lines: Vec<String> = (1..=7).map(|i| format!("l{i}")).collect();
        let all: Vec<String> = points.iter().chain(&lines).cloned().collect();
        let mut env = Env::new(all.iter().map(|n| a(n)).collect());
        let rel = |ts: Vec<Vec<String>>, arity| Relation { arity, tuples: ts.into_iter().collect() };
        let mut s = Structure { carrier: all.iter().cloned().collect(), ..Default::default() };
        let inc_t: Vec<Vec<String>> = inc.iter().map(|(p, l)| vec![p.clone(), l.clone()]).collect();
        let eq_t: Vec<Vec<String>> = all.iter().map(|x| vec![x.clone(), x.clone()]).collect();
        let pt_t: Vec<Vec<String>> = points.iter().map(|p| vec![p.clone()]).collect();
        let ln_t: Vec<Vec<String>> = lines.iter().map(|l| vec![l.clone()]).collect();
        for (name, ts, arity) in [("Inc", inc_t, 2), ("eq", eq_t, 2), ("point", pt_t, 1), ("line", ln_t, 1)] {
            let tuples: BTreeSet<Tuple> = ts.iter().map(|t| t.iter().map(|x| a(x)).collect()).collect();
            env.insert_relation(name, arity, &tuples);
            s.relations.insert(name.to_string(), rel(ts, arity));
        }
        (env, s)
    }

    fn app(f: &str, xs: &[&str]) -> Expr {
        Expr::apps(Expr::constant(f), xs.iter().map(|x| Expr::var(x)))
    }

    fn ranged_all(v: &str, r: &str, body: Expr) -> Expr {
        Expr::Alpha { var: v.into(), range: Some(r.into()), body: Box::new(body) }
    }

    fn ranged_exists(v: &str, r: &str, body: Expr) -> Expr {
        Expr::Eps { var: v.into(), range: Some(r.into()), seed: crate::expr::SeedSpec::Ext, body: Box::new(body) }
    }

    fn axiom() -> Expr {
        let unique = ranged_all(
            "z",
            "line",
            Expr::or(Expr::or(Expr::not(app("Inc", &["x1", "z"])), Expr::not(app("Inc", &["x2", "z"]))), app("eq", &["y", "z"])),
        );
        let witness = ranged_exists(
            "y",
            "line",
            Expr::and(Expr::and(app("Inc", &["x1", "y"]), app("Inc", &["x2", "y"])), unique),
        );
        ranged_all("x1", "point", ranged_all("x2", "point", Expr::or(app("eq", &["x1", "x2"]), witness)))
    }

    #[test]
    fn nested_arrow_encoding_is_read() {
        let (p, l) = (a("p"), a("l"));
        let inner = GraphElement::arrow([p.clone()], GraphElement::arrow([p.clone()], l.clone()));
        let member = GraphElement::arrow([inner], GraphElement::arrow([p.clone()], GraphElement::tuple([p.clone(), l.clone()])));
        let r = to_relational(&ModelSet::of([member]), 2).unwrap();
        let got = r.apply(&[ElementSet::from([p.clone()]), ElementSet::from([l.clone()])]).unwrap();
        assert_eq!(got, BTreeSet::from([vec![p.clone(), l.clone()]]));
        assert!(r.apply(&[ElementSet::from([l.clone()]), ElementSet::from([p.clone()])]).unwrap().is_empty());
        assert!(matches!(to_relational(&ModelSet::of([p]), 2), Err(Error::Shape(_))));
    }

    #[test]
    fn fano_domain_and_axiom() {
        let (env, s) = fano(&incidences());
        let ctx = Ctx::new(&env, Bounds::default());
        let lam = LambdaCtx::new(&ctx, Valuation::new());
        assert_eq!(lam.fact_domain("Inc").unwrap().len(), 49);
        let inc = lam.constant("Inc").unwrap();
        assert_eq!(inc.polarity.values().filter(|p| **p).count(), 21);
        assert_eq!(lam.fact_domain("eq").unwrap().len(), 196);
        let (_, t) = lam.holds(&axiom()).unwrap();
        assert_eq!(t, TruthValue::True);
        assert!(fo_eval_capped(&FoFormula::from_expr(&axiom()).unwrap(), &s, 16).unwrap());
    }

    #[test]
    fn every_deletion_breaks_the_axiom() {
        let full = incidences();
        for i in 0..full.len() {
            let mut inc = full.clone();
            inc.remove(i);
            let (env, s) = fano(&inc);
            let ctx = Ctx::new(&env, Bounds::default());
            let lam = LambdaCtx::new(&ctx, Valuation::new());
            let (_, t) = lam.holds(&axiom()).unwrap();
            assert_ne!(t, TruthValue::True, "deletion {i}");
            let oracle = fo_eval_capped(&FoFormula::from_expr(&axiom()).unwrap(), &s, 16).unwrap();
            assert!(!oracle);
            assert_eq!(t, TruthValue::False);
        }
    }

    #[test]
    fn literals_and_negation() {
        let (env, _) = fano(&incidences());
        let ctx = Ctx::new(&env, Bounds::default());
        let lam = LambdaCtx::new(&ctx, Valuation::new());
        let mut sigma = Assignment::new();
        sigma.insert("p".into(), ElementSet::from([a("p1")]));
        sigma.insert("l".into(), ElementSet::from([a("l1")]));
        sigma.insert("m".into(), ElementSet::from([a("l2")]));
        let e = Expr::and(app("Inc", &["p", "l"]), app("Inc", &["p", "m"]));
        let f = lam.eval_lambda(&e, &sigma).unwrap();
        assert_eq!(f.literals().len(), 2);
        assert_eq!(formula_truth(&f), TruthValue::True);
        let nn = lam.eval_lambda(&Expr::not(Expr::not(e.clone())), &sigma).unwrap();
        assert_eq!(nn, f);
        let swapped = app("Inc", &["l", "p"]);
        assert_eq!(lam.eval_lambda(&swapped, &sigma).unwrap(), PropFormula::IndetMark);
    }

    #[test]
    fn three_lines_through_a_point() {
        let (env, _) = fano(&incidences());
        let ctx = Ctx::new(&env, Bounds::default());
        let lam = LambdaCtx::new(&ctx, Valuation::new());
        let p = Predication::named("Inc", 2);
        let f = lam.exists(&p, 1, &[ElementSet::from([a("p1")])]).unwrap();
        let verifying: BTreeSet<_> = f.literals().into_iter().filter(|v| v.polarity).map(|v| v.tuple[1].clone()).collect();
        assert_eq!(verifying, BTreeSet::from([a("l1"), a("l2"), a("l3")]));
        assert_eq!(formula_truth(&f), TruthValue::True);
        let g = lam.forall(&p, 1, &[ElementSet::from([a("p1")])]).unwrap();
        // the carrier includes points, which give empty productions
        assert_eq!(formula_truth(&g), TruthValue::Indeterminate);
    }

    #[test]
    fn valuation_overrides_and_truth_table() {
        let (env, _) = fano(&incidences());
        let ctx = Ctx::new(&env, Bounds::default());
        let over = Valuation::from([("Inc".to_string(), BTreeMap::from([(vec![a("p1"), a("l1")], false)]))]);
        let lam = LambdaCtx::new(&ctx, over);
        let mut sigma = Assignment::new();
        sigma.insert("p".into(), ElementSet::from([a("p1")]));
        sigma.insert("l".into(), ElementSet::from([a("l1")]));
        assert_eq!(formula_truth(&lam.eval_lambda(&app("Inc", &["p", "l"]), &sigma).unwrap()), TruthValue::False);
        let bad = Valuation::from([("Inc".to_string(), BTreeMap::from([(vec![a("l1"), a("p1")], true)]))]);
        assert!(matches!(LambdaCtx::new(&ctx, bad).constant("Inc"), Err(Error::Shape(_))));

        let lit = |p| PropFormula::Lit(ValuedTuple { predicate: "r".into(), tuple: vec![a("a"), a("b")], polarity: p });
        assert_eq!(formula_truth(&PropFormula::Conj(vec![lit(true), lit(true)])), TruthValue::True);
        assert_eq!(formula_truth(&PropFormula::Disj(vec![lit(false), PropFormula::IndetMark])), TruthValue::Indeterminate);
        assert_eq!(formula_truth(&PropFormula::Conj(vec![lit(true), lit(false)])), TruthValue::False);
        assert_eq!(formula_truth(&PropFormula::Conj(vec![])), TruthValue::True);
        assert_eq!(formula_truth(&PropFormula::Disj(vec![])), TruthValue::False);
    }
}
