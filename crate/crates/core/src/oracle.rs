//! Brute-force reference semantics for small instances.
//!
//! Nothing here touches comprehension or the fixpoint machinery: first-order
//! sentences are evaluated by enumerating the carrier, genealogy queries by
//! relational joins, and applicative expressions by structural recursion over
//! kernel application.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::comprehension::ConstEnv;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::kernel::{apply, Bounds, ElementSet, ModelSet};

pub type Tuple = Vec<String>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Tuple>,
}

/// A finite relational structure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    #[serde(rename = "atoms")]
    pub carrier: BTreeSet<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Relation>,
    #[serde(default)]
    pub constants: BTreeMap<String, String>,
}

impl Structure {
    pub fn from_json(text: &str) -> Result<Structure> {
        let s: Structure = serde_json::from_str(text).map_err(|e| {
            Error::syntax(
                crate::error::SourceSpan { line: e.line(), column: e.column(), length: 1 },
                format!("invalid structure document: {e}"),
            )
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rel) in &self.relations {
            for t in &rel.tuples {
                if t.len() != rel.arity {
                    return Err(Error::Arity { name: name.clone(), expected: rel.arity, found: t.len() });
                }
                if let Some(a) = t.iter().find(|a| !self.carrier.contains(*a)) {
                    return Err(Error::Shape(format!("tuple of `{name}` uses `{a}`, which is not in the carrier")));
                }
            }
        }
        for (name, a) in &self.constants {
            if !self.carrier.contains(a) {
                return Err(Error::Shape(format!("constant `{name}` denotes `{a}`, which is not in the carrier")));
            }
        }
        Ok(())
    }

    pub fn holds(&self, rel: &str, args: &[&str]) -> Result<bool> {
        let r = self.relations.get(rel).ok_or_else(|| Error::UnboundConst(rel.to_string()))?;
        if r.arity != args.len() {
            return Err(Error::Arity { name: rel.to_string(), expected: r.arity, found: args.len() });
        }
        Ok(r.tuples.iter().any(|t| t.iter().zip(args).all(|(a, b)| a == b)))
    }

    fn unary(&self, rel: &str) -> Result<BTreeSet<String>> {
        let r = self.relations.get(rel).ok_or_else(|| Error::UnboundConst(rel.to_string()))?;
        if r.arity != 1 {
            return Err(Error::Arity { name: rel.to_string(), expected: 1, found: r.arity });
        }
        Ok(r.tuples.iter().map(|t| t[0].clone()).collect())
    }

    fn binary(&self, rel: &str) -> Result<BTreeSet<(String, String)>> {
        let r = self.relations.get(rel).ok_or_else(|| Error::UnboundConst(rel.to_string()))?;
        if r.arity != 2 {
            return Err(Error::Arity { name: rel.to_string(), expected: 2, found: r.arity });
        }
        Ok(r.tuples.iter().map(|t| (t[0].clone(), t[1].clone())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    /// An atom name or a structure constant.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoFormula {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    /// The optional range names a unary relation bounding the variable.
    Exists(String, Option<String>, Box<FoFormula>),
    Forall(String, Option<String>, Box<FoFormula>),
}

impl FoFormula {
    /// Reads a first-order sentence off a script expression: constant-headed
    /// spines become atoms, `!`/`&`/`|` the connectives, `eps`/`exists` the
    /// existential and `all` the universal quantifier.
    pub fn from_expr(e: &Expr) -> Result<FoFormula> {
        Ok(match e {
            Expr::And(a, b) => FoFormula::And(Box::new(Self::from_expr(a)?), Box::new(Self::from_expr(b)?)),
            Expr::Or(a, b) => FoFormula::Or(Box::new(Self::from_expr(a)?), Box::new(Self::from_expr(b)?)),
            Expr::Not(a) => FoFormula::Not(Box::new(Self::from_expr(a)?)),
            Expr::Eps { var, range, body, .. } => FoFormula::Exists(var.clone(), range.clone(), Box::new(Self::from_expr(body)?)),
            Expr::Alpha { var, range, body } => FoFormula::Forall(var.clone(), range.clone(), Box::new(Self::from_expr(body)?)),
            Expr::App(..) => {
                let (head, args) = e.spine();
                let Expr::Const(rel) = head else {
                    return Err(Error::Unsupported(format!("first-order atom needs a relation name, found `{head}`")));
                };
                let terms = args
                    .into_iter()
                    .map(|a| match a {
                        Expr::Var(v) => Ok(Term::Var(v.clone())),
                        Expr::Const(c) => Ok(Term::Name(c.clone())),
                        Expr::Set(set) if set.len() == 1 => match set.iter().next().and_then(|x| x.as_atom()) {
                            Some(a) => Ok(Term::Name(a.to_string())),
                            None => Err(Error::Unsupported(format!("first-order argument must be a name, found `{a}`"))),
                        },
                        other => Err(Error::Unsupported(format!("first-order argument must be a name, found `{other}`"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                FoFormula::Rel(rel.clone(), terms)
            }
            other => return Err(Error::Unsupported(format!("not a first-order formula: `{other}`"))),
        })
    }

    /// Number of nested quantifiers along the deepest path.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            FoFormula::Rel(..) | FoFormula::Eq(..) => 0,
            FoFormula::Not(a) => a.quantifier_depth(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            FoFormula::Exists(_, _, a) | FoFormula::Forall(_, _, a) => 1 + a.quantifier_depth(),
        }
    }
}

pub const DEFAULT_CARRIER_CAP: usize = 12;

/// Classical truth of a closed sentence by exhaustive enumeration.
pub fn fo_eval(f: &FoFormula, s: &Structure) -> Result<bool> {
    fo_eval_capped(f, s, DEFAULT_CARRIER_CAP)
}

pub fn fo_eval_capped(f: &FoFormula, s: &Structure, cap: usize) -> Result<bool> {
    if s.carrier.len() > cap {
        return Err(Error::CapExceeded { size: s.carrier.len(), cap });
    }
    eval_fo(f, s, &mut BTreeMap::new())
}

/// Tuples over the carrier satisfying `f` with `params` free, by enumeration.
pub fn fo_relation(f: &FoFormula, params: &[String], s: &Structure, cap: usize) -> Result<BTreeSet<Vec<String>>> {
    if s.carrier.len() > cap {
        return Err(Error::CapExceeded { size: s.carrier.len(), cap });
    }
    let atoms: Vec<&String> = s.carrier.iter().collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; params.len()];
    if params.is_empty() || atoms.is_empty() {
        return Ok(out);
    }
    loop {
        let mut env: BTreeMap<String, String> =
            params.iter().zip(&idx).map(|(p, &i)| (p.clone(), atoms[i].clone())).collect();
        if eval_fo(f, s, &mut env)? {
            out.insert(idx.iter().map(|&i| atoms[i].clone()).collect());
        }
        let mut k = params.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < atoms.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn resolve<'a>(t: &'a Term, s: &'a Structure, env: &'a BTreeMap<String, String>) -> Result<&'a str> {
    match t {
        Term::Var(v) => env.get(v).map(String::as_str).ok_or_else(|| Error::Unsupported(format!("free variable `{v}`"))),
        Term::Name(n) => {
            if let Some(a) = s.constants.get(n) {
                Ok(a)
            } else if s.carrier.contains(n) {
                Ok(n)
            } else {
                Err(Error::UnboundConst(n.clone()))
            }
        }
    }
}

fn eval_fo(f: &FoFormula, s: &Structure, env: &mut BTreeMap<String, String>) -> Result<bool> {
    match f {
        FoFormula::Rel(r, args) => {
            let vals = args.iter().map(|t| resolve(t, s, env)).collect::<Result<Vec<_>>>()?;
            s.holds(r, &vals)
        }
        FoFormula::Eq(a, b) => Ok(resolve(a, s, env)? == resolve(b, s, env)?),
        FoFormula::Not(a) => Ok(!eval_fo(a, s, env)?),
        FoFormula::And(a, b) => Ok(eval_fo(a, s, env)? && eval_fo(b, s, env)?),
        FoFormula::Or(a, b) => Ok(eval_fo(a, s, env)? || eval_fo(b, s, env)?),
        FoFormula::Exists(v, range, body) | FoFormula::Forall(v, range, body) => {
            let universal = matches!(f, FoFormula::Forall(..));
            let domain = match range {
                Some(r) => s.unary(r)?,
                None => s.carrier.clone(),
            };
            let saved = env.get(v).cloned();
            let mut result = universal;
            for a in domain {
                env.insert(v.clone(), a);
                if eval_fo(body, s, env)? != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(old) => env.insert(v.clone(), old),
                None => env.remove(v),
            };
            Ok(result)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenealogyQuery {
    /// `⟨y, z⟩` with a common mother (including `y = z`).
    Sibling,
    /// Least relation with `male y ∧ father x y → mdesc x y` and
    /// `father z y ∧ mdesc x z → mdesc x y`.
    Mdesc,
}

pub fn genealogy_oracle(q: GenealogyQuery, s: &Structure) -> Result<BTreeSet<(String, String)>> {
    match q {
        GenealogyQuery::Sibling => {
            let mother = s.binary("mother")?;
            let mut out = BTreeSet::new();
            for (m1, y) in &mother {
                for (m2, z) in &mother {
                    if m1 == m2 {
                        out.insert((y.clone(), z.clone()));
                    }
                }
            }
            Ok(out)
        }
        GenealogyQuery::Mdesc => {
            let male = s.unary("male")?;
            let father = s.binary("father")?;
            let mut rel: BTreeSet<(String, String)> =
                father.iter().filter(|(_, y)| male.contains(y)).cloned().collect();
            loop {
                let mut next = rel.clone();
                for (x, z) in &rel {
                    for (f, y) in &father {
                        if f == z {
                            next.insert((x.clone(), y.clone()));
                        }
                    }
                }
                if next == rel {
                    return Ok(rel);
                }
                rel = next;
            }
        }
    }
}

/// The same `mdesc` relation as a boolean matrix sum `M ∨ MF ∨ MF² ∨ …`,
/// where `M` holds male sons and `F` all children.
pub fn mdesc_by_matrix_power(s: &Structure) -> Result<BTreeSet<(String, String)>> {
    let people: Vec<&String> = s.carrier.iter().collect();
    let n = people.len();
    let index: BTreeMap<&str, usize> = people.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let male = s.unary("male")?;
    let mut m = vec![vec![false; n]; n];
    let mut f = vec![vec![false; n]; n];
    for (x, y) in s.binary("father")? {
        let (i, j) = (index[x.as_str()], index[y.as_str()]);
        f[i][j] = true;
        if male.contains(&y) {
            m[i][j] = true;
        }
    }
    let mul = |a: &Vec<Vec<bool>>, b: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect()).collect()
    };
    let mut acc = m.clone();
    let mut power = m;
    for _ in 0..n {
        power = mul(&power, &f);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] |= power[i][j];
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if acc[i][j] {
                out.insert((people[i].clone(), people[j].clone()));
            }
        }
    }
    Ok(out)
}

/// Evaluates an applicative expression by structural recursion, with
/// `vars[i]` bound to `args[i]`.
pub fn direct_eval(e: &Expr, env: &ConstEnv, vars: &[String], args: &[ModelSet], b: &Bounds) -> Result<ModelSet> {
    match e {
        Expr::Var(v) => vars
            .iter()
            .position(|x| x == v)
            .map(|i| args[i].clone())
            .ok_or_else(|| Error::Unsupported(format!("free variable `{v}`"))),
        Expr::Const(c) => env.get(c).cloned().ok_or_else(|| Error::UnboundConst(c.clone())),
        Expr::Set(s) => Ok(ModelSet::Extensional(s.clone())),
        Expr::App(f, x) => apply(&direct_eval(f, env, vars, args, b)?, &direct_eval(x, env, vars, args, b)?, b),
        Expr::And(x, y) => {
            let l = direct_eval(x, env, vars, args, b)?.into_set()?;
            let r = direct_eval(y, env, vars, args, b)?.into_set()?;
            Ok(ModelSet::Extensional(l.intersection(&r).cloned().collect::<ElementSet>()))
        }
        Expr::Or(x, y) => {
            let mut l = direct_eval(x, env, vars, args, b)?.into_set()?;
            l.extend(direct_eval(y, env, vars, args, b)?.into_set()?);
            Ok(ModelSet::Extensional(l))
        }
        other => Err(Error::Unsupported(format!("direct evaluation covers applicative expressions only: `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(arity: usize, tuples: &[&[&str]]) -> Relation {
        Relation { arity, tuples: tuples.iter().map(|t| t.iter().map(|s| s.to_string()).collect()).collect() }
    }

    fn family() -> Structure {
        let atoms = ["Niarchus1", "Aristotle", "Arimnestus", "Niarchus2", "Phaestis", "Arimneste"];
        Structure {
            carrier: atoms.iter().map(|s| s.to_string()).collect(),
            relations: BTreeMap::from([
                (
                    "father".into(),
                    rel(2, &[&["Niarchus1", "Aristotle"], &["Niarchus1", "Arimnestus"], &["Aristotle", "Niarchus2"]]),
                ),
                ("mother".into(), rel(2, &[&["Phaestis", "Aristotle"], &["Phaestis", "Arimneste"]])),
                ("male".into(), rel(1, &[&["Niarchus1"], &["Aristotle"], &["Arimnestus"], &["Niarchus2"]])),
            ]),
            constants: BTreeMap::new(),
        }
    }

    #[test]
    fn mdesc_of_niarchus() {
        let s = family();
        let got = genealogy_oracle(GenealogyQuery::Mdesc, &s).unwrap();
        let of_n1: BTreeSet<&str> =
            got.iter().filter(|(x, _)| x == "Niarchus1").map(|(_, y)| y.as_str()).collect();
        assert_eq!(of_n1, BTreeSet::from(["Aristotle", "Arimnestus", "Niarchus2"]));
        assert_eq!(got, mdesc_by_matrix_power(&s).unwrap());
        assert!(!got.iter().any(|(x, _)| x == "Niarchus2"));
    }

    #[test]
    fn siblings_are_symmetric() {
        let got = genealogy_oracle(GenealogyQuery::Sibling, &family()).unwrap();
        assert!(got.contains(&("Aristotle".into(), "Arimneste".into())));
        assert!(got.contains(&("Arimneste".into(), "Aristotle".into())));
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn quantifiers_enumerate_the_carrier() {
        let s = family();
        let refl = FoFormula::Forall(
            "x".into(),
            None,
            Box::new(FoFormula::Eq(Term::Var("x".into()), Term::Var("x".into()))),
        );
        assert!(fo_eval(&refl, &s).unwrap());
        let has_father = FoFormula::Forall(
            "y".into(),
            Some("male".into()),
            Box::new(FoFormula::Exists(
                "x".into(),
                None,
                Box::new(FoFormula::Rel("father".into(), vec![Term::Var("x".into()), Term::Var("y".into())])),
            )),
        );
        // Niarchus1 has no recorded father.
        assert!(!fo_eval(&has_father, &s).unwrap());
    }

    #[test]
    fn carrier_cap_is_enforced() {
        let s = Structure { carrier: (0..13).map(|i| format!("a{i}")).collect(), ..Default::default() };
        let f = FoFormula::Eq(Term::Name("a0".into()), Term::Name("a0".into()));
        assert!(matches!(fo_eval(&f, &s), Err(Error::CapExceeded { size: 13, cap: 12 })));
    }

    #[test]
    fn json_structure_round_trip() {
        let text = r#"{"atoms":["a","b"],"relations":{"r":{"arity":2,"tuples":[["a","b"]]}},"constants":{"c":"a"}}"#;
        let s = Structure::from_json(text).unwrap();
        assert!(s.holds("r", &["a", "b"]).unwrap());
        assert_eq!(s.constants["c"], "a");
        let bad = r#"{"atoms":["a"],"relations":{"r":{"arity":2,"tuples":[["a"]]}}}"#;
        assert!(matches!(Structure::from_json(bad), Err(Error::Arity { .. })));
    }
}
