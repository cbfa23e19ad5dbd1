//! Seeded generators for test data: elements, model sets, applicative
//! expressions, first-order structures and family trees.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::Expr;
use crate::kernel::{ElementSet, GraphElement};
use crate::oracle::{Relation, Structure};

/// `prefix0 … prefix{n-1}` as atoms.
pub fn atoms(prefix: &str, n: usize) -> Vec<GraphElement> {
    (0..n).map(|i| GraphElement::atom(&format!("{prefix}{i}"))).collect()
}

/// An element of level at most `level` over `atoms`.
pub fn element<R: Rng>(rng: &mut R, atoms: &[GraphElement], level: usize) -> GraphElement {
    if level == 0 || rng.gen_bool(0.3) {
        return atoms.choose(rng).expect("non-empty atom pool").clone();
    }
    let k = rng.gen_range(0..=2);
    let ante: Vec<GraphElement> = (0..k).map(|_| element(rng, atoms, level - 1)).collect();
    GraphElement::arrow(ante, element(rng, atoms, level - 1))
}

/// A set of at most `max_size` elements of level at most `max_level`.
pub fn model_set<R: Rng>(rng: &mut R, atoms: &[GraphElement], max_level: usize, max_size: usize) -> ElementSet {
    let k = rng.gen_range(0..=max_size);
    (0..k).map(|_| element(rng, atoms, max_level)).collect()
}

/// A set of arrows `α → c` whose antecedents are drawn from `atoms`, so that
/// application to small atom sets is usually non-empty.
pub fn function_set<R: Rng>(rng: &mut R, atoms: &[GraphElement], curried: usize, max_size: usize) -> ElementSet {
    let k = rng.gen_range(1..=max_size);
    (0..k)
        .map(|_| {
            let mut e = atoms.choose(rng).expect("non-empty atom pool").clone();
            for _ in 0..curried {
                let n = rng.gen_range(0..=1);
                let ante: Vec<GraphElement> = (0..n).map(|_| atoms.choose(rng).unwrap().clone()).collect();
                e = GraphElement::arrow(ante, e);
            }
            e
        })
        .collect()
}

/// An applicative expression (variables, constants, application) of depth
/// at most `depth`.
pub fn applicative_expr<R: Rng>(rng: &mut R, vars: &[String], consts: &[String], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        let pick_var = !vars.is_empty() && (consts.is_empty() || rng.gen_bool(0.5));
        return if pick_var {
            Expr::var(vars.choose(rng).unwrap())
        } else {
            Expr::constant(consts.choose(rng).expect("a variable or constant"))
        };
    }
    Expr::app(applicative_expr(rng, vars, consts, depth - 1), applicative_expr(rng, vars, consts, depth - 1))
}

/// A structure over `a0 … a{n-1}` with each listed relation holding on a
/// tuple with probability `density`.
pub fn structure<R: Rng>(rng: &mut R, n: usize, relations: &[(&str, usize)], density: f64) -> Structure {
    let carrier: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut rels = BTreeMap::new();
    for (name, arity) in relations {
        let mut tuples = BTreeSet::new();
        for t in product(&carrier, *arity) {
            if rng.gen_bool(density) {
                tuples.insert(t);
            }
        }
        rels.insert(name.to_string(), Relation { arity: *arity, tuples });
    }
    Structure { carrier: carrier.into_iter().collect(), relations: rels, constants: BTreeMap::new() }
}

fn product(items: &[String], n: usize) -> Vec<Vec<String>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                items.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect()
    })
}

/// A family tree with the given number of people per generation. Even
/// positions are male. Every person after the first generation gets a mother
/// and a father from one couple of the previous generation.
pub fn family<R: Rng>(rng: &mut R, generations: &[usize]) -> Structure {
    let mut carrier = BTreeSet::new();
    let mut mother = BTreeSet::new();
    let mut father = BTreeSet::new();
    let mut male = BTreeSet::new();
    let mut female = BTreeSet::new();
    let mut previous: Vec<String> = Vec::new();
    for (g, &size) in generations.iter().enumerate() {
        let people: Vec<String> = (0..size).map(|i| format!("g{g}p{i}")).collect();
        let men = previous.iter().step_by(2);
        let women = previous.iter().skip(1).step_by(2);
        let couples: Vec<(&String, &String)> = men.zip(women).collect();
        for (i, p) in people.iter().enumerate() {
            carrier.insert(p.clone());
            if i % 2 == 0 {
                male.insert(vec![p.clone()]);
            } else {
                female.insert(vec![p.clone()]);
            }
            if let Some((dad, mum)) = couples.choose(rng) {
                father.insert(vec![(*dad).clone(), p.clone()]);
                mother.insert(vec![(*mum).clone(), p.clone()]);
            }
        }
        previous = people;
    }
    let rel = |arity, tuples| Relation { arity, tuples };
    Structure {
        carrier,
        relations: BTreeMap::from([
            ("mother".to_string(), rel(2, mother)),
            ("father".to_string(), rel(2, father)),
            ("male".to_string(), rel(1, male)),
            ("female".to_string(), rel(1, female)),
        ]),
        constants: BTreeMap::new(),
    }
}
