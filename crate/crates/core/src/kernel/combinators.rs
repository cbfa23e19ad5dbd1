//! The schematic combinators
//!
//! ```text
//! [K] = { {a} → (∅ → a) }
//! [S] = { {τ → ({r₁..rₙ} → s)} → ({σ₁ → r₁, …, σₙ → rₙ} → (σ → s)) : σ = τ ∪ σ₁ ∪ … ∪ σₙ }
//! ```
//!
//! Both are infinite, so they are schema-backed generators. Their partial
//! applications are generators too, each answering membership from the set
//! definition and carrying a fast application rule.
//!
//! The laws these sets satisfy are `K·M·N = M` and `S·M·N·P = (M·P)·(N·P)`.

use std::collections::BTreeSet;

use super::element::{ElementSet, GraphElement};
use super::model_set::{apply, subsets_up_to, Bounds, Generator, ModelSet, Universe};
use crate::error::{Error, Result};

pub fn combinator_k() -> ModelSet {
    ModelSet::intensional(KCombinator)
}

pub fn combinator_s() -> ModelSet {
    ModelSet::intensional(SCombinator)
}

#[derive(Debug)]
struct KCombinator;

impl Generator for KCombinator {
    fn describe(&self) -> String {
        "[K]".into()
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let Some(outer) = e.as_arrow() else { return Ok(false) };
        let Some(inner) = outer.consequent.as_arrow() else { return Ok(false) };
        Ok(outer.antecedent.len() == 1
            && inner.antecedent.is_empty()
            && outer.antecedent.contains(&inner.consequent))
    }

    fn enumerate(&self, universe: &Universe, b: &Bounds) -> Result<ElementSet> {
        if b.level_bound < 2 {
            return Ok(ElementSet::new());
        }
        let pool = universe.elements(b.level_bound - 2, b)?;
        if pool.len() > b.enum_cap {
            return Err(Error::bound("[K] enumeration", b.enum_cap));
        }
        Ok(pool
            .into_iter()
            .map(|a| GraphElement::arrow([a.clone()], GraphElement::arrow([], a)))
            .collect())
    }

    fn fast_apply(&self, arg: &ModelSet, _b: &Bounds) -> Option<Result<ModelSet>> {
        // K·N = { ∅ → a : a ∈ N }
        Some(Ok(match arg {
            ModelSet::Extensional(n) => {
                ModelSet::of(n.iter().map(|a| GraphElement::arrow([], a.clone())))
            }
            ModelSet::Intensional(_) => ModelSet::intensional(KApplied(arg.clone())),
        }))
    }
}

/// `[K] · N` for intensional `N`.
#[derive(Debug)]
struct KApplied(ModelSet);

impl Generator for KApplied {
    fn describe(&self) -> String {
        format!("([K] · {})", self.0.describe())
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        match e.as_arrow() {
            Some(arrow) if arrow.antecedent.is_empty() => self.0.member(&arrow.consequent),
            _ => Ok(false),
        }
    }

    fn enumerate(&self, universe: &Universe, b: &Bounds) -> Result<ElementSet> {
        let inner = Bounds { level_bound: b.level_bound.saturating_sub(1), ..*b };
        let members = super::model_set::enumerate(&self.0, universe, &inner)?;
        Ok(members.into_iter().map(|a| GraphElement::arrow([], a)).collect())
    }

    fn fast_apply(&self, _arg: &ModelSet, _b: &Bounds) -> Option<Result<ModelSet>> {
        Some(Ok(self.0.clone()))
    }
}

#[derive(Debug)]
struct SCombinator;

/// Splits `τ → (R → s)` into its parts.
fn split_s_head(e: &GraphElement) -> Option<(&ElementSet, &ElementSet, &GraphElement)> {
    let outer = e.as_arrow()?;
    let inner = outer.consequent.as_arrow()?;
    Some((&outer.antecedent, &inner.antecedent, &inner.consequent))
}

/// For a set `B` of arrows: (consequents, union of antecedents). `None` if
/// some member is not an arrow.
fn split_b(b: &ElementSet) -> Option<(ElementSet, ElementSet)> {
    let mut cons = ElementSet::new();
    let mut ants = ElementSet::new();
    for e in b {
        let arrow = e.as_arrow()?;
        cons.insert(arrow.consequent.clone());
        ants.extend(arrow.antecedent.iter().cloned());
    }
    Some((cons, ants))
}

impl Generator for SCombinator {
    fn describe(&self) -> String {
        "[S]".into()
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let Some(outer) = e.as_arrow() else { return Ok(false) };
        if outer.antecedent.len() != 1 {
            return Ok(false);
        }
        let head = outer.antecedent.iter().next().expect("singleton");
        let Some((tau, rs, s)) = split_s_head(head) else { return Ok(false) };
        let Some(mid) = outer.consequent.as_arrow() else { return Ok(false) };
        let Some(last) = mid.consequent.as_arrow() else { return Ok(false) };
        let Some((cons, ants)) = split_b(&mid.antecedent) else { return Ok(false) };
        let sigma: ElementSet = tau.union(&ants).cloned().collect();
        Ok(&cons == rs && last.consequent == *s && last.antecedent == sigma)
    }

    fn enumerate(&self, universe: &Universe, b: &Bounds) -> Result<ElementSet> {
        let mut out = ElementSet::new();
        if b.level_bound < 3 {
            return Ok(out);
        }
        let pool = universe.elements(b.level_bound - 1, b)?;
        for head in &pool {
            let Some((tau, rs, s)) = split_s_head(head) else { continue };
            let candidates: Vec<&GraphElement> = pool
                .iter()
                .filter(|e| e.as_arrow().is_some_and(|a| rs.contains(&a.consequent)))
                .collect();
            for chosen in subsets_up_to(&candidates, b.set_size_bound) {
                let bset: ElementSet = chosen.iter().map(|e| (**e).clone()).collect();
                let (cons, ants) = split_b(&bset).expect("candidates are arrows");
                if &cons != rs {
                    continue;
                }
                let sigma: ElementSet = tau.union(&ants).cloned().collect();
                if sigma.len() > b.set_size_bound {
                    continue;
                }
                let e = GraphElement::arrow(
                    [head.clone()],
                    GraphElement::arrow(bset, GraphElement::arrow(sigma, s.clone())),
                );
                if e.level() <= b.level_bound {
                    out.insert(e);
                    if out.len() > b.enum_cap {
                        return Err(Error::bound("[S] enumeration", b.enum_cap));
                    }
                }
            }
        }
        Ok(out)
    }

    fn fast_apply(&self, arg: &ModelSet, _b: &Bounds) -> Option<Result<ModelSet>> {
        Some(Ok(ModelSet::intensional(SApplied1(arg.clone()))))
    }
}

/// `[S] · M = { B → (σ → s) : τ → (R → s) ∈ M, cons(B) = R, σ = τ ∪ ants(B) }`
#[derive(Debug)]
struct SApplied1(ModelSet);

impl Generator for SApplied1 {
    fn describe(&self) -> String {
        format!("([S] · {})", self.0.describe())
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let Some(outer) = e.as_arrow() else { return Ok(false) };
        let Some(last) = outer.consequent.as_arrow() else { return Ok(false) };
        let Some((rs, ants)) = split_b(&outer.antecedent) else { return Ok(false) };
        let sigma = &last.antecedent;
        if !ants.is_subset(sigma) {
            return Ok(false);
        }
        // τ must cover σ \ ants(B) and may add any part of ants(B).
        let forced: ElementSet = sigma.difference(&ants).cloned().collect();
        let optional: Vec<&GraphElement> = ants.iter().collect();
        for extra in subsets_up_to(&optional, optional.len()) {
            let mut tau = forced.clone();
            tau.extend(extra.into_iter().map(|e| (*e).clone()));
            let head = GraphElement::arrow(tau, GraphElement::arrow(rs.iter().cloned(), last.consequent.clone()));
            if self.0.member(&head)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn fast_apply(&self, arg: &ModelSet, _b: &Bounds) -> Option<Result<ModelSet>> {
        Some(Ok(ModelSet::intensional(SApplied2(self.0.clone(), arg.clone()))))
    }
}

/// `[S] · M · N = { σ → s : τ → (R → s) ∈ M, B ⊆ N, cons(B) = R, σ = τ ∪ ants(B) }`
#[derive(Debug)]
struct SApplied2(ModelSet, ModelSet);

impl Generator for SApplied2 {
    fn describe(&self) -> String {
        format!("([S] · {} · {})", self.0.describe(), self.1.describe())
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let Some(target) = e.as_arrow() else { return Ok(false) };
        let sigma = &target.antecedent;
        let (Some(m), Some(n)) = (self.0.as_set(), self.1.as_set()) else {
            return Err(Error::Unsupported(format!("membership in {} needs finite operands", self.describe())));
        };
        for head in m {
            let Some((tau, rs, s)) = split_s_head(head) else { continue };
            if *s != target.consequent || !tau.is_subset(sigma) {
                continue;
            }
            // The largest admissible B decides existence: any smaller B covers
            // less of σ.
            let widest: ElementSet = n
                .iter()
                .filter(|x| x.as_arrow().is_some_and(|a| rs.contains(&a.consequent) && a.antecedent.is_subset(sigma)))
                .cloned()
                .collect();
            let (cons, ants) = split_b(&widest).expect("filtered to arrows");
            if &cons == rs && tau.union(&ants).cloned().collect::<ElementSet>() == *sigma {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn fast_apply(&self, p: &ModelSet, b: &Bounds) -> Option<Result<ModelSet>> {
        Some(s_apply3(&self.0, &self.1, p, b))
    }
}

/// `S·M·N·P` read off the set definition: `s` is produced when some
/// `τ → (R → s) ∈ M` has `τ ⊆ P` and every `r ∈ R` is reached by an arrow
/// `σᵣ → r ∈ N` with `σᵣ ⊆ P`. Intensional `M` is handled through the law
/// `(M·P)·(N·P)`.
fn s_apply3(m: &ModelSet, n: &ModelSet, p: &ModelSet, b: &Bounds) -> Result<ModelSet> {
    let Some(mset) = m.as_set() else {
        let mp = apply(m, p, b)?;
        let np = apply(n, p, b)?;
        return apply(&mp, &np, b);
    };
    let mut reachable_cache: Option<ModelSet> = None;
    let mut reachable = |r: &GraphElement| -> Result<bool> {
        match n {
            ModelSet::Extensional(nset) => {
                for x in nset {
                    if let Some(a) = x.as_arrow() {
                        if a.consequent == *r && p.contains_all(&a.antecedent)? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
            ModelSet::Intensional(_) => {
                if reachable_cache.is_none() {
                    reachable_cache = Some(apply(n, p, b)?);
                }
                reachable_cache.as_ref().expect("set above").member(r)
            }
        }
    };
    let mut out = BTreeSet::new();
    for head in mset {
        let Some((tau, rs, s)) = split_s_head(head) else { continue };
        if !p.contains_all(tau)? {
            continue;
        }
        let mut ok = true;
        for r in rs {
            if !reachable(r)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.insert(s.clone());
        }
    }
    Ok(ModelSet::Extensional(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::model_set::{apply_chain, apply_enumerated, enumerate};

    fn a(n: &str) -> GraphElement {
        GraphElement::atom(n)
    }

    fn set(items: &[GraphElement]) -> ModelSet {
        ModelSet::of(items.iter().cloned())
    }

    fn b() -> Bounds {
        Bounds::default()
    }

    #[test]
    fn k_applied_to_singleton() {
        let r = apply(&combinator_k(), &set(&[a("a")]), &b()).unwrap();
        assert_eq!(r.as_set().unwrap(), &ElementSet::from([GraphElement::arrow([], a("a"))]));
    }

    #[test]
    fn k_two_steps() {
        let r = apply_chain(&combinator_k(), &[set(&[a("a"), a("b")]), set(&[a("c")])], &b()).unwrap();
        assert_eq!(r.as_set().unwrap(), &ElementSet::from([a("a"), a("b")]));
        let r = apply_chain(&combinator_k(), &[ModelSet::empty(), set(&[a("c")])], &b()).unwrap();
        assert!(r.as_set().unwrap().is_empty());
    }

    #[test]
    fn k_enumeration_over_single_atom() {
        let u = Universe::from_names(["a"]);
        let got = enumerate(&combinator_k(), &u, &Bounds::new(2, 2, 100).unwrap()).unwrap();
        let want = ElementSet::from([GraphElement::arrow([a("a")], GraphElement::arrow([], a("a")))]);
        assert_eq!(got, want);
    }

    #[test]
    fn s_with_constant_head() {
        // n = 0, τ = ∅: S·{∅ → (∅ → x)}·∅·∅ = {x}; the head must have the
        // τ → (R → s) shape, so `{∅→x}` alone yields nothing.
        let head = GraphElement::arrow([], GraphElement::arrow([], a("x")));
        let r = apply_chain(&combinator_s(), &[set(&[head]), ModelSet::empty(), ModelSet::empty()], &b()).unwrap();
        assert_eq!(r.as_set().unwrap(), &ElementSet::from([a("x")]));
        let r = apply_chain(
            &combinator_s(),
            &[set(&[GraphElement::arrow([], a("x"))]), ModelSet::empty(), ModelSet::empty()],
            &b(),
        )
        .unwrap();
        assert!(r.as_set().unwrap().is_empty());
    }

    #[test]
    fn s_with_empty_head_is_empty() {
        let r = apply_chain(&combinator_s(), &[ModelSet::empty(), set(&[a("q")]), set(&[a("p")])], &b()).unwrap();
        assert!(r.as_set().unwrap().is_empty());
    }

    #[test]
    fn s_membership_matches_schema() {
        // {∅ → ({r} → s)} → ({ {p} → r } → ({p} → s))
        let head = GraphElement::arrow([], GraphElement::arrow([a("r")], a("s")));
        let bset = [GraphElement::arrow([a("p")], a("r"))];
        let good = GraphElement::arrow([head.clone()], GraphElement::arrow(bset.clone(), GraphElement::arrow([a("p")], a("s"))));
        let bad = GraphElement::arrow([head], GraphElement::arrow(bset, GraphElement::arrow([], a("s"))));
        let s = combinator_s();
        assert!(s.member(&good).unwrap());
        assert!(!s.member(&bad).unwrap());
    }

    #[test]
    fn fast_rules_agree_with_enumeration() {
        // Cross-check the K and S fast rules against brute-force enumeration
        // of the schemas over a one-atom universe.
        let u = Universe::from_names(["a"]);
        let bounds = Bounds::new(4, 1, 200_000).unwrap();
        let x = set(&[a("a")]);
        let kx_fast = apply(&combinator_k(), &x, &bounds).unwrap();
        let kx_enum = apply_enumerated(&combinator_k(), &x, &u, &bounds).unwrap();
        assert_eq!(kx_fast.as_set(), kx_enum.as_set());

        let m = set(&[GraphElement::arrow([], GraphElement::arrow([a("a")], a("a")))]);
        let n = set(&[GraphElement::arrow([a("a")], a("a"))]);
        let fast = apply(&apply(&combinator_s(), &m, &bounds).unwrap(), &n, &bounds).unwrap();
        let s_members = enumerate(&combinator_s(), &u, &bounds).unwrap();
        let slow = apply(&apply(&ModelSet::Extensional(s_members), &m, &bounds).unwrap(), &n, &bounds).unwrap();
        let slow = slow.as_set().unwrap();
        for e in slow {
            assert!(fast.member(e).unwrap(), "{e} missing from fast S·M·N");
        }
        assert!(slow.contains(&GraphElement::arrow([a("a")], a("a"))));
    }

    #[test]
    fn skk_is_identity() {
        let k = combinator_k();
        let skk = apply_chain(&combinator_s(), &[k.clone(), k], &b()).unwrap();
        let x = set(&[a("a"), GraphElement::arrow([a("b")], a("c"))]);
        let r = apply(&skk, &x, &b()).unwrap();
        assert_eq!(r.as_set(), x.as_set());
    }
}
