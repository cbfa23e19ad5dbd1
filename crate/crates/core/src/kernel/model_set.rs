//! Subsets of G(A*) and the application operation `M · N`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::element::{Atom, ElementSet, GraphElement};
use crate::error::{Error, Result};

/// Finite-approximation limits for enumerating subsets of G(A*).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Maximum stratification level of enumerated elements.
    pub level_bound: usize,
    /// Maximum antecedent size considered when enumerating arrows.
    pub set_size_bound: usize,
    /// Maximum number of elements (or steps) materialized by one operation.
    pub enum_cap: usize,
}

impl Bounds {
    pub fn new(level_bound: usize, set_size_bound: usize, enum_cap: usize) -> Result<Self> {
        if level_bound == 0 || set_size_bound == 0 || enum_cap == 0 {
            return Err(Error::Unsupported("all bounds must be at least 1".into()));
        }
        Ok(Bounds { level_bound, set_size_bound, enum_cap })
    }

    /// Parses `L,S,C`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || Error::Unsupported(format!("bounds must be `LEVEL,SET_SIZE,CAP`, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<usize> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
        Bounds::new(nums[0], nums[1], nums[2])
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { level_bound: 6, set_size_bound: 8, enum_cap: 100_000 }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level_bound={} set_size_bound={} enum_cap={}", self.level_bound, self.set_size_bound, self.enum_cap)
    }
}

/// The base set A together with any extra level-0 carriers (e.g. tuples)
/// that generic enumeration should start from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Universe {
    pub atoms: Vec<Atom>,
    pub extra: ElementSet,
}

impl Universe {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Universe { atoms: names.into_iter().map(|n| Atom::new(n.as_ref())).collect(), extra: ElementSet::new() }
    }

    pub fn base(&self) -> ElementSet {
        self.atoms.iter().map(Atom::element).chain(self.extra.iter().cloned()).collect()
    }

    pub fn atom(&self, name: &str) -> Option<&Atom> {
        self.atoms.iter().find(|a| &*a.name == name)
    }

    /// Every element of level ≤ `level` with antecedents of size ≤ `b.set_size_bound`.
    pub fn elements(&self, level: usize, b: &Bounds) -> Result<ElementSet> {
        let base = self.base();
        let mut layer = base.clone();
        for _ in 0..level {
            let pool: Vec<&GraphElement> = layer.iter().collect();
            let subsets = count_subsets(pool.len(), b.set_size_bound);
            let projected = subsets.saturating_mul(pool.len()).saturating_add(base.len());
            if projected > b.enum_cap {
                return Err(Error::bound(format!("G_n enumeration would produce {projected} elements"), b.enum_cap));
            }
            let mut next = base.clone();
            for alpha in subsets_up_to(&pool, b.set_size_bound) {
                for a in &pool {
                    next.insert(GraphElement::arrow(alpha.iter().map(|e| (**e).clone()), (*a).clone()));
                }
            }
            if next == layer {
                break;
            }
            layer = next;
        }
        Ok(layer)
    }
}

fn count_subsets(n: usize, k: usize) -> usize {
    let mut total: usize = 0;
    let mut binom: usize = 1;
    for i in 0..=k.min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul(n - i) / (i + 1);
    }
    total
}

/// All subsets of `pool` with at most `k` elements, smallest first.
pub fn subsets_up_to<'a, T>(pool: &'a [T], k: usize) -> Vec<Vec<&'a T>> {
    let mut out: Vec<Vec<&T>> = vec![Vec::new()];
    let mut frontier: Vec<(usize, Vec<&T>)> = vec![(0, Vec::new())];
    for _ in 0..k.min(pool.len()) {
        let mut next = Vec::new();
        for (start, chosen) in &frontier {
            for (i, item) in pool.iter().enumerate().skip(*start) {
                let mut c = chosen.clone();
                c.push(item);
                out.push(c.clone());
                next.push((i + 1, c));
            }
        }
        frontier = next;
    }
    out
}

/// An infinite (or lazily described) subset of G(A*).
pub trait Generator: fmt::Debug + Send + Sync {
    fn describe(&self) -> String;

    fn member(&self, e: &GraphElement) -> Result<bool>;

    /// Members of level ≤ `b.level_bound` drawn from `universe`.
    fn enumerate(&self, universe: &Universe, b: &Bounds) -> Result<ElementSet> {
        let mut out = ElementSet::new();
        for e in universe.elements(b.level_bound, b)? {
            if self.member(&e)? {
                out.insert(e);
            }
        }
        Ok(out)
    }

    /// Direct computation of `self · arg`, when the generator has one.
    fn fast_apply(&self, _arg: &ModelSet, _b: &Bounds) -> Option<Result<ModelSet>> {
        None
    }
}

#[derive(Debug, Clone)]
pub enum ModelSet {
    Extensional(ElementSet),
    Intensional(Arc<dyn Generator>),
}

impl ModelSet {
    pub fn empty() -> Self {
        ModelSet::Extensional(ElementSet::new())
    }

    pub fn of<I: IntoIterator<Item = GraphElement>>(items: I) -> Self {
        ModelSet::Extensional(items.into_iter().collect())
    }

    pub fn intensional<G: Generator + 'static>(g: G) -> Self {
        ModelSet::Intensional(Arc::new(g))
    }

    pub fn as_set(&self) -> Option<&ElementSet> {
        match self {
            ModelSet::Extensional(s) => Some(s),
            ModelSet::Intensional(_) => None,
        }
    }

    /// The finite member set, or an error naming the generator.
    pub fn finite(&self) -> Result<&ElementSet> {
        self.as_set()
            .ok_or_else(|| Error::bound(format!("finite set required, found {}", self.describe()), 0))
    }

    pub fn into_set(self) -> Result<ElementSet> {
        match self {
            ModelSet::Extensional(s) => Ok(s),
            ModelSet::Intensional(g) => Err(Error::bound(format!("finite set required, found {}", g.describe()), 0)),
        }
    }

    pub fn member(&self, e: &GraphElement) -> Result<bool> {
        match self {
            ModelSet::Extensional(s) => Ok(s.contains(e)),
            ModelSet::Intensional(g) => g.member(e),
        }
    }

    /// True iff every element of `alpha` is a member.
    pub fn contains_all(&self, alpha: &ElementSet) -> Result<bool> {
        for e in alpha {
            if !self.member(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSet::Extensional(s) => super::element::display_set(s),
            ModelSet::Intensional(g) => g.describe(),
        }
    }
}

impl From<ElementSet> for ModelSet {
    fn from(s: ElementSet) -> Self {
        ModelSet::Extensional(s)
    }
}

/// `M · N = { x : (α → x) ∈ M, α ⊆ N }`.
///
/// Extensional `M` is evaluated directly against `N`'s membership test.
/// Intensional `M` needs a fast application rule; use [`apply_enumerated`]
/// to fall back on enumeration over an explicit universe.
pub fn apply(m: &ModelSet, n: &ModelSet, b: &Bounds) -> Result<ModelSet> {
    match m {
        ModelSet::Extensional(set) => {
            let mut out = ElementSet::new();
            for e in set {
                if let Some(arrow) = e.as_arrow() {
                    if n.contains_all(&arrow.antecedent)? {
                        out.insert(arrow.consequent.clone());
                    }
                }
            }
            Ok(ModelSet::Extensional(out))
        }
        ModelSet::Intensional(g) => match g.fast_apply(n, b) {
            Some(result) => result,
            None => Err(Error::bound(
                format!("generic application of {} requires enumeration over a universe", g.describe()),
                b.enum_cap,
            )),
        },
    }
}

/// Application by enumerating `M` over `universe`, ignoring fast rules.
pub fn apply_enumerated(m: &ModelSet, n: &ModelSet, universe: &Universe, b: &Bounds) -> Result<ModelSet> {
    let members = enumerate(m, universe, b)?;
    apply(&ModelSet::Extensional(members), n, b)
}

/// Left-associated `((M · X₁) · X₂) ⋯`.
pub fn apply_chain(m: &ModelSet, args: &[ModelSet], b: &Bounds) -> Result<ModelSet> {
    args.iter().try_fold(m.clone(), |acc, x| apply(&acc, x, b))
}

/// Members with level ≤ `level_bound` and antecedents ≤ `set_size_bound`.
pub fn enumerate(m: &ModelSet, universe: &Universe, b: &Bounds) -> Result<ElementSet> {
    let out: ElementSet = match m {
        ModelSet::Extensional(s) => s
            .iter()
            .filter(|e| e.level() <= b.level_bound && e.max_antecedent() <= b.set_size_bound)
            .cloned()
            .collect(),
        ModelSet::Intensional(g) => g.enumerate(universe, b)?,
    };
    if out.len() > b.enum_cap {
        return Err(Error::bound(format!("enumeration produced {} elements", out.len()), b.enum_cap));
    }
    Ok(out)
}
