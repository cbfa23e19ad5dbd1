//! Elements of the graph model G(A*): atoms, finite tuples over elements and
//! arrows `α → a` with a finite (possibly empty) antecedent set.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A finite set of graph elements in canonical (structurally sorted) order.
pub type ElementSet = BTreeSet<GraphElement>;

/// An atom of the base universe together with its attribute tags.
///
/// Only the name takes part in graph elements; attributes are metadata kept by
/// the [`Universe`](crate::kernel::Universe).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: Arc<str>,
    pub attrs: BTreeSet<String>,
}

impl Atom {
    pub fn new(name: &str) -> Self {
        Atom { name: Arc::from(name), attrs: BTreeSet::new() }
    }

    pub fn with_attrs<I, S>(name: &str, attrs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Atom { name: Arc::from(name), attrs: attrs.into_iter().map(Into::into).collect() }
    }

    pub fn element(&self) -> GraphElement {
        GraphElement::Atom(self.name.clone())
    }
}

/// The pair `α → a`, stored with its antecedent in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arrow {
    pub antecedent: ElementSet,
    pub consequent: GraphElement,
}

/// A member of G(A*).
///
/// The derived `Ord` is the total structural order used everywhere for
/// canonical sets: atoms before tuples before arrows, then lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphElement {
    Atom(Arc<str>),
    Tuple(Arc<[GraphElement]>),
    Arrow(Arc<Arrow>),
}

impl GraphElement {
    pub fn atom(name: &str) -> Self {
        GraphElement::Atom(Arc::from(name))
    }

    /// Builds a tuple. Callers must supply at least two components.
    pub fn tuple<I: IntoIterator<Item = GraphElement>>(items: I) -> Self {
        let items: Vec<GraphElement> = items.into_iter().collect();
        debug_assert!(items.len() >= 2, "tuples have at least two components");
        GraphElement::Tuple(items.into())
    }

    pub fn arrow<I: IntoIterator<Item = GraphElement>>(antecedent: I, consequent: GraphElement) -> Self {
        GraphElement::Arrow(Arc::new(Arrow { antecedent: antecedent.into_iter().collect(), consequent }))
    }

    /// `α₁ → (α₂ → … (αₙ → a))`.
    pub fn chain(antecedents: &[ElementSet], consequent: GraphElement) -> Self {
        antecedents
            .iter()
            .rev()
            .fold(consequent, |acc, alpha| GraphElement::arrow(alpha.iter().cloned(), acc))
    }

    /// Least `n` with the element in `G_n`.
    pub fn level(&self) -> usize {
        match self {
            GraphElement::Atom(_) => 0,
            GraphElement::Tuple(items) => 1 + items.iter().map(GraphElement::level).max().unwrap_or(0),
            GraphElement::Arrow(arrow) => {
                let ante = arrow.antecedent.iter().map(GraphElement::level).max().unwrap_or(0);
                1 + ante.max(arrow.consequent.level())
            }
        }
    }

    pub fn as_arrow(&self) -> Option<&Arrow> {
        match self {
            GraphElement::Arrow(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            GraphElement::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[GraphElement]> {
        match self {
            GraphElement::Tuple(t) => Some(t),
            _ => None,
        }
    }

    /// Peels exactly `n` arrows: `α₁ → (… (αₙ → c))` gives `([α₁..αₙ], c)`.
    pub fn unchain(&self, n: usize) -> Option<(Vec<&ElementSet>, &GraphElement)> {
        let mut alphas = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            let arrow = cur.as_arrow()?;
            alphas.push(&arrow.antecedent);
            cur = &arrow.consequent;
        }
        Some((alphas, cur))
    }

    /// Largest antecedent size anywhere inside the element.
    pub fn max_antecedent(&self) -> usize {
        match self {
            GraphElement::Atom(_) => 0,
            GraphElement::Tuple(items) => items.iter().map(GraphElement::max_antecedent).max().unwrap_or(0),
            GraphElement::Arrow(a) => a
                .antecedent
                .iter()
                .map(GraphElement::max_antecedent)
                .max()
                .unwrap_or(0)
                .max(a.antecedent.len())
                .max(a.consequent.max_antecedent()),
        }
    }

    /// Collects every atom occurring inside the element.
    pub fn collect_atoms(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            GraphElement::Atom(a) => {
                out.insert(a.clone());
            }
            GraphElement::Tuple(items) => items.iter().for_each(|i| i.collect_atoms(out)),
            GraphElement::Arrow(a) => {
                a.antecedent.iter().for_each(|i| i.collect_atoms(out));
                a.consequent.collect_atoms(out);
            }
        }
    }
}

impl From<&str> for GraphElement {
    fn from(name: &str) -> Self {
        GraphElement::atom(name)
    }
}

impl fmt::Display for GraphElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphElement::Atom(a) => write!(f, "{a}"),
            GraphElement::Tuple(items) => {
                write!(f, "<")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ">")
            }
            GraphElement::Arrow(a) => {
                write!(f, "({{")?;
                for (i, item) in a.antecedent.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, "}} -> {})", a.consequent)
            }
        }
    }
}

/// Prints a set as `{e1, e2, …}` in canonical order.
pub fn display_set(set: &ElementSet) -> String {
    let items: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}
