//! Expressions of the definition and query language.

use std::collections::BTreeSet;
use std::fmt;

use crate::kernel::{display_set, ElementSet};

/// How the basis of an ε-recursion is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSpec {
    /// No seed given: the empty set.
    Default,
    /// The slot's possible values under the current arguments; always a
    /// fixpoint of the step.
    Ext,
    Expr(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Const(String),
    /// A literal finite set of elements.
    Set(ElementSet),
    App(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// `eps x [in R] [seed E] . body`; `exists` is the same node with an `ext` seed.
    Eps { var: String, range: Option<String>, seed: SeedSpec, body: Box<Expr> },
    /// `all x [in R] . body`; `forall` is the same node.
    Alpha { var: String, range: Option<String>, body: Box<Expr> },
    /// `rec U . body`
    Rec { var: String, body: Box<Expr> },
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.into())
    }

    pub fn constant(name: &str) -> Self {
        Expr::Const(name.into())
    }

    pub fn app(f: Expr, x: Expr) -> Self {
        Expr::App(Box::new(f), Box::new(x))
    }

    /// `f a₁ a₂ …` associated to the left.
    pub fn apps<I: IntoIterator<Item = Expr>>(f: Expr, args: I) -> Self {
        args.into_iter().fold(f, Expr::app)
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Self {
        Expr::Not(Box::new(a))
    }

    pub fn eps(var: &str, seed: SeedSpec, body: Expr) -> Self {
        Expr::Eps { var: var.into(), range: None, seed, body: Box::new(body) }
    }

    pub fn exists(var: &str, body: Expr) -> Self {
        Expr::eps(var, SeedSpec::Ext, body)
    }

    pub fn alpha(var: &str, body: Expr) -> Self {
        Expr::Alpha { var: var.into(), range: None, body: Box::new(body) }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Expr::App(f, x) = cur {
            args.push(x.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Expr::Const(_) | Expr::Set(_) => {}
            Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Not(a) => a.collect_free(bound, out),
            Expr::Eps { var, seed, body, .. } => {
                if let SeedSpec::Expr(s) = seed {
                    s.collect_free(bound, out);
                }
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::Alpha { var, body, .. } | Expr::Rec { var, body } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.free_vars().contains(var)
    }

    pub fn is_applicative(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => true,
            Expr::App(a, b) => a.is_applicative() && b.is_applicative(),
            _ => false,
        }
    }

    pub fn contains_not(&self) -> bool {
        match self {
            Expr::Not(_) => true,
            Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => false,
            Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => a.contains_not() || b.contains_not(),
            Expr::Eps { seed, body, .. } => {
                body.contains_not() || matches!(seed, SeedSpec::Expr(s) if s.contains_not())
            }
            Expr::Alpha { body, .. } | Expr::Rec { body, .. } => body.contains_not(),
        }
    }

    /// True if some `Not` has `var` free underneath it.
    pub fn negates(&self, var: &str) -> bool {
        match self {
            Expr::Not(a) => a.mentions(var) || a.negates(var),
            Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => false,
            Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => a.negates(var) || b.negates(var),
            Expr::Eps { var: v, seed, body, .. } => {
                (v != var && body.negates(var)) || matches!(seed, SeedSpec::Expr(s) if s.negates(var))
            }
            Expr::Alpha { var: v, body, .. } | Expr::Rec { var: v, body } => v != var && body.negates(var),
        }
    }

    /// Every constant name referenced.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Const(c) = e {
                out.insert(c.clone());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => {}
            Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Not(a) => a.walk(f),
            Expr::Eps { seed, body, .. } => {
                if let SeedSpec::Expr(s) = seed {
                    s.walk(f);
                }
                body.walk(f);
            }
            Expr::Alpha { body, .. } | Expr::Rec { body, .. } => body.walk(f),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => 0,
            Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Not(a) => 1 + a.depth(),
            Expr::Eps { body, .. } | Expr::Alpha { body, .. } | Expr::Rec { body, .. } => 1 + body.depth(),
        }
    }
}

// Printing follows the script grammar: `|` binds loosest, then `&`, then
// prefix `!`, then juxtaposition. Binders are always parenthesised.
impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(..) => 3,
            Expr::App(..) => 4,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Var(v) | Expr::Const(v) => write!(f, "{v}"),
            Expr::Set(s) => write!(f, "{}", display_set(s)),
            Expr::App(a, b) => {
                a.fmt_at(f, 4)?;
                write!(f, " ")?;
                b.fmt_at(f, 5)
            }
            Expr::And(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " & ")?;
                b.fmt_at(f, 3)
            }
            Expr::Or(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " | ")?;
                b.fmt_at(f, 2)
            }
            Expr::Not(a) => {
                write!(f, "!")?;
                a.fmt_at(f, 3)
            }
            Expr::Eps { var, range, seed, body } => {
                write!(f, "(eps {var}")?;
                if let Some(r) = range {
                    write!(f, " in {r}")?;
                }
                match seed {
                    SeedSpec::Default => {}
                    SeedSpec::Ext => write!(f, " seed ext")?,
                    SeedSpec::Expr(s) => {
                        write!(f, " seed ")?;
                        s.fmt_at(f, 5)?;
                    }
                }
                write!(f, " . ")?;
                body.fmt_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Alpha { var, range, body } => {
                write!(f, "(all {var}")?;
                if let Some(r) = range {
                    write!(f, " in {r}")?;
                }
                write!(f, " . ")?;
                body.fmt_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Rec { var, body } => {
                write!(f, "(rec {var} . ")?;
                body.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
