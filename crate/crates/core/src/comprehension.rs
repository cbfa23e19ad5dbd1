//! Turning expressions with variables into single model sets.
//!
//! Two routes are provided. [`abstract_term`] eliminates variables
//! syntactically into an S/K term (Schönfinkel abstraction), and
//! [`comprehend`] builds the set
//! `{ α₁ → (… (αₙ → a)) : a ∈ φ(α₁, …, αₙ) }` directly as a generator.
//! Applying the comprehension set to finite arguments `X₁ … Xₙ` takes the
//! union of `φ` over all finite sub-arguments `αᵢ ⊆ Xᵢ`, which is how the
//! antecedent condition of application reads on that set.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::kernel::{
    apply, apply_chain, combinator_k, combinator_s, subsets_up_to, Bounds, ElementSet, Generator, GraphElement,
    ModelSet,
};

/// Interpretation of constants as model sets.
pub type ConstEnv = BTreeMap<String, ModelSet>;

/// A variable-free term over S, K and constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApplicativeTerm {
    S,
    K,
    Const(String),
    Set(ElementSet),
    App(Box<ApplicativeTerm>, Box<ApplicativeTerm>),
}

impl ApplicativeTerm {
    fn app(f: ApplicativeTerm, x: ApplicativeTerm) -> Self {
        ApplicativeTerm::App(Box::new(f), Box::new(x))
    }

    pub fn size(&self) -> usize {
        match self {
            ApplicativeTerm::App(a, b) => a.size() + b.size(),
            _ => 1,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, arg: bool) -> fmt::Result {
        match self {
            ApplicativeTerm::S => write!(f, "S"),
            ApplicativeTerm::K => write!(f, "K"),
            ApplicativeTerm::Const(c) => write!(f, "{c}"),
            ApplicativeTerm::Set(s) => write!(f, "{}", crate::kernel::display_set(s)),
            ApplicativeTerm::App(a, b) => {
                if arg {
                    write!(f, "(")?;
                }
                a.fmt_at(f, false)?;
                write!(f, " ")?;
                b.fmt_at(f, true)?;
                if arg {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ApplicativeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, false)
    }
}

/// Term with variables still present, used while abstracting.
#[derive(Debug, Clone)]
enum Open {
    Var(String),
    Closed(ApplicativeTerm),
    App(Box<Open>, Box<Open>),
}

impl Open {
    fn from_expr(e: &Expr) -> Result<Open> {
        Ok(match e {
            Expr::Var(v) => Open::Var(v.clone()),
            Expr::Const(c) => Open::Closed(ApplicativeTerm::Const(c.clone())),
            Expr::Set(s) => Open::Closed(ApplicativeTerm::Set(s.clone())),
            Expr::App(a, b) => Open::App(Box::new(Open::from_expr(a)?), Box::new(Open::from_expr(b)?)),
            other => {
                return Err(Error::Unsupported(format!("abstraction needs an applicative expression, found `{other}`")))
            }
        })
    }

    fn occurs(&self, x: &str) -> bool {
        match self {
            Open::Var(v) => v == x,
            Open::Closed(_) => false,
            Open::App(a, b) => a.occurs(x) || b.occurs(x),
        }
    }

    /// `[x] t` with the clauses `[x]x = SKK`, `[x]t = K t` (x not in t),
    /// `[x](t u) = S ([x]t) ([x]u)`.
    fn abstract_var(self, x: &str) -> Open {
        use ApplicativeTerm as T;
        match self {
            Open::Var(v) if v == x => Open::Closed(T::app(T::app(T::S, T::K), T::K)),
            t if !t.occurs(x) => Open::App(Box::new(Open::Closed(T::K)), Box::new(t)),
            Open::App(a, b) => Open::App(
                Box::new(Open::App(Box::new(Open::Closed(T::S)), Box::new(a.abstract_var(x)))),
                Box::new(b.abstract_var(x)),
            ),
            Open::Var(_) | Open::Closed(_) => unreachable!("handled by the occurs check"),
        }
    }

    fn close(self) -> Result<ApplicativeTerm> {
        match self {
            Open::Var(v) => Err(Error::Unsupported(format!("variable `{v}` is not among the abstracted variables"))),
            Open::Closed(t) => Ok(t),
            Open::App(a, b) => Ok(ApplicativeTerm::app(a.close()?, b.close()?)),
        }
    }
}

/// Eliminates `vars` from an applicative expression, giving `ψ(S, K)` with
/// `ψ · X₁ ⋯ Xₙ = e[xᵢ := Xᵢ]`.
pub fn abstract_term(e: &Expr, vars: &[String]) -> Result<ApplicativeTerm> {
    let mut open = Open::from_expr(e)?;
    for v in vars.iter().rev() {
        open = open.abstract_var(v);
    }
    open.close()
}

/// Evaluates an S/K term with the kernel combinators.
pub fn eval_term(t: &ApplicativeTerm, env: &ConstEnv, b: &Bounds) -> Result<ModelSet> {
    match t {
        ApplicativeTerm::S => Ok(combinator_s()),
        ApplicativeTerm::K => Ok(combinator_k()),
        ApplicativeTerm::Const(c) => env.get(c).cloned().ok_or_else(|| Error::UnboundConst(c.clone())),
        ApplicativeTerm::Set(s) => Ok(ModelSet::Extensional(s.clone())),
        ApplicativeTerm::App(f, x) => apply(&eval_term(f, env, b)?, &eval_term(x, env, b)?, b),
    }
}

fn check_comprehensible(e: &Expr) -> Result<()> {
    match e {
        Expr::Var(_) | Expr::Const(_) | Expr::Set(_) => Ok(()),
        Expr::App(a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
            check_comprehensible(a)?;
            check_comprehensible(b)
        }
        Expr::Not(_) => Err(Error::NonMonotone(format!(
            "negation cannot be comprehended into a set under monotone application: `{e}`"
        ))),
        other => Err(Error::Unsupported(format!("binders are not comprehended here: `{other}`"))),
    }
}

/// Builds the comprehension set `M` with `M · X₁ ⋯ Xₙ = e[xᵢ := Xᵢ]`.
pub fn comprehend(e: &Expr, vars: &[String], env: &ConstEnv) -> Result<ModelSet> {
    check_comprehensible(e)?;
    for v in e.free_vars() {
        if !vars.contains(&v) {
            return Err(Error::Unsupported(format!("free variable `{v}` is not a parameter")));
        }
    }
    for c in e.constants() {
        if !env.contains_key(&c) {
            return Err(Error::UnboundConst(c));
        }
    }
    let spec = Arc::new(ComprehensionSpec { expr: e.clone(), vars: vars.to_vec(), env: env.clone() });
    if vars.is_empty() {
        return spec.eval_at(&[], &Bounds::default()).map(ModelSet::Extensional);
    }
    Ok(ModelSet::intensional(Comprehension { spec, bound: Vec::new() }))
}

#[derive(Debug)]
struct ComprehensionSpec {
    expr: Expr,
    vars: Vec<String>,
    env: ConstEnv,
}

impl ComprehensionSpec {
    /// Evaluates the body at finite arguments, one per variable.
    fn eval_at(&self, args: &[ElementSet], b: &Bounds) -> Result<ElementSet> {
        self.eval(&self.expr, args, b)?.into_set()
    }

    fn eval(&self, e: &Expr, args: &[ElementSet], b: &Bounds) -> Result<ModelSet> {
        match e {
            Expr::Var(v) => {
                let i = self.vars.iter().position(|x| x == v).expect("checked free variables");
                Ok(ModelSet::Extensional(args[i].clone()))
            }
            Expr::Const(c) => self.env.get(c).cloned().ok_or_else(|| Error::UnboundConst(c.clone())),
            Expr::Set(s) => Ok(ModelSet::Extensional(s.clone())),
            Expr::App(f, x) => apply(&self.eval(f, args, b)?, &self.eval(x, args, b)?, b),
            Expr::And(x, y) => {
                let l = self.eval(x, args, b)?.into_set()?;
                let r = self.eval(y, args, b)?.into_set()?;
                Ok(ModelSet::Extensional(l.intersection(&r).cloned().collect()))
            }
            Expr::Or(x, y) => {
                let mut l = self.eval(x, args, b)?.into_set()?;
                l.extend(self.eval(y, args, b)?.into_set()?);
                Ok(ModelSet::Extensional(l))
            }
            _ => unreachable!("rejected by check_comprehensible"),
        }
    }

    /// `∪ { φ(α₁, …, αₙ) : αᵢ ⊆ Xᵢ finite }`.
    fn union_over_subsets(&self, args: &[&ElementSet], b: &Bounds) -> Result<ElementSet> {
        let mut combos: usize = 1;
        for x in args {
            if x.len() > b.set_size_bound {
                return Err(Error::bound(
                    format!("comprehension argument of size {} exceeds the antecedent bound", x.len()),
                    b.set_size_bound,
                ));
            }
            combos = combos.saturating_mul(1usize << x.len().min(63));
        }
        if combos > b.enum_cap {
            return Err(Error::bound(format!("{combos} antecedent combinations"), b.enum_cap));
        }
        let pools: Vec<Vec<&GraphElement>> = args.iter().map(|x| x.iter().collect()).collect();
        let choices: Vec<Vec<ElementSet>> = pools
            .iter()
            .map(|p| subsets_up_to(p, p.len()).into_iter().map(|s| s.into_iter().map(|e| (*e).clone()).collect()).collect())
            .collect();
        let mut out = ElementSet::new();
        let mut idx = vec![0usize; args.len()];
        loop {
            let picked: Vec<ElementSet> = idx.iter().zip(&choices).map(|(i, c)| c[*i].clone()).collect();
            out.extend(self.eval_at(&picked, b)?);
            // odometer
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(out);
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// `M · X₁ ⋯ Xₖ` for a comprehension set, `k < n`.
#[derive(Debug)]
struct Comprehension {
    spec: Arc<ComprehensionSpec>,
    bound: Vec<ModelSet>,
}

impl Generator for Comprehension {
    fn describe(&self) -> String {
        let vars = self.spec.vars.join(" ");
        let mut s = format!("[{vars} := {}]", self.spec.expr);
        for x in &self.bound {
            s = format!("({s} · {})", x.describe());
        }
        s
    }

    fn member(&self, e: &GraphElement) -> Result<bool> {
        let rest = self.spec.vars.len() - self.bound.len();
        let Some((alphas, a)) = e.unchain(rest) else { return Ok(false) };
        let mut args: Vec<&ElementSet> = Vec::new();
        for x in &self.bound {
            args.push(x.finite()?);
        }
        args.extend(alphas);
        Ok(self.spec.union_over_subsets(&args, &Bounds::default())?.contains(a))
    }

    fn fast_apply(&self, arg: &ModelSet, b: &Bounds) -> Option<Result<ModelSet>> {
        let mut bound = self.bound.clone();
        bound.push(arg.clone());
        if bound.len() < self.spec.vars.len() {
            return Some(Ok(ModelSet::intensional(Comprehension { spec: self.spec.clone(), bound })));
        }
        let result = (|| {
            let args: Vec<&ElementSet> = bound.iter().map(ModelSet::finite).collect::<Result<_>>()?;
            self.spec.union_over_subsets(&args, b).map(ModelSet::Extensional)
        })();
        Some(result)
    }
}

/// A finite set `F` of arrows `X₁ → (… (Xₙ → a))`, one per `a` in
/// `M · X₁ ⋯ Xₙ`, so that `F · X₁ ⋯ Xₙ = M · X₁ ⋯ Xₙ`.
pub fn materialize(m: &ModelSet, args: &[ModelSet], b: &Bounds) -> Result<ElementSet> {
    let alphas: Vec<ElementSet> = args.iter().map(|x| x.finite().cloned()).collect::<Result<_>>()?;
    let result = apply_chain(m, args, b)?.into_set()?;
    if result.len() > b.enum_cap {
        return Err(Error::bound("materialized arrows", b.enum_cap));
    }
    Ok(result.into_iter().map(|a| GraphElement::chain(&alphas, a)).collect())
}

/// The form of `e` with variable `j` (0-based) moved to the last argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separated {
    pub body: Expr,
    pub vars: Vec<String>,
    pub slot: String,
}

pub fn separate(e: &Expr, j: usize, vars: &[String]) -> Result<Separated> {
    if j >= vars.len() {
        return Err(Error::Unsupported(format!("slot {} out of range for {} variables", j + 1, vars.len())));
    }
    let mut order: Vec<String> = vars.to_vec();
    let slot = order.remove(j);
    order.push(slot.clone());
    Ok(Separated { body: e.clone(), vars: order, slot })
}

/// Reorders arguments given in the original variable order to match `sep`.
pub fn reorder_args<T: Clone>(sep: &Separated, original_vars: &[String], args: &[T]) -> Vec<T> {
    sep.vars
        .iter()
        .map(|v| args[original_vars.iter().position(|o| o == v).expect("same variables")].clone())
        .collect()
}
