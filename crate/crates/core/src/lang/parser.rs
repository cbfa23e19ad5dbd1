use std::collections::BTreeMap;

use super::{Decl, Query, Script, Spanned};
use crate::error::{Error, Result, SourceSpan};
use crate::expr::{Expr, SeedSpec};
use crate::factual::Categorical;
use crate::kernel::{is_ident_char, is_ident_start, ElementReader, ElementSet, GraphElement};

/// Words that cannot name atoms, relations or variables.
pub const KEYWORDS: [&str; 13] =
    ["universe", "relation", "const", "def", "valuation", "query", "eps", "exists", "all", "forall", "rec", "in", "seed"];

const DECL_WORDS: [&str; 6] = ["universe", "relation", "const", "def", "valuation", "query"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    Set(ElementSet),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let (byte, c) = chars[i];
        let span = SourceSpan { line, column: col, length: 1 };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '{' {
            let mut reader = ElementReader::with_origin(&src[byte..], (line, col));
            let set = reader.set()?;
            let end = byte + reader.offset();
            while i < chars.len() && chars[i].0 < end {
                if chars[i].1 == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            out.push(Token { tok: Tok::Set(set), span: SourceSpan { length: end - byte, ..span } });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i].1) {
                i += 1;
            }
            let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), span: SourceSpan { length: i - start, ..span } });
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().map(|(_, c)| c).collect();
        if two == ":=" {
            out.push(Token { tok: Tok::Sym(":="), span: SourceSpan { length: 2, ..span } });
            i += 2;
            col += 2;
            continue;
        }
        let sym = match c {
            '(' => "(",
            ')' => ")",
            ',' => ",",
            '/' => "/",
            '=' => "=",
            ':' => ":",
            '+' => "+",
            '-' => "-",
            '&' => "&",
            '|' => "|",
            '!' => "!",
            '.' => ".",
            other => return Err(Error::syntax(span, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok: Tok::Sym(sym), span });
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan { line, column: col, length: 0 } });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Atom,
    /// A relation or definition of the given arity.
    Pred(usize),
    /// A named constant denoting an atom.
    Const,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    names: BTreeMap<String, Kind>,
    scope: Vec<String>,
}

/// Parses a complete script.
pub fn parse_script(text: &str) -> Result<Script> {
    parse_script_with(text, &Script::default())
}

/// Parses `text` as a continuation of `prior` (whose names are in scope).
pub fn parse_script_with(text: &str, prior: &Script) -> Result<Script> {
    let mut p = Parser { toks: lex(text)?, pos: 0, names: BTreeMap::new(), scope: Vec::new() };
    for d in &prior.decls {
        p.declare_names(&d.node);
    }
    let mut decls = Vec::new();
    while !p.at_eof() {
        let span = p.span();
        let node = p.decl()?;
        p.declare_names(&node);
        decls.push(Spanned { span, node });
    }
    Ok(Script { decls })
}

/// Parses one expression against the names declared in `prior`; `vars` are
/// in scope as variables.
pub fn parse_expr(text: &str, prior: &Script, vars: &[String]) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, pos: 0, names: BTreeMap::new(), scope: vars.to_vec() };
    for d in &prior.decls {
        p.declare_names(&d.node);
    }
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(Error::syntax(p.span(), "trailing input after expression"));
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(Error::syntax(self.span(), format!("expected `{s}`, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(w) => format!("`{w}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Set(_) => "a set literal".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> Result<(String, SourceSpan)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += 1;
                Ok((w, span))
            }
            _ => Err(Error::syntax(span, format!("expected a name, found {}", self.describe()))),
        }
    }

    fn at_name(&self) -> bool {
        matches!(self.peek(), Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()))
    }

    fn declare_names(&mut self, d: &Decl) {
        match d {
            Decl::Universe(atoms) => {
                for a in atoms {
                    self.names.entry(a.clone()).or_insert(Kind::Atom);
                }
            }
            Decl::Relation { name, arity, tuples } => {
                self.names.insert(name.clone(), Kind::Pred(*arity));
                for a in tuples.iter().flatten() {
                    self.names.entry(a.clone()).or_insert(Kind::Atom);
                }
            }
            Decl::Const { name, atom } => {
                self.names.insert(name.clone(), Kind::Const);
                self.names.entry(atom.clone()).or_insert(Kind::Atom);
            }
            Decl::Def { name, params, .. } => {
                self.names.insert(name.clone(), Kind::Pred(params.len()));
            }
            Decl::Valuation { .. } | Decl::Query(_) => {}
        }
    }

    fn fresh(&self, name: &str, span: SourceSpan) -> Result<()> {
        match self.names.get(name) {
            Some(Kind::Atom) | None => Ok(()),
            Some(_) => Err(Error::DuplicateName { name: name.to_string(), span }),
        }
    }

    fn pred_arity(&self, name: &str, span: SourceSpan) -> Result<usize> {
        match self.names.get(name) {
            Some(Kind::Pred(n)) => Ok(*n),
            _ => Err(Error::UnboundName { name: name.to_string(), span }),
        }
    }

    fn decl(&mut self) -> Result<Decl> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(w) if DECL_WORDS.contains(&w.as_str()) => w.clone(),
            _ => return Err(Error::syntax(span, format!("expected a declaration, found {}", self.describe()))),
        };
        self.pos += 1;
        match word.as_str() {
            "universe" => {
                let mut atoms = Vec::new();
                while self.at_name() {
                    let (a, s) = self.name()?;
                    if matches!(self.names.get(&a), Some(Kind::Pred(_) | Kind::Const)) {
                        return Err(Error::DuplicateName { name: a, span: s });
                    }
                    atoms.push(a);
                }
                Ok(Decl::Universe(atoms))
            }
            "relation" => self.relation(),
            "const" => {
                let (name, s) = self.name()?;
                self.fresh(&name, s)?;
                self.expect_sym("=")?;
                let (atom, _) = self.name()?;
                Ok(Decl::Const { name, atom })
            }
            "def" => self.def(),
            "valuation" => {
                let (name, s) = self.name()?;
                let arity = self.pred_arity(&name, s)?;
                self.expect_sym(":")?;
                let mut entries = Vec::new();
                loop {
                    let pol = if self.eat_sym("+") {
                        true
                    } else if self.eat_sym("-") {
                        false
                    } else {
                        break;
                    };
                    let t = self.tuple(&name, arity)?;
                    entries.push((pol, t));
                }
                Ok(Decl::Valuation { name, entries })
            }
            _ => self.query().map(Decl::Query),
        }
    }

    fn relation(&mut self) -> Result<Decl> {
        let (name, s) = self.name()?;
        self.fresh(&name, s)?;
        self.expect_sym("/")?;
        let arity_span = self.span();
        let (digits, _) = self.name()?;
        let arity: usize = digits
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Error::syntax(arity_span, format!("arity must be a positive integer, found `{digits}`")))?;
        self.expect_sym("=")?;
        let mut tuples = Vec::new();
        if self.is_sym("(") || (self.at_name() && arity == 1) {
            tuples.push(self.tuple(&name, arity)?);
            while self.eat_sym(",") {
                tuples.push(self.tuple(&name, arity)?);
            }
        }
        Ok(Decl::Relation { name, arity, tuples })
    }

    /// `(a, b, …)`, or a bare atom for arity one.
    fn tuple(&mut self, rel: &str, arity: usize) -> Result<Vec<String>> {
        let mut items = Vec::new();
        if arity == 1 && self.at_name() {
            items.push(self.atom_name()?);
        } else {
            self.expect_sym("(")?;
            items.push(self.atom_name()?);
            while self.eat_sym(",") {
                items.push(self.atom_name()?);
            }
            self.expect_sym(")")?;
        }
        if items.len() != arity {
            return Err(Error::Arity { name: rel.to_string(), expected: arity, found: items.len() });
        }
        Ok(items)
    }

    fn atom_name(&mut self) -> Result<String> {
        let (a, s) = self.name()?;
        if matches!(self.names.get(&a), Some(Kind::Pred(_) | Kind::Const)) {
            return Err(Error::syntax(s, format!("`{a}` names a predicate, not an atom")));
        }
        Ok(a)
    }

    fn def(&mut self) -> Result<Decl> {
        let (name, s) = self.name()?;
        self.fresh(&name, s)?;
        let mut params = Vec::new();
        while self.at_name() {
            let (p, ps) = self.name()?;
            if params.contains(&p) {
                return Err(Error::DuplicateName { name: p, span: ps });
            }
            params.push(p);
        }
        self.expect_sym(":=")?;
        // the name is visible in its own body only through `rec`
        self.scope = params.clone();
        let body = self.expr();
        self.scope.clear();
        Ok(Decl::Def { name, params, body: body? })
    }

    fn query(&mut self) -> Result<Query> {
        let span = self.span();
        let (word, _) = match self.peek().clone() {
            Tok::Ident(w) => {
                self.pos += 1;
                (w, span)
            }
            _ => return Err(Error::syntax(span, "expected a query kind")),
        };
        match word.as_str() {
            "facts" => Ok(Query::Facts(self.expr()?)),
            "holds" => Ok(Query::Holds(self.expr()?)),
            "truth" => {
                let (pred, s) = self.name()?;
                let arity = self.pred_arity(&pred, s)?;
                let mut args = Vec::new();
                for _ in 0..arity {
                    args.push(self.atomic()?);
                }
                Ok(Query::Truth { pred, args })
            }
            "ext" => {
                let (pred, s) = self.name()?;
                let arity = self.pred_arity(&pred, s)?;
                let slot = match self.peek() {
                    Tok::Ident(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                        let sp = self.span();
                        let j: usize = w.parse().map_err(|_| Error::syntax(sp, "bad slot number"))?;
                        self.pos += 1;
                        if j == 0 || j > arity {
                            return Err(Error::syntax(sp, format!("slot {j} out of range 1..={arity}")));
                        }
                        Some(j)
                    }
                    _ => None,
                };
                Ok(Query::Ext { pred, slot })
            }
            "relation" => {
                let (pred, s) = self.name()?;
                self.pred_arity(&pred, s)?;
                Ok(Query::Relation(pred))
            }
            "categorical" => {
                let fs = self.span();
                let form_word = match self.bump().tok {
                    Tok::Ident(w) => w,
                    _ => return Err(Error::syntax(fs, "expected all, some, no or some-not")),
                };
                let form_word = if form_word == "some" && self.is_sym("-") {
                    self.pos += 1;
                    if !self.eat_word("not") {
                        return Err(Error::syntax(self.span(), "expected `not` after `some-`"));
                    }
                    "some-not".to_string()
                } else {
                    form_word
                };
                let form = Categorical::parse(&form_word)
                    .ok_or_else(|| Error::syntax(fs, format!("unknown categorical form `{form_word}`")))?;
                let (subject, s1) = self.name()?;
                self.pred_arity(&subject, s1)?;
                let (predicate, s2) = self.name()?;
                self.pred_arity(&predicate, s2)?;
                Ok(Query::Categorical { form, subject, predicate })
            }
            other => Err(Error::syntax(span, format!("unknown query kind `{other}`"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.conj()?;
        while self.eat_sym("|") {
            e = Expr::or(e, self.conj()?);
        }
        Ok(e)
    }

    fn conj(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat_sym("&") {
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("!") {
            return Ok(Expr::not(self.unary()?));
        }
        if let Tok::Ident(w) = self.peek() {
            if matches!(w.as_str(), "eps" | "exists" | "all" | "forall" | "rec") {
                return self.binder();
            }
        }
        self.application()
    }

    fn application(&mut self) -> Result<Expr> {
        let mut e = self.atomic()?;
        while self.at_name() || self.is_sym("(") || matches!(self.peek(), Tok::Set(_)) {
            e = Expr::app(e, self.atomic()?);
        }
        Ok(e)
    }

    fn atomic(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Set(s) => {
                self.pos += 1;
                Ok(Expr::Set(s))
            }
            Tok::Ident(_) if self.at_name() => {
                let (w, s) = self.name()?;
                self.resolve(w, s)
            }
            _ => Err(Error::syntax(span, format!("expected an expression, found {}", self.describe()))),
        }
    }

    fn resolve(&self, w: String, span: SourceSpan) -> Result<Expr> {
        if self.scope.contains(&w) {
            return Ok(Expr::Var(w));
        }
        match self.names.get(&w) {
            Some(Kind::Atom) => Ok(Expr::Set(ElementSet::from([GraphElement::atom(&w)]))),
            Some(_) => Ok(Expr::Const(w)),
            None => Err(Error::UnboundName { name: w, span }),
        }
    }

    fn binder(&mut self) -> Result<Expr> {
        let word = match self.bump().tok {
            Tok::Ident(w) => w,
            _ => unreachable!("checked by caller"),
        };
        let (var, _) = self.name()?;
        let range = if word != "rec" && self.eat_word("in") {
            let (r, s) = self.name()?;
            let arity = self.pred_arity(&r, s)?;
            if arity != 1 {
                return Err(Error::Arity { name: r, expected: 1, found: arity });
            }
            Some(r)
        } else {
            None
        };
        let seed = if word == "eps" && self.eat_word("seed") {
            if self.is_word("ext") && !self.names.contains_key("ext") {
                self.pos += 1;
                SeedSpec::Ext
            } else {
                SeedSpec::Expr(Box::new(self.atomic()?))
            }
        } else if word == "exists" {
            SeedSpec::Ext
        } else {
            SeedSpec::Default
        };
        self.expect_sym(".")?;
        self.scope.push(var.clone());
        let body = self.expr();
        self.scope.pop();
        let body = Box::new(body?);
        Ok(match word.as_str() {
            "eps" | "exists" => Expr::Eps { var, range, seed, body },
            "all" | "forall" => Expr::Alpha { var, range, body },
            _ => Expr::Rec { var, body },
        })
    }
}
