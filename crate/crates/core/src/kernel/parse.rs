//! Text form of graph elements.
//!
//! ```text
//! element := atom | tuple | arrow
//! atom    := identifier
//! tuple   := "<" element ("," element)+ ">"
//! arrow   := "(" "{" [element ("," element)*] "}" "->" element ")"
//! ```
//!
//! Whitespace is insignificant. Printing sorts antecedents, so
//! `print(parse(s))` is the canonical form of `s`.

use super::element::{ElementSet, GraphElement};
use crate::error::{Error, Result, SourceSpan};

pub fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Cursor over element text, shared with the script parser for set literals.
pub(crate) struct ElementReader<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
    /// Line/column of the first character, for spans inside larger sources.
    origin: (usize, usize),
}

impl<'a> ElementReader<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Self::with_origin(src, (1, 1))
    }

    pub(crate) fn with_origin(src: &'a str, origin: (usize, usize)) -> Self {
        ElementReader { chars: src.char_indices().collect(), pos: 0, src, origin }
    }

    fn span(&self) -> SourceSpan {
        let offset = self.chars.get(self.pos).map(|(i, _)| *i).unwrap_or(self.src.len());
        let before = &self.src[..offset];
        let line = before.matches('\n').count();
        let column = match before.rfind('\n') {
            Some(nl) => before[nl + 1..].chars().count() + 1,
            None => before.chars().count() + self.origin.1,
        };
        SourceSpan { line: self.origin.0 + line, column, length: 1 }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(Error::syntax(self.span(), format!("expected `{want}`, found `{c}`"))),
            None => Err(Error::syntax(self.span(), format!("expected `{want}`, found end of input"))),
        }
    }

    fn expect_arrow(&mut self) -> Result<()> {
        self.expect('-')?;
        match self.chars.get(self.pos) {
            Some((_, '>')) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::syntax(self.span(), "expected `->`")),
        }
    }

    pub(crate) fn element(&mut self) -> Result<GraphElement> {
        match self.peek() {
            Some('<') => {
                self.pos += 1;
                let mut items = vec![self.element()?];
                loop {
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                            items.push(self.element()?);
                        }
                        Some('>') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(Error::syntax(self.span(), "expected `,` or `>` in tuple")),
                    }
                }
                if items.len() < 2 {
                    return Err(Error::syntax(self.span(), "tuples need at least two components"));
                }
                Ok(GraphElement::tuple(items))
            }
            Some('(') => {
                self.pos += 1;
                let antecedent = self.set()?;
                self.expect_arrow()?;
                let consequent = self.element()?;
                self.expect(')')?;
                Ok(GraphElement::arrow(antecedent, consequent))
            }
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|(_, c)| is_ident_char(*c)) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
                Ok(GraphElement::atom(&name))
            }
            Some(c) => Err(Error::syntax(self.span(), format!("unexpected `{c}`"))),
            None => Err(Error::syntax(self.span(), "unexpected end of input")),
        }
    }

    /// `{ e, e, … }`
    pub(crate) fn set(&mut self) -> Result<ElementSet> {
        self.expect('{')?;
        let mut out = ElementSet::new();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.insert(self.element()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(Error::syntax(self.span(), "expected `,` or `}` in set")),
            }
        }
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(Error::syntax(self.span(), format!("trailing input starting at `{c}`"))),
        }
    }

    /// Byte offset of the cursor into the source.
    pub(crate) fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|(i, _)| *i).unwrap_or(self.src.len())
    }
}

pub fn parse_element(text: &str) -> Result<GraphElement> {
    let mut r = ElementReader::new(text);
    let e = r.element()?;
    r.finish()?;
    Ok(e)
}

pub fn parse_set(text: &str) -> Result<ElementSet> {
    let mut r = ElementReader::new(text);
    let s = r.set()?;
    r.finish()?;
    Ok(s)
}

pub fn print_element(e: &GraphElement) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_arrow() {
        let e = parse_element("({a} -> b)").unwrap();
        assert_eq!(e, GraphElement::arrow([GraphElement::atom("a")], GraphElement::atom("b")));
    }

    #[test]
    fn parses_tuple() {
        let e = parse_element("<a,b>").unwrap();
        assert_eq!(e, GraphElement::tuple([GraphElement::atom("a"), GraphElement::atom("b")]));
    }

    #[test]
    fn canonical_printing_sorts_antecedents() {
        let e = parse_element("( { b , a } -> ( {c} -> d ) )").unwrap();
        assert_eq!(print_element(&e), "({a,b} -> ({c} -> d))");
        assert_eq!(parse_element("({} -> a)").unwrap().level(), 1);
    }

    #[test]
    fn reports_position() {
        match parse_element("({a} => b)") {
            Err(Error::Syntax { span, .. }) => assert_eq!((span.line, span.column), (1, 6)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_element("<a>").is_err());
        assert!(parse_element("a b").is_err());
    }

    fn arb_element() -> impl Strategy<Value = GraphElement> {
        let leaf = "[a-e]".prop_map(|s| GraphElement::atom(&s));
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(GraphElement::tuple),
                (prop::collection::vec(inner.clone(), 0..3), inner)
                    .prop_map(|(ante, c)| GraphElement::arrow(ante, c)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_element()) {
            let text = print_element(&e);
            let back = parse_element(&text).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(print_element(&back), text);
        }
    }
}
