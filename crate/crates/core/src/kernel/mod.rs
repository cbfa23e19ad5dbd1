//! The graph model G(A*), application, and the S and K combinators.

mod combinators;
mod element;
mod model_set;
mod parse;

pub use combinators::{combinator_k, combinator_s};
pub use element::{display_set, Arrow, Atom, ElementSet, GraphElement};
pub use model_set::{apply, apply_chain, apply_enumerated, enumerate, subsets_up_to, Bounds, Generator, ModelSet, Universe};
pub use parse::{parse_element, parse_set, print_element};
pub(crate) use parse::{is_ident_char, is_ident_start, ElementReader};
