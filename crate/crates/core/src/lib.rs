//! Model-set semantics for combinatory definitions over finite relational data.

pub mod cli;
pub mod comprehension;
pub mod error;
pub mod expr;
pub mod factual;
pub mod kernel;
pub mod lang;
pub mod oracle;
pub mod random;
pub mod relational;
pub mod session;

pub use error::{Error, Result};
