//! Concrete syntax: lexing, parsing, printing and the file-level driver.

pub mod driver;
pub mod lexer;
pub mod parser;
pub mod print;

pub use parser::{parse_comp, parse_file, parse_lf_term, parse_lf_type, Decl, Parser, SourceFile};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}
