//! Concrete textual syntax: lexer, parser and canonical formatter.

mod format;
pub mod lexer;
mod parser;

pub use format::{format, format_named, parse_roundtrip, FormatError};
pub use parser::{parse, ParseResult, BODY_RESERVED, KEYWORDS, SECTION_KEYWORDS};
