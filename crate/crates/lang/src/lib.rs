//! ASTs, parsers and pretty-printers for Logical Algorithms (`.la`) and
//! CHR with rule priorities (`.chrrp`), plus the dynamic-priority
//! normalizer and the intermediate `±H, ?g` rule form.

mod ast;
mod intermediate;
mod lexer;
mod normalize;
mod parser;
mod printer;

pub use ast::*;
pub use intermediate::{to_intermediate, IntermediateItem, IntermediateRule, JoinOrderError, Sign};
pub use normalize::normalize_la_priority;
pub use parser::{parse_chrrp, parse_la, ParseError};
pub use printer::{pretty_print_chrrp, pretty_print_la, print_chr_rule, print_la_rule};
