//! The pulse-sequence mini-language: lexer, parser, canonical formatter,
//! and the compiler that lowers sequences to executable propagators.
//!
//! Sequence files are UTF-8 text, one sequence per file, with `#` line
//! comments. Example:
//!
//! ```text
//! [theta]x^{2} - [pi/2]x^{1,2} - 1/(4J12) - [pi]x^{1,2} - 1/(4J12) - [pi/2]y^{2}
//! ```

pub mod ast;
pub mod compile;
pub mod lexer;
pub mod parser;

pub use ast::{AngleExpr, DelaySpec, PulseSequence, SequenceElement, SequenceError};
pub use compile::{apply_propagators, compile, Binding, CompileError, Propagator};
pub use lexer::{tokenize, Pos, SyntaxError, Token, TokenKind, UnitSuffix};
pub use parser::parse;
