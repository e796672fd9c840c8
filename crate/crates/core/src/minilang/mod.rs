//! MiniImp, the snippet language: lexer, parser, AST, canonical printer,
//! scope checker and a tree-walking evaluator.
//!
//! ```
//! use codemapper::minilang::{self, Value};
//!
//! let program = minilang::parse("func twice(x: int) -> int { return x * 2; }").unwrap();
//! let out = minilang::evaluate(&program, "twice", &[Value::Int(21)], 1000).unwrap();
//! assert_eq!(out.result, Some(Value::Int(42)));
//! ```

pub mod ast;
mod eval;
mod lexer;
mod parser;
mod pretty;
pub mod scope;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::{Dtype, Expr, FuncDef, Program, Span, Stmt, StmtKind, StripSpans};
pub use eval::{
    evaluate, evaluate_constant, Outcome, Value, BUILTINS, DEFAULT_STEP_LIMIT, MAX_CALL_DEPTH,
};
pub use lexer::KEYWORDS;
pub use parser::{parse, parse_expr};
pub use pretty::{format_real, pretty_print, print_expr, print_function, print_stmt, quote_str};
pub use scope::{unbound_identifiers, Unbound};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    /// Set for errors that are not a plain "expected X, found Y".
    pub message: Option<String>,
}

impl ParseError {
    pub(crate) fn semantic(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            expected: Vec::new(),
            found: String::new(),
            message: Some(message.into()),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.span.line, self.span.column)?;
        if let Some(msg) = &self.message {
            return f.write_str(msg);
        }
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeErrorKind {
    TypeMismatch,
    IndexOutOfBounds,
    UndefinedName,
    DivisionByZero,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("{span}: {kind:?}: {message}")]
    Runtime {
        kind: RuntimeErrorKind,
        span: Span,
        message: String,
    },
    #[error("step limit of {0} exceeded")]
    StepLimitExceeded(u64),
    #[error("call depth limit of {0} exceeded")]
    CallDepthExceeded(usize),
    #[error("no function named `{0}`")]
    UnknownEntry(String),
    #[error("bad arguments: {0}")]
    BadArguments(String),
}

/// Parses source that must hold exactly one function.
pub fn parse_function(src: &str) -> Result<FuncDef, ParseError> {
    let mut program = parse(src)?;
    match program.functions.len() {
        1 => Ok(program.functions.remove(0)),
        n => {
            let span = program
                .functions
                .get(1)
                .map(|f| f.span)
                .unwrap_or_else(|| Span::new(src.len(), 1, 1, 0));
            Err(ParseError::semantic(
                span,
                format!("expected exactly one function, found {n}"),
            ))
        }
    }
}

/// True for names usable as MiniImp variables (not keywords).
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Parses a command-line style literal such as `[5, 2, 9, 1]` into a value.
pub fn parse_value(src: &str) -> Result<Value, String> {
    let expr = parse_expr(src).map_err(|e| e.to_string())?;
    evaluate_constant(&expr).map_err(|e| e.to_string())
}
