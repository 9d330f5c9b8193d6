//! Concrete syntax: lexer, parser, printer, validator and desugarer.
//!
//! ```text
//! static s/0, p/0;
//! dynamic relational sold/0;
//! external q0/0 = [q0], t/0;
//! rule if knot (q0 preceq t) then sold := true else skip endif
//! ```

pub mod ast;
mod desugar;
mod lexer;
mod parser;
pub mod printer;
mod validate;

use thiserror::Error;

pub use ast::*;
pub use desugar::{desugar, desugar_guard, desugar_rule, desugar_term, lift, lift_guard, lift_term, DesugarError};
pub use lexer::KEYWORDS;
pub use parser::{parse_guard, parse_program, parse_term};
pub use validate::{validate, Code, Diagnostic, Severity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

impl SyntaxError {
    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic::error(
            Code::SyntaxError,
            Span::new(self.line, self.col),
            format!("expected {}, found {}", self.expected, self.found),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{} problem(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
}

impl CompileError {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            CompileError::Syntax(e) => vec![e.diagnostic()],
            CompileError::Invalid(d) => d.clone(),
            CompileError::Desugar(e) => vec![Diagnostic::error(
                Code::SyntaxError,
                Span::default(),
                e.to_string(),
            )],
        }
    }
}

/// Parse, validate and desugar.
pub fn compile(src: &str) -> Result<Program, CompileError> {
    let sugar = parse_program(src)?;
    let diags = validate(&sugar);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(CompileError::Invalid(diags));
    }
    Ok(desugar(&sugar)?)
}

impl Program {
    pub fn parse(src: &str) -> Result<Program, CompileError> {
        compile(src)
    }

    /// Source text that compiles back to this program.
    pub fn to_source(&self) -> String {
        printer::program(self)
    }
}
