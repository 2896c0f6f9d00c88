//! MiniJ front end: lexing, parsing, pretty-printing and lowering to the
//! heap-explicit IR.

pub mod ast;
pub mod ir;
pub mod lexer;
mod lower;
pub mod parser;
pub mod pretty;

use thiserror::Error;

pub use ast::Program;
pub use ir::IrProgram;
pub use lower::lower;
pub use parser::parse;
pub use pretty::pretty;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{col}: unsupported construct: {construct}")]
    Unsupported {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("binding error: {0}")]
    Binding(String),
    #[error("type error: {0}")]
    Type(String),
    /// Rejected during lowering, where source positions are no longer known.
    #[error("unsupported construct: {0}")]
    UnsupportedIr(String),
}

/// Parses and lowers in one step.
pub fn compile(source: &str) -> Result<(Program, IrProgram), FrontendError> {
    let ast = parse(source)?;
    let ir = lower(&ast)?;
    Ok((ast, ir))
}
