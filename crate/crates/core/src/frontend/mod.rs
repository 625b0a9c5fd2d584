//! Surface syntax: lexing, parsing and pretty-printing of programs.
//!
//! ```text
//! oracle A : qubits=1, ancillas=1, subnorm=1.0, hermitian=true;
//! commute A B;
//! f = (A - B) + 1 / 2 * (A - B) ** 2;
//! f
//! ```
//!
//! Statements are oracle declarations, commutation declarations, bindings,
//! and a final bare expression that is the program's main expression. `#`
//! starts a line comment. `**` binds tighter than `*`, which binds tighter
//! than `+` and `-`. A numeric factor on the left of `*` is a coefficient;
//! between matrices `*` is the matrix product.

mod lexer;
mod parser;
mod printer;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use parser::parse;
pub use printer::{print, print_ast};

/// Names that are implicitly declared as single-qubit Hermitian oracles
/// with no ancillas and unit subnormalization.
pub const BUILTINS: [&str; 5] = ["X", "Y", "Z", "H", "I"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDecl {
    pub name: String,
    pub n_qubits: usize,
    pub ancillas: usize,
    pub subnorm: f64,
    pub hermitian: bool,
}

impl OracleDecl {
    pub fn builtin(name: &str) -> Option<OracleDecl> {
        BUILTINS.contains(&name).then(|| OracleDecl {
            name: name.to_string(),
            n_qubits: 1,
            ancillas: 0,
            subnorm: 1.0,
            hermitian: true,
        })
    }

    pub fn is_builtin(&self) -> bool {
        OracleDecl::builtin(&self.name).as_ref() == Some(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommuteDecl {
    pub left: String,
    pub right: String,
}

/// Untyped expression tree with names still unresolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ast {
    Var(String),
    Adj(Box<Ast>),
    Sum(Vec<(f64, Ast)>),
    Prod(Vec<Ast>),
    Choice(Vec<Ast>),
    Tensor(Vec<Ast>),
    Poly(Box<Ast>, Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Program {
    /// User declarations; builtins are not listed.
    pub oracles: Vec<OracleDecl>,
    pub commutes: Vec<CommuteDecl>,
    /// Bindings in source order; each may only mention earlier names.
    pub bindings: Vec<(String, Ast)>,
    pub main: Ast,
}

impl Program {
    /// Looks up a declared or builtin oracle.
    pub fn oracle(&self, name: &str) -> Option<OracleDecl> {
        self.oracles
            .iter()
            .find(|o| o.name == name)
            .cloned()
            .or_else(|| OracleDecl::builtin(name))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: duplicate declaration of `{name}`")]
    Duplicate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    Unknown { line: usize, col: usize, name: String },
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_ast(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
