//! Typed expression IR, the type system, the hermiticity judgment, and the
//! denotational semantics on concrete matrices.

mod denote;
mod hermitian;
mod order;
mod typecheck;

use crate::cost::CostReport;
use crate::frontend::{self, Ast, OracleDecl};
use crate::poly::PolySpec;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub use denote::{builtin_matrix, denote, denote_expr, DenoteError, MAX_DENOTE_QUBITS};
pub use hermitian::is_hermitian_judgment;
pub(crate) use hermitian::node_hermitian;
pub use order::cmp_expr;
pub use typecheck::{typecheck, typecheck_expr, CHOICE_RTOL};

/// Matrix expression over black-box block encodings.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Base(Arc<OracleDecl>),
    Adj(Box<Expr>),
    /// Weighted sum; at least one term, not all coefficients zero.
    Sum(Vec<(f64, Expr)>),
    /// Matrix product, leftmost factor applied last.
    Prod(Vec<Expr>),
    /// Direct sum selected by leading discriminator qubits.
    Choice(Vec<Expr>),
    Tensor(Vec<Expr>),
    Poly(Box<Expr>, PolySpec),
}

impl Expr {
    pub fn base(o: OracleDecl) -> Expr {
        Expr::Base(Arc::new(o))
    }

    /// Reference to a builtin gate oracle (`X`, `Y`, `Z`, `H`, `I`).
    pub fn builtin(name: &str) -> Expr {
        Expr::base(OracleDecl::builtin(name).expect("not a builtin"))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Base(_) => vec![],
            Expr::Adj(a) | Expr::Poly(a, _) => vec![a],
            Expr::Sum(ts) => ts.iter().map(|(_, e)| e).collect(),
            Expr::Prod(fs) | Expr::Choice(fs) | Expr::Tensor(fs) => fs.iter().collect(),
        }
    }

    /// Subexpression at a path of child indices.
    pub fn at(&self, path: &[usize]) -> Option<&Expr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Data qubits, computed structurally without validating operands.
    pub fn n_qubits(&self) -> usize {
        match self {
            Expr::Base(o) => o.n_qubits,
            Expr::Adj(a) | Expr::Poly(a, _) => a.n_qubits(),
            Expr::Sum(ts) => ts[0].1.n_qubits(),
            Expr::Prod(fs) => fs[0].n_qubits(),
            Expr::Choice(fs) => fs[0].n_qubits() + ceil_log2(fs.len()),
            Expr::Tensor(fs) => fs.iter().map(Expr::n_qubits).sum(),
        }
    }

    /// Oracles referenced, deduplicated by name in first-occurrence order.
    pub fn oracles(&self) -> Vec<Arc<OracleDecl>> {
        let mut out: Vec<Arc<OracleDecl>> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Base(o) = e {
                if !out.iter().any(|p| p.name == o.name) {
                    out.push(o.clone());
                }
            }
        });
        out
    }

    /// Preorder traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Converts back to surface syntax with oracles referenced by name.
    pub fn to_ast(&self) -> Ast {
        match self {
            Expr::Base(o) => Ast::Var(o.name.clone()),
            Expr::Adj(a) => Ast::Adj(Box::new(a.to_ast())),
            Expr::Sum(ts) => Ast::Sum(ts.iter().map(|(c, e)| (*c, e.to_ast())).collect()),
            Expr::Prod(fs) => Ast::Prod(fs.iter().map(Expr::to_ast).collect()),
            Expr::Choice(fs) => Ast::Choice(fs.iter().map(Expr::to_ast).collect()),
            Expr::Tensor(fs) => Ast::Tensor(fs.iter().map(Expr::to_ast).collect()),
            Expr::Poly(b, p) => Ast::Poly(Box::new(b.to_ast()), p.coeffs().to_vec()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&frontend::print_ast(&self.to_ast()))
    }
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Type `bool^n`: the expression encodes a `2^n x 2^n` matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QType {
    pub n_qubits: usize,
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n_qubits == 0 {
            return f.write_str("unit");
        }
        let parts = vec!["bool"; self.n_qubits];
        f.write_str(&parts.join("⊗"))
    }
}

/// Declarations an expression is judged against.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    /// Pairs of subexpressions the user declared to commute.
    pub commutes: Vec<(Expr, Expr)>,
}

impl Context {
    pub fn commute(&self, a: &Expr, b: &Expr) -> bool {
        a == b
            || self
                .commutes
                .iter()
                .any(|(l, r)| (l == a && r == b) || (l == b && r == a))
    }
}

/// An expression together with its type, hermiticity and cost.
#[derive(Clone, Debug)]
pub struct TypedExpr {
    pub expr: Expr,
    pub qtype: QType,
    pub hermitian: bool,
    pub cost: CostReport,
    pub ctx: Arc<Context>,
}

impl TypedExpr {
    pub fn queries(&self) -> f64 {
        self.cost.queries
    }

    pub fn subnorm(&self) -> f64 {
        self.cost.subnorm
    }

    pub fn ancillas(&self) -> usize {
        self.cost.ancillas
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TypeError {
    #[error("type mismatch at {path:?} in `{expr}`: expected {expected}, found {found}")]
    TypeMismatch {
        path: Vec<usize>,
        expr: String,
        expected: QType,
        found: QType,
    },
    #[error("direct sum at {path:?} in `{expr}` has branch subnormalizations {alphas:?}")]
    ChoiceSubnormMismatch {
        path: Vec<usize>,
        expr: String,
        alphas: Vec<f64>,
    },
    #[error("direct sum at {path:?} in `{expr}` has {branches} branches; a power of two >= 2 is required")]
    ChoiceArity {
        path: Vec<usize>,
        expr: String,
        branches: usize,
    },
    #[error("polynomial base at {path:?} `{expr}` is not judged Hermitian")]
    NonHermitianPolyBase { path: Vec<usize>, expr: String },
    #[error("sum at {path:?} in `{expr}` has no nonzero coefficient")]
    DegenerateSum { path: Vec<usize>, expr: String },
    #[error("polynomial at {path:?} in `{expr}` has no nonzero coefficient")]
    ZeroPolynomial { path: Vec<usize>, expr: String },
    #[error("`{0}` is not bound")]
    Unbound(String),
}
