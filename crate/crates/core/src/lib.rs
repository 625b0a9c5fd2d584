//! Compiler and cost analyzer for block-encoding programs.
//!
//! A program is a matrix expression over black-box block encodings. The
//! pipeline is: [`frontend::parse`] text into a [`frontend::Program`],
//! [`ir::typecheck`] it into a [`ir::TypedExpr`], predict its cost with
//! [`cost::cost`], optimize it with [`rewrite::apply_rules`], lower it to a
//! gate-level [`circuit::Circuit`] with [`circuit::compile`], and check the
//! result against the denotational semantics with [`sim::verify`].
//!
//! ```
//! use blenc::{frontend, ir, cost, rewrite};
//!
//! let src = "A = kron(X, X) + kron(Y, Y);
//!            B = kron(X, X) - kron(Y, Y);
//!            H = A + 0.3 * B;
//!            H";
//! let typed = ir::typecheck(&frontend::parse(src).unwrap()).unwrap();
//! let before = cost::cost(&typed);
//! assert_eq!((before.queries, before.subnorm, before.total), (8.0, 2.6, 20.8));
//!
//! let (opt, _trace) = rewrite::apply_rules(&typed).unwrap();
//! assert_eq!(opt.expr.to_string(), "1.3 * kron(X, X) + 0.7 * kron(Y, Y)");
//! let after = cost::cost(&opt);
//! assert_eq!((after.queries, after.subnorm, after.total), (4.0, 2.0, 8.0));
//! ```

pub mod circuit;
pub mod cost;
pub mod dd;
pub mod frontend;
pub mod gen;
pub mod ir;
pub mod poly;
pub mod qsp;
pub mod rewrite;
pub mod sim;

mod error;

pub use error::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
