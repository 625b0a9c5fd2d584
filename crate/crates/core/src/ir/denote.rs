use super::{Expr, TypedExpr};
use crate::{CMatrix, C64};
use std::collections::HashMap;
use thiserror::Error;

/// Largest data width handled by dense denotation.
pub const MAX_DENOTE_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DenoteError {
    #[error("oracle `{name}` bound to a {found}x{found} matrix, expected {expected}x{expected}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("denotation needs {0} qubits; at most {MAX_DENOTE_QUBITS} are supported")]
    OversizeDenotation(usize),
    #[error("oracle `{0}` has no matrix binding")]
    Unbound(String),
}

/// Exact matrix of a builtin gate.
pub fn builtin_matrix(name: &str) -> Option<CMatrix> {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = match name {
        "X" => [o, l, l, o],
        "Y" => [o, -i, i, o],
        "Z" => [l, o, o, -l],
        "H" => [l * s, l * s, l * s, -l * s],
        "I" => [l, o, o, l],
        _ => return None,
    };
    Some(CMatrix::from_row_slice(2, 2, &v))
}

/// The matrix an expression denotes, with oracles taken from `bindings`.
/// Builtins without an explicit binding use their exact matrices.
pub fn denote(e: &TypedExpr, bindings: &HashMap<String, CMatrix>) -> Result<CMatrix, DenoteError> {
    denote_expr(&e.expr, bindings)
}

pub fn denote_expr(e: &Expr, bindings: &HashMap<String, CMatrix>) -> Result<CMatrix, DenoteError> {
    let n = e.n_qubits();
    if n > MAX_DENOTE_QUBITS {
        return Err(DenoteError::OversizeDenotation(n));
    }
    go(e, bindings)
}

fn go(e: &Expr, b: &HashMap<String, CMatrix>) -> Result<CMatrix, DenoteError> {
    Ok(match e {
        Expr::Base(o) => {
            let m = match b.get(&o.name) {
                Some(m) => m.clone(),
                None => builtin_matrix(&o.name)
                    .filter(|_| o.is_builtin())
                    .ok_or_else(|| DenoteError::Unbound(o.name.clone()))?,
            };
            let dim = 1usize << o.n_qubits;
            if m.nrows() != dim || m.ncols() != dim {
                return Err(DenoteError::DimensionMismatch {
                    name: o.name.clone(),
                    expected: dim,
                    found: m.nrows(),
                });
            }
            m
        }
        Expr::Adj(a) => go(a, b)?.adjoint(),
        Expr::Sum(ts) => {
            let mut acc: Option<CMatrix> = None;
            for (c, t) in ts {
                let m = go(t, b)? * C64::new(*c, 0.0);
                acc = Some(match acc {
                    None => m,
                    Some(a) => a + m,
                });
            }
            acc.expect("sum has a term")
        }
        Expr::Prod(fs) => {
            let mut acc = go(&fs[0], b)?;
            for f in &fs[1..] {
                acc *= go(f, b)?;
            }
            acc
        }
        Expr::Choice(bs) => {
            let blocks = bs.iter().map(|x| go(x, b)).collect::<Result<Vec<_>, _>>()?;
            let d = blocks[0].nrows();
            let mut out = CMatrix::zeros(d * blocks.len(), d * blocks.len());
            for (k, m) in blocks.iter().enumerate() {
                out.view_mut((k * d, k * d), (d, d)).copy_from(m);
            }
            out
        }
        Expr::Tensor(fs) => {
            let mut acc = go(&fs[0], b)?;
            for f in &fs[1..] {
                acc = acc.kronecker(&go(f, b)?);
            }
            acc
        }
        Expr::Poly(base, p) => {
            let m = go(base, b)?;
            let d = m.nrows();
            let id = CMatrix::identity(d, d);
            let mut acc = CMatrix::zeros(d, d);
            for &c in p.coeffs().iter().rev() {
                acc = &acc * &m + &id * C64::new(c, 0.0);
            }
            acc
        }
    })
}
