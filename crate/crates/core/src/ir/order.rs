use super::Expr;
use std::cmp::Ordering;

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Base(_) => 0,
        Expr::Adj(_) => 1,
        Expr::Sum(_) => 2,
        Expr::Prod(_) => 3,
        Expr::Choice(_) => 4,
        Expr::Tensor(_) => 5,
        Expr::Poly(..) => 6,
    }
}

fn cmp_list(a: &[Expr], b: &[Expr]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| cmp_expr(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn cmp_f64s(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Deterministic total order on expressions, used to sort summands.
/// `Equal` exactly when the expressions are structurally equal.
pub fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Expr::Base(x), Expr::Base(y)) => x
            .name
            .cmp(&y.name)
            .then(x.n_qubits.cmp(&y.n_qubits))
            .then(x.ancillas.cmp(&y.ancillas))
            .then(x.subnorm.total_cmp(&y.subnorm))
            .then(x.hermitian.cmp(&y.hermitian)),
        (Expr::Adj(x), Expr::Adj(y)) => cmp_expr(x, y),
        (Expr::Sum(x), Expr::Sum(y)) => x.len().cmp(&y.len()).then_with(|| {
            x.iter()
                .zip(y)
                .map(|((c, e), (d, f))| cmp_expr(e, f).then(c.total_cmp(d)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }),
        (Expr::Prod(x), Expr::Prod(y))
        | (Expr::Choice(x), Expr::Choice(y))
        | (Expr::Tensor(x), Expr::Tensor(y)) => cmp_list(x, y),
        (Expr::Poly(x, p), Expr::Poly(y, q)) => {
            cmp_expr(x, y).then_with(|| cmp_f64s(p.coeffs(), q.coeffs()))
        }
        _ => unreachable!("ranks differ"),
    })
}
