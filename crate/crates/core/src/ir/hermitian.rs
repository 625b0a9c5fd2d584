use super::{Context, Expr};

/// Syntactic hermiticity judgment. Never inspects matrix entries.
///
/// A product is judged Hermitian when every factor is and every pair of
/// factors is declared commuting (structurally identical factors commute).
pub fn is_hermitian_judgment(e: &Expr, ctx: &Context) -> bool {
    let flags: Vec<bool> = e
        .children()
        .into_iter()
        .map(|c| is_hermitian_judgment(c, ctx))
        .collect();
    node_hermitian(e, &flags, ctx)
}

/// Judgment at one node given the children's judgments.
pub(crate) fn node_hermitian(e: &Expr, children: &[bool], ctx: &Context) -> bool {
    match e {
        Expr::Base(o) => o.hermitian,
        Expr::Adj(_) | Expr::Poly(..) => children[0],
        Expr::Sum(_) | Expr::Choice(_) | Expr::Tensor(_) => children.iter().all(|&h| h),
        Expr::Prod(fs) => {
            children.iter().all(|&h| h)
                && (0..fs.len())
                    .all(|i| (i + 1..fs.len()).all(|j| ctx.commute(&fs[i], &fs[j])))
        }
    }
}
