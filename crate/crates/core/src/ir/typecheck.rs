use super::hermitian::node_hermitian;
use super::{ceil_log2, Context, Expr, QType, TypeError, TypedExpr};
use crate::cost::{node_cost, CostReport, MethodPolicy};
use crate::frontend::{Ast, OracleDecl, Program};
use crate::poly::PolySpec;
use std::collections::HashMap;
use std::sync::Arc;

/// Relative tolerance for equal branch subnormalizations in a direct sum.
pub const CHOICE_RTOL: f64 = 1e-9;

/// Resolves names and type-checks the main expression.
///
/// Every binding is checked, including unused ones.
pub fn typecheck(p: &Program) -> Result<TypedExpr, TypeError> {
    let mut oracles: HashMap<String, Arc<OracleDecl>> = HashMap::new();
    for o in &p.oracles {
        oracles.insert(o.name.clone(), Arc::new(o.clone()));
    }
    let mut bound: HashMap<String, Expr> = HashMap::new();
    let mut checked = Vec::new();
    for (name, ast) in &p.bindings {
        let e = resolve(ast, &oracles, &bound)?;
        checked.push(e.clone());
        bound.insert(name.clone(), e);
    }
    let lookup = |n: &str| -> Result<Expr, TypeError> {
        resolve(&Ast::Var(n.to_string()), &oracles, &bound)
    };
    let mut ctx = Context::default();
    for c in &p.commutes {
        ctx.commutes.push((lookup(&c.left)?, lookup(&c.right)?));
    }
    let ctx = Arc::new(ctx);
    for e in &checked {
        check(e, &ctx, &mut Vec::new())?;
    }
    let main = resolve(&p.main, &oracles, &bound)?;
    typecheck_expr(&main, ctx)
}

/// Type-checks an already resolved expression.
pub fn typecheck_expr(e: &Expr, ctx: Arc<Context>) -> Result<TypedExpr, TypeError> {
    let (qtype, hermitian, cost) = check(e, &ctx, &mut Vec::new())?;
    Ok(TypedExpr {
        expr: e.clone(),
        qtype,
        hermitian,
        cost,
        ctx,
    })
}

fn resolve(
    ast: &Ast,
    oracles: &HashMap<String, Arc<OracleDecl>>,
    bound: &HashMap<String, Expr>,
) -> Result<Expr, TypeError> {
    let r = |a: &Ast| resolve(a, oracles, bound);
    Ok(match ast {
        Ast::Var(n) => {
            if let Some(e) = bound.get(n) {
                e.clone()
            } else if let Some(o) = oracles.get(n) {
                Expr::Base(o.clone())
            } else if let Some(o) = OracleDecl::builtin(n) {
                Expr::base(o)
            } else {
                return Err(TypeError::Unbound(n.clone()));
            }
        }
        Ast::Adj(a) => Expr::Adj(Box::new(r(a)?)),
        Ast::Sum(ts) => Expr::Sum(
            ts.iter()
                .map(|(c, a)| Ok((*c, r(a)?)))
                .collect::<Result<_, TypeError>>()?,
        ),
        Ast::Prod(fs) => Expr::Prod(fs.iter().map(r).collect::<Result<_, _>>()?),
        Ast::Choice(fs) => Expr::Choice(fs.iter().map(r).collect::<Result<_, _>>()?),
        Ast::Tensor(fs) => Expr::Tensor(fs.iter().map(r).collect::<Result<_, _>>()?),
        Ast::Poly(b, cs) => Expr::Poly(Box::new(r(b)?), PolySpec::new(cs.clone())),
    })
}

fn check(
    e: &Expr,
    ctx: &Context,
    path: &mut Vec<usize>,
) -> Result<(QType, bool, CostReport), TypeError> {
    let mut types = Vec::new();
    let mut herms = Vec::new();
    let mut costs = Vec::new();
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        let (t, h, k) = check(c, ctx, path)?;
        path.pop();
        types.push(t);
        herms.push(h);
        costs.push(k);
    }
    let here = |path: &Vec<usize>| (path.clone(), e.to_string());
    let same = |types: &[QType]| -> Result<QType, TypeError> {
        let first = types[0];
        for (i, t) in types.iter().enumerate().skip(1) {
            if *t != first {
                let mut p = path.clone();
                p.push(i);
                return Err(TypeError::TypeMismatch {
                    path: p,
                    expr: e.to_string(),
                    expected: first,
                    found: *t,
                });
            }
        }
        Ok(first)
    };
    let qtype = match e {
        Expr::Base(o) => QType {
            n_qubits: o.n_qubits,
        },
        Expr::Adj(_) => types[0],
        Expr::Sum(ts) => {
            if ts.iter().all(|(c, _)| *c == 0.0) {
                let (path, expr) = here(path);
                return Err(TypeError::DegenerateSum { path, expr });
            }
            same(&types)?
        }
        Expr::Prod(_) => same(&types)?,
        Expr::Choice(bs) => {
            let t = same(&types)?;
            if bs.len() < 2 || !bs.len().is_power_of_two() {
                let (path, expr) = here(path);
                return Err(TypeError::ChoiceArity {
                    path,
                    expr,
                    branches: bs.len(),
                });
            }
            let alphas: Vec<f64> = costs.iter().map(|c| c.subnorm).collect();
            let a0 = alphas[0];
            if alphas
                .iter()
                .any(|a| (a - a0).abs() > CHOICE_RTOL * a.abs().max(a0.abs()))
            {
                let (path, expr) = here(path);
                return Err(TypeError::ChoiceSubnormMismatch { path, expr, alphas });
            }
            QType {
                n_qubits: t.n_qubits + ceil_log2(bs.len()),
            }
        }
        Expr::Tensor(_) => QType {
            n_qubits: types.iter().map(|t| t.n_qubits).sum(),
        },
        Expr::Poly(_, p) => {
            if p.is_zero() {
                let (path, expr) = here(path);
                return Err(TypeError::ZeroPolynomial { path, expr });
            }
            if !herms[0] {
                let mut p = path.clone();
                p.push(0);
                return Err(TypeError::NonHermitianPolyBase {
                    path: p,
                    expr: e.children()[0].to_string(),
                });
            }
            types[0]
        }
    };
    let herm = node_hermitian(e, &herms, ctx);
    let base_herm = herms.first().copied().unwrap_or(false);
    let cost = node_cost(e, &costs, base_herm, MethodPolicy::Auto)
        .expect("automatic method selection is total for Hermitian bases");
    Ok((qtype, herm, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn tc(src: &str) -> Result<TypedExpr, TypeError> {
        typecheck(&parse(src).unwrap())
    }

    const DECLS: &str = "oracle A : qubits=1, ancillas=1, subnorm=1.0, hermitian=true;
                         oracle B : qubits=1, ancillas=1, subnorm=2.0, hermitian=true;
                         oracle C : qubits=2, ancillas=0, subnorm=1.0, hermitian=false;";

    #[test]
    fn pauli_sum() {
        let t = tc("kron(X, X) + kron(Y, Y)").unwrap();
        assert_eq!(t.qtype.n_qubits, 2);
        assert_eq!(t.qtype.to_string(), "bool⊗bool");
        assert!(t.hermitian);
    }

    #[test]
    fn choice_mismatch() {
        let err = tc(&format!("{DECLS} dsum(A, B)")).unwrap_err();
        match err {
            TypeError::ChoiceSubnormMismatch { alphas, .. } => assert_eq!(alphas, vec![1.0, 2.0]),
            e => panic!("{e}"),
        }
        let t = tc(&format!("{DECLS} dsum(A, 0.5 * B)")).unwrap();
        assert_eq!(t.qtype.n_qubits, 2);
    }

    #[test]
    fn poly_needs_hermitian_base() {
        let err = tc(&format!("{DECLS} Poly(A * B, [0, 1, 1])")).unwrap_err();
        assert!(matches!(err, TypeError::NonHermitianPolyBase { ref path, .. } if path == &vec![0]));
        let ok = tc(&format!("{DECLS} commute A B; Poly(A * B, [0, 1, 1])"));
        assert!(ok.is_ok());
        let err = tc(&format!("{DECLS} Poly(C, [0, 1])")).unwrap_err();
        assert!(matches!(err, TypeError::NonHermitianPolyBase { .. }));
    }

    #[test]
    fn mismatch_path() {
        let err = tc(&format!("{DECLS} kron(A, A + C)")).unwrap_err();
        match err {
            TypeError::TypeMismatch { path, expected, found, .. } => {
                assert_eq!(path, vec![1, 1]);
                assert_eq!((expected.n_qubits, found.n_qubits), (1, 2));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn degenerate_and_arity() {
        assert!(matches!(
            tc("0 * X + 0 * Y").unwrap_err(),
            TypeError::DegenerateSum { .. }
        ));
        assert!(matches!(
            tc("dsum(X, Y, Z)").unwrap_err(),
            TypeError::ChoiceArity { branches: 3, .. }
        ));
        let t = tc("dsum(X, Y, Z, H)").unwrap();
        assert_eq!(t.qtype.n_qubits, 3);
    }

    #[test]
    fn unused_binding_is_checked() {
        let err = tc(&format!("{DECLS} bad = dsum(A, B); A")).unwrap_err();
        assert!(matches!(err, TypeError::ChoiceSubnormMismatch { .. }));
    }
}
