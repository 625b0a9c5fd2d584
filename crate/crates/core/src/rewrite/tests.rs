use super::*;
use crate::frontend::parse;
use crate::ir::typecheck;

fn typed(src: &str) -> TypedExpr {
    typecheck(&parse(src).unwrap()).unwrap()
}

const AB: &str = "oracle A : qubits=1, ancillas=1, subnorm=1.0, hermitian=true;
                  oracle B : qubits=1, ancillas=1, subnorm=1.0, hermitian=true;
                  oracle C : qubits=1, ancillas=0, subnorm=1.0, hermitian=false;
                  commute A B;";

fn opt(src: &str) -> (TypedExpr, RewriteTrace) {
    apply_rules(&typed(src)).unwrap()
}

#[test]
fn simulation_example() {
    let (t, trace) = opt("A = kron(X, X) + kron(Y, Y); B = kron(X, X) - kron(Y, Y); A + 0.3 * B");
    assert_eq!(t.expr.to_string(), "1.3 * kron(X, X) + 0.7 * kron(Y, Y)");
    assert!(trace.steps.iter().any(|s| s.rule == RuleId::SumFusion));
    assert_eq!((t.cost.queries, t.cost.subnorm, t.cost.total), (4.0, 2.0, 8.0));
}

#[test]
fn regression_example() {
    let src = format!(
        "{AB} f = (A - B) + 1 / 2 * (A - B) ** 2; g = (A - B) - 1 / 2 * (A - B) ** 2;"
    );
    let (f, _) = opt(&format!("{src} f"));
    assert_eq!(f.expr.to_string(), "Poly((A - B), [0.0, 1.0, 0.5])");
    let (l, trace) = opt(&format!("{src} f * g"));
    assert_eq!(l.expr.to_string(), "Poly((A - B), [0.0, 0.0, 1.0, 0.0, -0.25])");
    assert_eq!((l.cost.queries, l.cost.subnorm, l.cost.total), (8.0, 1.0, 8.0));
    for s in &trace.steps {
        assert!(s.after.total <= s.before.total * (1.0 + 1e-12), "{s:?}");
    }
}

#[test]
fn factoring_and_adjoints() {
    let (t, _) = opt(&format!("{AB} A * B + A * C"));
    assert_eq!(t.expr.to_string(), "A * (B + C)");
    let (t, _) = opt(&format!("{AB} adj(adj(C))"));
    assert_eq!(t.expr.to_string(), "C");
    let (t, _) = opt(&format!("{AB} adj(A)"));
    assert_eq!(t.expr.to_string(), "A");
    let (t, _) = opt(&format!("{AB} adj(C * B)"));
    assert_eq!(t.expr.to_string(), "B * adj(C)");
    let (t, _) = opt(&format!("{AB} C * I"));
    assert_eq!(t.expr.to_string(), "C");
}

#[test]
fn all_terms_cancel() {
    let err = apply_rules(&typed(&format!("{AB} (A + B) - (A + B)"))).unwrap_err();
    assert!(matches!(err, RewriteError::AllTermsCancel { .. }));
}

#[test]
fn single_term_unwrap() {
    assert_eq!(
        sum_fuse(&typed(&format!("{AB} 1 * A + 0 * B")).expr).unwrap().to_string(),
        "A"
    );
}

#[test]
fn identity_polynomial_unwraps() {
    let (t, _) = opt(&format!("{AB} Poly(A, [0, 1])"));
    assert_eq!(t.expr.to_string(), "A");
}

#[test]
fn idempotent_on_examples() {
    for src in [
        format!("{AB} (A - B) * (A + B) + 0.5 * A * A"),
        format!("{AB} dsum(A * C, A * C)"),
        format!("{AB} dsum(A * B, A * C)"),
        format!("{AB} kron(A, B) + kron(A, C) - 0.5 * kron(C, B)"),
    ] {
        let (once, _) = opt(&src);
        let (_, again) = apply_rules(&once).unwrap();
        assert!(again.is_empty(), "{src}: {:?}", again.steps);
    }
}
