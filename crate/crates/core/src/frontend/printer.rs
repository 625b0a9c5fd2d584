use super::{Ast, Program};
use std::fmt::Write;

/// Canonical program text. `parse(&print(p))` reproduces `p`.
pub fn print(p: &Program) -> String {
    let mut s = String::new();
    for o in &p.oracles {
        writeln!(
            s,
            "oracle {} : qubits={}, ancillas={}, subnorm={:?}, hermitian={};",
            o.name, o.n_qubits, o.ancillas, o.subnorm, o.hermitian
        )
        .unwrap();
    }
    for c in &p.commutes {
        writeln!(s, "commute {} {};", c.left, c.right).unwrap();
    }
    for (name, e) in &p.bindings {
        writeln!(s, "{name} = {};", print_ast(e)).unwrap();
    }
    writeln!(s, "{}", print_ast(&p.main)).unwrap();
    s
}

/// Canonical text of one expression.
///
/// ```
/// use blenc::frontend::{print_ast, Ast};
///
/// let xx = Ast::Tensor(vec![Ast::Var("X".into()), Ast::Var("X".into())]);
/// let yy = Ast::Tensor(vec![Ast::Var("Y".into()), Ast::Var("Y".into())]);
/// let h = Ast::Sum(vec![(1.3, xx), (0.7, yy)]);
/// assert_eq!(print_ast(&h), "1.3 * kron(X, X) + 0.7 * kron(Y, Y)");
/// ```
pub fn print_ast(e: &Ast) -> String {
    let mut s = String::new();
    expr(e, &mut s);
    s
}

fn expr(e: &Ast, s: &mut String) {
    match e {
        Ast::Var(n) => s.push_str(n),
        Ast::Sum(terms) => sum(terms, s),
        Ast::Prod(fs) => {
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    s.push_str(" * ");
                }
                grouped(f, s);
            }
        }
        Ast::Tensor(fs) => call("kron", fs, s),
        Ast::Choice(fs) => call("dsum", fs, s),
        Ast::Adj(a) => {
            s.push_str("adj(");
            expr(a, s);
            s.push(')');
        }
        Ast::Poly(base, cs) => {
            s.push_str("Poly(");
            grouped(base, s);
            s.push_str(", [");
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write!(s, "{c:?}").unwrap();
            }
            s.push_str("])");
        }
    }
}

fn sum(terms: &[(f64, Ast)], s: &mut String) {
    if let [(c, t)] = terms {
        if *c == 1.0 {
            s.push_str("1.0 * ");
            term_body(t, s);
            return;
        }
    }
    for (i, (c, t)) in terms.iter().enumerate() {
        let neg = c.is_sign_negative();
        match (i, neg) {
            (0, false) => {}
            (0, true) => s.push('-'),
            (_, false) => s.push_str(" + "),
            (_, true) => s.push_str(" - "),
        }
        let mag = c.abs();
        if mag != 1.0 {
            write!(s, "{mag:?} * ").unwrap();
        }
        term_body(t, s);
    }
}

/// A summand: products print bare, nested sums need parentheses.
fn term_body(t: &Ast, s: &mut String) {
    match t {
        Ast::Sum(_) => paren(t, s),
        _ => expr(t, s),
    }
}

/// An operand of `*` or the base of `Poly`.
fn grouped(t: &Ast, s: &mut String) {
    match t {
        Ast::Sum(_) | Ast::Prod(_) => paren(t, s),
        _ => expr(t, s),
    }
}

fn paren(t: &Ast, s: &mut String) {
    s.push('(');
    expr(t, s);
    s.push(')');
}

fn call(name: &str, args: &[Ast], s: &mut String) {
    s.push_str(name);
    s.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        expr(a, s);
    }
    s.push(')');
}
