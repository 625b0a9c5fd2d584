//! Seeded random well-typed programs and polynomials for property tests.

use crate::frontend::{Ast, OracleDecl, Program};
use crate::ir::{typecheck, TypedExpr};
use crate::poly::{Parity, PolySpec};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_data_qubits: usize,
    /// Maximum tree depth, counting the root as depth 1.
    pub max_depth: usize,
    /// Bound on data plus predicted ancilla qubits. The optimized form may
    /// use two more.
    pub max_qubits: usize,
    pub allow_poly: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_data_qubits: 3,
            max_depth: 5,
            max_qubits: 12,
            allow_poly: false,
        }
    }
}

fn decl(name: &str, n: usize, m: usize, a: f64, h: bool) -> OracleDecl {
    OracleDecl {
        name: name.into(),
        n_qubits: n,
        ancillas: m,
        subnorm: a,
        hermitian: h,
    }
}

/// The fixed oracle vocabulary of generated programs.
pub fn vocabulary() -> Vec<OracleDecl> {
    vec![
        decl("A", 1, 1, 1.0, true),
        decl("B", 1, 0, 0.5, false),
        decl("C", 2, 1, 1.5, true),
        decl("D", 2, 0, 1.0, false),
        decl("E", 3, 1, 1.0, true),
    ]
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    cfg: GenConfig,
    shell: Program,
}

#[derive(Clone, Copy)]
enum Op {
    Adj,
    Sum,
    Prod,
    Choice,
    Tensor,
    Poly,
}

impl Gen<'_> {
    fn coeff(&mut self) -> f64 {
        loop {
            let c = (self.rng.random_range(-20..=20) as f64) / 10.0;
            if c != 0.0 {
                return c;
            }
        }
    }

    fn typed(&self, a: &Ast) -> Option<TypedExpr> {
        let p = Program {
            main: a.clone(),
            ..self.shell.clone()
        };
        typecheck(&p).ok()
    }

    fn leaf(&mut self, n: usize) -> Ast {
        let names: Vec<&str> = match n {
            1 => vec!["X", "Y", "Z", "H", "I", "A", "B"],
            2 => vec!["C", "D"],
            _ => vec!["E"],
        };
        Ast::Var(names.choose(self.rng).unwrap().to_string())
    }

    fn expr(&mut self, n: usize, depth: usize) -> Ast {
        if depth <= 1 || self.rng.random_bool(0.25) {
            return self.leaf(n);
        }
        let mut ops = vec![Op::Adj, Op::Sum, Op::Prod];
        if n >= 2 {
            ops.push(Op::Tensor);
            // The rescaled second branch needs one extra level.
            if depth >= 3 {
                ops.push(Op::Choice);
            }
        }
        if self.cfg.allow_poly {
            ops.push(Op::Poly);
        }
        let d = depth - 1;
        match *ops.choose(self.rng).unwrap() {
            Op::Adj => Ast::Adj(Box::new(self.expr(n, d))),
            Op::Sum => {
                let k = self.rng.random_range(1..=3);
                Ast::Sum((0..k).map(|_| (self.coeff(), self.expr(n, d))).collect())
            }
            Op::Prod => {
                let k = self.rng.random_range(2..=3);
                Ast::Prod((0..k).map(|_| self.expr(n, d)).collect())
            }
            Op::Choice => {
                let b0 = self.expr(n - 1, d);
                let b1 = self.expr(n - 1, d - 1);
                match (self.typed(&b0), self.typed(&b1)) {
                    (Some(t0), Some(t1)) => {
                        let r = t0.subnorm() / t1.subnorm();
                        Ast::Choice(vec![b0, Ast::Sum(vec![(r, b1)])])
                    }
                    _ => self.leaf(n),
                }
            }
            Op::Tensor => {
                let left = self.rng.random_range(1..n);
                Ast::Tensor(vec![self.expr(left, d), self.expr(n - left, d)])
            }
            Op::Poly => {
                let base = self.expr(n, d);
                let base = match self.typed(&base) {
                    Some(t) if t.hermitian => base,
                    _ => Ast::Var(["A", "C", "E"][n.min(3) - 1].into()),
                };
                let deg = self.rng.random_range(1..=4);
                let mut cs: Vec<f64> = (0..=deg).map(|_| self.coeff()).collect();
                if self.rng.random_bool(0.5) {
                    cs[0] = 0.0;
                }
                Ast::Poly(Box::new(base), cs)
            }
        }
    }
}

/// Draws one program whose main expression type-checks and fits the qubit
/// budget.
pub fn random_program(rng: &mut ChaCha8Rng, cfg: GenConfig) -> (Program, TypedExpr) {
    let shell = Program {
        oracles: vocabulary(),
        // Seeded oracle instantiations do not commute, so no commutation
        // is declared.
        commutes: vec![],
        bindings: vec![],
        main: Ast::Var("X".into()),
    };
    let mut g = Gen { rng, cfg, shell };
    loop {
        let n = g.rng.random_range(1..=cfg.max_data_qubits.clamp(1, 3));
        let main = g.expr(n, cfg.max_depth);
        let Some(t) = g.typed(&main) else { continue };
        if t.qtype.n_qubits + t.ancillas() > cfg.max_qubits {
            continue;
        }
        // Fusion can trade queries for ancillas; keep the optimized form
        // within the simulator's reach too.
        match crate::rewrite::apply_rules(&t) {
            Ok((o, _)) if o.qtype.n_qubits + o.ancillas() <= cfg.max_qubits + 2 => {}
            _ => continue,
        }
        let p = Program { main, ..g.shell.clone() };
        return (p, t);
    }
}

/// `count` programs from a fixed seed.
pub fn corpus(seed: u64, count: usize, cfg: GenConfig) -> Vec<(Program, TypedExpr)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_program(&mut rng, cfg)).collect()
}

/// Random polynomial of the given parity and exact degree with
/// coefficients in `[-1, 1]`.
pub fn random_parity_poly(rng: &mut impl Rng, degree: usize, parity: Parity) -> PolySpec {
    let keep = |j: usize| match parity {
        Parity::Even => j.is_multiple_of(2),
        Parity::Odd => j % 2 == 1,
        Parity::Mixed => true,
    };
    let mut c: Vec<f64> = (0..=degree)
        .map(|j| if keep(j) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    if c[degree] == 0.0 {
        c[degree] = 0.5;
    }
    PolySpec::new(c)
}
