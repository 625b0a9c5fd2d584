//! Expression to gate-list lowering.
//!
//! Each node becomes a fragment over local qubits laid out as
//! `[ancillas in register order][data]`. Parents place child fragments by
//! remapping qubit indices and adding controls.

use super::{Circuit, CircuitError, CompileStats, Control, Gate, GateKind, RegKind, Register};
use crate::cost::{cost_expr, linf_norm, select_poly_method, CostReport, MethodPolicy, PolyMethod};
use crate::frontend::OracleDecl;
use crate::ir::{ceil_log2, is_hermitian_judgment, Context, Expr};
use crate::poly::PolySpec;
use crate::qsp::{solve_phases, PhaseSequence};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;
use std::time::Instant;

/// Smallest factor by which QSVT targets are shrunk so the phase solver
/// never sits exactly on the unit bound. The factor grows with the rounding
/// error of rescaling large monomial coefficients.
pub const QSVT_MARGIN: f64 = 1e-8;
/// Residual accepted from the phase solver.
pub const QSVT_SOLVE_TOL: f64 = 1e-10;

/// Compile-level IR. Unlike `Expr` it has a non-query identity, explicit
/// QSVT blocks and idle padding.
#[derive(Clone, Debug)]
pub(crate) enum CNode {
    Oracle(Arc<OracleDecl>),
    Ident(usize),
    Adj(Box<CNode>),
    Sum(Vec<(f64, CNode)>),
    Prod(Vec<CNode>),
    Choice(Vec<CNode>),
    Tensor(Vec<CNode>),
    Qsvt {
        base: Box<CNode>,
        phases: PhaseSequence,
        alpha: f64,
    },
    /// Pads the inner node with idle ancillas up to `target` in total.
    Pad { inner: Box<CNode>, target: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct RegSpec {
    pub name: String,
    pub size: usize,
    pub kind: RegKind,
}

#[derive(Clone, Debug)]
pub(crate) struct Frag {
    pub regs: Vec<RegSpec>,
    pub n: usize,
    pub gates: Vec<Gate>,
    pub alpha: f64,
}

impl CNode {
    /// Subnormalization of the circuit this node lowers to. Differs from
    /// the cost model where QSVT margins compound.
    fn alpha(&self) -> f64 {
        match self {
            CNode::Oracle(o) => o.subnorm,
            CNode::Ident(_) => 1.0,
            CNode::Adj(b) => b.alpha(),
            CNode::Sum(ts) => ts.iter().map(|(l, t)| l.abs() * t.alpha()).sum(),
            CNode::Prod(fs) | CNode::Tensor(fs) => fs.iter().map(CNode::alpha).product(),
            CNode::Choice(fs) => fs[0].alpha(),
            CNode::Qsvt { alpha, .. } => *alpha,
            CNode::Pad { inner, .. } => inner.alpha(),
        }
    }
}

impl Frag {
    fn m(&self) -> usize {
        self.regs.iter().map(|r| r.size).sum()
    }
}

pub(crate) struct Builder<'a> {
    ctx: &'a Context,
    policy: MethodPolicy,
    next_id: usize,
    pub stats: CompileStats,
}

fn place(gates: &[Gate], map: impl Fn(usize) -> usize, ctl: &[Control]) -> Vec<Gate> {
    gates
        .iter()
        .map(|g| Gate {
            kind: g.kind.clone(),
            targets: g.targets.iter().map(|&q| map(q)).collect(),
            controls: g
                .controls
                .iter()
                .map(|c| Control {
                    qubit: map(c.qubit),
                    positive: c.positive,
                })
                .chain(ctl.iter().copied())
                .collect(),
        })
        .collect()
}

/// Controls matching `value` on `qubits`, most significant first.
fn value_controls(qubits: &[usize], value: usize) -> Vec<Control> {
    let w = qubits.len();
    qubits
        .iter()
        .enumerate()
        .map(|(i, &q)| Control {
            qubit: q,
            positive: (value >> (w - 1 - i)) & 1 == 1,
        })
        .collect()
}

/// Binary tree of controlled `Ry` rotations preparing
/// `sum_j sqrt(w_j / W) |j>` on `sel`.
pub(crate) fn prepare(sel: &[usize], weights: &[f64]) -> Vec<Gate> {
    let s = sel.len();
    let w = |j: usize| weights.get(j).copied().unwrap_or(0.0);
    let mut gates = Vec::new();
    for level in 0..s {
        let span = 1usize << (s - level);
        for prefix in 0..(1usize << level) {
            let lo = prefix * span;
            let half = span / 2;
            let left: f64 = (lo..lo + half).map(w).sum();
            let total: f64 = (lo..lo + span).map(w).sum();
            if total <= 0.0 || left >= total {
                continue;
            }
            let theta = 2.0 * (left / total).sqrt().min(1.0).acos();
            gates.push(
                Gate::new(GateKind::Ry(theta), vec![sel[level]])
                    .controlled(value_controls(&sel[..level], prefix)),
            );
        }
    }
    gates
}

/// Adds one to the register `r` (most significant first), gated by `ctl`.
pub(crate) fn increment(r: &[usize], ctl: &[Control]) -> Vec<Gate> {
    (0..r.len())
        .map(|i| {
            Gate::new(GateKind::X, vec![r[i]]).controlled(
                r[i + 1..]
                    .iter()
                    .map(|&q| Control { qubit: q, positive: true })
                    .chain(ctl.iter().copied()),
            )
        })
        .collect()
}

/// Adds the constant `k` modulo `2^len` to the register `r`.
pub(crate) fn add_const(r: &[usize], k: usize) -> Vec<Gate> {
    let w = r.len();
    let mut gates = Vec::new();
    for b in 0..w {
        if (k >> b) & 1 == 1 {
            gates.extend(increment(&r[..w - b], &[]));
        }
    }
    gates
}

/// Wx-convention phases to the reflection phases used by the circuit.
pub(crate) fn reflection_phases(phi: &PhaseSequence) -> Vec<f64> {
    let d = phi.degree();
    phi.angles
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if d == 0 {
                p
            } else if j == 0 {
                p - FRAC_PI_4 + d as f64 * FRAC_PI_2
            } else if j == d {
                p - FRAC_PI_4
            } else {
                p - FRAC_PI_2
            }
        })
        .collect()
}

/// QSVT gates in the layout `[a0][base ancillas (m)][data]`, where
/// `base` lives on `1..` in the base's own local layout shifted by one.
pub(crate) fn qsvt_gates(base: &[Gate], m: usize, phi: &PhaseSequence) -> Vec<Gate> {
    let shifted = place(base, |q| q + 1, &[]);
    let shifted_dg = super::inverse_gates(&shifted);
    let flag: Vec<Control> = (1..=m).map(|q| Control { qubit: q, positive: false }).collect();
    let refl = |t: f64| {
        let x = Gate::new(GateKind::X, vec![0]).controlled(flag.iter().copied());
        vec![x.clone(), Gate::new(GateKind::Rz(2.0 * t), vec![0]), x]
    };
    let ph = reflection_phases(phi);
    let d = phi.degree();
    let mut gates = vec![Gate::new(GateKind::H, vec![0])];
    for (step, j) in (0..=d).rev().enumerate() {
        if step > 0 {
            if step % 2 == 1 {
                gates.extend(shifted.iter().cloned());
            } else {
                gates.extend(shifted_dg.iter().cloned());
            }
        }
        gates.extend(refl(ph[j]));
    }
    gates.push(Gate::new(GateKind::H, vec![0]));
    gates
}

impl<'a> Builder<'a> {
    pub fn new(ctx: &'a Context, policy: MethodPolicy) -> Self {
        Builder {
            ctx,
            policy,
            next_id: 0,
            stats: CompileStats::default(),
        }
    }

    fn id(&mut self) -> usize {
        let i = self.next_id;
        self.next_id += 1;
        i
    }

    pub fn lower(&mut self, e: &Expr) -> Result<CNode, CircuitError> {
        Ok(match e {
            Expr::Base(o) => CNode::Oracle(o.clone()),
            Expr::Adj(a) => CNode::Adj(Box::new(self.lower(a)?)),
            Expr::Sum(ts) => CNode::Sum(
                ts.iter()
                    .map(|(c, t)| Ok((*c, self.lower(t)?)))
                    .collect::<Result<_, CircuitError>>()?,
            ),
            Expr::Prod(fs) => CNode::Prod(self.lower_all(fs)?),
            Expr::Choice(fs) => CNode::Choice(self.lower_all(fs)?),
            Expr::Tensor(fs) => CNode::Tensor(self.lower_all(fs)?),
            Expr::Poly(b, p) => self.lower_poly(b, p)?,
        })
    }

    fn lower_all(&mut self, fs: &[Expr]) -> Result<Vec<CNode>, CircuitError> {
        fs.iter().map(|f| self.lower(f)).collect()
    }

    fn lower_poly(&mut self, b: &Expr, p: &PolySpec) -> Result<CNode, CircuitError> {
        let base_cost = cost_expr(b, self.ctx, self.policy)?;
        let herm = is_hermitian_judgment(b, self.ctx);
        let method = match self.policy {
            MethodPolicy::Auto => select_poly_method(p, &base_cost, herm),
            MethodPolicy::Force(m) => m,
        };
        let n = b.n_qubits();
        let m = self.lower(b)?;
        let target = crate::cost::poly_cost(p, &base_cost, method)?.ancillas;
        let node = match method {
            PolyMethod::Lcu => lcu_node(p, &m, n),
            PolyMethod::Horner => horner_node(p, &m, n),
            PolyMethod::Qsvt => {
                if !herm {
                    return Err(crate::cost::CostError::NonHermitianBase.into());
                }
                self.qsvt_node(p, &m, n)?
            }
            PolyMethod::Gqet => return Err(CircuitError::UnsupportedMethod(PolyMethod::Gqet)),
        };
        Ok(CNode::Pad {
            inner: Box::new(node),
            target,
        })
    }

    fn qsvt_node(
        &mut self,
        p: &PolySpec,
        m: &CNode,
        n: usize,
    ) -> Result<CNode, CircuitError> {
        let am = m.alpha();
        let (ev, od) = p.split_parity();
        let mut parts = Vec::new();
        for part in [ev, od] {
            if part.is_zero() {
                continue;
            }
            if part.degree() == 0 {
                parts.push(CNode::Sum(vec![(part.coeffs()[0], CNode::Ident(n))]));
                continue;
            }
            let s = linf_norm(&part, am);
            let base = part.scale_arg(am);
            let l1: f64 = base.coeffs().iter().map(|c| c.abs()).sum();
            let margin = QSVT_MARGIN + f64::EPSILON * l1 / s;
            let target = base.scale((1.0 - margin) / s);
            let t0 = Instant::now();
            let phases = solve_phases(&target, QSVT_SOLVE_TOL);
            self.stats.solver_time += t0.elapsed();
            self.stats.solves += 1;
            parts.push(CNode::Qsvt {
                base: Box::new(m.clone()),
                phases: phases?,
                alpha: s / (1.0 - margin),
            });
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            CNode::Sum(parts.into_iter().map(|c| (1.0, c)).collect())
        })
    }

    pub fn fragment(&mut self, node: &CNode) -> Result<Frag, CircuitError> {
        let id = self.id();
        Ok(match node {
            CNode::Oracle(o) => {
                let regs = if o.ancillas > 0 {
                    vec![RegSpec {
                        name: format!("orc_{}_anc", o.name),
                        size: o.ancillas,
                        kind: RegKind::Ancilla,
                    }]
                } else {
                    vec![]
                };
                Frag {
                    regs,
                    n: o.n_qubits,
                    gates: vec![Gate::new(
                        GateKind::Oracle {
                            name: o.name.clone(),
                            dagger: false,
                        },
                        (0..o.ancillas + o.n_qubits).collect(),
                    )],
                    alpha: o.subnorm,
                }
            }
            CNode::Ident(n) => Frag {
                regs: vec![],
                n: *n,
                gates: vec![],
                alpha: 1.0,
            },
            CNode::Adj(a) => {
                let f = self.fragment(a)?;
                Frag {
                    gates: super::inverse_gates(&f.gates),
                    ..f
                }
            }
            CNode::Sum(ts) => {
                let ch = ts
                    .iter()
                    .map(|(_, t)| self.fragment(t))
                    .collect::<Result<Vec<_>, _>>()?;
                let s = ceil_log2(ts.len());
                let (pool, pool_regs) = widest(&ch);
                let n = ch[0].n;
                let sel: Vec<usize> = (0..s).collect();
                let weights: Vec<f64> = ts.iter().zip(&ch).map(|((l, _), f)| l.abs() * f.alpha).collect();
                let prep = prepare(&sel, &weights);
                let mut gates = prep.clone();
                for (j, ((l, _), f)) in ts.iter().zip(&ch).enumerate() {
                    let ctl = value_controls(&sel, j);
                    let mj = f.m();
                    gates.extend(place(
                        &f.gates,
                        |q| if q < mj { s + q } else { s + pool + q - mj },
                        &ctl,
                    ));
                    if *l < 0.0 {
                        gates.push(Gate::new(GateKind::Phase(PI), vec![]).controlled(ctl));
                    }
                }
                gates.extend(super::inverse_gates(&prep));
                let mut regs = Vec::new();
                if s > 0 {
                    regs.push(RegSpec {
                        name: format!("sum_sel_{id}"),
                        size: s,
                        kind: RegKind::Selector,
                    });
                }
                regs.extend(pool_regs);
                Frag {
                    regs,
                    n,
                    gates,
                    alpha: weights.iter().sum(),
                }
            }
            CNode::Prod(fs) => {
                let ch = self.fragments(fs)?;
                let c = ceil_log2(fs.len());
                let (pool, pool_regs) = widest(&ch);
                let n = ch[0].n;
                let ctr: Vec<usize> = (0..c).collect();
                let flag: Vec<Control> = (c..c + pool)
                    .map(|q| Control { qubit: q, positive: false })
                    .collect();
                let mut gates = Vec::new();
                let count = ch.len();
                for (step, f) in ch.iter().rev().enumerate() {
                    let mj = f.m();
                    gates.extend(place(&f.gates, |q| if q < mj { c + q } else { c + pool + q - mj }, &[]));
                    if step + 1 < count {
                        gates.extend(increment(&ctr, &flag));
                    }
                }
                if c > 0 {
                    let k = ((1usize << c) - (count - 1)) % (1usize << c);
                    gates.extend(add_const(&ctr, k));
                }
                let mut regs = Vec::new();
                if c > 0 {
                    regs.push(RegSpec {
                        name: format!("prod_ctr_{id}"),
                        size: c,
                        kind: RegKind::Counter,
                    });
                }
                regs.extend(pool_regs);
                Frag {
                    regs,
                    n,
                    gates,
                    alpha: ch.iter().map(|f| f.alpha).product(),
                }
            }
            CNode::Choice(bs) => {
                let ch = self.fragments(bs)?;
                let s = ceil_log2(bs.len());
                let (pool, pool_regs) = widest(&ch);
                let disc: Vec<usize> = (pool..pool + s).collect();
                let mut gates = Vec::new();
                for (j, f) in ch.iter().enumerate() {
                    let mj = f.m();
                    gates.extend(place(
                        &f.gates,
                        |q| if q < mj { q } else { pool + s + q - mj },
                        &value_controls(&disc, j),
                    ));
                }
                Frag {
                    regs: pool_regs,
                    n: ch[0].n + s,
                    gates,
                    alpha: ch[0].alpha,
                }
            }
            CNode::Tensor(fs) => {
                let ch = self.fragments(fs)?;
                let total_m: usize = ch.iter().map(Frag::m).sum();
                let mut gates = Vec::new();
                let (mut ao, mut dofs) = (0, total_m);
                for f in &ch {
                    let mj = f.m();
                    gates.extend(place(&f.gates, |q| if q < mj { ao + q } else { dofs + q - mj }, &[]));
                    ao += mj;
                    dofs += f.n;
                }
                Frag {
                    regs: ch.iter().flat_map(|f| f.regs.iter().cloned()).collect(),
                    n: ch.iter().map(|f| f.n).sum(),
                    gates,
                    alpha: ch.iter().map(|f| f.alpha).product(),
                }
            }
            CNode::Qsvt { base, phases, alpha } => {
                let b = self.fragment(base)?;
                let mut regs = vec![RegSpec {
                    name: format!("qsvt_anc_{id}"),
                    size: 1,
                    kind: RegKind::Qsvt,
                }];
                let gates = qsvt_gates(&b.gates, b.m(), phases);
                regs.extend(b.regs);
                Frag {
                    regs,
                    n: b.n,
                    gates,
                    alpha: *alpha,
                }
            }
            CNode::Pad { inner, target } => {
                let f = self.fragment(inner)?;
                let m = f.m();
                if m > *target {
                    return Err(CircuitError::InternalArity(format!(
                        "polynomial needs {m} ancillas, budget {target}"
                    )));
                }
                let w = target - m;
                if w == 0 {
                    f
                } else {
                    let mut regs = vec![RegSpec {
                        name: format!("pad_{id}"),
                        size: w,
                        kind: RegKind::Ancilla,
                    }];
                    regs.extend(f.regs);
                    Frag {
                        regs,
                        n: f.n,
                        gates: place(&f.gates, |q| q + w, &[]),
                        alpha: f.alpha,
                    }
                }
            }
        })
    }

    fn fragments(&mut self, ns: &[CNode]) -> Result<Vec<Frag>, CircuitError> {
        ns.iter().map(|c| self.fragment(c)).collect()
    }
}

/// Pool width and the register layout of the first widest child.
fn widest(ch: &[Frag]) -> (usize, Vec<RegSpec>) {
    let w = ch.iter().map(Frag::m).max().unwrap_or(0);
    let regs = ch
        .iter()
        .find(|f| f.m() == w)
        .map(|f| f.regs.clone())
        .unwrap_or_default();
    (w, regs)
}

/// Sum of monomials; the constant term is a non-query identity branch.
fn lcu_node(p: &PolySpec, m: &CNode, n: usize) -> CNode {
    let terms = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(j, &a)| {
            let t = match j {
                0 => CNode::Ident(n),
                1 => m.clone(),
                _ => CNode::Prod(vec![m.clone(); j]),
            };
            (a, t)
        })
        .collect();
    CNode::Sum(terms)
}

/// Nested multiply-add: `((a_d M + a_{d-1}) M + ...) M + a_0`.
fn horner_node(p: &PolySpec, m: &CNode, n: usize) -> CNode {
    let a = p.coeffs();
    let d = p.degree();
    if d == 0 {
        return CNode::Sum(vec![(a[0], CNode::Ident(n))]);
    }
    let mut acc = vec![(a[d], m.clone())];
    if a[d - 1] != 0.0 {
        acc.push((a[d - 1], CNode::Ident(n)));
    }
    let mut b = CNode::Sum(acc);
    for j in (0..d - 1).rev() {
        b = CNode::Prod(vec![b, m.clone()]);
        if a[j] != 0.0 {
            b = CNode::Sum(vec![(1.0, b), (a[j], CNode::Ident(n))]);
        }
    }
    b
}

/// Lays the fragment out as a circuit with a trailing data register.
pub(crate) fn finish(f: Frag, predicted: CostReport, oracles: Vec<OracleDecl>) -> Circuit {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut registers = Vec::new();
    let mut offset = 0;
    for r in f.regs.iter().filter(|r| r.size > 0) {
        let k = seen.entry(r.name.clone()).or_insert(0);
        let name = if *k == 0 { r.name.clone() } else { format!("{}_{}", r.name, k) };
        *k += 1;
        registers.push(Register {
            name,
            size: r.size,
            kind: r.kind,
            offset,
        });
        offset += r.size;
    }
    let postselect = registers.iter().map(|r| r.name.clone()).collect();
    registers.push(Register {
        name: "data".into(),
        size: f.n,
        kind: RegKind::Data,
        offset,
    });
    Circuit {
        registers,
        gates: f.gates,
        postselect,
        predicted,
        alpha: f.alpha,
        oracles,
    }
}

/// Splits a circuit back into a fragment.
fn as_frag(c: &Circuit) -> Frag {
    Frag {
        regs: c
            .registers
            .iter()
            .filter(|r| r.kind != RegKind::Data)
            .map(|r| RegSpec {
                name: r.name.clone(),
                size: r.size,
                kind: r.kind,
            })
            .collect(),
        n: c.data_qubits(),
        gates: c.gates.clone(),
        alpha: c.alpha,
    }
}

pub(crate) fn qsvt_circuit(base: &Circuit, phi: &PhaseSequence) -> Circuit {
    let b = as_frag(base);
    let m = b.m();
    let mut regs = vec![RegSpec {
        name: "qsvt_anc".into(),
        size: 1,
        kind: RegKind::Qsvt,
    }];
    let gates = qsvt_gates(&b.gates, m, phi);
    regs.extend(b.regs);
    let d = phi.degree() as f64;
    let predicted = CostReport::new(d * base.predicted.queries, 1.0, 1 + m);
    finish(
        Frag {
            regs,
            n: b.n,
            gates,
            alpha: 1.0,
        },
        predicted,
        base.oracles.clone(),
    )
}
