//! OpenQASM 2.0 output over `qelib1.inc`.

use super::{Circuit, CircuitError, Gate, GateKind};
use std::collections::BTreeSet;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QasmOptions {
    /// Emit uninstantiated oracle gates as `opaque` declarations instead of
    /// failing.
    pub opaque: bool,
}

/// Real literal that always carries a decimal point.
fn real(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('.') {
        s
    } else if let Some(p) = s.find('e') {
        format!("{}.0{}", &s[..p], &s[p..])
    } else {
        format!("{s}.0")
    }
}

fn opaque_name(name: &str, dagger: bool, k: usize) -> String {
    let mut s = format!("orc_{name}");
    if dagger {
        s.push_str("_dg");
    }
    if k > 0 {
        write!(s, "_c{k}").unwrap();
    }
    s
}

struct Emitter<'a> {
    names: Vec<String>,
    out: String,
    opaque: &'a mut BTreeSet<(String, usize)>,
    anc_needed: usize,
}

impl Emitter<'_> {
    fn q(&self, i: usize) -> &str {
        &self.names[i]
    }

    fn line(&mut self, s: String) {
        self.out.push_str(&s);
        self.out.push_str(";\n");
    }

    /// AND of `cs` into `mcx_anc[0..cs.len()-1]`; returns the uncompute list.
    fn and_chain(&mut self, cs: &[usize]) -> (String, Vec<String>) {
        let k = cs.len();
        self.anc_needed = self.anc_needed.max(k - 1);
        let mut lines = Vec::new();
        lines.push(format!("ccx {},{},mcx_anc[0]", self.q(cs[0]), self.q(cs[1])));
        for (i, &c) in cs.iter().enumerate().skip(2) {
            lines.push(format!("ccx mcx_anc[{}],{},mcx_anc[{}]", i - 2, self.q(c), i - 1));
        }
        for l in &lines {
            self.line(l.clone());
        }
        lines.reverse();
        (format!("mcx_anc[{}]", k - 2), lines)
    }

    fn gate(&mut self, g: &Gate, allow_opaque: bool) -> Result<(), CircuitError> {
        let neg: Vec<usize> = g.controls.iter().filter(|c| !c.positive).map(|c| c.qubit).collect();
        let cs: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
        for &q in &neg {
            let l = format!("x {}", self.q(q));
            self.line(l);
        }
        let t = g.targets.iter().map(|&q| self.q(q).to_string()).collect::<Vec<_>>();
        match &g.kind {
            GateKind::Oracle { name, dagger } => {
                if !allow_opaque {
                    return Err(CircuitError::UnboundOracle(name.clone()));
                }
                let gname = opaque_name(name, *dagger, cs.len());
                self.opaque.insert((gname.clone(), cs.len() + t.len()));
                let args: Vec<String> = cs.iter().map(|&q| self.q(q).to_string()).chain(t).collect();
                self.line(format!("{gname} {}", args.join(",")));
            }
            GateKind::Phase(th) => match cs.len() {
                0 => {
                    writeln!(self.out, "// global phase {}", real(*th)).unwrap();
                }
                1 => {
                    let l = format!("u1({}) {}", real(*th), self.q(cs[0]));
                    self.line(l);
                }
                _ => {
                    let (a, undo) = self.and_chain(&cs);
                    self.line(format!("u1({}) {a}", real(*th)));
                    for l in undo {
                        self.line(l);
                    }
                }
            },
            kind => {
                let (base, ctl1) = match kind {
                    GateKind::H => ("h".to_string(), "ch".to_string()),
                    GateKind::X => ("x".to_string(), "cx".to_string()),
                    GateKind::Y => ("y".to_string(), "cy".to_string()),
                    GateKind::Z => ("z".to_string(), "cz".to_string()),
                    GateKind::Ry(th) => (format!("ry({})", real(*th)), format!("cu3({},0,0)", real(*th))),
                    GateKind::Rz(th) => (format!("rz({})", real(*th)), format!("crz({})", real(*th))),
                    _ => unreachable!(),
                };
                let tq = &t[0];
                match cs.len() {
                    0 => self.line(format!("{base} {tq}")),
                    1 => {
                        let l = format!("{ctl1} {},{tq}", self.q(cs[0]));
                        self.line(l);
                    }
                    2 if matches!(kind, GateKind::X) => {
                        let l = format!("ccx {},{},{tq}", self.q(cs[0]), self.q(cs[1]));
                        self.line(l);
                    }
                    _ => {
                        let (a, undo) = self.and_chain(&cs);
                        self.line(format!("{ctl1} {a},{tq}"));
                        for l in undo {
                            self.line(l);
                        }
                    }
                }
            }
        }
        for &q in &neg {
            let l = format!("x {}", self.q(q));
            self.line(l);
        }
        Ok(())
    }
}

/// Renders the circuit. Multi-controlled gates use a Toffoli V-chain on a
/// clean `mcx_anc` register; anti-controls are conjugated by `x`.
/// Post-selected registers are listed in trailing comments.
pub fn emit_qasm(c: &Circuit, opts: QasmOptions) -> Result<String, CircuitError> {
    let mut names = Vec::new();
    for r in &c.registers {
        for i in 0..r.size {
            names.push(format!("{}[{i}]", r.name));
        }
    }
    let mut opaque = BTreeSet::new();
    let mut em = Emitter {
        names,
        out: String::new(),
        opaque: &mut opaque,
        anc_needed: 0,
    };
    for g in &c.gates {
        em.gate(g, opts.opaque)?;
    }
    let body = em.out;
    let anc = em.anc_needed;
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for (name, arity) in &opaque {
        let args: Vec<String> = (0..*arity).map(|i| format!("q{i}")).collect();
        writeln!(s, "opaque {name} {};", args.join(",")).unwrap();
    }
    for r in &c.registers {
        if r.size > 0 {
            writeln!(s, "qreg {}[{}];", r.name, r.size).unwrap();
        }
    }
    if anc > 0 {
        writeln!(s, "qreg mcx_anc[{anc}];").unwrap();
    }
    s.push_str(&body);
    for r in &c.postselect {
        writeln!(s, "// postselect {r} = 0").unwrap();
    }
    Ok(s)
}
