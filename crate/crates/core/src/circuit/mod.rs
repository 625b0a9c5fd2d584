//! Gate-level circuits: compilation of expressions, the QSVT template,
//! oracle instantiation and OpenQASM 2.0 emission.
//!
//! Qubit 0 is the most significant bit of a basis index. All ancilla
//! registers come first and the data register last, so the block with every
//! ancilla in `|0>` is the top-left block of the circuit unitary.

mod build;
mod instantiate;
mod qasm;

use crate::cost::{cost_with, CostError, CostReport, MethodPolicy, PolyMethod};
use crate::frontend::OracleDecl;
use crate::ir::TypedExpr;
use crate::qsp::{PhaseSequence, QspError};
use serde::Serialize;
use std::time::Duration;
use thiserror::Error;

pub use instantiate::{instantiate_oracles, oracle_gates};
pub use qasm::{emit_qasm, QasmOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegKind {
    Data,
    Ancilla,
    Selector,
    Counter,
    Qsvt,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Register {
    pub name: String,
    pub size: usize,
    pub kind: RegKind,
    /// Index of the register's first qubit.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Ry(f64),
    /// `diag(e^{-i t/2}, e^{i t/2})`.
    Rz(f64),
    /// Multiplies the amplitude by `e^{i t}` when every control holds. It
    /// has no targets.
    Phase(f64),
    Oracle { name: String, dagger: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Control {
    pub qubit: usize,
    /// `false` for an anti-control (fires on `|0>`).
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Gate {
            kind,
            targets,
            controls: Vec::new(),
        }
    }

    pub fn controlled(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Oracle { name, dagger } => GateKind::Oracle {
                name: name.clone(),
                dagger: !dagger,
            },
            k => k.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.kind, GateKind::Oracle { .. })
    }

    /// Every qubit the gate touches.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit))
    }
}

/// Inverse of a gate sequence.
pub fn inverse_gates(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
    /// Names of the registers post-selected on `|0...0>`: every non-data
    /// register.
    pub postselect: Vec<String>,
    /// Cost-model prediction for the compiled expression.
    pub predicted: CostReport,
    /// Subnormalization actually realized. Equals `predicted.subnorm`
    /// except for QSVT polynomials, whose rescaling margin is folded in.
    pub alpha: f64,
    /// Declarations of the oracles referenced by `Oracle` gates.
    pub oracles: Vec<OracleDecl>,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.registers.iter().map(|r| r.size).sum()
    }

    pub fn data_qubits(&self) -> usize {
        self.registers
            .iter()
            .filter(|r| r.kind == RegKind::Data)
            .map(|r| r.size)
            .sum()
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.n_qubits() - self.data_qubits()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    /// Ordered gate list as JSON records `{kind, qubits, controls, angle}`.
    pub fn gates_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Rec<'a> {
            kind: String,
            qubits: &'a [usize],
            controls: &'a [Control],
            angle: Option<f64>,
        }
        let recs: Vec<Rec> = self
            .gates
            .iter()
            .map(|g| {
                let (kind, angle) = match &g.kind {
                    GateKind::H => ("h".to_string(), None),
                    GateKind::X => ("x".to_string(), None),
                    GateKind::Y => ("y".to_string(), None),
                    GateKind::Z => ("z".to_string(), None),
                    GateKind::Ry(t) => ("ry".to_string(), Some(*t)),
                    GateKind::Rz(t) => ("rz".to_string(), Some(*t)),
                    GateKind::Phase(t) => ("phase".to_string(), Some(*t)),
                    GateKind::Oracle { name, dagger } => {
                        (format!("oracle:{name}{}", if *dagger { "^dg" } else { "" }), None)
                    }
                };
                Rec {
                    kind,
                    qubits: &g.targets,
                    controls: &g.controls,
                    angle,
                }
            })
            .collect();
        serde_json::json!({
            "registers": self.registers,
            "postselect": self.postselect,
            "gates": recs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CircuitError {
    #[error(transparent)]
    Qsp(#[from] QspError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("{0} polynomials are costed only and cannot be compiled")]
    UnsupportedMethod(PolyMethod),
    #[error("oracle `{0}` is not instantiated; instantiate it or emit opaque gates")]
    UnboundOracle(String),
    #[error("internal arity mismatch: {0}")]
    InternalArity(String),
}

/// Number of oracle gates, controlled or not, daggered or not.
pub fn count_queries(c: &Circuit) -> f64 {
    c.gates.iter().filter(|g| g.is_oracle()).count() as f64
}

/// Time spent in the phase solver during one compilation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompileStats {
    pub solver_time: Duration,
    pub solves: usize,
}

/// Compiles with the cheapest admissible method for every polynomial.
pub fn compile(e: &TypedExpr) -> Result<Circuit, CircuitError> {
    compile_with(e, MethodPolicy::Auto)
}

pub fn compile_with(e: &TypedExpr, policy: MethodPolicy) -> Result<Circuit, CircuitError> {
    Ok(compile_with_stats(e, policy)?.0)
}

pub fn compile_with_stats(
    e: &TypedExpr,
    policy: MethodPolicy,
) -> Result<(Circuit, CompileStats), CircuitError> {
    let predicted = cost_with(e, policy)?;
    let mut b = build::Builder::new(&e.ctx, policy);
    let node = b.lower(&e.expr)?;
    let frag = b.fragment(&node)?;
    let circuit = build::finish(frag, predicted, e.expr.oracles().iter().map(|o| (**o).clone()).collect());
    if circuit.ancilla_qubits() != predicted.ancillas {
        return Err(CircuitError::InternalArity(format!(
            "{} ancillas compiled, {} predicted",
            circuit.ancilla_qubits(),
            predicted.ancillas
        )));
    }
    Ok((circuit, b.stats))
}

/// QSVT circuit applying the polynomial encoded by `phi` to the block
/// encoded by `base`. The base block must be Hermitian.
pub fn build_qsvt(base: &Circuit, phi: &PhaseSequence) -> Circuit {
    build::qsvt_circuit(base, phi)
}
