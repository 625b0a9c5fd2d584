//! Dense simulation of compiled circuits and end-to-end verification.
//!
//! Amplitude index bit `q - 1 - i` belongs to qubit `i`, so qubit 0 is the
//! most significant bit, matching the register layout of [`Circuit`].


use crate::circuit::{
    compile_with_stats, count_queries, instantiate_oracles, oracle_gates, Circuit, CircuitError, Gate,
    GateKind,
};
use crate::cost::MethodPolicy;
use crate::frontend::OracleDecl;
use crate::ir::{denote_expr, DenoteError, TypedExpr};
use crate::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use thiserror::Error;

/// Largest circuit whose top-left block is extracted.
pub const MAX_SIM_QUBITS: usize = 14;
/// Largest circuit whose full unitary is materialized.
pub const MAX_DENSE_QUBITS: usize = 10;
/// Tolerance for circuits built from exact constructions only.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance when a phase solve contributed to the circuit.
pub const QSP_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("circuit has {qubits} qubits, limit is {limit}")]
    OversizeCircuit { qubits: usize, limit: usize },
    #[error("no matrix given for oracle `{0}`")]
    UninstantiatedOracle(String),
    #[error("oracle `{name}` matrix is {found}x{found}, expected {expected}x{expected}")]
    OracleDimension {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("verification failed: max deviation {:.3e} exceeds {:.0e}", .0.max_dev, .0.tolerance)]
    VerificationFailed(Box<VerifyReport>),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Denote(#[from] DenoteError),
}

/// How oracle gates are given meaning during simulation.
#[derive(Clone, Copy, Debug)]
pub enum Instantiation<'a> {
    /// Seeded decompositions from [`instantiate_oracles`].
    Seed(u64),
    /// Full `(ancillas + n)`-qubit unitaries by oracle name.
    Matrices(&'a HashMap<String, CMatrix>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary {
    pub dim: usize,
    pub entries: CMatrix,
}

impl DenseUnitary {
    /// `max |U U^dagger - I|` elementwise.
    pub fn unitarity_error(&self) -> f64 {
        let p = &self.entries * self.entries.adjoint();
        max_dev(&p, &CMatrix::identity(self.dim, self.dim))
    }
}

fn ser_matrix<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

/// Outcome of [`verify`]. Matrices serialize as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Top-left block of the simulated circuit.
    #[serde(serialize_with = "ser_matrix")]
    pub block: CMatrix,
    /// Denotation of the expression under the same oracle instantiation.
    #[serde(serialize_with = "ser_matrix")]
    pub target: CMatrix,
    pub alpha_pred: f64,
    /// `max |block - target / alpha_pred|`.
    pub max_dev: f64,
    pub queries_measured: f64,
    /// `(|target x| / alpha)^2` for a random unit vector `x`.
    pub success_prob_bound: f64,
    /// `|block x|^2`, the post-selection probability for the same `x`.
    pub success_prob: f64,
    pub tolerance: f64,
    pub qubits: usize,
}

pub fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn control_mask(g: &Gate, nq: usize) -> (usize, usize) {
    let mut mask = 0;
    let mut val = 0;
    for c in &g.controls {
        let bit = 1 << (nq - 1 - c.qubit);
        mask |= bit;
        if c.positive {
            val |= bit;
        }
    }
    (mask, val)
}

fn single_qubit_matrix(kind: &GateKind) -> [C64; 4] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [o * s, o * s, o * s, -o * s],
        GateKind::X => [z, o, o, z],
        GateKind::Y => [z, -i, i, z],
        GateKind::Z => [o, z, z, -o],
        GateKind::Ry(t) => {
            let (c, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
            [o * c, -o * sn, o * sn, o * c]
        }
        GateKind::Rz(t) => [C64::from_polar(1.0, -t / 2.0), z, z, C64::from_polar(1.0, t / 2.0)],
        GateKind::Phase(_) | GateKind::Oracle { .. } => unreachable!(),
    }
}

/// Applies a `2^k` unitary on `targets` (first target most significant).
fn apply_multi(state: &mut [C64], nq: usize, targets: &[usize], u: &CMatrix, mask: usize, val: usize) {
    let k = targets.len();
    let bits: Vec<usize> = targets.iter().map(|&t| 1 << (nq - 1 - t)).collect();
    let tmask: usize = bits.iter().sum();
    let offs: Vec<usize> = (0..1usize << k)
        .map(|l| {
            (0..k)
                .filter(|&j| (l >> (k - 1 - j)) & 1 == 1)
                .map(|j| bits[j])
                .sum()
        })
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); 1 << k];
    for i in 0..state.len() {
        if i & tmask != 0 || i & mask != val {
            continue;
        }
        for (l, o) in offs.iter().enumerate() {
            buf[l] = state[i | o];
        }
        for (r, o) in offs.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (l, b) in buf.iter().enumerate() {
                acc += u[(r, l)] * b;
            }
            state[i | o] = acc;
        }
    }
}

fn apply_gate(
    state: &mut [C64],
    nq: usize,
    g: &Gate,
    mats: Option<&HashMap<String, CMatrix>>,
) -> Result<(), SimError> {
    let (mask, val) = control_mask(g, nq);
    match &g.kind {
        GateKind::Phase(t) => {
            let ph = C64::from_polar(1.0, *t);
            for (i, a) in state.iter_mut().enumerate() {
                if i & mask == val {
                    *a *= ph;
                }
            }
        }
        GateKind::Oracle { name, dagger } => {
            let u = mats
                .and_then(|m| m.get(name))
                .ok_or_else(|| SimError::UninstantiatedOracle(name.clone()))?;
            let dim = 1usize << g.targets.len();
            if u.nrows() != dim || u.ncols() != dim {
                return Err(SimError::OracleDimension {
                    name: name.clone(),
                    expected: dim,
                    found: u.nrows(),
                });
            }
            if *dagger {
                apply_multi(state, nq, &g.targets, &u.adjoint(), mask, val);
            } else {
                apply_multi(state, nq, &g.targets, u, mask, val);
            }
        }
        kind => {
            let [u00, u01, u10, u11] = single_qubit_matrix(kind);
            let tb = 1 << (nq - 1 - g.targets[0]);
            for i in 0..state.len() {
                if i & tb != 0 || i & mask != val {
                    continue;
                }
                let (a, b) = (state[i], state[i | tb]);
                state[i] = u00 * a + u01 * b;
                state[i | tb] = u10 * a + u11 * b;
            }
        }
    }
    Ok(())
}

/// Circuit with oracle gates resolved for `inst`, plus explicit matrices.
fn resolve<'a>(c: &Circuit, inst: Instantiation<'a>) -> (Circuit, Option<&'a HashMap<String, CMatrix>>) {
    match inst {
        Instantiation::Seed(s) => (instantiate_oracles(c, s), None),
        Instantiation::Matrices(m) => (c.clone(), Some(m)),
    }
}

fn run(c: &Circuit, mats: Option<&HashMap<String, CMatrix>>, state: &mut [C64]) -> Result<(), SimError> {
    let nq = c.n_qubits();
    for g in &c.gates {
        apply_gate(state, nq, g, mats)?;
    }
    Ok(())
}

fn check_size(q: usize, limit: usize) -> Result<(), SimError> {
    if q > limit {
        return Err(SimError::OversizeCircuit { qubits: q, limit });
    }
    Ok(())
}

/// Applies the circuit to a state vector of length `2^n_qubits`.
pub fn apply(c: &Circuit, inst: Instantiation, state: &mut [C64]) -> Result<(), SimError> {
    check_size(c.n_qubits(), MAX_SIM_QUBITS)?;
    let (c, mats) = resolve(c, inst);
    run(&c, mats, state)
}

/// Full unitary of the circuit.
pub fn simulate(c: &Circuit, inst: Instantiation) -> Result<DenseUnitary, SimError> {
    let q = c.n_qubits();
    check_size(q, MAX_DENSE_QUBITS)?;
    let (c, mats) = resolve(c, inst);
    let dim = 1 << q;
    let mut u = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = vec![C64::new(0.0, 0.0); dim];
        s[j] = C64::new(1.0, 0.0);
        run(&c, mats, &mut s)?;
        u.set_column(j, &nalgebra::DVector::from_vec(s));
    }
    Ok(DenseUnitary { dim, entries: u })
}

/// Top-left `2^n x 2^n` block: every non-data register in `|0...0>`.
pub fn block(c: &Circuit, inst: Instantiation) -> Result<CMatrix, SimError> {
    let q = c.n_qubits();
    check_size(q, MAX_SIM_QUBITS)?;
    let (c, mats) = resolve(c, inst);
    let n = 1 << c.data_qubits();
    let mut b = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut s = vec![C64::new(0.0, 0.0); 1 << q];
        s[j] = C64::new(1.0, 0.0);
        run(&c, mats, &mut s)?;
        for i in 0..n {
            b[(i, j)] = s[i];
        }
    }
    Ok(b)
}

/// Unitary of one oracle's seeded decomposition.
pub fn oracle_unitary(o: &OracleDecl, seed: u64) -> CMatrix {
    let q = o.ancillas + o.n_qubits;
    let c = Circuit {
        registers: vec![crate::circuit::Register {
            name: "q".into(),
            size: q,
            kind: crate::circuit::RegKind::Data,
            offset: 0,
        }],
        gates: oracle_gates(o, seed),
        postselect: vec![],
        predicted: crate::cost::CostReport::new(0.0, 1.0, 0),
        alpha: 1.0,
        oracles: vec![],
    };
    simulate(&c, Instantiation::Matrices(&HashMap::new()))
        .expect("oracle fits the dense limit")
        .entries
}

/// Matrices denoted by the oracles under a seeded instantiation:
/// `subnorm` times the top-left block of each oracle unitary.
pub fn oracle_bindings(oracles: &[OracleDecl], seed: u64) -> HashMap<String, CMatrix> {
    oracles
        .iter()
        .map(|o| {
            let u = oracle_unitary(o, seed);
            let n = 1 << o.n_qubits;
            let b = u.view((0, 0), (n, n)).into_owned() * C64::new(o.subnorm, 0.0);
            (o.name.clone(), b)
        })
        .collect()
}

/// Compiles with automatic method selection and checks the circuit
/// against the denotation.
pub fn verify(e: &TypedExpr, seed: u64) -> Result<VerifyReport, SimError> {
    verify_with(e, seed, MethodPolicy::Auto)
}

pub fn verify_with(e: &TypedExpr, seed: u64, policy: MethodPolicy) -> Result<VerifyReport, SimError> {
    let (c, stats) = compile_with_stats(e, policy)?;
    let tol = if stats.solves > 0 { QSP_TOL } else { EXACT_TOL };
    let report = verify_circuit(e, &c, seed, tol)?;
    if report.max_dev > tol {
        return Err(SimError::VerificationFailed(Box::new(report)));
    }
    Ok(report)
}

/// Compares an already compiled circuit against the denotation without
/// applying the pass/fail threshold.
pub fn verify_circuit(e: &TypedExpr, c: &Circuit, seed: u64, tol: f64) -> Result<VerifyReport, SimError> {
    check_size(c.n_qubits(), MAX_SIM_QUBITS)?;
    let b = block(c, Instantiation::Seed(seed))?;
    let decls: Vec<OracleDecl> = e.expr.oracles().iter().map(|o| (**o).clone()).collect();
    let target = denote_expr(&e.expr, &oracle_bindings(&decls, seed))?;
    let alpha = c.alpha;
    let scaled = &target / C64::new(alpha, 0.0);
    let dev = max_dev(&b, &scaled);

    let n = b.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut x = nalgebra::DVector::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let norm = x.norm();
    x /= C64::new(norm, 0.0);
    let bound = ((&target * &x).norm() / alpha).powi(2);
    let prob = (&b * &x).norm_squared();
    Ok(VerifyReport {
        block: b,
        target,
        alpha_pred: alpha,
        max_dev: dev,
        queries_measured: count_queries(c),
        success_prob_bound: bound,
        success_prob: prob,
        tolerance: tol,
        qubits: c.n_qubits(),
    })
}
