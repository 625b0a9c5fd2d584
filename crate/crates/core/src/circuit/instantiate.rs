//! Concrete gate decompositions for oracle gates.

use super::{inverse_gates, Circuit, Control, Gate, GateKind};
use crate::frontend::OracleDecl;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::TAU;

const LAYERS: usize = 2;

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn ladder(q: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut gates = Vec::new();
    let rot = |gates: &mut Vec<Gate>, rng: &mut ChaCha8Rng| {
        for i in 0..q {
            gates.push(Gate::new(GateKind::Ry(rng.random_range(0.0..TAU)), vec![i]));
            gates.push(Gate::new(GateKind::Rz(rng.random_range(0.0..TAU)), vec![i]));
        }
    };
    for _ in 0..LAYERS {
        rot(&mut gates, rng);
        for i in 0..q.saturating_sub(1) {
            gates.push(Gate::new(GateKind::X, vec![i + 1]).controlled([Control {
                qubit: i,
                positive: true,
            }]));
        }
    }
    rot(&mut gates, rng);
    gates
}

/// Gates realizing the oracle on local qubits `0..ancillas+n_qubits`
/// (ancillas first). Builtins are exact; user oracles are a pseudorandom
/// ladder determined by `(name, seed)`. Hermitian oracles are conjugated
/// Pauli-Z layers and therefore Hermitian as unitaries.
pub fn oracle_gates(o: &OracleDecl, seed: u64) -> Vec<Gate> {
    if o.is_builtin() {
        let kind = match o.name.as_str() {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            _ => return vec![],
        };
        return vec![Gate::new(kind, vec![0])];
    }
    let q = o.ancillas + o.n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&o.name) ^ seed);
    let v = ladder(q, &mut rng);
    if !o.hermitian {
        return v;
    }
    let mut zs: Vec<usize> = (0..q).filter(|_| rng.random_bool(0.5)).collect();
    if zs.is_empty() {
        zs.push(rng.random_range(0..q));
    }
    let mut gates = v.clone();
    gates.extend(zs.into_iter().map(|i| Gate::new(GateKind::Z, vec![i])));
    gates.extend(inverse_gates(&v));
    gates
}

/// Replaces every oracle gate with its decomposition. Controls on the
/// oracle gate are carried onto each decomposed gate.
pub fn instantiate_oracles(c: &Circuit, seed: u64) -> Circuit {
    let mut cache: HashMap<(String, bool), Vec<Gate>> = HashMap::new();
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let GateKind::Oracle { name, dagger } = &g.kind else {
            gates.push(g.clone());
            continue;
        };
        let body = cache.entry((name.clone(), *dagger)).or_insert_with(|| {
            let decl = c
                .oracles
                .iter()
                .find(|o| &o.name == name)
                .cloned()
                .or_else(|| OracleDecl::builtin(name))
                .expect("oracle gate without declaration");
            let fw = oracle_gates(&decl, seed);
            if *dagger {
                inverse_gates(&fw)
            } else {
                fw
            }
        });
        for b in body.iter() {
            gates.push(Gate {
                kind: b.kind.clone(),
                targets: b.targets.iter().map(|&q| g.targets[q]).collect(),
                controls: b
                    .controls
                    .iter()
                    .map(|k| Control {
                        qubit: g.targets[k.qubit],
                        positive: k.positive,
                    })
                    .chain(g.controls.iter().copied())
                    .collect(),
            });
        }
    }
    Circuit {
        gates,
        ..c.clone()
    }
}
