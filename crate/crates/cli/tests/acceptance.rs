//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

use blenc::circuit::{compile, compile_with, count_queries, instantiate_oracles};
use blenc::cost::{cost, cost_with, l1_norm, linf_norm, poly_cost, MethodPolicy, PolyMethod};
use blenc::gen::{corpus, random_parity_poly, vocabulary, GenConfig};
use blenc::ir::{denote, Expr, TypedExpr};
use blenc::poly::{Parity, PolySpec};
use blenc::qsp::{evaluate_phases, solve_phases, PhaseSequence};
use blenc::rewrite::apply_rules;
use blenc::sim::{self, block, max_dev, oracle_bindings, Instantiation, SimError};
use blenc_cli::fixtures::{self, BenchFixture};
use blenc_cli::{CompileArgs, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;
use std::time::{Duration, Instant};

const CORPUS_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 500;

fn report(n: u32, what: &str, r: Result<String, String>) {
    // Written straight to the stream so the line survives output capture.
    let line = match &r {
        Ok(note) => format!("criterion {n:>2} PASS  {what}: {note}\n"),
        Err(e) => format!("criterion {n:>2} FAIL  {what}: {e}\n"),
    };
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    if let Err(e) = r {
        panic!("criterion {n}: {e}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("took {e:?}, limit {limit:?}"))
}

fn typed(src: &str) -> TypedExpr {
    blenc_cli::typed(src).unwrap()
}

fn opt(t: &TypedExpr) -> TypedExpr {
    apply_rules(t).unwrap().0
}

fn fixture(name: &str) -> BenchFixture {
    fixtures::by_name(name).unwrap()
}

fn test_corpus() -> Vec<TypedExpr> {
    let cfg = GenConfig {
        allow_poly: true,
        ..GenConfig::default()
    };
    corpus(CORPUS_SEED, CORPUS_SIZE, cfg).into_iter().map(|(_, t)| t).collect()
}

fn triple(src: &str, optimize: bool) -> (f64, f64, f64) {
    let c = blenc_cli::cost_report(src, optimize, None).unwrap();
    (c.queries, c.subnorm, c.total)
}

#[test]
fn c01_worked_example_costs() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let sim = fixture("simulation-example").program;
        let reg = fixture("regression-example").program;
        let got = [
            triple(&sim, false),
            triple(&sim, true),
            triple(&reg, false),
            triple(&reg, true),
        ];
        let want = [
            (8.0, 2.6, 20.8),
            (4.0, 2.0, 8.0),
            (12.0, 16.0, 192.0),
            (8.0, 1.0, 8.0),
        ];
        for (g, w) in got.iter().zip(&want) {
            let printed = |x: (f64, f64, f64)| format!("({:.1}, {:.1}, {:.1})", x.0, x.1, x.2);
            ensure(printed(*g) == printed(*w), || format!("got {g:?}, expected {w:?}"))?;
        }
        let shown = blenc_cli::cost(&sim, false, None, false).unwrap();
        ensure(shown.starts_with("(8.0, 2.6, 20.8)"), || shown.clone())?;
        within(t, Duration::from_secs(1))?;
        Ok("20.8 -> 8.0 and 192.0 -> 8.0".into())
    };
    report(1, "worked-example cost reproduction", run());
}

#[test]
fn c02_optimized_form() {
    let out = blenc_cli::opt(&fixture("regression-example").program, false).unwrap();
    let want = "Poly((A - B), [0.0, 0.0, 1.0, 0.0, -0.25])";
    let r = ensure(out.trim_end() == want, || format!("printed {out:?}")).map(|_| want.to_string());
    report(2, "optimized form reproduction", r);
}

fn counts_match(t: &TypedExpr) -> Result<(), String> {
    let predicted = cost(t);
    let c = compile(t).map_err(|e| format!("{}: {e}", t.expr))?;
    ensure(count_queries(&c) == predicted.queries, || {
        format!("{}: {} queries compiled, {} predicted", t.expr, count_queries(&c), predicted.queries)
    })?;
    ensure(c.ancilla_qubits() == predicted.ancillas, || {
        format!("{}: {} ancillas compiled, {} predicted", t.expr, c.ancilla_qubits(), predicted.ancillas)
    })
}

#[test]
fn c03_query_count_agreement() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let mut progs: Vec<TypedExpr> = ["simulation-example", "regression-example"]
            .iter()
            .map(|n| typed(&fixture(n).program))
            .collect();
        progs.extend(test_corpus());
        let optimized: Vec<TypedExpr> = progs.par_iter().map(opt).collect();
        progs.extend(optimized);
        progs.par_iter().map(counts_match).collect::<Result<Vec<_>, _>>()?;
        within(t, Duration::from_secs(60))?;
        Ok(format!("{} programs (originals and optimized forms)", progs.len()))
    };
    report(3, "query-count and ancilla agreement", run());
}

#[test]
fn c04_semantic_verification() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let mut progs: Vec<TypedExpr> = ["simulation-example", "regression-example"]
            .iter()
            .map(|n| typed(&fixture(n).program))
            .collect();
        progs.extend(test_corpus());
        let jobs: Vec<(u64, TypedExpr)> = progs
            .into_iter()
            .enumerate()
            .flat_map(|(i, p)| {
                let o = opt(&p);
                [(i as u64, p), (i as u64, o)]
            })
            .collect();
        let results: Vec<Result<f64, String>> = jobs
            .par_iter()
            .map(|(seed, e)| match sim::verify(e, *seed) {
                Ok(r) => Ok(r.max_dev),
                Err(SimError::VerificationFailed(r)) => Err(format!(
                    "{}: deviation {:e} exceeds {:e}",
                    e.expr, r.max_dev, r.tolerance
                )),
                Err(err) => Err(format!("{}: {err}", e.expr)),
            })
            .collect();
        let worst = results.iter().filter_map(|r| r.as_ref().ok()).fold(0.0f64, |a, b| a.max(*b));
        let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
        ensure(failures.is_empty(), || {
            format!("{} of {} failed, first: {}", failures.len(), jobs.len(), failures[0])
        })?;
        within(t, Duration::from_secs(300))?;
        Ok(format!("{} circuits, worst deviation {worst:.2e}", jobs.len()))
    };
    report(4, "semantic verification", run());
}

#[test]
fn c05_optimizer_soundness() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let progs = test_corpus();
        let decls = vocabulary();
        let rewritten = progs
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let (o, trace) = apply_rules(p).map_err(|e| e.to_string())?;
                let b = oracle_bindings(&decls, i as u64);
                let lhs = denote(p, &b).map_err(|e| e.to_string())?;
                let rhs = denote(&o, &b).map_err(|e| e.to_string())?;
                let dev = max_dev(&lhs, &rhs);
                ensure(dev <= 1e-9, || format!("{} -> {}: deviation {dev:e}", p.expr, o.expr))?;
                let (before, after) = (cost(p).total, cost(&o).total);
                ensure(after <= before * (1.0 + 1e-12), || {
                    format!("{} -> {}: total {before} -> {after}", p.expr, o.expr)
                })?;
                let (again, second) = apply_rules(&o).map_err(|e| e.to_string())?;
                ensure(second.is_empty() && again.expr == o.expr, || {
                    format!("{}: second pass took {} steps", o.expr, second.len())
                })?;
                Ok(!trace.is_empty())
            })
            .collect::<Result<Vec<bool>, String>>()?;
        within(t, Duration::from_secs(120))?;
        let changed = rewritten.iter().filter(|b| **b).count();
        Ok(format!("{} programs, {changed} rewritten", progs.len()))
    };
    report(5, "optimizer soundness and monotonicity", run());
}

fn poly_nodes(e: &Expr, out: &mut Vec<(Expr, PolySpec)>) {
    if let Expr::Poly(base, p) = e {
        out.push(((**base).clone(), p.clone()));
    }
    for c in e.children() {
        poly_nodes(c, out);
    }
}

#[test]
fn c06_norm_inequalities() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let deg = rng.random_range(0..=20);
            let parity = [Parity::Even, Parity::Odd, Parity::Mixed][rng.random_range(0..3)];
            let p = random_parity_poly(&mut rng, deg, parity);
            let alpha = rng.random_range(0.1..3.0);
            let (inf, one) = (linf_norm(&p, alpha), l1_norm(&p, alpha));
            ensure(inf <= one + 1e-9, || format!("{p} at alpha {alpha}: {inf} > {one}"))?;
        }
        let mut checked = 0;
        let mut sources: Vec<TypedExpr> = fixtures::all().iter().map(|f| opt(&typed(&f.program))).collect();
        sources.extend(fixtures::chebyshev_suite().iter().map(|f| typed(&f.program)));
        for s in &sources {
            let mut nodes = Vec::new();
            poly_nodes(&s.expr, &mut nodes);
            for (base, p) in nodes {
                if p.parity() == Parity::Mixed {
                    continue;
                }
                let b = blenc::cost::cost_expr(&base, &s.ctx, MethodPolicy::Auto).unwrap();
                let q = poly_cost(&p, &b, PolyMethod::Qsvt).map_err(|e| e.to_string())?;
                let l = poly_cost(&p, &b, PolyMethod::Lcu).unwrap();
                ensure(q.subnorm <= l.subnorm + 1e-9, || {
                    format!("{p}: QSVT subnorm {} > LCU {}", q.subnorm, l.subnorm)
                })?;
                checked += 1;
            }
        }
        ensure(checked > 0, || "no fixed-parity fixtures".into())?;
        within(t, Duration::from_secs(10))?;
        Ok(format!("1000 random polynomials, {checked} fixed-parity fixtures"))
    };
    report(6, "norm inequalities", run());
}

/// `T_n(x)` by the three-term recurrence, which is stable on `[-1, 1]`.
fn chebyshev_recurrence(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        (a, b) = (b, 2.0 * x * b - a);
    }
    b
}

#[test]
fn c07_qsp_round_trip() {
    let run = || -> Result<String, String> {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid: Vec<f64> = (0..201).map(|i| -1.0 + i as f64 / 100.0).collect();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let deg = rng.random_range(1..=30);
            let parity = if deg % 2 == 0 { Parity::Even } else { Parity::Odd };
            let p = random_parity_poly(&mut rng, deg, parity);
            let p = p.scale(0.9 / linf_norm(&p, 1.0));
            let phi = solve_phases(&p, 1e-10).map_err(|e| format!("{p}: {e}"))?;
            for &x in &grid {
                let r = (evaluate_phases(&phi, x).re - p.eval(x)).abs();
                worst = worst.max(r);
                ensure(r <= 1e-8, || format!("{p}: residual {r:e} at x = {x}"))?;
            }
        }
        for n in 0..=30 {
            let zero = PhaseSequence::new(vec![0.0; n + 1]);
            for &x in &grid {
                let r = (evaluate_phases(&zero, x).re - chebyshev_recurrence(n, x)).abs();
                ensure(r <= 1e-12, || format!("T_{n}: deviation {r:e} at x = {x}"))?;
            }
        }
        within(t, Duration::from_secs(120))?;
        Ok(format!("worst residual {worst:.2e}"))
    };
    report(7, "QSP round trip", run());
}

#[test]
fn c08_cross_method_agreement() {
    let run = || -> Result<String, String> {
        let src = fixture("regression-example").program;
        let o = opt(&typed(&src));
        let methods = [PolyMethod::Lcu, PolyMethod::Horner, PolyMethod::Qsvt];
        let mut blocks = Vec::new();
        for m in methods {
            let c = compile_with(&o, MethodPolicy::Force(m)).map_err(|e| e.to_string())?;
            let c = instantiate_oracles(&c, 0);
            let b = block(&c, Instantiation::Seed(0)).map_err(|e| e.to_string())?;
            blocks.push((m, b * blenc::C64::new(c.alpha, 0.0)));
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let d = max_dev(&blocks[i].1, &blocks[j].1);
                ensure(d <= 1e-7, || format!("{} vs {}: {d:e}", blocks[i].0, blocks[j].0))?;
            }
        }
        let qsvt = cost_with(&o, MethodPolicy::Force(PolyMethod::Qsvt)).unwrap().total;
        let lcu_unopt = cost(&typed(&src)).total;
        let lcu_poly = cost_with(&o, MethodPolicy::Force(PolyMethod::Lcu)).unwrap().total;
        ensure(qsvt == 8.0 && lcu_unopt == 192.0, || format!("QSVT {qsvt}, LCU {lcu_unopt}"))?;
        Ok(format!(
            "blocks agree; QSVT 8.0 vs LCU 192.0 ({:.0}x); LCU of the fused Poly is {lcu_poly}",
            lcu_unopt / qsvt
        ))
    };
    report(8, "cross-method agreement", run());
}

#[test]
fn c09_algorithm_directionality() {
    let run = || -> Result<String, String> {
        let mut notes = Vec::new();
        for f in fixtures::algorithm_suite() {
            let o = opt(&typed(&f.program));
            let c = |m| cost_with(&o, MethodPolicy::Force(m)).map_err(|e| format!("{}: {e}", f.name));
            let (q, h, l) = (c(PolyMethod::Qsvt)?, c(PolyMethod::Horner)?, c(PolyMethod::Lcu)?);
            ensure(q.total < h.total && h.total < l.total, || {
                format!("{}: totals QSVT {} Horner {} LCU {}", f.name, q.total, h.total, l.total)
            })?;
            ensure(h.queries <= l.queries, || {
                format!("{}: queries Horner {} LCU {}", f.name, h.queries, l.queries)
            })?;
            notes.push(format!("{} {:.1}/{:.1}/{:.1}", f.name, q.total, h.total, l.total));
        }
        Ok(notes.join(", "))
    };
    report(9, "QSVT < Horner < LCU on algorithm fixtures", run());
}

#[test]
fn c10_compile_time() {
    let run = || -> Result<String, String> {
        let mut worst = 0.0f64;
        for n in 2..=30 {
            let r = blenc_cli::timing_record(&fixtures::chebyshev(n), n).map_err(|e| e.message)?;
            worst = worst.max(r.nonsolver_seconds);
            ensure(r.nonsolver_seconds < 0.5, || format!("T_{n}: non-solver {} s", r.nonsolver_seconds))?;
            ensure(r.solves >= 1, || format!("T_{n}: no solver call recorded"))?;
        }
        let out = blenc_cli::bench(Suite::Chebyshev, true, false).map_err(|e| e.message)?;
        let (_, table) = out.split_once("\n\n").ok_or("no timing table")?;
        let mut lines = table.lines();
        let header = lines.next().unwrap_or_default();
        ensure(header.contains("non-solver (s)") && header.contains("solver (s)"), || {
            format!("header {header:?}")
        })?;
        let rows: Vec<&str> = lines.collect();
        ensure(rows.len() == 29, || format!("{} timing rows", rows.len()))?;
        for row in rows {
            let cols: Vec<&str> = row.split_whitespace().collect();
            ensure(cols.len() == 4 && cols[1..].iter().all(|c| c.parse::<f64>().is_ok()), || {
                format!("row {row:?}")
            })?;
        }
        Ok(format!("worst non-solver time {worst:.4} s"))
    };
    report(10, "Chebyshev compile-time sanity", run());
}

#[test]
fn c11_emission_validity() {
    let run = || -> Result<String, String> {
        let mut all = fixtures::all();
        all.extend(fixtures::chebyshev_suite());
        let variants = [
            CompileArgs::default(),
            CompileArgs {
                no_opt: true,
                ..CompileArgs::default()
            },
            CompileArgs {
                opaque: true,
                ..CompileArgs::default()
            },
        ];
        let mut n = 0;
        for f in &all {
            for args in &variants {
                let a = blenc_cli::compile(&f.program, *args).map_err(|e| e.message)?;
                let b = blenc_cli::compile(&f.program, *args).map_err(|e| e.message)?;
                ensure(a == b, || format!("{}: output differs between runs", f.name))?;
                qasm::check(&a).map_err(|e| format!("{}: {e}", f.name))?;
                n += 1;
            }
        }
        // Separate processes as well.
        let dir = tempfile::tempdir().unwrap();
        for f in fixtures::all() {
            let path = dir.path().join(format!("{}.cob", f.name));
            std::fs::write(&path, &f.program).unwrap();
            let run = || {
                std::process::Command::new(env!("CARGO_BIN_EXE_blenc"))
                    .args(["compile", "--seed", "3", path.to_str().unwrap()])
                    .output()
                    .unwrap()
                    .stdout
            };
            let first = run();
            ensure(!first.is_empty() && first == run(), || format!("{}: binary output differs", f.name))?;
        }
        Ok(format!("{n} QASM programs checked"))
    };
    report(11, "QASM emission validity", run());
}

/// A small OpenQASM 2.0 checker: lexer, statement grammar, `qelib1.inc`
/// gate signatures, register bounds and operand distinctness.
mod qasm {
    use std::collections::HashMap;

    #[derive(Clone, Debug, PartialEq)]
    enum Tok {
        Id(String),
        Int(u64),
        Real(f64),
        Str(String),
        Sym(char),
        Arrow,
        Eq2,
    }

    fn lex(src: &str) -> Result<Vec<(Tok, usize)>, String> {
        let b = src.as_bytes();
        let mut i = 0;
        let mut line = 1;
        let mut out = Vec::new();
        while i < b.len() {
            let c = b[i] as char;
            match c {
                '\n' => {
                    line += 1;
                    i += 1;
                }
                c if c.is_ascii_whitespace() => i += 1,
                '/' if b.get(i + 1) == Some(&b'/') => {
                    while i < b.len() && b[i] != b'\n' {
                        i += 1;
                    }
                }
                '"' => {
                    let start = i + 1;
                    i = start;
                    while i < b.len() && b[i] != b'"' {
                        if b[i] == b'\n' {
                            return Err(format!("line {line}: unterminated string"));
                        }
                        i += 1;
                    }
                    if i == b.len() {
                        return Err(format!("line {line}: unterminated string"));
                    }
                    out.push((Tok::Str(src[start..i].to_string()), line));
                    i += 1;
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                        i += 1;
                    }
                    out.push((Tok::Id(src[start..i].to_string()), line));
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let start = i;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                    let mut real = false;
                    if i < b.len() && b[i] == b'.' {
                        real = true;
                        i += 1;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                        real = true;
                        i += 1;
                        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
                            i += 1;
                        }
                        let d = i;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                        if d == i {
                            return Err(format!("line {line}: bad exponent"));
                        }
                    }
                    let text = &src[start..i];
                    let tok = if real {
                        Tok::Real(text.parse().map_err(|_| format!("line {line}: bad number {text}"))?)
                    } else {
                        Tok::Int(text.parse().map_err(|_| format!("line {line}: bad integer {text}"))?)
                    };
                    out.push((tok, line));
                }
                '-' if b.get(i + 1) == Some(&b'>') => {
                    out.push((Tok::Arrow, line));
                    i += 2;
                }
                '=' if b.get(i + 1) == Some(&b'=') => {
                    out.push((Tok::Eq2, line));
                    i += 2;
                }
                ';' | ',' | '(' | ')' | '[' | ']' | '{' | '}' | '+' | '-' | '*' | '/' | '^' => {
                    out.push((Tok::Sym(c), line));
                    i += 1;
                }
                _ => return Err(format!("line {line}: unexpected character {c:?}")),
            }
        }
        Ok(out)
    }

    /// `(parameters, qubit operands)`.
    fn qelib1() -> HashMap<String, (usize, usize)> {
        let table: &[(&str, usize, usize)] = &[
            ("u3", 3, 1),
            ("u2", 2, 1),
            ("u1", 1, 1),
            ("cx", 0, 2),
            ("id", 0, 1),
            ("u0", 1, 1),
            ("u", 3, 1),
            ("p", 1, 1),
            ("x", 0, 1),
            ("y", 0, 1),
            ("z", 0, 1),
            ("h", 0, 1),
            ("s", 0, 1),
            ("sdg", 0, 1),
            ("t", 0, 1),
            ("tdg", 0, 1),
            ("rx", 1, 1),
            ("ry", 1, 1),
            ("rz", 1, 1),
            ("sx", 0, 1),
            ("sxdg", 0, 1),
            ("cz", 0, 2),
            ("cy", 0, 2),
            ("swap", 0, 2),
            ("ch", 0, 2),
            ("ccx", 0, 3),
            ("cswap", 0, 3),
            ("crx", 1, 2),
            ("cry", 1, 2),
            ("crz", 1, 2),
            ("cu1", 1, 2),
            ("cp", 1, 2),
            ("cu3", 3, 2),
            ("csx", 0, 2),
            ("cu", 4, 2),
            ("rxx", 1, 2),
            ("rzz", 1, 2),
            ("rccx", 0, 3),
            ("rc3x", 0, 4),
            ("c3x", 0, 4),
            ("c3sqrtx", 0, 4),
            ("c4x", 0, 5),
        ];
        table.iter().map(|(n, p, q)| (n.to_string(), (*p, *q))).collect()
    }

    const KEYWORDS: [&str; 12] = [
        "OPENQASM", "include", "qreg", "creg", "gate", "opaque", "measure", "reset", "barrier", "if", "U", "CX",
    ];

    struct Parser {
        toks: Vec<(Tok, usize)>,
        pos: usize,
        gates: HashMap<String, (usize, usize)>,
        qregs: HashMap<String, u64>,
        cregs: HashMap<String, u64>,
    }

    impl Parser {
        fn line(&self) -> usize {
            self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1)
        }

        fn err<T>(&self, msg: impl std::fmt::Display) -> Result<T, String> {
            Err(format!("line {}: {msg}", self.line()))
        }

        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos).map(|t| &t.0)
        }

        fn next(&mut self) -> Result<Tok, String> {
            match self.toks.get(self.pos) {
                Some((t, _)) => {
                    self.pos += 1;
                    Ok(t.clone())
                }
                None => self.err("unexpected end of input"),
            }
        }

        fn sym(&mut self, c: char) -> Result<(), String> {
            match self.next()? {
                Tok::Sym(s) if s == c => Ok(()),
                t => self.err(format!("expected `{c}`, found {t:?}")),
            }
        }

        fn eat(&mut self, c: char) -> bool {
            if self.peek() == Some(&Tok::Sym(c)) {
                self.pos += 1;
                true
            } else {
                false
            }
        }

        fn ident(&mut self) -> Result<String, String> {
            match self.next()? {
                Tok::Id(s) => Ok(s),
                t => self.err(format!("expected identifier, found {t:?}")),
            }
        }

        fn int(&mut self) -> Result<u64, String> {
            match self.next()? {
                Tok::Int(n) => Ok(n),
                t => self.err(format!("expected integer, found {t:?}")),
            }
        }

        fn fresh(&self, name: &str) -> Result<(), String> {
            if KEYWORDS.contains(&name) || !name.starts_with(|c: char| c.is_ascii_lowercase()) {
                return self.err(format!("invalid identifier `{name}`"));
            }
            if self.qregs.contains_key(name) || self.cregs.contains_key(name) || self.gates.contains_key(name) {
                return self.err(format!("`{name}` declared twice"));
            }
            Ok(())
        }

        fn program(&mut self) -> Result<(), String> {
            match (self.next()?, self.next()?) {
                (Tok::Id(k), Tok::Real(v)) if k == "OPENQASM" && v == 2.0 => {}
                _ => return self.err("missing `OPENQASM 2.0` header"),
            }
            self.sym(';')?;
            while self.peek().is_some() {
                self.statement()?;
            }
            Ok(())
        }

        fn statement(&mut self) -> Result<(), String> {
            let head = self.ident()?;
            match head.as_str() {
                "include" => match self.next()? {
                    Tok::Str(f) if f == "qelib1.inc" => {
                        self.gates.extend(qelib1());
                        self.sym(';')
                    }
                    t => self.err(format!("unsupported include {t:?}")),
                },
                "qreg" | "creg" => {
                    let name = self.ident()?;
                    self.fresh(&name)?;
                    self.sym('[')?;
                    let size = self.int()?;
                    self.sym(']')?;
                    self.sym(';')?;
                    if size == 0 {
                        return self.err(format!("register `{name}` has size 0"));
                    }
                    if head == "qreg" {
                        self.qregs.insert(name, size);
                    } else {
                        self.cregs.insert(name, size);
                    }
                    Ok(())
                }
                "opaque" | "gate" => self.gate_decl(head == "gate"),
                "barrier" => {
                    self.operands()?;
                    self.sym(';')
                }
                "reset" => {
                    let ops = self.operands()?;
                    if ops.len() != 1 {
                        return self.err("reset takes one operand");
                    }
                    self.sym(';')
                }
                "measure" => {
                    self.operand(true)?;
                    match self.next()? {
                        Tok::Arrow => {}
                        t => return self.err(format!("expected `->`, found {t:?}")),
                    }
                    self.operand(false)?;
                    self.sym(';')
                }
                "if" => {
                    self.sym('(')?;
                    let r = self.ident()?;
                    if !self.cregs.contains_key(&r) {
                        return self.err(format!("unknown creg `{r}`"));
                    }
                    if self.next()? != Tok::Eq2 {
                        return self.err("expected `==`");
                    }
                    self.int()?;
                    self.sym(')')?;
                    let g = self.ident()?;
                    self.apply(g)
                }
                _ => self.apply(head),
            }
        }

        fn id_list(&mut self, close: Option<char>) -> Result<Vec<String>, String> {
            let mut v = Vec::new();
            if let Some(c) = close {
                if self.eat(c) {
                    return Ok(v);
                }
            }
            loop {
                v.push(self.ident()?);
                if !self.eat(',') {
                    break;
                }
            }
            if let Some(c) = close {
                self.sym(c)?;
            }
            Ok(v)
        }

        fn gate_decl(&mut self, body: bool) -> Result<(), String> {
            let name = self.ident()?;
            self.fresh(&name)?;
            let params = if self.eat('(') { self.id_list(Some(')'))? } else { Vec::new() };
            let args = self.id_list(None)?;
            if args.is_empty() {
                return self.err(format!("gate `{name}` has no operands"));
            }
            let mut seen = std::collections::HashSet::new();
            for a in params.iter().chain(&args) {
                if !seen.insert(a) {
                    return self.err(format!("gate `{name}` repeats `{a}`"));
                }
            }
            if body {
                self.sym('{')?;
                while !self.eat('}') {
                    let g = self.ident()?;
                    let (np, nq) = self.signature(&g)?;
                    let got = if self.eat('(') { self.exprs(&params)? } else { 0 };
                    if got != np {
                        return self.err(format!("`{g}` takes {np} parameters, got {got}"));
                    }
                    let ops = self.id_list(None)?;
                    if ops.len() != nq || ops.iter().any(|o| !args.contains(o)) {
                        return self.err(format!("bad operands for `{g}` in gate body"));
                    }
                    self.sym(';')?;
                }
            } else {
                self.sym(';')?;
            }
            self.gates.insert(name, (params.len(), args.len()));
            Ok(())
        }

        fn signature(&self, g: &str) -> Result<(usize, usize), String> {
            match g {
                "U" => Ok((3, 1)),
                "CX" => Ok((0, 2)),
                _ => self.gates.get(g).copied().map_or_else(|| self.err(format!("unknown gate `{g}`")), Ok),
            }
        }

        /// Parenthesized expression list after `(`; returns its length.
        fn exprs(&mut self, params: &[String]) -> Result<usize, String> {
            if self.eat(')') {
                return Ok(0);
            }
            let mut n = 0;
            loop {
                self.expr(params)?;
                n += 1;
                if !self.eat(',') {
                    break;
                }
            }
            self.sym(')')?;
            Ok(n)
        }

        fn expr(&mut self, params: &[String]) -> Result<f64, String> {
            let mut v = self.term(params)?;
            loop {
                if self.eat('+') {
                    v += self.term(params)?;
                } else if self.eat('-') {
                    v -= self.term(params)?;
                } else {
                    return Ok(v);
                }
            }
        }

        fn term(&mut self, params: &[String]) -> Result<f64, String> {
            let mut v = self.factor(params)?;
            loop {
                if self.eat('*') {
                    v *= self.factor(params)?;
                } else if self.eat('/') {
                    v /= self.factor(params)?;
                } else {
                    return Ok(v);
                }
            }
        }

        fn factor(&mut self, params: &[String]) -> Result<f64, String> {
            let base = self.unary(params)?;
            if self.eat('^') {
                Ok(base.powf(self.factor(params)?))
            } else {
                Ok(base)
            }
        }

        fn unary(&mut self, params: &[String]) -> Result<f64, String> {
            if self.eat('-') {
                return Ok(-self.unary(params)?);
            }
            match self.next()? {
                Tok::Int(n) => Ok(n as f64),
                Tok::Real(r) => Ok(r),
                Tok::Sym('(') => {
                    let v = self.expr(params)?;
                    self.sym(')')?;
                    Ok(v)
                }
                Tok::Id(s) if s == "pi" => Ok(std::f64::consts::PI),
                Tok::Id(s) if params.contains(&s) => Ok(0.0),
                Tok::Id(s) if ["sin", "cos", "tan", "exp", "ln", "sqrt"].contains(&s.as_str()) => {
                    self.sym('(')?;
                    let v = self.expr(params)?;
                    self.sym(')')?;
                    Ok(v)
                }
                t => self.err(format!("bad expression token {t:?}")),
            }
        }

        /// One operand: `(register, Some(index))` or a whole register.
        fn operand(&mut self, quantum: bool) -> Result<(String, Option<u64>), String> {
            let r = self.ident()?;
            let size = if quantum { self.qregs.get(&r) } else { self.cregs.get(&r) };
            let Some(&size) = size else {
                return self.err(format!("undeclared register `{r}`"));
            };
            if self.eat('[') {
                let i = self.int()?;
                self.sym(']')?;
                if i >= size {
                    return self.err(format!("index {r}[{i}] out of range (size {size})"));
                }
                Ok((r, Some(i)))
            } else {
                Ok((r, None))
            }
        }

        fn operands(&mut self) -> Result<Vec<(String, Option<u64>)>, String> {
            let mut v = vec![self.operand(true)?];
            while self.eat(',') {
                v.push(self.operand(true)?);
            }
            Ok(v)
        }

        fn apply(&mut self, g: String) -> Result<(), String> {
            let (np, nq) = self.signature(&g)?;
            let got = if self.eat('(') { self.exprs(&[])? } else { 0 };
            if got != np {
                return self.err(format!("`{g}` takes {np} parameters, got {got}"));
            }
            let ops = self.operands()?;
            self.sym(';')?;
            if ops.len() != nq {
                return self.err(format!("`{g}` takes {nq} operands, got {}", ops.len()));
            }
            let widths: Vec<u64> = ops.iter().filter(|o| o.1.is_none()).map(|o| self.qregs[&o.0]).collect();
            if widths.windows(2).any(|w| w[0] != w[1]) {
                return self.err(format!("`{g}` broadcasts over registers of different sizes"));
            }
            for (i, a) in ops.iter().enumerate() {
                for b in &ops[i + 1..] {
                    let clash = a.0 == b.0 && (a.1.is_none() || b.1.is_none() || a.1 == b.1);
                    if clash {
                        return self.err(format!("`{g}` uses {}{:?} twice", a.0, a.1));
                    }
                }
            }
            Ok(())
        }
    }

    pub fn check(src: &str) -> Result<(), String> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            gates: HashMap::new(),
            qregs: HashMap::new(),
            cregs: HashMap::new(),
        };
        p.program()
    }

    #[test]
    fn checker_accepts_and_rejects() {
        let ok = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nopaque g(a) x,y;\n\
                  gate w(t) a { rz(t/2) a; }\nh q[0];\ncu3(-pi/2,0,1.5e-3) q[0],q[1];\n\
                  g(0.1) q[1],q[0];\nw(pi) q;\n// comment\n";
        assert_eq!(check(ok), Ok(()));
        let head = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n";
        for bad in [
            "h q[2];",
            "cx q[0],q[0];",
            "cx q[0];",
            "rz q[0];",
            "foo q[0];",
            "h r[0];",
            "h q[0]",
            "qreg q[3];",
            "u1(1.0,2.0) q[0];",
            "h q[0]; $",
        ] {
            assert!(check(&format!("{head}{bad}\n")).is_err(), "{bad}");
        }
        assert!(check("qreg q[1];").is_err());
        assert!(check("OPENQASM 2.0;\nh q[0];").is_err());
    }
}
