use crate::fixtures::{self, BenchFixture, Reproducibility};
use crate::report::{BenchRecord, CostRecord, TimingRecord, VerifyRecord};
use crate::{exit, CliError};
use blenc::circuit::{compile_with, compile_with_stats, emit_qasm, instantiate_oracles, QasmOptions};
use blenc::cost::{cost_expr, cost_with, CostReport, MethodPolicy, PolyMethod};
use blenc::frontend::parse;
use blenc::ir::{typecheck, Expr, TypedExpr};
use blenc::rewrite::apply_rules;
use blenc::sim::{max_dev, verify_with, SimError, VerifyReport};
use blenc::C64;
use rayon::prelude::*;
use std::fmt::Write;
use std::time::Instant;

pub fn load(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::USAGE, format!("cannot read {}: {e}", path.display())))
}

pub fn typed(src: &str) -> Result<TypedExpr, CliError> {
    Ok(typecheck(&parse(src)?)?)
}

fn policy(method: Option<PolyMethod>) -> MethodPolicy {
    method.map_or(MethodPolicy::Auto, MethodPolicy::Force)
}

fn choice_lines(e: &Expr, t: &TypedExpr, path: &mut Vec<usize>, out: &mut String) {
    if let Expr::Choice(bs) = e {
        let alphas: Vec<String> = bs
            .iter()
            .map(|b| {
                cost_expr(b, &t.ctx, MethodPolicy::Auto)
                    .map_or("?".into(), |c| format!("{:?}", c.subnorm))
            })
            .collect();
        writeln!(out, "dsum at {path:?}: branch subnorms [{}] match", alphas.join(", ")).unwrap();
    }
    for (i, c) in e.children().into_iter().enumerate() {
        path.push(i);
        choice_lines(c, t, path, out);
        path.pop();
    }
}

/// Type, hermiticity and direct-sum diagnostics.
pub fn check(src: &str) -> Result<String, CliError> {
    let t = typed(src)?;
    let mut out = format!(
        "{}, {}\n",
        t.qtype,
        if t.hermitian { "hermitian" } else { "not hermitian" }
    );
    choice_lines(&t.expr, &t, &mut Vec::new(), &mut out);
    Ok(out)
}

fn optimized(t: &TypedExpr) -> Result<TypedExpr, CliError> {
    Ok(apply_rules(t)?.0)
}

pub fn cost_report(src: &str, opt: bool, method: Option<PolyMethod>) -> Result<CostReport, CliError> {
    let mut t = typed(src)?;
    if opt {
        t = optimized(&t)?;
    }
    Ok(cost_with(&t, policy(method))?)
}

/// `(queries, subnorm, total)` plus the ancilla count, or a JSON record.
pub fn cost(src: &str, opt: bool, method: Option<PolyMethod>, json: bool) -> Result<String, CliError> {
    let c = cost_report(src, opt, method)?;
    if json {
        return Ok(serde_json::to_string(&CostRecord::from(c)).unwrap() + "\n");
    }
    Ok(format!("{c}\n"))
}

/// Normal form, optionally preceded by the rewrite trace.
pub fn opt(src: &str, trace: bool) -> Result<String, CliError> {
    let t = typed(src)?;
    let (o, tr) = apply_rules(&t)?;
    let mut out = String::new();
    if trace {
        writeln!(out, "start total={:?}", t.cost.total).unwrap();
        for (i, s) in tr.steps.iter().enumerate() {
            writeln!(
                out,
                "step {:>3} {:<18} at {:?}: total {:?} -> {:?}",
                i + 1,
                s.rule.to_string(),
                s.path,
                s.before.total,
                s.after.total
            )
            .unwrap();
        }
        writeln!(out, "end total={:?}", o.cost.total).unwrap();
    }
    writeln!(out, "{}", o.expr).unwrap();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Emit {
    #[default]
    Qasm,
    Json,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompileArgs {
    pub emit: Emit,
    pub seed: u64,
    pub opaque: bool,
    pub no_opt: bool,
    pub method: Option<PolyMethod>,
}

/// Full pipeline to QASM text or a JSON gate list.
pub fn compile(src: &str, args: CompileArgs) -> Result<String, CliError> {
    let mut t = typed(src)?;
    if !args.no_opt {
        t = optimized(&t)?;
    }
    let mut c = compile_with(&t, policy(args.method))?;
    if !args.opaque {
        c = instantiate_oracles(&c, args.seed);
    }
    Ok(match args.emit {
        Emit::Qasm => emit_qasm(&c, QasmOptions { opaque: args.opaque })?,
        Emit::Json => serde_json::to_string_pretty(&c.gates_json()).unwrap() + "\n",
    })
}

fn record(stage: &str, r: &VerifyReport, passed: bool) -> VerifyRecord {
    VerifyRecord {
        stage: stage.into(),
        alpha_pred: r.alpha_pred,
        max_dev: r.max_dev,
        tolerance: r.tolerance,
        queries_measured: r.queries_measured,
        success_prob: r.success_prob,
        success_prob_bound: r.success_prob_bound,
        qubits: r.qubits,
        passed,
    }
}

fn run_verify(t: &TypedExpr, seed: u64) -> Result<(VerifyReport, bool), CliError> {
    match verify_with(t, seed, MethodPolicy::Auto) {
        Ok(r) => Ok((r, true)),
        Err(SimError::VerificationFailed(r)) => Ok((*r, false)),
        Err(e) => Err(e.into()),
    }
}

/// Verifies the program before and after optimization and checks that the
/// two circuits encode the same matrix.
pub fn verify(src: &str, seed: u64, json: bool) -> Result<String, CliError> {
    let t = typed(src)?;
    let o = optimized(&t)?;
    let (r0, p0) = run_verify(&t, seed)?;
    let (r1, p1) = run_verify(&o, seed)?;
    let a0 = &r0.block * C64::new(r0.alpha_pred, 0.0);
    let a1 = &r1.block * C64::new(r1.alpha_pred, 0.0);
    let agree_dev = max_dev(&a0, &a1);
    let agree_tol = (r0.tolerance + r1.tolerance) * r0.alpha_pred.max(r1.alpha_pred);
    let agree = agree_dev <= agree_tol;
    let recs = [record("unoptimized", &r0, p0), record("optimized", &r1, p1)];
    let out = if json {
        serde_json::to_string_pretty(&serde_json::json!({
            "seed": seed,
            "stages": recs,
            "blocks_agree": agree,
            "agreement_dev": agree_dev,
        }))
        .unwrap()
            + "\n"
    } else {
        let mut s = String::new();
        for r in &recs {
            writeln!(
                s,
                "{:<12} alpha={:?} queries={:?} qubits={} max_dev={:.3e} tol={:.0e} success={:.6} bound={:.6} {}",
                r.stage,
                r.alpha_pred,
                r.queries_measured,
                r.qubits,
                r.max_dev,
                r.tolerance,
                r.success_prob,
                r.success_prob_bound,
                if r.passed { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(s, "blocks agree: {} (deviation {agree_dev:.3e})", if agree { "yes" } else { "no" }).unwrap();
        s
    };
    if p0 && p1 && agree {
        Ok(out)
    } else {
        Err(CliError::new(exit::VERIFY, out))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Suite {
    /// Matrix-expression benchmarks.
    #[default]
    Matrix,
    /// Polynomial algorithm benchmarks.
    Algorithms,
    /// `T_n(X)` for `2 <= n <= 30`.
    Chebyshev,
    All,
}

pub fn suite_fixtures(s: Suite) -> Vec<BenchFixture> {
    match s {
        Suite::Matrix => fixtures::matrix_suite(),
        Suite::Algorithms => fixtures::algorithm_suite(),
        Suite::Chebyshev => fixtures::chebyshev_suite(),
        Suite::All => {
            let mut v = fixtures::all();
            v.extend(fixtures::chebyshev_suite());
            v
        }
    }
}

/// Rounds to one decimal place, the precision of the printed tables.
fn printed(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn bench_record(f: &BenchFixture) -> Result<(BenchRecord, Vec<String>), CliError> {
    let t = typed(&f.program)?;
    let o = optimized(&t)?;
    let rec = BenchRecord::new(f.name, &t.cost, &o.cost);
    let mut failures = Vec::new();
    if f.reproducibility == Reproducibility::Published {
        for (stage, want, got) in [("unoptimized", f.expected_unopt, &t.cost), ("optimized", f.expected_opt, &o.cost)] {
            if let Some((k, a, tot)) = want {
                let have = (printed(got.queries), printed(got.subnorm), printed(got.total));
                if have != (k, a, tot) {
                    failures.push(format!("{}: {stage} cost {have:?}, expected {:?}", f.name, (k, a, tot)));
                }
            }
        }
    }
    if o.cost.total > t.cost.total * (1.0 + 1e-12) {
        failures.push(format!("{}: optimization increased total cost", f.name));
    }
    Ok((rec, failures))
}

pub fn timing_record(f: &BenchFixture, degree: usize) -> Result<TimingRecord, CliError> {
    let start = Instant::now();
    let t = typed(&f.program)?;
    let o = optimized(&t)?;
    let (_, stats) = compile_with_stats(&o, MethodPolicy::Auto)?;
    let total = start.elapsed();
    Ok(TimingRecord {
        name: f.name.to_string(),
        degree,
        nonsolver_seconds: (total - stats.solver_time).as_secs_f64(),
        solver_seconds: stats.solver_time.as_secs_f64(),
        solves: stats.solves,
    })
}

/// Cost table for a suite, plus compile timings of the Chebyshev family
/// when `timing` is set. Fixtures run on the rayon pool.
pub fn bench(suite: Suite, timing: bool, json: bool) -> Result<String, CliError> {
    let fx = suite_fixtures(suite);
    let rows: Vec<Result<(BenchRecord, Vec<String>), CliError>> = fx.par_iter().map(bench_record).collect();
    let mut recs = Vec::new();
    let mut failures = Vec::new();
    for r in rows {
        let (rec, f) = r?;
        recs.push(rec);
        failures.extend(f);
    }
    let timings = if timing {
        // Sequential so that measurements do not compete for cores.
        (2..=30)
            .map(|n| timing_record(&fixtures::chebyshev(n), n))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let mut out = String::new();
    if json {
        let mut v = serde_json::json!({ "benchmarks": recs });
        if timing {
            v["timing"] = serde_json::to_value(&timings).unwrap();
        }
        out = serde_json::to_string_pretty(&v).unwrap() + "\n";
    } else {
        writeln!(out, "{:<24} {:>24} {:>24} {:>9}", "benchmark", "unoptimized", "optimized", "speedup").unwrap();
        for r in &recs {
            let u = format!("{} × {:.1} = {:.1}", r.queries_unopt, r.subnorm_unopt, r.total_unopt);
            let o = format!("{} × {:.1} = {:.1}", r.queries_opt, r.subnorm_opt, r.total_opt);
            writeln!(out, "{:<24} {u:>24} {o:>24} {:>8.1}×", r.name, r.speedup).unwrap();
        }
        if timing {
            writeln!(out, "\n{:<16} {:>16} {:>16} {:>7}", "program", "non-solver (s)", "solver (s)", "solves").unwrap();
            for t in &timings {
                writeln!(
                    out,
                    "{:<16} {:>16.6} {:>16.6} {:>7}",
                    t.name, t.nonsolver_seconds, t.solver_seconds, t.solves
                )
                .unwrap();
            }
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::new(exit::SEMANTIC, format!("{out}{}\n", failures.join("\n"))))
    }
}
