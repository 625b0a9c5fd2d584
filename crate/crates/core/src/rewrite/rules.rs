//! Individual rewrites. Each returns the replacement for one node, or
//! `None` when it does not match. Guards live in the engine.

use super::{RewriteError, RuleId};
use crate::ir::{cmp_expr, Expr, CHOICE_RTOL};
use crate::poly::PolySpec;

/// Coefficients below this magnitude are dropped after merging.
pub(crate) const CANCEL_EPS: f64 = 1e-12;

pub(crate) trait Judge {
    fn hermitian(&mut self, e: &Expr) -> bool;
    fn alpha(&mut self, e: &Expr) -> f64;
}

type Cand = Option<(RuleId, Expr)>;

fn adj(e: Expr) -> Expr {
    Expr::Adj(Box::new(e))
}

fn prod_of(mut fs: Vec<Expr>) -> Expr {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Expr::Prod(fs)
    }
}

fn tensor_of(mut fs: Vec<Expr>) -> Expr {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Expr::Tensor(fs)
    }
}

pub(crate) fn is_identity(e: &Expr) -> bool {
    match e {
        Expr::Base(o) => o.name == "I" && o.is_builtin(),
        Expr::Tensor(fs) => fs.iter().all(is_identity),
        _ => false,
    }
}

fn choice_ok(j: &mut dyn Judge, a: &Expr, b: &Expr) -> bool {
    let (x, y) = (j.alpha(a), j.alpha(b));
    (x - y).abs() <= CHOICE_RTOL * x.abs().max(y.abs())
}

pub(crate) fn adjoint(e: &Expr, j: &mut dyn Judge) -> Cand {
    let Expr::Adj(a) = e else { return None };
    Some(match &**a {
        Expr::Adj(b) => (RuleId::AdjInvolution, (**b).clone()),
        x if j.hermitian(x) => (RuleId::AdjHermitian, x.clone()),
        Expr::Prod(fs) => (
            RuleId::AdjProd,
            Expr::Prod(fs.iter().rev().cloned().map(adj).collect()),
        ),
        Expr::Sum(ts) => (
            RuleId::AdjSum,
            Expr::Sum(ts.iter().map(|(c, t)| (*c, adj(t.clone()))).collect()),
        ),
        Expr::Tensor(fs) => (
            RuleId::AdjTensor,
            Expr::Tensor(fs.iter().cloned().map(adj).collect()),
        ),
        Expr::Choice(fs) => (
            RuleId::AdjChoice,
            Expr::Choice(fs.iter().cloned().map(adj).collect()),
        ),
        _ => return None,
    })
}

/// `A * I -> A` (also unwraps one-operand products and tensors) and
/// `A (+) A -> I (x) A`.
pub(crate) fn simplify(e: &Expr) -> Cand {
    match e {
        Expr::Prod(fs) if fs.len() == 1 => Some((RuleId::ProdIdentity, fs[0].clone())),
        Expr::Tensor(fs) if fs.len() == 1 => Some((RuleId::ProdIdentity, fs[0].clone())),
        Expr::Prod(fs) if fs.iter().any(is_identity) => {
            let mut kept: Vec<Expr> = fs.iter().filter(|f| !is_identity(f)).cloned().collect();
            if kept.is_empty() {
                kept.push(fs[0].clone());
            }
            Some((RuleId::ProdIdentity, prod_of(kept)))
        }
        Expr::Choice(bs) if bs.len() == 2 && bs[0] == bs[1] => Some((
            RuleId::ChoiceIdem,
            Expr::Tensor(vec![Expr::builtin("I"), bs[0].clone()]),
        )),
        _ => None,
    }
}

/// Operands of a product or tensor node of the given kind.
fn operands(e: &Expr, tensor: bool) -> Option<&[Expr]> {
    match (e, tensor) {
        (Expr::Prod(fs), false) | (Expr::Tensor(fs), true) if fs.len() >= 2 => Some(fs),
        _ => None,
    }
}

/// Shared first (`left`) or last operand, with the remaining operands.
fn split_common(a: &[Expr], b: &[Expr], left: bool) -> Option<(Expr, Vec<Expr>, Vec<Expr>)> {
    if left {
        (a[0] == b[0]).then(|| (a[0].clone(), a[1..].to_vec(), b[1..].to_vec()))
    } else {
        let (la, lb) = (a.len() - 1, b.len() - 1);
        (a[la] == b[lb]).then(|| (a[la].clone(), a[..la].to_vec(), b[..lb].to_vec()))
    }
}

pub(crate) fn factor(e: &Expr, j: &mut dyn Judge) -> Cand {
    match e {
        Expr::Sum(ts) => {
            let rules = [
                (RuleId::FactorProdSumL, false, true),
                (RuleId::FactorProdSumR, false, false),
                (RuleId::FactorTensorSumL, true, true),
                (RuleId::FactorTensorSumR, true, false),
            ];
            for (rule, tensor, left) in rules {
                for i in 0..ts.len() {
                    let Some(a) = operands(&ts[i].1, tensor) else { continue };
                    for k in i + 1..ts.len() {
                        let Some(b) = operands(&ts[k].1, tensor) else { continue };
                        let Some((common, ra, rb)) = split_common(a, b, left) else { continue };
                        let wrap = if tensor { tensor_of } else { prod_of };
                        let inner = Expr::Sum(vec![(ts[i].0, wrap(ra)), (ts[k].0, wrap(rb))]);
                        let outer = if tensor { Expr::Tensor } else { Expr::Prod };
                        let merged = outer(if left { vec![common, inner] } else { vec![inner, common] });
                        let mut out: Vec<(f64, Expr)> = Vec::with_capacity(ts.len() - 1);
                        for (n, t) in ts.iter().enumerate() {
                            if n == i {
                                out.push((1.0, merged.clone()));
                            } else if n != k {
                                out.push(t.clone());
                            }
                        }
                        return Some((rule, Expr::Sum(out)));
                    }
                }
            }
            None
        }
        Expr::Choice(bs) if bs.len() == 2 => {
            let id = || Expr::builtin("I");
            if let (Some(a), Some(b)) = (operands(&bs[0], false), operands(&bs[1], false)) {
                for (rule, left) in [(RuleId::FactorChoiceProdL, true), (RuleId::FactorChoiceProdR, false)] {
                    let Some((common, ra, rb)) = split_common(a, b, left) else { continue };
                    let (ra, rb) = (prod_of(ra), prod_of(rb));
                    if !choice_ok(j, &ra, &rb) {
                        continue;
                    }
                    let lifted = Expr::Tensor(vec![id(), common]);
                    let ch = Expr::Choice(vec![ra, rb]);
                    let fs = if left { vec![lifted, ch] } else { vec![ch, lifted] };
                    return Some((rule, Expr::Prod(fs)));
                }
            }
            // The left-factored tensor form would move the discriminator
            // below the shared factor, so only the right form is used.
            if let (Some(a), Some(b)) = (operands(&bs[0], true), operands(&bs[1], true)) {
                if let Some((common, ra, rb)) = split_common(a, b, false) {
                    let (ra, rb) = (tensor_of(ra), tensor_of(rb));
                    if ra.n_qubits() == rb.n_qubits() && choice_ok(j, &ra, &rb) {
                        return Some((
                            RuleId::FactorTensorChoiceR,
                            Expr::Tensor(vec![Expr::Choice(vec![ra, rb]), common]),
                        ));
                    }
                }
            }
            None
        }
        _ => None,
    }
}

/// Flattens nested sums, merges identical terms, drops cancelled ones,
/// sorts canonically and unwraps `1 * A`.
pub(crate) fn sum_fusion(e: &Expr, path: &[usize]) -> Result<Cand, RewriteError> {
    let Expr::Sum(ts) = e else { return Ok(None) };
    let mut flat: Vec<(f64, Expr)> = Vec::new();
    fn push(flat: &mut Vec<(f64, Expr)>, c: f64, t: &Expr) {
        match t {
            Expr::Sum(inner) => {
                for (d, u) in inner {
                    push(flat, c * d, u);
                }
            }
            _ => flat.push((c, t.clone())),
        }
    }
    for (c, t) in ts {
        push(&mut flat, *c, t);
    }
    let mut merged: Vec<(f64, Expr)> = Vec::new();
    for (c, t) in flat {
        match merged.iter_mut().find(|(_, u)| *u == t) {
            Some(slot) => slot.0 += c,
            None => merged.push((c, t)),
        }
    }
    merged.retain(|(c, _)| c.abs() >= CANCEL_EPS);
    if merged.is_empty() {
        return Err(RewriteError::AllTermsCancel {
            path: path.to_vec(),
            terms: e.to_string(),
        });
    }
    merged.sort_by(|a, b| cmp_expr(&a.1, &b.1).then(a.0.total_cmp(&b.0)));
    let out = if merged.len() == 1 && merged[0].0 == 1.0 {
        merged.pop().unwrap().1
    } else {
        Expr::Sum(merged)
    };
    Ok((out != *e).then_some((RuleId::SumFusion, out)))
}

/// `F` as a polynomial in `m`, if it is `m`, a power of `m`, or `Poly(m, p)`.
fn as_power(f: &Expr, m: &Expr) -> Option<(PolySpec, bool)> {
    match f {
        Expr::Poly(b, p) if **b == *m => Some((p.clone(), true)),
        Expr::Prod(fs) if fs.len() >= 2 && fs.iter().all(|x| x == m) => {
            Some((PolySpec::monomial(fs.len()), false))
        }
        _ if f == m => Some((PolySpec::monomial(1), false)),
        _ => None,
    }
}

fn poly_base_candidates(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Poly(b, _) => Some((**b).clone()),
        Expr::Prod(fs) if fs.len() >= 2 && fs.iter().all(|x| *x == fs[0]) => Some(fs[0].clone()),
        _ => None,
    }
}

pub(crate) fn poly(e: &Expr, path: &[usize], j: &mut dyn Judge) -> Result<Cand, RewriteError> {
    Ok(match e {
        Expr::Poly(b, p) => {
            if let Expr::Poly(inner, f) = &**b {
                Some((RuleId::PolyCompose, Expr::Poly(inner.clone(), p.compose(f))))
            } else if p.coeffs().len() == 2 && p.coeffs()[0] == 0.0 {
                let c = p.coeffs()[1];
                let out = if c == 1.0 {
                    (**b).clone()
                } else {
                    Expr::Sum(vec![(c, (**b).clone())])
                };
                Some((RuleId::PolyFusion, out))
            } else {
                None
            }
        }
        Expr::Prod(fs) => {
            for i in 0..fs.len().saturating_sub(1) {
                let bases = [
                    poly_base_candidates(&fs[i]).unwrap_or_else(|| fs[i].clone()),
                    poly_base_candidates(&fs[i + 1]).unwrap_or_else(|| fs[i + 1].clone()),
                ];
                for m in bases {
                    let (Some((p, pa)), Some((q, qa))) = (as_power(&fs[i], &m), as_power(&fs[i + 1], &m))
                    else {
                        continue;
                    };
                    if !j.hermitian(&m) {
                        continue;
                    }
                    let rule = if pa && qa { RuleId::PolyMulMerge } else { RuleId::PolyFusion };
                    let fused = Expr::Poly(Box::new(m), p.mul(&q));
                    let mut out = fs[..i].to_vec();
                    out.push(fused);
                    out.extend_from_slice(&fs[i + 2..]);
                    return Ok(Some((rule, prod_of(out))));
                }
            }
            if fs.len() >= 2 && fs.iter().all(|x| *x == fs[0]) && j.hermitian(&fs[0]) {
                let fused = Expr::Poly(Box::new(fs[0].clone()), PolySpec::monomial(fs.len()));
                return Ok(Some((RuleId::PolyFusion, fused)));
            }
            None
        }
        Expr::Choice(bs) => {
            let mut bases = Vec::new();
            for b in bs {
                match b {
                    Expr::Poly(m, p) if p == bs_poly(&bs[0]) => bases.push((**m).clone()),
                    _ => return Ok(None),
                }
            }
            let a0 = j.alpha(&bases[0]);
            for m in &bases[1..] {
                let a = j.alpha(m);
                if (a - a0).abs() > CHOICE_RTOL * a.abs().max(a0.abs()) {
                    return Ok(None);
                }
            }
            Some((
                RuleId::PolyChoiceMerge,
                Expr::Poly(Box::new(Expr::Choice(bases)), bs_poly(&bs[0]).clone()),
            ))
        }
        Expr::Sum(ts) => return sum_poly(ts, path, j),
        _ => None,
    })
}

fn bs_poly(e: &Expr) -> &PolySpec {
    static EMPTY: std::sync::OnceLock<PolySpec> = std::sync::OnceLock::new();
    match e {
        Expr::Poly(_, p) => p,
        _ => EMPTY.get_or_init(PolySpec::zero),
    }
}

fn sum_poly(ts: &[(f64, Expr)], path: &[usize], j: &mut dyn Judge) -> Result<Cand, RewriteError> {
    let mut tried: Vec<Expr> = Vec::new();
    for (_, t) in ts {
        let Some(m) = poly_base_candidates(t) else { continue };
        if tried.contains(&m) {
            continue;
        }
        tried.push(m.clone());
        if !j.hermitian(&m) {
            continue;
        }
        let mut acc = PolySpec::zero();
        let mut used = vec![false; ts.len()];
        let mut count = 0;
        let mut nonlinear = false;
        let mut all_poly = true;
        for (n, (c, t)) in ts.iter().enumerate() {
            if let Some((p, is_poly)) = as_power(t, &m) {
                acc = acc.add(&p.scale(*c));
                nonlinear |= p.degree() >= 2 || is_poly;
                all_poly &= is_poly;
                used[n] = true;
                count += 1;
            } else if is_identity(t) && t.n_qubits() == m.n_qubits() {
                acc = acc.add(&PolySpec::new(vec![*c]));
                all_poly = false;
                used[n] = true;
                count += 1;
            }
        }
        // Summands of `m` that appear spread over this sum with a common
        // ratio contribute a linear term.
        if let Expr::Sum(parts) = &m {
            let mut mu = None;
            let mut hits = Vec::new();
            for (s, u) in parts {
                let found = ts
                    .iter()
                    .enumerate()
                    .find(|(n, (_, t))| !used[*n] && t == u);
                let Some((n, (c, _))) = found else {
                    hits.clear();
                    break;
                };
                let r = c / s;
                match mu {
                    None => mu = Some(r),
                    Some(m0) if (r - m0).abs() <= 1e-12 * r.abs().max(m0.abs()) => {}
                    Some(_) => {
                        hits.clear();
                        break;
                    }
                }
                hits.push(n);
            }
            if !hits.is_empty() && hits.len() == parts.len() {
                for n in hits {
                    used[n] = true;
                }
                acc = acc.add(&PolySpec::new(vec![0.0, mu.unwrap()]));
                all_poly = false;
                count += 1;
            }
        }
        if !nonlinear || (count < 2 && ts.len() > 1) {
            continue;
        }
        let rest: Vec<(f64, Expr)> = ts
            .iter()
            .zip(&used)
            .filter(|(_, u)| !**u)
            .map(|(t, _)| t.clone())
            .collect();
        let acc = PolySpec::new(
            acc.coeffs()
                .iter()
                .map(|&a| if a.abs() < CANCEL_EPS { 0.0 } else { a })
                .collect(),
        );
        let rule = if all_poly && count >= 2 {
            RuleId::PolyAddMerge
        } else {
            RuleId::PolyFusion
        };
        let out = match (acc.is_zero(), rest.is_empty()) {
            (true, true) => {
                return Err(RewriteError::AllTermsCancel {
                    path: path.to_vec(),
                    terms: Expr::Sum(ts.to_vec()).to_string(),
                })
            }
            (true, false) => Expr::Sum(rest),
            (false, true) => Expr::Poly(Box::new(m), acc),
            (false, false) => {
                let mut v = vec![(1.0, Expr::Poly(Box::new(m), acc))];
                v.extend(rest);
                Expr::Sum(v)
            }
        };
        return Ok(Some((rule, out)));
    }
    Ok(None)
}
