//! Analytic cost model: queries, subnormalization and ancillas for every
//! operator, and the polynomial implementations.

mod norms;

use crate::ir::{ceil_log2, Context, Expr, TypedExpr};
use crate::poly::PolySpec;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use norms::{gqet_norm, l1_norm, linf_norm};

/// Queries `k`, subnormalization `alpha`, ancillas `m` and `total = k * alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub queries: f64,
    pub subnorm: f64,
    pub ancillas: usize,
    pub total: f64,
}

impl CostReport {
    pub fn new(queries: f64, subnorm: f64, ancillas: usize) -> Self {
        CostReport {
            queries,
            subnorm,
            ancillas,
            total: queries * subnorm,
        }
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:?}, {:?}, {:?})  ancillas={}",
            self.queries, self.subnorm, self.total, self.ancillas
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyMethod {
    Lcu,
    Horner,
    Qsvt,
    Gqet,
}

impl PolyMethod {
    pub const ALL: [PolyMethod; 4] = [
        PolyMethod::Lcu,
        PolyMethod::Horner,
        PolyMethod::Qsvt,
        PolyMethod::Gqet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolyMethod::Lcu => "lcu",
            PolyMethod::Horner => "horner",
            PolyMethod::Qsvt => "qsvt",
            PolyMethod::Gqet => "gqet",
        }
    }
}

impl fmt::Display for PolyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolyMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PolyMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}` (expected lcu, horner, qsvt or gqet)"))
    }
}

/// How `Poly` nodes pick their implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MethodPolicy {
    /// Cheapest of LCU, Horner and QSVT.
    #[default]
    Auto,
    Force(PolyMethod),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CostError {
    #[error("QSVT is not admissible: parity part sup-norm {sup} is not a finite positive value")]
    QsvtInadmissible { sup: f64 },
    #[error("QSVT needs a Hermitian base")]
    NonHermitianBase,
}

/// Cost of a typed expression with automatic method selection.
pub fn cost(e: &TypedExpr) -> CostReport {
    cost_with(e, MethodPolicy::Auto).expect("automatic selection never fails")
}

pub fn cost_with(e: &TypedExpr, policy: MethodPolicy) -> Result<CostReport, CostError> {
    cost_expr(&e.expr, &e.ctx, policy)
}

/// Cost of an expression that is assumed well typed.
pub fn cost_expr(e: &Expr, ctx: &Context, policy: MethodPolicy) -> Result<CostReport, CostError> {
    Ok(go(e, ctx, policy)?.0)
}

fn go(e: &Expr, ctx: &Context, policy: MethodPolicy) -> Result<(CostReport, bool), CostError> {
    let mut costs = Vec::new();
    let mut herms = Vec::new();
    for c in e.children() {
        let (k, h) = go(c, ctx, policy)?;
        costs.push(k);
        herms.push(h);
    }
    let base_herm = herms.first().copied().unwrap_or(false);
    let cost = node_cost(e, &costs, base_herm, policy)?;
    Ok((cost, crate::ir::node_hermitian(e, &herms, ctx)))
}

/// Cost at one node from the children's costs.
pub(crate) fn node_cost(
    e: &Expr,
    ch: &[CostReport],
    base_hermitian: bool,
    policy: MethodPolicy,
) -> Result<CostReport, CostError> {
    let k: f64 = ch.iter().map(|c| c.queries).sum();
    let max_m = ch.iter().map(|c| c.ancillas).max().unwrap_or(0);
    Ok(match e {
        Expr::Base(o) => CostReport::new(1.0, o.subnorm, o.ancillas),
        Expr::Adj(_) => ch[0],
        Expr::Sum(ts) => {
            let a = ts.iter().zip(ch).map(|((l, _), c)| l.abs() * c.subnorm).sum();
            CostReport::new(k, a, ceil_log2(ts.len()) + max_m)
        }
        Expr::Prod(fs) => {
            let a = ch.iter().map(|c| c.subnorm).product();
            CostReport::new(k, a, ceil_log2(fs.len()) + max_m)
        }
        Expr::Choice(_) => CostReport::new(k, ch[0].subnorm, max_m),
        Expr::Tensor(_) => {
            let a = ch.iter().map(|c| c.subnorm).product();
            CostReport::new(k, a, ch.iter().map(|c| c.ancillas).sum())
        }
        Expr::Poly(_, p) => {
            let method = match policy {
                MethodPolicy::Auto => select_poly_method(p, &ch[0], base_hermitian),
                MethodPolicy::Force(PolyMethod::Qsvt) if !base_hermitian => {
                    return Err(CostError::NonHermitianBase)
                }
                MethodPolicy::Force(m) => m,
            };
            poly_cost(p, &ch[0], method)?
        }
    })
}

/// Cost of `Poly(M, p)` implemented by `method`, given the cost of `M`.
pub fn poly_cost(p: &PolySpec, base: &CostReport, method: PolyMethod) -> Result<CostReport, CostError> {
    let d = p.degree();
    let (km, am, mm) = (base.queries, base.subnorm, base.ancillas);
    Ok(match method {
        PolyMethod::Lcu => {
            let deg_sum: usize = p
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, _)| j)
                .sum();
            CostReport::new(km * deg_sum as f64, l1_norm(p, am), ceil_log2(d) + d + mm)
        }
        PolyMethod::Horner => CostReport::new(km * d as f64, l1_norm(p, am), 2 * d + mm),
        PolyMethod::Qsvt => {
            let (ev, od) = p.split_parity();
            let mut k = 0.0;
            let mut a = 0.0;
            let mut parts = 0;
            for part in [ev, od] {
                if part.is_zero() {
                    continue;
                }
                let s = linf_norm(&part, am);
                if !(s.is_finite() && s > 0.0) {
                    return Err(CostError::QsvtInadmissible { sup: s });
                }
                k += km * part.degree() as f64;
                a += s;
                parts += 1;
            }
            CostReport::new(k, a, parts.max(1) + mm)
        }
        PolyMethod::Gqet => CostReport::new(km * d as f64, gqet_norm(p, am), 1 + mm),
    })
}

/// Cheapest admissible method among LCU, Horner and QSVT by total cost.
/// Ties prefer QSVT, then Horner, then LCU.
pub fn select_poly_method(p: &PolySpec, base: &CostReport, hermitian: bool) -> PolyMethod {
    let mut best: Option<(f64, PolyMethod)> = None;
    let order: &[PolyMethod] = if hermitian {
        &[PolyMethod::Qsvt, PolyMethod::Horner, PolyMethod::Lcu]
    } else {
        &[PolyMethod::Horner, PolyMethod::Lcu]
    };
    for &m in order {
        let Ok(c) = poly_cost(p, base, m) else { continue };
        if best.is_none_or(|(t, _)| c.total < t) {
            best = Some((c.total, m));
        }
    }
    best.map_or(PolyMethod::Lcu, |(_, m)| m)
}
