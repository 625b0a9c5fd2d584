//! Optimizer: sum fusion, polynomial fusion and the algebraic rewrites,
//! applied innermost-first in a fixed priority order until nothing fires.
//!
//! Priority at each node: adjoint rules, identity eliminations, factoring,
//! sum fusion, then polynomial fusion and merges. A rewrite is kept only if
//! it does not increase the queries or the subnormalization of the node it
//! replaces; below a direct sum the subnormalization must stay unchanged so
//! that branch subnormalizations keep matching.

mod engine;
mod rules;
#[cfg(test)]
mod tests;

use crate::cost::CostReport;
use crate::ir::{typecheck_expr, Context, Expr, TypeError, TypedExpr};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub use crate::cost::select_poly_method;
use engine::{Engine, RuleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    SumFusion,
    PolyFusion,
    PolyMulMerge,
    PolyAddMerge,
    PolyChoiceMerge,
    PolyCompose,
    FactorProdSumL,
    FactorProdSumR,
    FactorChoiceProdL,
    FactorChoiceProdR,
    FactorTensorSumL,
    FactorTensorSumR,
    FactorTensorChoiceL,
    FactorTensorChoiceR,
    ChoiceIdem,
    ProdIdentity,
    AdjHermitian,
    AdjInvolution,
    AdjProd,
    AdjSum,
    AdjTensor,
    AdjChoice,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One applied rewrite. Costs are those of the rewritten subexpression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: RuleId,
    pub path: Vec<usize>,
    pub before: CostReport,
    pub after: CostReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RewriteError {
    #[error("all terms of the sum at {path:?} cancel: {terms}")]
    AllTermsCancel { path: Vec<usize>, terms: String },
    #[error("rewriting exceeded {0} steps")]
    StepLimitExceeded(usize),
    #[error("rewritten expression does not typecheck: {0}")]
    Type(#[from] TypeError),
}

/// Rewrites to the normal form. The result is re-typechecked.
pub fn apply_rules(e: &TypedExpr) -> Result<(TypedExpr, RewriteTrace), RewriteError> {
    let (out, trace) = apply_rules_expr(&e.expr, &e.ctx)?;
    Ok((typecheck_expr(&out, e.ctx.clone())?, trace))
}

pub fn apply_rules_expr(e: &Expr, ctx: &Arc<Context>) -> Result<(Expr, RewriteTrace), RewriteError> {
    Engine::new(ctx, e, RuleSet::All).run(e.clone())
}

/// Flattens nested sums and merges identical summands, everywhere.
pub fn sum_fuse(e: &Expr) -> Result<Expr, RewriteError> {
    let ctx = Arc::new(Context::default());
    Ok(Engine::new(&ctx, e, RuleSet::SumOnly).run(e.clone())?.0)
}

/// Sum fusion followed by polynomial fusion and the polynomial merges.
pub fn poly_fuse(e: &Expr, ctx: &Arc<Context>) -> Result<Expr, RewriteError> {
    Ok(Engine::new(ctx, e, RuleSet::Fusion).run(e.clone())?.0)
}
