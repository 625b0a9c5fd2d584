use super::rules::{self, Judge};
use super::{RewriteError, RewriteTrace, RuleId, TraceStep};
use crate::cost::{node_cost, CostReport, MethodPolicy};
use crate::ir::{node_hermitian, Context, Expr};
use std::collections::HashMap;

/// Number of rule identifiers, used in the step limit.
const RULES: usize = 22;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum RuleSet {
    All,
    SumOnly,
    Fusion,
}

type PolyKey = (Vec<u64>, u64, u64, usize, bool);

pub(crate) struct Engine<'a> {
    ctx: &'a Context,
    rules: RuleSet,
    steps: usize,
    limit: usize,
    trace: RewriteTrace,
    poly_cache: HashMap<PolyKey, CostReport>,
}

impl Judge for Engine<'_> {
    fn hermitian(&mut self, e: &Expr) -> bool {
        self.info(e).1
    }

    fn alpha(&mut self, e: &Expr) -> f64 {
        self.info(e).0.subnorm
    }
}

impl<'a> Engine<'a> {
    pub(crate) fn new(ctx: &'a Context, e: &Expr, rules: RuleSet) -> Self {
        Engine {
            ctx,
            rules,
            steps: 0,
            limit: 10 * e.node_count() * RULES,
            trace: RewriteTrace::default(),
            poly_cache: HashMap::new(),
        }
    }

    pub(crate) fn run(mut self, e: Expr) -> Result<(Expr, RewriteTrace), RewriteError> {
        let out = self.normalize(e, &mut Vec::new(), false)?;
        Ok((out, self.trace))
    }

    /// Cost and hermiticity, with polynomial costs memoized.
    fn info(&mut self, e: &Expr) -> (CostReport, bool) {
        let mut costs = Vec::new();
        let mut herms = Vec::new();
        for c in e.children() {
            let (k, h) = self.info(c);
            costs.push(k);
            herms.push(h);
        }
        let h = node_hermitian(e, &herms, self.ctx);
        let cost = match e {
            Expr::Poly(_, p) => {
                let b = costs[0];
                let key = (
                    p.coeffs().iter().map(|c| c.to_bits()).collect(),
                    b.queries.to_bits(),
                    b.subnorm.to_bits(),
                    b.ancillas,
                    herms[0],
                );
                if let Some(c) = self.poly_cache.get(&key) {
                    *c
                } else {
                    let c = node_cost(e, &costs, herms[0], MethodPolicy::Auto)
                        .expect("automatic selection is total");
                    self.poly_cache.insert(key, c);
                    c
                }
            }
            _ => node_cost(e, &costs, herms.first().copied().unwrap_or(false), MethodPolicy::Auto)
                .expect("automatic selection is total"),
        };
        (cost, h)
    }

    fn normalize(
        &mut self,
        e: Expr,
        path: &mut Vec<usize>,
        under_choice: bool,
    ) -> Result<Expr, RewriteError> {
        let mut e = self.normalize_children(e, path, under_choice)?;
        while let Some(next) = self.step(&e, path, under_choice)? {
            e = self.normalize_children(next, path, under_choice)?;
        }
        Ok(e)
    }

    fn normalize_children(
        &mut self,
        e: Expr,
        path: &mut Vec<usize>,
        under_choice: bool,
    ) -> Result<Expr, RewriteError> {
        let inner = under_choice || matches!(e, Expr::Choice(_));
        let mut go = |i: usize, c: Expr, s: &mut Self| -> Result<Expr, RewriteError> {
            path.push(i);
            let r = s.normalize(c, path, inner);
            path.pop();
            r
        };
        Ok(match e {
            Expr::Base(_) => e,
            Expr::Adj(a) => Expr::Adj(Box::new(go(0, *a, self)?)),
            Expr::Poly(b, p) => Expr::Poly(Box::new(go(0, *b, self)?), p),
            Expr::Sum(ts) => Expr::Sum(
                ts.into_iter()
                    .enumerate()
                    .map(|(i, (c, t))| Ok((c, go(i, t, self)?)))
                    .collect::<Result<_, RewriteError>>()?,
            ),
            Expr::Prod(fs) => Expr::Prod(
                fs.into_iter()
                    .enumerate()
                    .map(|(i, f)| go(i, f, self))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Choice(fs) => Expr::Choice(
                fs.into_iter()
                    .enumerate()
                    .map(|(i, f)| go(i, f, self))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Tensor(fs) => Expr::Tensor(
                fs.into_iter()
                    .enumerate()
                    .map(|(i, f)| go(i, f, self))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    fn candidates(&mut self, e: &Expr, path: &[usize]) -> Result<Vec<(RuleId, Expr)>, RewriteError> {
        let mut out = Vec::new();
        if self.rules == RuleSet::All {
            out.extend(rules::adjoint(e, self));
            out.extend(rules::simplify(e));
            out.extend(rules::factor(e, self));
        }
        out.extend(rules::sum_fusion(e, path)?);
        if self.rules != RuleSet::SumOnly {
            out.extend(rules::poly(e, path, self)?);
        }
        Ok(out)
    }

    /// Applies the first candidate rewrite that passes the cost guard.
    fn step(
        &mut self,
        e: &Expr,
        path: &[usize],
        under_choice: bool,
    ) -> Result<Option<Expr>, RewriteError> {
        let cands = self.candidates(e, path)?;
        if cands.is_empty() {
            return Ok(None);
        }
        let before = self.info(e).0;
        for (rule, next) in cands {
            let after = self.info(&next).0;
            let alpha_ok = if under_choice {
                (after.subnorm - before.subnorm).abs() <= 1e-12 * before.subnorm.abs()
            } else {
                after.subnorm <= before.subnorm * (1.0 + 1e-12)
            };
            if after.queries > before.queries || !alpha_ok {
                continue;
            }
            self.steps += 1;
            if self.steps > self.limit {
                return Err(RewriteError::StepLimitExceeded(self.limit));
            }
            self.trace.steps.push(TraceStep {
                rule,
                path: path.to_vec(),
                before,
                after,
            });
            return Ok(Some(next));
        }
        Ok(None)
    }
}
