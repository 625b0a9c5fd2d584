//! JSON report records. Field names are part of the CLI contract.

use blenc::cost::CostReport;
use serde::{Deserialize, Serialize};

/// One benchmark row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub name: String,
    pub queries_unopt: f64,
    pub subnorm_unopt: f64,
    pub queries_opt: f64,
    pub subnorm_opt: f64,
    pub total_unopt: f64,
    pub total_opt: f64,
    pub speedup: f64,
}

impl BenchRecord {
    pub fn new(name: &str, unopt: &CostReport, opt: &CostReport) -> Self {
        BenchRecord {
            name: name.to_string(),
            queries_unopt: unopt.queries,
            subnorm_unopt: unopt.subnorm,
            queries_opt: opt.queries,
            subnorm_opt: opt.subnorm,
            total_unopt: unopt.total,
            total_opt: opt.total,
            speedup: unopt.total / opt.total,
        }
    }
}

/// One compile-time measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub name: String,
    pub degree: usize,
    pub nonsolver_seconds: f64,
    pub solver_seconds: f64,
    pub solves: usize,
}

/// Output of `cost --json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub queries: f64,
    pub subnorm: f64,
    pub ancillas: usize,
    pub total: f64,
}

impl From<CostReport> for CostRecord {
    fn from(c: CostReport) -> Self {
        CostRecord {
            queries: c.queries,
            subnorm: c.subnorm,
            ancillas: c.ancillas,
            total: c.total,
        }
    }
}

/// Summary of one verification run in `verify --json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub stage: String,
    pub alpha_pred: f64,
    pub max_dev: f64,
    pub tolerance: f64,
    pub queries_measured: f64,
    pub success_prob: f64,
    pub success_prob_bound: f64,
    pub qubits: usize,
    pub passed: bool,
}
