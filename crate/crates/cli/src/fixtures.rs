//! Benchmark programs shipped with the driver.

use blenc::poly::chebyshev_t;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reproducibility {
    /// Published costs; asserted exactly.
    Published,
    /// Our own program; only internal consistency is asserted.
    SelfDefined,
}

/// `(queries, subnorm, total)` at printed precision.
pub type Expected = (f64, f64, f64);

#[derive(Clone, Debug)]
pub struct BenchFixture {
    pub name: &'static str,
    pub program: String,
    pub reproducibility: Reproducibility,
    pub expected_unopt: Option<Expected>,
    pub expected_opt: Option<Expected>,
}

macro_rules! fixture_src {
    ($name:literal) => {
        include_str!(concat!("../fixtures/", $name, ".cob"))
    };
}

fn fixture(name: &'static str, src: &str) -> BenchFixture {
    BenchFixture {
        name,
        program: src.to_string(),
        reproducibility: Reproducibility::SelfDefined,
        expected_unopt: None,
        expected_opt: None,
    }
}

/// Matrix-expression benchmarks.
pub fn matrix_suite() -> Vec<BenchFixture> {
    vec![
        BenchFixture {
            reproducibility: Reproducibility::Published,
            expected_unopt: Some((8.0, 2.6, 20.8)),
            expected_opt: Some((4.0, 2.0, 8.0)),
            ..fixture("simulation-example", fixture_src!("simulation-example"))
        },
        BenchFixture {
            reproducibility: Reproducibility::Published,
            expected_unopt: Some((12.0, 16.0, 192.0)),
            expected_opt: Some((8.0, 1.0, 8.0)),
            ..fixture("regression-example", fixture_src!("regression-example"))
        },
        fixture("penalized-coupler", fixture_src!("penalized-coupler")),
        fixture("laplacian-filter", fixture_src!("laplacian-filter")),
        fixture("ols-ridge", fixture_src!("ols-ridge")),
    ]
}

/// Polynomial algorithms written as monomial sums.
pub fn algorithm_suite() -> Vec<BenchFixture> {
    vec![
        fixture("matrix-inversion", fixture_src!("matrix-inversion")),
        fixture("hamiltonian-simulation", fixture_src!("hamiltonian-simulation")),
        fixture("sign-function", fixture_src!("sign-function")),
    ]
}

/// `Poly(X, T_n)`.
pub fn chebyshev(n: usize) -> BenchFixture {
    let name: &'static str = Box::leak(format!("chebyshev-{n}").into_boxed_str());
    BenchFixture {
        program: format!("Poly(X, {})\n", chebyshev_t(n)),
        ..fixture(name, "")
    }
}

pub fn chebyshev_suite() -> Vec<BenchFixture> {
    (2..=30).map(chebyshev).collect()
}

pub fn all() -> Vec<BenchFixture> {
    let mut v = matrix_suite();
    v.extend(algorithm_suite());
    v
}

pub fn by_name(name: &str) -> Option<BenchFixture> {
    all()
        .into_iter()
        .chain(chebyshev_suite())
        .find(|f| f.name == name)
}
