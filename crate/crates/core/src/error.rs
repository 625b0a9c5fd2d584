use thiserror::Error;

/// Any failure along the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] crate::frontend::ParseError),
    #[error(transparent)]
    Type(#[from] crate::ir::TypeError),
    #[error(transparent)]
    Denote(#[from] crate::ir::DenoteError),
    #[error(transparent)]
    Cost(#[from] crate::cost::CostError),
    #[error(transparent)]
    Rewrite(#[from] crate::rewrite::RewriteError),
    #[error(transparent)]
    Qsp(#[from] crate::qsp::QspError),
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}
