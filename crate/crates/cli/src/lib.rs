//! Command implementations behind the `blenc` binary.
//!
//! Every command takes program text and returns the text it would print,
//! so the binary is a thin argument parser and tests can call commands
//! directly.

pub mod commands;
pub mod fixtures;
pub mod report;

use std::fmt;

pub use commands::*;

/// Seed used when neither `--seed` nor the environment sets one.
pub const DEFAULT_SEED: u64 = 0;
/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "COBBLE_SEED";

pub mod exit {
    pub const OK: i32 = 0;
    pub const SEMANTIC: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const VERIFY: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<blenc::Error> for CliError {
    fn from(e: blenc::Error) -> Self {
        let code = match &e {
            blenc::Error::Parse(_) => exit::USAGE,
            blenc::Error::Sim(blenc::sim::SimError::VerificationFailed(_)) => exit::VERIFY,
            _ => exit::SEMANTIC,
        };
        let kind = match &e {
            blenc::Error::Parse(_) => "parse error",
            blenc::Error::Type(_) => "type error",
            blenc::Error::Denote(_) => "denotation error",
            blenc::Error::Cost(_) => "cost error",
            blenc::Error::Rewrite(_) => "rewrite error",
            blenc::Error::Qsp(_) => "phase solver error",
            blenc::Error::Circuit(_) => "compile error",
            blenc::Error::Sim(_) => "simulation error",
        };
        CliError::new(code, format!("{kind} ({}): {e}", variant_name(&e)))
    }
}

/// Name of the innermost error variant, e.g. `ChoiceSubnormMismatch`.
fn variant_name(e: &blenc::Error) -> String {
    let dbg = format!("{e:?}");
    // `Outer(Inner { .. })` or `Outer(Inner(..))`
    let inner = dbg.split_once('(').map_or(dbg.as_str(), |(_, r)| r);
    inner
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or("")
        .to_string()
}

macro_rules! impl_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                blenc::Error::from(e).into()
            }
        }
    )*};
}

impl_from!(
    blenc::frontend::ParseError,
    blenc::ir::TypeError,
    blenc::ir::DenoteError,
    blenc::cost::CostError,
    blenc::rewrite::RewriteError,
    blenc::circuit::CircuitError,
    blenc::sim::SimError
);

/// `--seed` if given, else `COBBLE_SEED`, else [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::new(exit::USAGE, format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
