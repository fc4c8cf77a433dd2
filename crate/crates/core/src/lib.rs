//! Exact summatory functions of arithmetic functions, the asymptotic
//! estimators for them, and empirical checks that confront the two.
//!
//! The pipeline is: [`sieve`] produces per-integer factorization data in
//! blocks; [`arith`] describes functions by their values on prime powers;
//! [`Summator`] streams blocks (in parallel with the `parallel` feature) and
//! accumulates checkpointed series; [`models`] evaluates main terms and
//! error envelopes; [`validation`] compares series against models.

pub mod arith;
pub mod compensated;
pub mod engine;
pub mod error;
pub mod grid;
pub mod io;
pub mod models;
pub mod quadrature;
pub mod sieve;
pub mod special;
pub mod summatory;
pub mod validation;

pub use arith::{builtins, FunctionSpec, Kind, Registry};
pub use engine::Summator;
pub use error::{Error, Result};
pub use summatory::{MeanVariance, SeriesValues, Summand, SummatorySeries};
