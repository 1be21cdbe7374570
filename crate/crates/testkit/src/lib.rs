//! Test support: the worked-example fixture, random instance generators and
//! brute-force reference implementations that the engine is checked against.
//!
//! The oracles here deliberately avoid the engine's own matching code.

pub mod fixture;
pub mod gen;
pub mod oracle;
