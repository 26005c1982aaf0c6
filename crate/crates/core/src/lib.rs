//! Realtime and one-way probabilistic machines driven by a set-encoded coin.
//!
//! The crate is split the same way the experiments are:
//!
//! * [`machine`] runs tape machines and counter automata step by step,
//! * [`coin`] turns a set `I` of positive integers into the bias `p_I`,
//! * [`languages`] holds the reference recurrences and the chain validator,
//! * [`constructions`] builds the concrete machines,
//! * [`analysis`] has the exact and statistical oracles.

pub mod analysis;
pub mod coin;
pub mod constructions;
pub mod languages;
pub mod machine;
