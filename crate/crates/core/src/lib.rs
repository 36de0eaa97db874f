//! Synthesis for the obligation fragment of finite-trace temporal logic with
//! prefix quantifiers, through deterministic weak automata and symbolic games.

pub mod arena;
pub mod automata;
pub mod bench;
pub mod bdd;
pub mod config;
pub mod error;
pub mod logic;
pub mod oracle;
pub mod par;
pub mod solve;
pub mod strategy;
pub mod synth;

#[cfg(test)]
mod testutil;

pub use error::Error;
