//! Bounded satisfiability checking for constraint LTL with past operators
//! and arithmetic constraints over integer, natural, rational and real domains.

pub mod driver;
pub mod encoder;
pub mod error;
pub mod existence;
pub mod formula;
pub mod parser;
pub mod rewrite;
pub mod smt;
pub mod witness;
