//! Static checker for a subset of the MISRA C:2012 guidelines.

pub mod cli;
pub mod compliance;
pub mod flow;
pub mod frontend;
pub mod parser;
pub mod rules;
pub mod sema;
pub mod source;
