//! Encode constrained component-selection problems as QUBO/Ising models,
//! solve them exactly by enumeration and approximately with a simulated
//! QAOA, and tune penalty weights with a small linear program.

pub mod bits;
pub mod boost;
pub mod circuit;
pub mod error;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod pbool;
pub mod merit;
pub mod qaoa;
pub mod simplex;
pub mod statevec;
pub mod tuner;

pub use error::{Error, Result};
