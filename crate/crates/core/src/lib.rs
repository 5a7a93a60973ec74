pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod expr;
pub mod fields;
pub mod gauge_engine;
pub mod hamiltonian;
pub mod lattice;
pub mod model;
pub mod numfmt;
mod quad;

pub use error::{Error, Result};
