pub mod diophantine;
pub mod error;
pub mod evolve;
pub mod fock;
pub mod hamiltonian;

pub use error::{Error, Result};
