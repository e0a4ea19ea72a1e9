pub mod error;
pub mod fock;
pub mod conditional;
pub mod gaussian;
pub mod metrics;
pub mod setups;
pub mod experiment;

pub use error::{Error, Result};
