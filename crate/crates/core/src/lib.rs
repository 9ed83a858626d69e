pub mod channels;
pub mod cli;
pub mod compatibility;
pub mod effects;
pub mod error;
pub mod geometry;
pub mod models;
pub mod norms;
pub mod qubit;
pub mod state_space;
pub mod tensor;

pub use error::{Error, Result};
