pub mod cli;
pub mod connection;
pub mod error;
pub mod fixtures;
pub mod hodge;
pub mod jet;
pub mod linalg;
pub mod model;
pub mod spectrum;
pub mod sylvester;

pub use error::{Error, Result};
