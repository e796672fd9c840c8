//! Command line and HTTP front end for the codemapper engine.

pub mod cli;
pub mod engine;
pub mod error;
pub mod server;

pub use error::{ApiError, ERROR_CODES};
