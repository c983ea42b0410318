//! Generation in the limit, simulated at desk scale: hypothesis classes over
//! countable example spaces, closure-based dimensions, generators,
//! adversaries, and the generation game that pits them against each other.

pub mod adversaries;
pub mod classes;
pub mod cli;
pub mod closure;
pub mod dimensions;
pub mod error;
pub mod game;
pub mod generators;
pub mod identification;
pub mod periodic;
pub mod prompted;
pub mod space;

pub use error::{Error, Result};
