//! Splitting trees, Lévy trees with infinite spine, and their contours.

pub mod branching;
pub mod cli;
pub mod error;
pub mod genealogy;
pub mod levy;
pub mod path;
pub mod rng;
pub mod sim;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
