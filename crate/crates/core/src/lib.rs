//! Verification of parametric reactive and hybrid systems by hierarchical
//! reasoning in local theory extensions and property-directed symbol
//! elimination.

pub mod error;
pub mod frontend;
pub mod hier;
pub mod lha;
pub mod linarith;
pub mod logic;
pub mod par;
pub mod runner;
pub mod smtlib;
pub mod symelim;
pub mod systems;

pub use error::{Error, Result};
