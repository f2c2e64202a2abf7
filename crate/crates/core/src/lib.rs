//! Subgame-perfect equilibria of sequential machine-scheduling games on
//! unrelated machines, with exact rational arithmetic throughout.
//!
//! Jobs are players that pick machines one after another; every player pays
//! the final load of its machine. The crate computes equilibria for fixed and
//! adaptive move orders, the inefficiency measures built on them, the known
//! lower-bound families, and an LP-driven search for bad two-machine
//! instances.

pub mod constructions;
pub mod equilibria;
pub mod error;
pub mod instance;
pub mod lpsearch;
pub mod measures;
pub mod optimum;
pub mod rational;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Instance, PartialSchedule, Schedule};
pub use rational::{Ratio, Rational};
