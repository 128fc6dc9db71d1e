//! Bi-invariant norms on finite groups, conjugacy-class graphs,
//! almost-homomorphisms and separation experiments over finite quotients of
//! free groups.

pub mod almosthom;
pub mod catalog;
pub mod cli;
pub mod conjgraph;
pub mod error;
pub mod groups;
pub mod metrics;
pub mod separability;
pub mod words;

pub use error::{Error, Result};
