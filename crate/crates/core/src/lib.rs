//! Synthesis of control-flow compositions from libraries of probabilistic
//! components.
//!
//! A library is a set of probabilistic transducers with ordered exits. A
//! composer routes control between instances of library components. The
//! crate decides whether some composer makes the resulting composition
//! satisfy a parity objective with probability 1 against every
//! environment, and builds one when it exists. The objective is either an
//! index function over component states or a deterministic parity monitor
//! over outputs.

pub mod automata;
pub mod composition;
pub mod dot;
pub mod emptiness;
pub mod error;
pub mod format;
pub mod games;
pub mod graph;
pub mod mdp;
pub mod model;
pub mod oracle;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::*;
