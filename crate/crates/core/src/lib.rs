//! Circle-crossing crowd navigation: a holonomic multi-agent simulator, ORCA
//! reactive avoidance, a discrete 81-action velocity table, a small
//! actor-critic MLP, deep V-learning, and the imitation-bootstrapped advantage
//! actor-critic trainer with qualified experience replay.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `a2cmp` crate.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod a2cmp;
pub mod actions;
pub mod dvl;
mod error;
pub mod eval;
pub mod geometry;
pub mod math;
pub mod mlp;
pub mod orca;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::Vec2;
