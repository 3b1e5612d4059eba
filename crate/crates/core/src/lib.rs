//! Deterministic simulator for two- and multi-airplane encounters under a
//! closed-form CBF safety filter, covering the blocking (parallel flight),
//! deadlock and livelock phenomena and a communication-free resolution
//! strategy.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alt_controllers;
pub mod cli;
pub mod duration;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod modes;
pub mod resolution;
pub mod safety_filter;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{Angle, Vec2};
