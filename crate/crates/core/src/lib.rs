#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ac;
pub mod error;
pub mod harness;
pub mod homfac;
pub mod irl;
pub mod plant;
pub mod traj;

pub use error::{Error, Result};
