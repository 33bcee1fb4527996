#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod femtocell;
pub mod geometry;
pub mod macrocell;
pub mod numerics;
pub mod propagation;
pub mod scheduler;

pub use error::{Error, Result};
