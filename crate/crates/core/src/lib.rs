#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod model;
pub mod plan;
pub mod sim;
