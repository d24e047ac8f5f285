#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod blended;
pub mod cli;
pub mod construction;
mod json;
pub mod linalg;
pub mod problems;
pub mod solver;
