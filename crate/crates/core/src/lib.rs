#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod gamma;
pub mod geometry;
pub mod numeric;
pub mod orlicz;
pub mod solver;
pub mod sparse;
pub mod young;
