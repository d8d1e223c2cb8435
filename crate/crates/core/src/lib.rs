// `!(x > 0.0)` checks are deliberate: they reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod cli;
pub mod eigensolve;
pub mod elements;
pub mod mesh;
pub mod verify;
