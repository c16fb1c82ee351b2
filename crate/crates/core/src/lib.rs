#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod candidates;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod labelgen;
pub mod lines;
pub mod losses;
pub mod pipeline;
pub mod raster;
pub mod synth;
