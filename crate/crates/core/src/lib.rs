#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod band;
pub mod curve;
pub mod experiment;
pub mod schwarz;
pub mod sparsela;
pub mod theory;
