#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod grid;
pub mod heston;
pub mod impact;
pub mod kernels;
pub mod hawkes;
pub mod mittag;
pub mod profile;
pub mod quad;
pub mod riccati;
pub mod rng;
pub mod soe;
pub mod stats;
pub mod volterra;

pub use error::{Error, Result};
